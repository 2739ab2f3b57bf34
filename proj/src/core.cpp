#include "tedfam/core.hpp"

#include <cmath>
#include <numbers>

namespace tedfam {

// ---------------------------------------------------------------------------
// BlockArray
// ---------------------------------------------------------------------------

BlockArray::BlockArray(Index count, Index rows, Index cols)
    : count_(count), rows_(rows), cols_(cols) {
  if (count < 0 || rows < 1 || cols < 1) {
    throw ValidationError("block array requires count >= 0 and positive block shape");
  }
  values_.assign(static_cast<std::size_t>(count) * rows * cols, 0.0);
}

ConstBlockView BlockArray::block(Index t) const {
  if (t < 0 || t >= count_) {
    throw DimensionError("block index " + std::to_string(t) + " out of range [0, " +
                         std::to_string(count_) + ")");
  }
  return ConstBlockView(values_.data() + static_cast<std::size_t>(t) * rows_ * cols_, rows_,
                        cols_);
}

BlockView BlockArray::block(Index t) {
  if (t < 0 || t >= count_) {
    throw DimensionError("block index " + std::to_string(t) + " out of range [0, " +
                         std::to_string(count_) + ")");
  }
  return BlockView(values_.data() + static_cast<std::size_t>(t) * rows_ * cols_, rows_, cols_);
}

void BlockArray::require_finite(const char* what) const {
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw ValidationError(std::string(what) + " contains a non-finite value");
    }
  }
}

// ---------------------------------------------------------------------------
// MatrixSeries
// ---------------------------------------------------------------------------

namespace {

void check_series_shape(Index num_obs, Index rows, Index cols) {
  if (num_obs < 1) {
    throw ValidationError("matrix series requires at least one observation");
  }
  if (rows < 2 || cols < 2) {
    throw ValidationError("matrix series requires p1 >= 2 and p2 >= 2, got " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

MatrixSeries::MatrixSeries(Index num_obs, Index rows, Index cols) : blocks_() {
  check_series_shape(num_obs, rows, cols);
  blocks_ = BlockArray(num_obs, rows, cols);
}

MatrixSeries MatrixSeries::from_values(Index num_obs, Index rows, Index cols,
                                       std::vector<double> values) {
  check_series_shape(num_obs, rows, cols);
  const std::size_t expected = static_cast<std::size_t>(num_obs) * rows * cols;
  if (values.size() != expected) {
    throw ValidationError("matrix series expects " + std::to_string(expected) +
                          " values, got " + std::to_string(values.size()));
  }
  MatrixSeries series(num_obs, rows, cols);
  std::copy(values.begin(), values.end(),
            series.blocks_.block(0).data());
  series.require_finite();
  return series;
}

// ---------------------------------------------------------------------------
// MomentPair
// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(name) + " must be square");
  }
  // (a_ij + a_ji)/2 evaluates identically for both triangles, so the result
  // is exactly symmetric.
  return ((m + m.transpose()) * 0.5).eval();
}

}  // namespace

MomentPair::MomentPair(const Eigen::MatrixXd& m1, const Eigen::MatrixXd& m2)
    : m1_(symmetrize(m1, "M1")), m2_(symmetrize(m2, "M2")) {}

// ---------------------------------------------------------------------------
// RngStream
// ---------------------------------------------------------------------------

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller on two fresh uniforms; u1 is shifted into (0, 1] so the log
  // is finite.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition
// ---------------------------------------------------------------------------

void apply_sign_convention(Eigen::Ref<Eigen::MatrixXd> m) {
  for (Index j = 0; j < m.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < m.rows(); ++i) {
      const double a = std::abs(m(i, j));
      if (a > best) {  // strict: lowest index wins ties
        best = a;
        arg = i;
      }
    }
    if (m(arg, j) < 0.0) {
      m.col(j) = -m.col(j);
    }
  }
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> symmetric_eig_descending(const Eigen::MatrixXd& m,
                                                                     Index k) {
  if (m.rows() != m.cols()) {
    throw DimensionError("eigendecomposition requires a square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const Index p = m.rows();
  if (k < 1 || k > p) {
    throw DimensionError("requested " + std::to_string(k) + " eigenpairs of a " +
                         std::to_string(p) + "x" + std::to_string(p) + " matrix");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asymmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-12 * scale) {
    throw ValidationError("matrix is not symmetric (max asymmetry " +
                          std::to_string(asymmetry) + ")");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalError(
        "symmetric eigensolver failed to converge within its iteration cap "
        "(30 implicit QR sweeps per eigenvalue)");
  }

  // Eigen returns ascending order; reverse and truncate.
  Eigen::VectorXd values(k);
  Eigen::MatrixXd vectors(p, k);
  for (Index j = 0; j < k; ++j) {
    values(j) = solver.eigenvalues()(p - 1 - j);
    vectors.col(j) = solver.eigenvectors().col(p - 1 - j);
  }
  apply_sign_convention(vectors);
  return {std::move(values), std::move(vectors)};
}

}  // namespace tedfam
