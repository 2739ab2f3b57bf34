#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tedfam {

using Index = Eigen::Index;

/// Row-major dense matrix; matrix blocks inside a series are stored this way.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstBlockView = Eigen::Map<const RowMatrix>;
using BlockView = Eigen::Map<RowMatrix>;

// ---------------------------------------------------------------------------
// Error taxonomy. Mirrors the exit-code classes of the CLI: I/O and parse
// problems, invalid or degenerate inputs, and numerical failures.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments, shape mismatches, or inputs outside the contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Structurally valid input on which the requested quantity is undefined
/// (all-zero spectrum, zero-variance slice, zero peak).
class DegenerateInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Convergence failures and rank-deficient linear algebra.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Parse failure; carries the 1-based line number of the offending line.
/// The message is expected to already name that line.
class ParseError : public IoError {
 public:
  ParseError(const std::string& message, Index line) : IoError(message), line_(line) {}
  Index line() const { return line_; }

 private:
  Index line_;
};

// ---------------------------------------------------------------------------
// Containers
// ---------------------------------------------------------------------------

/// A fixed-shape stack of matrices stored as contiguous row-major blocks.
/// Used for factor-score series, where blocks may have a single row or column.
class BlockArray {
 public:
  BlockArray() = default;
  BlockArray(Index count, Index rows, Index cols);

  Index count() const { return count_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  ConstBlockView block(Index t) const;
  BlockView block(Index t);

  const std::vector<double>& values() const { return values_; }
  const double* data() const { return values_.data(); }

  /// Throws ValidationError if any stored value is NaN or infinite.
  void require_finite(const char* what) const;

 private:
  Index count_ = 0;
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> values_;
};

/// T observations of p1 x p2 real matrices, the universal input.
/// Blocks are contiguous and row-major; every value is finite.
class MatrixSeries {
 public:
  /// Zero-filled series. Requires T >= 1, p1 >= 2, p2 >= 2.
  MatrixSeries(Index num_obs, Index rows, Index cols);

  /// Takes ownership of `values` (num_obs * rows * cols doubles, row-major
  /// blocks) and validates shape and finiteness.
  static MatrixSeries from_values(Index num_obs, Index rows, Index cols,
                                  std::vector<double> values);

  Index num_obs() const { return blocks_.count(); }
  Index rows() const { return blocks_.rows(); }
  Index cols() const { return blocks_.cols(); }

  ConstBlockView block(Index t) const { return blocks_.block(t); }
  BlockView block(Index t) { return blocks_.block(t); }

  const std::vector<double>& values() const { return blocks_.values(); }
  const double* data() const { return blocks_.data(); }

  /// Re-checks the finiteness invariant after in-place mutation.
  void require_finite() const { blocks_.require_finite("matrix series"); }

 private:
  explicit MatrixSeries(BlockArray blocks) : blocks_(std::move(blocks)) {}
  BlockArray blocks_;
};

/// Estimated loading matrices and the retained moment eigenvalues.
/// Columns satisfy (1/p) * L^T L = I and the max-abs-entry-positive sign
/// convention.
struct LoadingPair {
  Eigen::MatrixXd R;             // p1 x k1
  Eigen::MatrixXd C;             // p2 x k2
  Eigen::VectorXd eigvals_row;   // k1, descending, nonnegative
  Eigen::VectorXd eigvals_col;   // k2, descending, nonnegative

  Index p1() const { return R.rows(); }
  Index p2() const { return C.rows(); }
  Index k1() const { return R.cols(); }
  Index k2() const { return C.cols(); }
};

/// Per-observation factor scores: global Z_t (k1 x k2), column-wise E_t
/// (p2 x k1), row-wise F_t (p1 x k2).
struct FactorScores {
  BlockArray Z;
  BlockArray E;
  BlockArray F;

  Index num_obs() const { return Z.count(); }
};

/// Second-order sample moment matrices; symmetrized exactly on construction.
class MomentPair {
 public:
  MomentPair(const Eigen::MatrixXd& m1, const Eigen::MatrixXd& m2);

  const Eigen::MatrixXd& m1() const { return m1_; }
  const Eigen::MatrixXd& m2() const { return m2_; }

  Index p1() const { return m1_.rows(); }
  Index p2() const { return m2_.rows(); }

 private:
  Eigen::MatrixXd m1_;  // p1 x p1
  Eigen::MatrixXd m2_;  // p2 x p2
};

// ---------------------------------------------------------------------------
// Deterministic pseudo-random source
// ---------------------------------------------------------------------------

/// Seeded stream with a platform-independent draw sequence: the engine is
/// mt19937_64 (exactly specified by the standard) and the normal sampler is
/// a fixed Box-Muller transform rather than std::normal_distribution, whose
/// draw sequence is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double next_uniform();
  /// Standard normal draw.
  double next_gaussian();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition
// ---------------------------------------------------------------------------

/// Top-k eigenpairs of a symmetric matrix, eigenvalues descending,
/// eigenvectors unit-norm and sign-fixed (largest-magnitude entry positive,
/// lowest index wins ties).
///
/// Throws ValidationError for asymmetric input (beyond 1e-12 relative
/// asymmetry), DimensionError for k outside [1, p], NumericalError when the
/// solver fails to converge.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> symmetric_eig_descending(
    const Eigen::MatrixXd& m, Index k);

/// In each column, flips the sign so the entry of largest absolute value is
/// positive; the lowest index wins ties. Idempotent.
void apply_sign_convention(Eigen::Ref<Eigen::MatrixXd> m);

}  // namespace tedfam
