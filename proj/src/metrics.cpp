#include "tedfam/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace tedfam {

namespace {

Eigen::MatrixXd column_space_projector(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd gram = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("projector eigendecomposition failed");
  }
  const double max_eig = solver.eigenvalues().maxCoeff();
  if (solver.eigenvalues().minCoeff() <= 1e-12 * std::max(max_eig, 1e-300)) {
    throw NumericalError("matrix is rank deficient; column-space projector undefined");
  }
  return m * gram.ldlt().solve(m.transpose());
}

}  // namespace

double space_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("space distance requires matrices with equal row counts");
  }
  const Eigen::MatrixXd diff = column_space_projector(a) - column_space_projector(b);
  // The projector difference is symmetric, so the spectral norm is the
  // largest absolute eigenvalue.
  const Eigen::MatrixXd sym = (diff + diff.transpose()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("spectral norm eigendecomposition failed");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double rmse(const MatrixSeries& estimated, const MatrixSeries& reference) {
  if (estimated.num_obs() != reference.num_obs() || estimated.rows() != reference.rows() ||
      estimated.cols() != reference.cols()) {
    throw ValidationError("RMSE requires series of identical shape");
  }
  double sum = 0.0;
  for (Index t = 0; t < estimated.num_obs(); ++t) {
    sum += (estimated.block(t) - reference.block(t)).squaredNorm();
  }
  const double denom =
      static_cast<double>(estimated.num_obs()) * estimated.rows() * estimated.cols();
  return std::sqrt(sum / denom);
}

double psnr(const Eigen::Ref<const Eigen::MatrixXd>& x,
            const Eigen::Ref<const Eigen::MatrixXd>& x_hat) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
    throw ValidationError("PSNR requires matrices of identical shape");
  }
  const double peak = x.cwiseAbs().maxCoeff();
  if (peak == 0.0) {
    throw DegenerateInputError("PSNR is undefined for an all-zero reference (zero peak)");
  }
  const double mse = (x - x_hat).squaredNorm() / static_cast<double>(x.rows() * x.cols());
  if (mse == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(peak * peak / mse);
}

std::vector<double> per_observation_psnr(const MatrixSeries& x, const MatrixSeries& x_hat) {
  if (x.num_obs() != x_hat.num_obs() || x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
    throw ValidationError("PSNR requires series of identical shape");
  }
  std::vector<double> out(static_cast<std::size_t>(x.num_obs()));
  for (Index t = 0; t < x.num_obs(); ++t) {
    out[static_cast<std::size_t>(t)] = psnr(x.block(t), x_hat.block(t));
  }
  return out;
}

double mean_psnr(const MatrixSeries& x, const MatrixSeries& x_hat) {
  const std::vector<double> values = per_observation_psnr(x, x_hat);
  double sum = 0.0;
  for (double v : values) {
    if (std::isinf(v)) {
      return std::numeric_limits<double>::infinity();
    }
    sum += v;
  }
  return sum / static_cast<double>(values.size());
}

Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw DimensionError("Procrustes alignment requires matrices of identical shape");
  }
  const Eigen::MatrixXd cross = truth.transpose() * estimate;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double max_sv = svd.singularValues().maxCoeff();
  if (svd.singularValues().minCoeff() <= 1e-12 * std::max(max_sv, 1e-300)) {
    throw NumericalError("Procrustes cross product is rank deficient");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

// ---------------------------------------------------------------------------
// Normality diagnostics
// ---------------------------------------------------------------------------

namespace {

// Survival function of chi-squared with 2 degrees of freedom.
double chi2_2_sf(double x) { return std::exp(-0.5 * x); }

}  // namespace

std::pair<double, double> dagostino_k2(const Eigen::VectorXd& sample) {
  const Index size = sample.size();
  if (size < 20) {
    throw ValidationError("D'Agostino K^2 requires at least 20 samples");
  }
  const double n = static_cast<double>(size);
  const double mean = sample.mean();
  const Eigen::ArrayXd centered = sample.array() - mean;
  const double m2 = centered.square().mean();
  if (m2 <= 0.0) {
    throw DegenerateInputError("normality statistic undefined for a constant sample");
  }
  const double m3 = centered.cube().mean();
  const double m4 = centered.square().square().mean();
  const double g1 = m3 / std::pow(m2, 1.5);
  const double b2 = m4 / (m2 * m2);

  // Skewness transform (D'Agostino 1970).
  const double y = g1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
  const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                       ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1.0));
  const double y_scaled = y / alpha;
  const double z1 = delta * std::log(y_scaled + std::sqrt(y_scaled * y_scaled + 1.0));

  // Kurtosis transform (Anscombe & Glynn 1983).
  const double mean_b2 = 3.0 * (n - 1.0) / (n + 1.0);
  const double var_b2 =
      24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
  const double x = (b2 - mean_b2) / std::sqrt(var_b2);
  const double sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                            std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
  const double a =
      6.0 + 8.0 / sqrt_beta1 *
                (2.0 / sqrt_beta1 + std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
  const double term = (1.0 - 2.0 / a) / (1.0 + x * std::sqrt(2.0 / (a - 4.0)));
  const double z2 =
      ((1.0 - 2.0 / (9.0 * a)) - std::cbrt(term)) / std::sqrt(2.0 / (9.0 * a));

  const double k2 = z1 * z1 + z2 * z2;
  return {k2, chi2_2_sf(k2)};
}

NormalityReport normality_diagnostic(const Eigen::MatrixXd& samples,
                                     const Eigen::MatrixXd& expected_cov) {
  const Index n = samples.rows();
  const Index k = samples.cols();
  if (n < 50) {
    throw ValidationError("normality diagnostic requires at least 50 samples, got " +
                          std::to_string(n));
  }
  if (expected_cov.rows() != k || expected_cov.cols() != k) {
    throw DimensionError("expected covariance must be k x k");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      (expected_cov + expected_cov.transpose()) * 0.5);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("expected covariance eigendecomposition failed");
  }
  if (solver.eigenvalues().minCoeff() <= 0.0) {
    throw ValidationError("expected covariance must be positive definite");
  }
  const Eigen::MatrixXd inv_sqrt = solver.operatorInverseSqrt();

  NormalityReport report;
  report.standardized = samples * inv_sqrt;  // rows are samples; inv_sqrt is symmetric

  const Eigen::RowVectorXd mean = report.standardized.colwise().mean();
  const Eigen::MatrixXd centered = report.standardized.rowwise() - mean;
  report.sample_cov = centered.transpose() * centered / static_cast<double>(n - 1);
  report.cov_rel_error =
      (report.sample_cov - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();

  report.statistic = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
  report.p_value = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
  for (Index j = 0; j < k; ++j) {
    const Eigen::VectorXd coordinate = report.standardized.col(j);
    const double variance =
        (coordinate.array() - coordinate.mean()).square().mean();
    if (variance <= 0.0) {
      report.degenerate = true;
      continue;
    }
    const auto [stat, p] = dagostino_k2(coordinate);
    report.statistic(j) = stat;
    report.p_value(j) = p;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Correlation distance
// ---------------------------------------------------------------------------

namespace {

/// Rearranges the series into one column per correlated slice:
/// rows -> p1 columns of length T*p2, columns -> p2 columns of length T*p1,
/// vectorized -> p1*p2 columns of length T.
Eigen::MatrixXd slice_samples(const MatrixSeries& series, CorrelationMode mode) {
  const Index T = series.num_obs();
  const Index p1 = series.rows();
  const Index p2 = series.cols();
  switch (mode) {
    case CorrelationMode::Row: {
      Eigen::MatrixXd out(T * p2, p1);
      for (Index t = 0; t < T; ++t) {
        out.middleRows(t * p2, p2) = series.block(t).transpose();
      }
      return out;
    }
    case CorrelationMode::Column: {
      Eigen::MatrixXd out(T * p1, p2);
      for (Index t = 0; t < T; ++t) {
        out.middleRows(t * p1, p1) = series.block(t);
      }
      return out;
    }
    case CorrelationMode::Vectorized: {
      Eigen::MatrixXd out(T, p1 * p2);
      for (Index t = 0; t < T; ++t) {
        const auto x = series.block(t);
        // Column-major vec, consistent with the rest of the artifact.
        for (Index j = 0; j < p2; ++j) {
          for (Index i = 0; i < p1; ++i) {
            out(t, j * p1 + i) = x(i, j);
          }
        }
      }
      return out;
    }
  }
  throw ValidationError("invalid correlation mode");
}

std::string slice_name(CorrelationMode mode, Index index, Index p1) {
  switch (mode) {
    case CorrelationMode::Row:
      return "row " + std::to_string(index);
    case CorrelationMode::Column:
      return "column " + std::to_string(index);
    case CorrelationMode::Vectorized:
      return "entry (" + std::to_string(index % p1) + ", " + std::to_string(index / p1) + ")";
  }
  return "slice " + std::to_string(index);
}

}  // namespace

Eigen::MatrixXd correlation_matrix(const MatrixSeries& series, CorrelationMode mode) {
  if (series.num_obs() < 2) {
    throw ValidationError("correlation requires at least two observations");
  }
  const Eigen::MatrixXd samples = slice_samples(series, mode);
  const Index m = samples.cols();

  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::MatrixXd centered = samples.rowwise() - mean;
  Eigen::VectorXd scale(m);
  for (Index j = 0; j < m; ++j) {
    const double ss = centered.col(j).squaredNorm();
    if (ss <= 0.0) {
      throw DegenerateInputError("zero variance in " + slice_name(mode, j, series.rows()) +
                                 "; correlation undefined");
    }
    scale(j) = 1.0 / std::sqrt(ss);
  }
  Eigen::MatrixXd corr = centered.transpose() * centered;
  corr = scale.asDiagonal() * corr * scale.asDiagonal();
  return corr;
}

double correlation_distance(const MatrixSeries& a, const MatrixSeries& b, CorrelationMode mode) {
  if (a.num_obs() != b.num_obs() || a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("correlation distance requires series of identical shape");
  }
  return (correlation_matrix(a, mode) - correlation_matrix(b, mode)).norm();
}

// ---------------------------------------------------------------------------
// Varimax rotation
// ---------------------------------------------------------------------------

double varimax_criterion(const Eigen::MatrixXd& loading) {
  double criterion = 0.0;
  for (Index j = 0; j < loading.cols(); ++j) {
    const Eigen::ArrayXd sq = loading.col(j).array().square();
    const double mean_sq = sq.mean();
    criterion += sq.square().mean() - mean_sq * mean_sq;
  }
  return criterion;
}

VarimaxResult varimax(const Eigen::MatrixXd& loading, bool kaiser_normalize) {
  const Index p = loading.rows();
  const Index k = loading.cols();
  if (p < 1 || k < 1) {
    throw DimensionError("varimax requires a nonempty loading matrix");
  }

  Eigen::MatrixXd work = loading;
  Eigen::VectorXd row_norms;
  if (kaiser_normalize) {
    row_norms = work.rowwise().norm();
    for (Index i = 0; i < p; ++i) {
      if (row_norms(i) > 0.0) {
        work.row(i) /= row_norms(i);
      }
    }
  }

  Eigen::MatrixXd rotation = Eigen::MatrixXd::Identity(k, k);
  double criterion = varimax_criterion(work);
  Index sweeps = 0;

  constexpr double kTol = 1e-8;
  constexpr Index kMaxSweeps = 1000;
  const double np = static_cast<double>(p);

  for (; sweeps < kMaxSweeps && k > 1; ++sweeps) {
    for (Index a = 0; a + 1 < k; ++a) {
      for (Index b = a + 1; b < k; ++b) {
        const Eigen::ArrayXd x = work.col(a).array();
        const Eigen::ArrayXd y = work.col(b).array();
        const Eigen::ArrayXd u = x.square() - y.square();
        const Eigen::ArrayXd v = 2.0 * x * y;
        const double su = u.sum();
        const double sv = v.sum();
        const double numer = 2.0 * (np * (u * v).sum() - su * sv);
        const double denom = np * (u.square() - v.square()).sum() - (su * su - sv * sv);
        if (numer == 0.0 && denom == 0.0) {
          continue;
        }
        const double angle = 0.25 * std::atan2(numer, denom);
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const Eigen::VectorXd col_a = work.col(a);
        work.col(a) = c * col_a + s * work.col(b);
        work.col(b) = -s * col_a + c * work.col(b);
        const Eigen::VectorXd rot_a = rotation.col(a);
        rotation.col(a) = c * rot_a + s * rotation.col(b);
        rotation.col(b) = -s * rot_a + c * rotation.col(b);
      }
    }
    const double updated = varimax_criterion(work);
    if (updated - criterion < kTol) {
      criterion = std::max(criterion, updated);
      ++sweeps;
      break;
    }
    criterion = updated;
  }

  if (kaiser_normalize) {
    // Undo the row scaling; the rotation itself is what was optimized.
    work = loading * rotation;
  }
  const double final_criterion = varimax_criterion(work);
  return VarimaxResult{std::move(work), std::move(rotation), final_criterion, sweeps};
}

// ---------------------------------------------------------------------------
// EvalReport serialization
// ---------------------------------------------------------------------------

namespace {

std::string format_value(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

}  // namespace

std::string to_csv(const EvalReport& report, bool include_per_observation) {
  std::ostringstream out;
  out << "method,metric,value\n";
  if (report.k1 > 0) {
    out << report.method << ",k1," << report.k1 << "\n";
  }
  if (report.k2 > 0) {
    out << report.method << ",k2," << report.k2 << "\n";
  }
  for (const auto& [name, value] : report.values) {
    out << report.method << "," << name << "," << format_value(value) << "\n";
  }
  if (include_per_observation) {
    for (std::size_t t = 0; t < report.per_observation_psnr.size(); ++t) {
      out << report.method << ",psnr_obs_" << t << ","
          << format_value(report.per_observation_psnr[t]) << "\n";
    }
  }
  return out.str();
}

}  // namespace tedfam
