#include "tedfam/simulate.hpp"

#include <cmath>

namespace tedfam {

Scenario scenario_from_string(const std::string& name) {
  if (name == "I" || name == "1") return Scenario::I;
  if (name == "II" || name == "2") return Scenario::II;
  if (name == "III" || name == "3") return Scenario::III;
  if (name == "IV" || name == "4") return Scenario::IV;
  throw ValidationError("unknown scenario '" + name + "' (expected I, II, III, or IV)");
}

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::I: return "I";
    case Scenario::II: return "II";
    case Scenario::III: return "III";
    case Scenario::IV: return "IV";
  }
  throw ValidationError("invalid scenario value");
}

ScenarioConfig ScenarioConfig::make(Scenario scenario, Index T, Index p1, Index p2, Index k1,
                                    Index k2, std::uint64_t seed) {
  ScenarioConfig config;
  config.scenario = scenario;
  config.T = T;
  config.p1 = p1;
  config.p2 = p2;
  config.k1 = k1;
  config.k2 = k2;
  config.seed = seed;
  if (scenario == Scenario::III || scenario == Scenario::IV) {
    config.phi = 0.6;
    config.psi = 0.8;
    config.gamma = 0.8;
  }
  return config;
}

void ScenarioConfig::validate() const {
  if (T < 1) throw ValidationError("scenario requires T >= 1");
  if (p1 < 2 || p2 < 2) throw ValidationError("scenario requires p1 >= 2 and p2 >= 2");
  if (k1 < 1 || k1 >= p1) {
    throw DimensionError("scenario requires 1 <= k1 < p1");
  }
  if (k2 < 1 || k2 >= p2) {
    throw DimensionError("scenario requires 1 <= k2 < p2");
  }
  for (double rho : {phi, psi, gamma}) {
    if (!(std::abs(rho) < 1.0)) {
      throw ValidationError("AR coefficients must lie in (-1, 1)");
    }
  }
}

Eigen::MatrixXd generate_loadings(Index p, Index k, RngStream& rng) {
  if (k < 1 || k >= p) {
    throw DimensionError("loading generation requires 1 <= k < p, got k=" + std::to_string(k) +
                         ", p=" + std::to_string(p));
  }
  Eigen::MatrixXd gaussian(p, k);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < k; ++j) {
      gaussian(i, j) = rng.next_gaussian();
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gaussian, Eigen::ComputeThinU);
  Eigen::MatrixXd loading = svd.matrixU().leftCols(k);
  apply_sign_convention(loading);
  return std::sqrt(static_cast<double>(p)) * loading;
}

Eigen::MatrixXd generate_factor_series(Index dim, Index T, double rho, RngStream& rng) {
  if (dim < 1 || T < 1) {
    throw ValidationError("factor series requires dim >= 1 and T >= 1");
  }
  if (!(std::abs(rho) < 1.0)) {
    throw ValidationError("AR coefficient must lie in (-1, 1), got " + std::to_string(rho));
  }
  Eigen::MatrixXd series(dim, T);
  for (Index i = 0; i < dim; ++i) {
    series(i, 0) = rng.next_gaussian();
  }
  const double innovation_scale = std::sqrt(1.0 - rho * rho);
  for (Index t = 1; t < T; ++t) {
    for (Index i = 0; i < dim; ++i) {
      series(i, t) = rho * series(i, t - 1) + innovation_scale * rng.next_gaussian();
    }
  }
  return series;
}

namespace {

/// Symmetric square root of the equicorrelation matrix with unit diagonal
/// and off-diagonal 1/p.
Eigen::MatrixXd equicorrelation_sqrt(Index p) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(p, p, 1.0 / static_cast<double>(p));
  cov.diagonal().setOnes();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the noise covariance failed");
  }
  if (solver.eigenvalues().minCoeff() <= 0.0) {
    throw NumericalError("noise covariance is not positive definite");
  }
  return solver.operatorSqrt();
}

}  // namespace

MatrixSeries generate_noise(Index p1, Index p2, Index T, RngStream& rng) {
  if (p1 < 2 || p2 < 2 || T < 1) {
    throw ValidationError("noise generation requires p1, p2 >= 2 and T >= 1");
  }
  const Eigen::MatrixXd row_sqrt = equicorrelation_sqrt(p1);
  const Eigen::MatrixXd col_sqrt = equicorrelation_sqrt(p2);

  MatrixSeries noise(T, p1, p2);
  Eigen::MatrixXd gaussian(p1, p2);
  for (Index t = 0; t < T; ++t) {
    // Entries drawn row by row within each observation (frozen order).
    for (Index i = 0; i < p1; ++i) {
      for (Index j = 0; j < p2; ++j) {
        gaussian(i, j) = rng.next_gaussian();
      }
    }
    noise.block(t) = row_sqrt * gaussian * col_sqrt;
  }
  return noise;
}

SimulatedDataset generate_scenario(const ScenarioConfig& config) {
  config.validate();
  const bool bilinear = config.scenario == Scenario::II || config.scenario == Scenario::IV;
  RngStream rng(config.seed);

  const Eigen::MatrixXd R = generate_loadings(config.p1, config.k1, rng);
  const Eigen::MatrixXd C = generate_loadings(config.p2, config.k2, rng);

  // F and E are drawn even for bilinear scenarios to keep the documented
  // draw order; there they do not enter the signal and the stored factor
  // blocks stay zero, so the same seed yields the same noise stream across
  // scenarios.
  const Eigen::MatrixXd z_series =
      generate_factor_series(config.k1 * config.k2, config.T, config.phi, rng);
  const Eigen::MatrixXd f_series =
      generate_factor_series(config.p1 * config.k2, config.T, config.psi, rng);
  const Eigen::MatrixXd e_series =
      generate_factor_series(config.p2 * config.k1, config.T, config.gamma, rng);

  MatrixSeries noise = config.with_noise
                           ? generate_noise(config.p1, config.p2, config.T, rng)
                           : MatrixSeries(config.T, config.p1, config.p2);

  FactorScores factors;
  factors.Z = BlockArray(config.T, config.k1, config.k2);
  factors.E = BlockArray(config.T, config.p2, config.k1);
  factors.F = BlockArray(config.T, config.p1, config.k2);

  MatrixSeries signal(config.T, config.p1, config.p2);
  MatrixSeries observations(config.T, config.p1, config.p2);

  for (Index t = 0; t < config.T; ++t) {
    // Column-major reshape of the VAR vectors back to matrices, matching
    // the Kronecker identity vec(AXB) = (B^T (x) A) vec(X).
    const Eigen::Map<const Eigen::MatrixXd> z_t(z_series.col(t).data(), config.k1, config.k2);
    const Eigen::Map<const Eigen::MatrixXd> f_t(f_series.col(t).data(), config.p1, config.k2);
    const Eigen::Map<const Eigen::MatrixXd> e_t(e_series.col(t).data(), config.p2, config.k1);

    factors.Z.block(t) = z_t;
    Eigen::MatrixXd s_t = R * z_t * C.transpose();
    if (!bilinear) {
      factors.E.block(t) = e_t;
      factors.F.block(t) = f_t;
      s_t += R * e_t.transpose() + f_t * C.transpose();
    }
    signal.block(t) = s_t;
    observations.block(t) = s_t + noise.block(t);
    // Store the noise as the realized difference so that
    // observations - truth_signal equals the stored noise bit-exactly.
    noise.block(t) = observations.block(t) - signal.block(t);
  }

  for (Index t = 0; t < config.T; ++t) {
    const double residual =
        (observations.block(t) - signal.block(t) - noise.block(t)).cwiseAbs().maxCoeff();
    if (residual > 1e-12) {
      throw NumericalError("simulated decomposition identity violated");
    }
  }

  return SimulatedDataset{std::move(observations), std::move(signal), std::move(noise), R, C,
                          std::move(factors)};
}

}  // namespace tedfam
