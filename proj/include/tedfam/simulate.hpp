#pragma once

#include "tedfam/core.hpp"

namespace tedfam {

enum class Scenario : int {
  I = 1,    // uncorrelated factors, three-term signal
  II = 2,   // uncorrelated factors, bilinear signal only
  III = 3,  // AR(1) factors, three-term signal
  IV = 4,   // AR(1) factors, bilinear signal only
};

/// Parses "I".."IV" (or "1".."4").
Scenario scenario_from_string(const std::string& name);
std::string to_string(Scenario scenario);

struct ScenarioConfig {
  Scenario scenario = Scenario::I;
  Index T = 0;
  Index p1 = 0;
  Index p2 = 0;
  Index k1 = 3;
  Index k2 = 3;
  double phi = 0.0;    // AR coefficient for vec(Z_t)
  double psi = 0.0;    // AR coefficient for vec(F_t)
  double gamma = 0.0;  // AR coefficient for vec(E_t)
  std::uint64_t seed = 0;
  /// Test hook: when false, noise draws are skipped and e_t = 0.
  bool with_noise = true;

  /// Fills in the scenario's default AR coefficients: (0,0,0) for I/II,
  /// (0.6,0.8,0.8) for III/IV. Callers may override afterwards.
  static ScenarioConfig make(Scenario scenario, Index T, Index p1, Index p2, Index k1 = 3,
                             Index k2 = 3, std::uint64_t seed = 0);

  void validate() const;
};

/// Generated dataset with full ground truth. observations = truth_signal +
/// noise holds exactly as stored. For bilinear scenarios (II/IV) the E and F
/// factor blocks are zero.
struct SimulatedDataset {
  MatrixSeries observations;
  MatrixSeries truth_signal;
  MatrixSeries noise;
  Eigen::MatrixXd truth_R;  // p1 x k1, sqrt(p1)-scaled orthonormal columns
  Eigen::MatrixXd truth_C;  // p2 x k2
  FactorScores truth_factors;
};

/// sqrt(p) times the top-k left singular vectors of a p x k standard-normal
/// matrix; satisfies (1/p) L^T L = I exactly up to rounding. Requires k < p.
Eigen::MatrixXd generate_loadings(Index p, Index k, RngStream& rng);

/// Stationary VAR(1) draws u_t = rho u_{t-1} + sqrt(1-rho^2) eps_t with
/// standard-normal initialization; returned as a dim x T matrix, one column
/// per observation. Requires |rho| < 1.
Eigen::MatrixXd generate_factor_series(Index dim, Index T, double rho, RngStream& rng);

/// Matrix-normal noise e_t = U^{1/2} G_t V^{1/2} with unit diagonals and
/// off-diagonal 1/p1 (rows) and 1/p2 (columns); square roots are symmetric
/// (eigendecomposition-based).
MatrixSeries generate_noise(Index p1, Index p2, Index T, RngStream& rng);

/// Runs the full data-generating process for the configured scenario.
/// Draw order is fixed: loadings R then C, then the Z, F, E factor series,
/// then noise. VAR vectors map back to factor matrices by column-major
/// reshape (the convention under which vec(A X B) = (B^T (x) A) vec(X)).
SimulatedDataset generate_scenario(const ScenarioConfig& config);

}  // namespace tedfam
