#pragma once

#include <optional>

#include "tedfam/core.hpp"

namespace tedfam {

/// Full output bundle of one sPCA fit: loadings, scores, optional signal,
/// and the complete moment spectra (used for rank selection and diagnostics).
struct FitResult {
  LoadingPair loadings;
  FactorScores scores;
  std::optional<MatrixSeries> signal;
  Index k1 = 0;
  Index k2 = 0;
  Eigen::VectorXd all_eigvals_row;  // p1, descending
  Eigen::VectorXd all_eigvals_col;  // p2, descending
};

struct FitOptions {
  /// Subtract the per-entry temporal mean before fitting.
  bool center = false;
  /// Materialize the reconstructed signal series.
  bool with_signal = true;
  /// Worker threads for moment accumulation. The result is bit-identical
  /// for any value; see compute_moments.
  int threads = 1;
};

/// Second-order sample moments M1 = sum_t X_t X_t^T / (T p1 p2) and
/// M2 = sum_t X_t^T X_t / (T p1 p2), symmetrized after accumulation.
///
/// Accumulation runs over fixed 32-observation chunks whose partial sums are
/// folded in ascending chunk order, so the result does not depend on the
/// thread count.
MomentPair compute_moments(const MatrixSeries& series, int threads = 1);

/// sPCA loadings: R = sqrt(p1) * eig(M1, k1), C = sqrt(p2) * eig(M2, k2),
/// sign-fixed, with the retained eigenvalues. Requires k1 < p1 and k2 < p2.
LoadingPair estimate_loadings(const MomentPair& moments, Index k1, Index k2);

/// Least-squares factor scores:
///   F_t = X_t C / p2,  E_t = X_t^T R / p1,  Z_t = -R^T X_t C / (p1 p2).
FactorScores estimate_scores(const MatrixSeries& series, const LoadingPair& loadings);

/// Reconstructed signal, computed in projector form
///   S_t = P_R X_t + X_t P_C - P_R X_t P_C,  P_R = R R^T / p1,  P_C = C C^T / p2.
MatrixSeries reconstruct_signal(const MatrixSeries& series, const LoadingPair& loadings);

/// Moments, loadings, scores, and (optionally) signal in one pass.
FitResult fit(const MatrixSeries& series, Index k1, Index k2, const FitOptions& options = {});

/// Like fit, but selects k1 and k2 with the eigenvalue-ratio rule on the
/// moment spectra. k_max <= 0 uses default_k_max per dimension.
FitResult fit_auto(const MatrixSeries& series, const FitOptions& options = {}, Index k_max = 0);

/// Ratio rule: argmax_{1<=j<=k_max} spectrum[j-1] / spectrum[j], smallest
/// maximizing index on ties; denominators floored at spectrum[0] * 1e-12.
/// Requires spectrum length >= k_max + 1 and a nonzero spectrum.
Index estimate_rank(const Eigen::VectorXd& spectrum, Index k_max);

/// min(20, p/2, p-1), the upper bound used when none is given.
Index default_k_max(Index p);

/// Subtracts the per-entry mean over t.
MatrixSeries center_series(const MatrixSeries& series);

namespace detail {

/// Cross scores R^T X_t C / (p1 p2), shared between the sPCA global score
/// (which negates it) and the bilinear baseline, so the two agree exactly
/// up to sign.
BlockArray cross_scores(const MatrixSeries& series, const LoadingPair& loadings);

void check_loading_shapes(const MatrixSeries& series, const LoadingPair& loadings);

}  // namespace detail

}  // namespace tedfam
