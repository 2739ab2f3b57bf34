#pragma once

#include "tedfam/core.hpp"

namespace tedfam {

/// Bilinear-model reconstruction computed from shared sPCA loadings.
struct BilinearFit {
  LoadingPair loadings;
  BlockArray Z_tilde;   // T blocks of k1 x k2
  MatrixSeries signal;  // T blocks of p1 x p2
};

/// Z~_t = R^T X_t C / (p1 p2). Equal to -Z_t of the sPCA scores, exactly.
BlockArray bilinear_scores(const MatrixSeries& series, const LoadingPair& loadings);

/// S~_t = R R^T X_t C C^T / (p1 p2), i.e. P_R X_t P_C.
MatrixSeries bilinear_signal(const MatrixSeries& series, const LoadingPair& loadings);

BilinearFit bilinear_fit(const MatrixSeries& series, const LoadingPair& loadings);

}  // namespace tedfam
