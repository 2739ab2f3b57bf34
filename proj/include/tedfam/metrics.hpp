#pragma once

#include <map>
#include <string>
#include <vector>

#include "tedfam/core.hpp"

namespace tedfam {

/// Column-space distance ||P_A - P_B||_2 with P_M = M (M^T M)^{-1} M^T.
/// Rotation-invariant; in [0, 1] for equal column counts. Throws
/// NumericalError on rank-deficient input.
double space_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// sqrt( (1/(T p1 p2)) sum_t ||A_t - B_t||_F^2 ). With the truth signal as
/// reference this is RMSE_S; with the observations it is RMSE_X.
double rmse(const MatrixSeries& estimated, const MatrixSeries& reference);

/// Peak signal-to-noise ratio 10 log10( max|x|^2 / (||x - x_hat||_F^2 / (p1 p2)) ).
/// Returns +infinity for an exact reconstruction; throws DegenerateInputError
/// when x is all zero (peak undefined).
double psnr(const Eigen::Ref<const Eigen::MatrixXd>& x,
            const Eigen::Ref<const Eigen::MatrixXd>& x_hat);

/// Per-observation PSNR of a series pair; entries may be +infinity.
std::vector<double> per_observation_psnr(const MatrixSeries& x, const MatrixSeries& x_hat);

/// Mean of per-observation PSNR values (+infinity if any entry is infinite).
double mean_psnr(const MatrixSeries& x, const MatrixSeries& x_hat);

/// Orthogonal k x k matrix H minimizing ||estimate - truth * H||_F, via the
/// polar factor of truth^T * estimate. Throws NumericalError when the cross
/// product is rank deficient.
Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth);

/// Output of normality_diagnostic.
struct NormalityReport {
  Eigen::MatrixXd standardized;  // n x k, samples mapped through expected_cov^{-1/2}
  Eigen::MatrixXd sample_cov;    // k x k sample covariance of the standardized samples
  double cov_rel_error = 0.0;    // max entrywise |sample_cov - I|
  Eigen::VectorXd statistic;     // per-coordinate omnibus normality statistic
  Eigen::VectorXd p_value;       // per-coordinate p-value
  bool degenerate = false;       // some coordinate had zero variance
};

/// Standardizes the samples by the expected covariance, compares the sample
/// covariance against the identity, and runs the D'Agostino-Pearson K^2
/// omnibus normality test per coordinate. Requires n >= 50 rows and a
/// positive-definite expected covariance.
NormalityReport normality_diagnostic(const Eigen::MatrixXd& samples,
                                     const Eigen::MatrixXd& expected_cov);

/// D'Agostino-Pearson K^2 statistic and p-value for one sample (n >= 20).
std::pair<double, double> dagostino_k2(const Eigen::VectorXd& sample);

enum class CorrelationMode { Row, Column, Vectorized };

/// Frobenius distance between the sample correlation matrices of two series.
/// Row mode correlates rows across (t, column) pairs, column mode correlates
/// columns across (t, row) pairs, vectorized mode correlates all entries
/// across t. Throws DegenerateInputError (naming the slice) when a slice has
/// zero variance.
double correlation_distance(const MatrixSeries& a, const MatrixSeries& b, CorrelationMode mode);

/// Sample correlation matrix of one series under the given mode.
Eigen::MatrixXd correlation_matrix(const MatrixSeries& series, CorrelationMode mode);

struct VarimaxResult {
  Eigen::MatrixXd rotated;   // p x k
  Eigen::MatrixXd rotation;  // k x k orthogonal
  double criterion = 0.0;    // varimax criterion of the rotated loadings
  Index sweeps = 0;
};

/// Orthogonal rotation maximizing the varimax criterion via pairwise plane
/// rotations; stops when a full sweep improves the criterion by less than
/// 1e-8 or after 1000 sweeps. Kaiser row normalization is off by default.
VarimaxResult varimax(const Eigen::MatrixXd& loading, bool kaiser_normalize = false);

double varimax_criterion(const Eigen::MatrixXd& loading);

/// Named metric values for one method, plus the per-observation PSNR trace.
struct EvalReport {
  std::string method;
  Index k1 = 0;
  Index k2 = 0;
  std::map<std::string, double> values;
  std::vector<double> per_observation_psnr;
};

/// CSV rows "method,metric,value"; infinities serialize as the literal
/// token `inf`. k1/k2 rows are included when set.
std::string to_csv(const EvalReport& report, bool include_per_observation = false);

}  // namespace tedfam
