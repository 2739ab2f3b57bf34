#include "tedfam/baseline.hpp"

#include "tedfam/estimator.hpp"

namespace tedfam {

BlockArray bilinear_scores(const MatrixSeries& series, const LoadingPair& loadings) {
  return detail::cross_scores(series, loadings);
}

MatrixSeries bilinear_signal(const MatrixSeries& series, const LoadingPair& loadings) {
  detail::check_loading_shapes(series, loadings);
  const Eigen::MatrixXd proj_row =
      loadings.R * loadings.R.transpose() / static_cast<double>(series.rows());
  const Eigen::MatrixXd proj_col =
      loadings.C * loadings.C.transpose() / static_cast<double>(series.cols());

  MatrixSeries signal(series.num_obs(), series.rows(), series.cols());
  for (Index t = 0; t < series.num_obs(); ++t) {
    signal.block(t) = proj_row * series.block(t) * proj_col;
  }
  return signal;
}

BilinearFit bilinear_fit(const MatrixSeries& series, const LoadingPair& loadings) {
  return BilinearFit{loadings, bilinear_scores(series, loadings),
                     bilinear_signal(series, loadings)};
}

}  // namespace tedfam
