#pragma once

// Shared test utilities. The routines here are deliberately independent of
// the production code paths they are used to check: the literal three-term
// signal formula, brute-force correlation matrices, and the rearrangement
// construction for nearest-Kronecker-product approximation are all written
// from scratch.

#include <algorithm>
#include <cmath>
#include <vector>

#include "tedfam/core.hpp"

namespace tedfam::testing {

/// Signal via the literal three-term formula
///   S_t = -(R R^T X_t C C^T)/(p1 p2) + (R R^T X_t)/p1 + (X_t C C^T)/p2,
/// used to cross-validate the production projector form.
inline MatrixSeries literal_signal(const MatrixSeries& series, const LoadingPair& loadings) {
  const double p1 = static_cast<double>(series.rows());
  const double p2 = static_cast<double>(series.cols());
  const Eigen::MatrixXd rrt = loadings.R * loadings.R.transpose();
  const Eigen::MatrixXd cct = loadings.C * loadings.C.transpose();
  MatrixSeries signal(series.num_obs(), series.rows(), series.cols());
  for (Index t = 0; t < series.num_obs(); ++t) {
    const Eigen::MatrixXd x = series.block(t);
    signal.block(t) =
        -(rrt * x * cct) / (p1 * p2) + (rrt * x) / p1 + (x * cct) / p2;
  }
  return signal;
}

/// 2x2xT series from explicit block values.
inline MatrixSeries series_from_blocks(const std::vector<std::vector<double>>& blocks, Index rows,
                                       Index cols) {
  std::vector<double> values;
  for (const auto& block : blocks) {
    values.insert(values.end(), block.begin(), block.end());
  }
  return MatrixSeries::from_values(static_cast<Index>(blocks.size()), rows, cols,
                                   std::move(values));
}

/// Random series with i.i.d. standard-normal entries.
inline MatrixSeries random_series(Index T, Index p1, Index p2, RngStream& rng) {
  MatrixSeries series(T, p1, p2);
  for (Index t = 0; t < T; ++t) {
    auto block = series.block(t);
    for (Index i = 0; i < p1; ++i) {
      for (Index j = 0; j < p2; ++j) {
        block(i, j) = rng.next_gaussian();
      }
    }
  }
  return series;
}

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Lag-1 sample autocorrelation of one sequence.
inline double lag1_autocorrelation(const Eigen::VectorXd& x) {
  const double mean = x.mean();
  double num = 0.0;
  double den = 0.0;
  for (Index t = 0; t < x.size(); ++t) {
    const double d = x(t) - mean;
    den += d * d;
    if (t + 1 < x.size()) {
      num += d * (x(t + 1) - mean);
    }
  }
  return num / den;
}

/// Pearson correlation of paired samples, computed directly.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double num = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return num / std::sqrt(va * vb);
}

/// Brute-force row-mode correlation matrix: entry (i1, i2) is the Pearson
/// correlation over all (t, j) pairs.
inline Eigen::MatrixXd brute_force_row_correlation(const MatrixSeries& series) {
  const Index p1 = series.rows();
  Eigen::MatrixXd corr(p1, p1);
  for (Index i1 = 0; i1 < p1; ++i1) {
    for (Index i2 = 0; i2 < p1; ++i2) {
      std::vector<double> a, b;
      for (Index t = 0; t < series.num_obs(); ++t) {
        for (Index j = 0; j < series.cols(); ++j) {
          a.push_back(series.block(t)(i1, j));
          b.push_back(series.block(t)(i2, j));
        }
      }
      corr(i1, i2) = pearson(a, b);
    }
  }
  return corr;
}

inline Eigen::MatrixXd brute_force_column_correlation(const MatrixSeries& series) {
  const Index p2 = series.cols();
  Eigen::MatrixXd corr(p2, p2);
  for (Index j1 = 0; j1 < p2; ++j1) {
    for (Index j2 = 0; j2 < p2; ++j2) {
      std::vector<double> a, b;
      for (Index t = 0; t < series.num_obs(); ++t) {
        for (Index i = 0; i < series.rows(); ++i) {
          a.push_back(series.block(t)(i, j1));
          b.push_back(series.block(t)(i, j2));
        }
      }
      corr(j1, j2) = pearson(a, b);
    }
  }
  return corr;
}

/// Sample covariance of vec(X_t) (column-major vec), centered, 1/(T-1).
inline Eigen::MatrixXd vec_sample_covariance(const MatrixSeries& series) {
  const Index T = series.num_obs();
  const Index d = series.rows() * series.cols();
  Eigen::MatrixXd samples(T, d);
  for (Index t = 0; t < T; ++t) {
    const auto x = series.block(t);
    for (Index j = 0; j < series.cols(); ++j) {
      for (Index i = 0; i < series.rows(); ++i) {
        samples(t, j * series.rows() + i) = x(i, j);
      }
    }
  }
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::MatrixXd centered = samples.rowwise() - mean;
  return centered.transpose() * centered / static_cast<double>(T - 1);
}

/// Fraction of squared Frobenius norm captured by the nearest Kronecker
/// product B (x) C with B of size m x m and C of size n x n, for a
/// (m*n) x (m*n) matrix. Van Loan-Pitsianis rearrangement: the best rank-1
/// approximation of the rearranged matrix gives the best Kronecker factor
/// pair, and the captured energy is the top squared singular value.
inline double nearest_kronecker_fraction(const Eigen::MatrixXd& a, Index m, Index n) {
  Eigen::MatrixXd rearranged(m * m, n * n);
  for (Index bi = 0; bi < m; ++bi) {
    for (Index bj = 0; bj < m; ++bj) {
      const Eigen::MatrixXd block = a.block(bi * n, bj * n, n, n);
      // vec(block) as one row, row index enumerates (bi, bj).
      for (Index cj = 0; cj < n; ++cj) {
        for (Index ci = 0; ci < n; ++ci) {
          rearranged(bj * m + bi, cj * n + ci) = block(ci, cj);
        }
      }
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rearranged);
  const double top = svd.singularValues()(0);
  const double total = rearranged.squaredNorm();
  return top * top / total;
}

}  // namespace tedfam::testing
