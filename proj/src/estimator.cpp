#include "tedfam/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace tedfam {

namespace {

constexpr Index kMomentChunk = 32;

struct MomentPartial {
  Eigen::MatrixXd m1;
  Eigen::MatrixXd m2;
};

MomentPartial accumulate_chunk(const MatrixSeries& series, Index begin, Index end) {
  MomentPartial partial{Eigen::MatrixXd::Zero(series.rows(), series.rows()),
                        Eigen::MatrixXd::Zero(series.cols(), series.cols())};
  for (Index t = begin; t < end; ++t) {
    const auto x = series.block(t);
    partial.m1.noalias() += x * x.transpose();
    partial.m2.noalias() += x.transpose() * x;
  }
  return partial;
}

}  // namespace

MomentPair compute_moments(const MatrixSeries& series, int threads) {
  const Index T = series.num_obs();
  const Index num_chunks = (T + kMomentChunk - 1) / kMomentChunk;

  // Per-chunk partial sums with a fixed chunk size; each worker owns the
  // chunks congruent to its index, so the set of partials does not depend
  // on the thread count.
  std::vector<MomentPartial> partials(static_cast<std::size_t>(num_chunks));
  const Index workers = std::max<Index>(1, std::min<Index>(threads, num_chunks));
  auto work = [&](Index worker) {
    for (Index c = worker; c < num_chunks; c += workers) {
      const Index begin = c * kMomentChunk;
      const Index end = std::min(T, begin + kMomentChunk);
      partials[static_cast<std::size_t>(c)] = accumulate_chunk(series, begin, end);
    }
  };
  if (workers > 1) {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (Index w = 0; w < workers; ++w) {
      pool.emplace_back(work, w);
    }
    for (auto& thread : pool) {
      thread.join();
    }
  } else {
    work(0);
  }

  // Fold in ascending chunk order: bit-identical for any thread count.
  Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(series.rows(), series.rows());
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(series.cols(), series.cols());
  for (const auto& partial : partials) {
    m1 += partial.m1;
    m2 += partial.m2;
  }

  const double scale = 1.0 / (static_cast<double>(T) * series.rows() * series.cols());
  m1 *= scale;
  m2 *= scale;
  return MomentPair(m1, m2);
}

LoadingPair estimate_loadings(const MomentPair& moments, Index k1, Index k2) {
  const Index p1 = moments.p1();
  const Index p2 = moments.p2();
  if (k1 < 1 || k1 >= p1) {
    throw DimensionError("k1 must satisfy 1 <= k1 < p1, got k1=" + std::to_string(k1) +
                         ", p1=" + std::to_string(p1));
  }
  if (k2 < 1 || k2 >= p2) {
    throw DimensionError("k2 must satisfy 1 <= k2 < p2, got k2=" + std::to_string(k2) +
                         ", p2=" + std::to_string(p2));
  }

  auto [vals_row, vecs_row] = symmetric_eig_descending(moments.m1(), k1);
  auto [vals_col, vecs_col] = symmetric_eig_descending(moments.m2(), k2);

  // The moments are PSD up to rounding; clamp eigenvalue dust and reject
  // anything genuinely negative.
  auto clamp_spectrum = [](Eigen::VectorXd& vals, const char* name) {
    const double floor = -1e-10 * std::max(vals.cwiseAbs().maxCoeff(), 1e-300);
    for (Index i = 0; i < vals.size(); ++i) {
      if (vals(i) < floor) {
        throw NumericalError(std::string(name) + " has a negative eigenvalue " +
                             std::to_string(vals(i)));
      }
      vals(i) = std::max(vals(i), 0.0);
    }
  };
  clamp_spectrum(vals_row, "M1");
  clamp_spectrum(vals_col, "M2");

  LoadingPair loadings;
  loadings.R = std::sqrt(static_cast<double>(p1)) * vecs_row;
  loadings.C = std::sqrt(static_cast<double>(p2)) * vecs_col;
  loadings.eigvals_row = std::move(vals_row);
  loadings.eigvals_col = std::move(vals_col);
  return loadings;
}

namespace detail {

void check_loading_shapes(const MatrixSeries& series, const LoadingPair& loadings) {
  if (loadings.p1() != series.rows() || loadings.p2() != series.cols()) {
    throw ValidationError("loading dimensions " + std::to_string(loadings.p1()) + "x" +
                          std::to_string(loadings.k1()) + " / " + std::to_string(loadings.p2()) +
                          "x" + std::to_string(loadings.k2()) + " do not match series " +
                          std::to_string(series.rows()) + "x" + std::to_string(series.cols()));
  }
}

BlockArray cross_scores(const MatrixSeries& series, const LoadingPair& loadings) {
  check_loading_shapes(series, loadings);
  const double scale = 1.0 / (static_cast<double>(series.rows()) * series.cols());
  BlockArray out(series.num_obs(), loadings.k1(), loadings.k2());
  for (Index t = 0; t < series.num_obs(); ++t) {
    out.block(t) = (loadings.R.transpose() * series.block(t) * loadings.C) * scale;
  }
  return out;
}

}  // namespace detail

FactorScores estimate_scores(const MatrixSeries& series, const LoadingPair& loadings) {
  detail::check_loading_shapes(series, loadings);
  const Index T = series.num_obs();
  const double p1 = static_cast<double>(series.rows());
  const double p2 = static_cast<double>(series.cols());

  FactorScores scores;
  scores.Z = detail::cross_scores(series, loadings);
  scores.E = BlockArray(T, series.cols(), loadings.k1());
  scores.F = BlockArray(T, series.rows(), loadings.k2());
  for (Index t = 0; t < T; ++t) {
    scores.Z.block(t) = -scores.Z.block(t);
    scores.E.block(t) = series.block(t).transpose() * loadings.R / p1;
    scores.F.block(t) = series.block(t) * loadings.C / p2;
  }
  return scores;
}

MatrixSeries reconstruct_signal(const MatrixSeries& series, const LoadingPair& loadings) {
  detail::check_loading_shapes(series, loadings);
  const Eigen::MatrixXd proj_row =
      loadings.R * loadings.R.transpose() / static_cast<double>(series.rows());
  const Eigen::MatrixXd proj_col =
      loadings.C * loadings.C.transpose() / static_cast<double>(series.cols());

  MatrixSeries signal(series.num_obs(), series.rows(), series.cols());
  for (Index t = 0; t < series.num_obs(); ++t) {
    const auto x = series.block(t);
    const Eigen::MatrixXd row_part = proj_row * x;
    signal.block(t) = row_part + x * proj_col - row_part * proj_col;
  }
  return signal;
}

MatrixSeries center_series(const MatrixSeries& series) {
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(series.rows(), series.cols());
  for (Index t = 0; t < series.num_obs(); ++t) {
    mean += series.block(t);
  }
  mean /= static_cast<double>(series.num_obs());

  MatrixSeries centered(series.num_obs(), series.rows(), series.cols());
  for (Index t = 0; t < series.num_obs(); ++t) {
    centered.block(t) = series.block(t) - mean;
  }
  return centered;
}

namespace {

FitResult fit_impl(const MatrixSeries& input, std::optional<Index> k1_opt,
                   std::optional<Index> k2_opt, const FitOptions& options, Index k_max) {
  const MatrixSeries* series = &input;
  std::optional<MatrixSeries> centered;
  if (options.center) {
    centered.emplace(center_series(input));
    series = &*centered;
  }

  const MomentPair moments = compute_moments(*series, options.threads);
  Eigen::VectorXd all_row = symmetric_eig_descending(moments.m1(), series->rows()).first;
  Eigen::VectorXd all_col = symmetric_eig_descending(moments.m2(), series->cols()).first;

  const Index k1 = k1_opt ? *k1_opt
                          : estimate_rank(all_row, k_max > 0 ? k_max : default_k_max(series->rows()));
  const Index k2 = k2_opt ? *k2_opt
                          : estimate_rank(all_col, k_max > 0 ? k_max : default_k_max(series->cols()));

  FitResult result;
  result.loadings = estimate_loadings(moments, k1, k2);
  result.scores = estimate_scores(*series, result.loadings);
  if (options.with_signal) {
    result.signal = reconstruct_signal(*series, result.loadings);
  }
  result.k1 = k1;
  result.k2 = k2;
  result.all_eigvals_row = std::move(all_row);
  result.all_eigvals_col = std::move(all_col);
  return result;
}

}  // namespace

FitResult fit(const MatrixSeries& series, Index k1, Index k2, const FitOptions& options) {
  return fit_impl(series, k1, k2, options, 0);
}

FitResult fit_auto(const MatrixSeries& series, const FitOptions& options, Index k_max) {
  return fit_impl(series, std::nullopt, std::nullopt, options, k_max);
}

Index default_k_max(Index p) { return std::min<Index>({20, p / 2, p - 1}); }

Index estimate_rank(const Eigen::VectorXd& spectrum, Index k_max) {
  if (k_max < 1 || k_max + 1 > spectrum.size()) {
    throw DimensionError("rank estimation needs 1 <= k_max <= len(spectrum) - 1, got k_max=" +
                         std::to_string(k_max) + ", len=" + std::to_string(spectrum.size()));
  }
  const double lead = spectrum(0);
  if (!(lead > 0.0)) {
    throw DegenerateInputError("rank estimation on an all-zero spectrum");
  }
  for (Index j = 1; j < spectrum.size(); ++j) {
    if (spectrum(j) > spectrum(j - 1) + 1e-12 * lead) {
      throw ValidationError("spectrum is not descending at position " + std::to_string(j));
    }
  }

  const double floor = lead * 1e-12;
  Index best = 1;
  double best_ratio = -1.0;
  for (Index j = 1; j <= k_max; ++j) {
    const double numer = std::max(spectrum(j - 1), 0.0);
    const double denom = std::max(spectrum(j), floor);
    const double ratio = numer / denom;
    if (ratio > best_ratio) {  // strict: smallest maximizing index wins
      best_ratio = ratio;
      best = j;
    }
  }
  return best;
}

}  // namespace tedfam
