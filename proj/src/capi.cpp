#include "tedfam.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "tedfam/baseline.hpp"
#include "tedfam/core.hpp"
#include "tedfam/estimator.hpp"
#include "tedfam/metrics.hpp"
#include "tedfam/series_io.hpp"
#include "tedfam/simulate.hpp"

namespace {

thread_local std::string g_last_error;

tedfam_status set_error(tedfam_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

/// Runs `fn`, translating the library's exception taxonomy into status codes.
template <typename Fn>
tedfam_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TEDFAM_OK;
  } catch (const tedfam::ValidationError& e) {
    return set_error(TEDFAM_ERR_VALIDATION, e.what());
  } catch (const tedfam::IoError& e) {
    return set_error(TEDFAM_ERR_IO, e.what());
  } catch (const tedfam::NumericalError& e) {
    return set_error(TEDFAM_ERR_NUMERICAL, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(TEDFAM_ERR_NUMERICAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(TEDFAM_ERR_NUMERICAL, e.what());
  }
}

tedfam_status require(bool condition, const char* message) {
  return condition ? TEDFAM_OK : set_error(TEDFAM_ERR_VALIDATION, message);
}

/// Row-major copy of a column-major Eigen matrix.
std::vector<double> to_row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  Eigen::Map<tedfam::RowMatrix>(out.data(), m.rows(), m.cols()) = m;
  return out;
}

}  // namespace

struct tedfam_series {
  tedfam::MatrixSeries series;
};

struct tedfam_fit {
  tedfam::FitResult result;                    // signal moved out into signal_handle
  std::optional<tedfam_series> signal_handle;  // stable address for borrowing
  std::vector<double> loading_r;               // row-major caches for the C surface
  std::vector<double> loading_c;
};

struct tedfam_dataset {
  tedfam_series observations;
  tedfam_series truth_signal;
  tedfam_series noise;
  std::vector<double> truth_r;
  std::vector<double> truth_c;
  tedfam::FactorScores truth_factors;
};

extern "C" {

const char* tedfam_version(void) { return "0.1.0"; }

const char* tedfam_last_error(void) { return g_last_error.c_str(); }

void tedfam_free(void* ptr) { std::free(ptr); }

/* ---------------------------------------------------------------------- */

tedfam_status tedfam_series_create(int64_t num_obs, int64_t rows, int64_t cols,
                                   const double* values, tedfam_series** out) {
  if (require(values != nullptr && out != nullptr, "null pointer argument") != TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  if (num_obs < 1 || rows < 2 || cols < 2) {
    return set_error(TEDFAM_ERR_VALIDATION,
                     "matrix series requires T >= 1, p1 >= 2, p2 >= 2");
  }
  return guarded([&] {
    std::vector<double> copy(values,
                             values + static_cast<std::size_t>(num_obs) * rows * cols);
    *out = new tedfam_series{
        tedfam::MatrixSeries::from_values(num_obs, rows, cols, std::move(copy))};
  });
}

tedfam_status tedfam_series_read(const char* path, tedfam_series** out) {
  if (require(path != nullptr && out != nullptr, "null pointer argument") != TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  return guarded([&] { *out = new tedfam_series{tedfam::read_series_file(path)}; });
}

tedfam_status tedfam_series_write(const tedfam_series* series, const char* path) {
  if (require(series != nullptr && path != nullptr, "null pointer argument") != TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  return guarded([&] { tedfam::write_series_file(series->series, path); });
}

void tedfam_series_free(tedfam_series* series) { delete series; }

int64_t tedfam_series_num_obs(const tedfam_series* series) {
  return series ? series->series.num_obs() : 0;
}

int64_t tedfam_series_rows(const tedfam_series* series) {
  return series ? series->series.rows() : 0;
}

int64_t tedfam_series_cols(const tedfam_series* series) {
  return series ? series->series.cols() : 0;
}

const double* tedfam_series_values(const tedfam_series* series) {
  return series ? series->series.data() : nullptr;
}

/* ---------------------------------------------------------------------- */

void tedfam_fit_options_init(tedfam_fit_options* options) {
  if (!options) {
    return;
  }
  options->k1 = 0;
  options->k2 = 0;
  options->k_max = 0;
  options->center = 0;
  options->with_signal = 1;
  options->threads = 1;
}

tedfam_status tedfam_fit_series(const tedfam_series* series, const tedfam_fit_options* options,
                                tedfam_fit** out) {
  if (require(series != nullptr && out != nullptr, "null pointer argument") != TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  tedfam_fit_options defaults;
  tedfam_fit_options_init(&defaults);
  const tedfam_fit_options& opts = options ? *options : defaults;
  return guarded([&] {
    tedfam::FitOptions fit_options;
    fit_options.center = opts.center != 0;
    fit_options.with_signal = opts.with_signal != 0;
    fit_options.threads = opts.threads > 0 ? opts.threads : 1;

    tedfam::FitResult result;
    if (opts.k1 > 0 && opts.k2 > 0) {
      result = tedfam::fit(series->series, opts.k1, opts.k2, fit_options);
    } else if (opts.k1 <= 0 && opts.k2 <= 0) {
      result = tedfam::fit_auto(series->series, fit_options, opts.k_max);
    } else {
      // Mixed explicit/auto: select the missing rank first, then fit.
      const tedfam::MomentPair moments =
          tedfam::compute_moments(fit_options.center
                                      ? tedfam::center_series(series->series)
                                      : series->series,
                                  fit_options.threads);
      const Eigen::VectorXd spectrum_row =
          tedfam::symmetric_eig_descending(moments.m1(), moments.p1()).first;
      const Eigen::VectorXd spectrum_col =
          tedfam::symmetric_eig_descending(moments.m2(), moments.p2()).first;
      const tedfam::Index k1 =
          opts.k1 > 0 ? opts.k1
                      : tedfam::estimate_rank(spectrum_row,
                                              opts.k_max > 0
                                                  ? opts.k_max
                                                  : tedfam::default_k_max(moments.p1()));
      const tedfam::Index k2 =
          opts.k2 > 0 ? opts.k2
                      : tedfam::estimate_rank(spectrum_col,
                                              opts.k_max > 0
                                                  ? opts.k_max
                                                  : tedfam::default_k_max(moments.p2()));
      result = tedfam::fit(series->series, k1, k2, fit_options);
    }

    auto fit = std::make_unique<tedfam_fit>();
    fit->loading_r = to_row_major(result.loadings.R);
    fit->loading_c = to_row_major(result.loadings.C);
    if (result.signal) {
      fit->signal_handle.emplace(tedfam_series{std::move(*result.signal)});
      result.signal.reset();
    }
    fit->result = std::move(result);
    *out = fit.release();
  });
}

void tedfam_fit_free(tedfam_fit* fit) { delete fit; }

int64_t tedfam_fit_k1(const tedfam_fit* fit) { return fit ? fit->result.k1 : 0; }
int64_t tedfam_fit_k2(const tedfam_fit* fit) { return fit ? fit->result.k2 : 0; }

const double* tedfam_fit_loading_r(const tedfam_fit* fit) {
  return fit ? fit->loading_r.data() : nullptr;
}

const double* tedfam_fit_loading_c(const tedfam_fit* fit) {
  return fit ? fit->loading_c.data() : nullptr;
}

const double* tedfam_fit_eigvals_row(const tedfam_fit* fit) {
  return fit ? fit->result.loadings.eigvals_row.data() : nullptr;
}

const double* tedfam_fit_eigvals_col(const tedfam_fit* fit) {
  return fit ? fit->result.loadings.eigvals_col.data() : nullptr;
}

const double* tedfam_fit_spectrum_row(const tedfam_fit* fit) {
  return fit ? fit->result.all_eigvals_row.data() : nullptr;
}

const double* tedfam_fit_spectrum_col(const tedfam_fit* fit) {
  return fit ? fit->result.all_eigvals_col.data() : nullptr;
}

const double* tedfam_fit_scores_z(const tedfam_fit* fit) {
  return fit ? fit->result.scores.Z.data() : nullptr;
}

const double* tedfam_fit_scores_e(const tedfam_fit* fit) {
  return fit ? fit->result.scores.E.data() : nullptr;
}

const double* tedfam_fit_scores_f(const tedfam_fit* fit) {
  return fit ? fit->result.scores.F.data() : nullptr;
}

tedfam_status tedfam_fit_signal(const tedfam_fit* fit, const tedfam_series** out) {
  if (require(fit != nullptr && out != nullptr, "null pointer argument") != TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  if (!fit->signal_handle) {
    return set_error(TEDFAM_ERR_VALIDATION, "fit was run without signal materialization");
  }
  *out = &*fit->signal_handle;
  return TEDFAM_OK;
}

tedfam_status tedfam_bilinear_signal(const tedfam_fit* fit, const tedfam_series* series,
                                     tedfam_series** out) {
  if (require(fit != nullptr && series != nullptr && out != nullptr, "null pointer argument") !=
      TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  return guarded([&] {
    *out = new tedfam_series{tedfam::bilinear_signal(series->series, fit->result.loadings)};
  });
}

tedfam_status tedfam_bilinear_scores(const tedfam_fit* fit, const tedfam_series* series,
                                     double* out) {
  if (require(fit != nullptr && series != nullptr && out != nullptr, "null pointer argument") !=
      TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  return guarded([&] {
    const tedfam::BlockArray scores =
        tedfam::bilinear_scores(series->series, fit->result.loadings);
    std::memcpy(out, scores.data(), scores.values().size() * sizeof(double));
  });
}

/* ---------------------------------------------------------------------- */

tedfam_status tedfam_scenario_config_init(int scenario, int64_t num_obs, int64_t rows,
                                          int64_t cols, tedfam_scenario_config* config) {
  if (require(config != nullptr, "null pointer argument") != TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  if (scenario < TEDFAM_SCENARIO_I || scenario > TEDFAM_SCENARIO_IV) {
    return set_error(TEDFAM_ERR_VALIDATION, "scenario must be 1..4");
  }
  const tedfam::ScenarioConfig defaults = tedfam::ScenarioConfig::make(
      static_cast<tedfam::Scenario>(scenario), num_obs, rows, cols);
  config->scenario = scenario;
  config->num_obs = num_obs;
  config->rows = rows;
  config->cols = cols;
  config->k1 = defaults.k1;
  config->k2 = defaults.k2;
  config->phi = defaults.phi;
  config->psi = defaults.psi;
  config->gamma = defaults.gamma;
  config->seed = 0;
  config->with_noise = 1;
  return TEDFAM_OK;
}

tedfam_status tedfam_simulate(const tedfam_scenario_config* config, tedfam_dataset** out) {
  if (require(config != nullptr && out != nullptr, "null pointer argument") != TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  if (config->scenario < TEDFAM_SCENARIO_I || config->scenario > TEDFAM_SCENARIO_IV) {
    return set_error(TEDFAM_ERR_VALIDATION, "scenario must be 1..4");
  }
  return guarded([&] {
    tedfam::ScenarioConfig cc;
    cc.scenario = static_cast<tedfam::Scenario>(config->scenario);
    cc.T = config->num_obs;
    cc.p1 = config->rows;
    cc.p2 = config->cols;
    cc.k1 = config->k1;
    cc.k2 = config->k2;
    cc.phi = config->phi;
    cc.psi = config->psi;
    cc.gamma = config->gamma;
    cc.seed = config->seed;
    cc.with_noise = config->with_noise != 0;

    tedfam::SimulatedDataset dataset = tedfam::generate_scenario(cc);
    auto handle = std::make_unique<tedfam_dataset>(tedfam_dataset{
        tedfam_series{std::move(dataset.observations)},
        tedfam_series{std::move(dataset.truth_signal)},
        tedfam_series{std::move(dataset.noise)},
        to_row_major(dataset.truth_R),
        to_row_major(dataset.truth_C),
        std::move(dataset.truth_factors)});
    *out = handle.release();
  });
}

void tedfam_dataset_free(tedfam_dataset* dataset) { delete dataset; }

const tedfam_series* tedfam_dataset_observations(const tedfam_dataset* dataset) {
  return dataset ? &dataset->observations : nullptr;
}

const tedfam_series* tedfam_dataset_truth_signal(const tedfam_dataset* dataset) {
  return dataset ? &dataset->truth_signal : nullptr;
}

const tedfam_series* tedfam_dataset_noise(const tedfam_dataset* dataset) {
  return dataset ? &dataset->noise : nullptr;
}

const double* tedfam_dataset_truth_r(const tedfam_dataset* dataset) {
  return dataset ? dataset->truth_r.data() : nullptr;
}

const double* tedfam_dataset_truth_c(const tedfam_dataset* dataset) {
  return dataset ? dataset->truth_c.data() : nullptr;
}

const double* tedfam_dataset_truth_z(const tedfam_dataset* dataset) {
  return dataset ? dataset->truth_factors.Z.data() : nullptr;
}

const double* tedfam_dataset_truth_e(const tedfam_dataset* dataset) {
  return dataset ? dataset->truth_factors.E.data() : nullptr;
}

const double* tedfam_dataset_truth_f(const tedfam_dataset* dataset) {
  return dataset ? dataset->truth_factors.F.data() : nullptr;
}

/* ---------------------------------------------------------------------- */

tedfam_status tedfam_space_distance(const double* a, const double* b, int64_t rows, int64_t cols,
                                    double* out) {
  if (require(a != nullptr && b != nullptr && out != nullptr, "null pointer argument") !=
      TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  if (rows < 1 || cols < 1) {
    return set_error(TEDFAM_ERR_VALIDATION, "matrix dimensions must be positive");
  }
  return guarded([&] {
    const Eigen::Map<const tedfam::RowMatrix> ma(a, rows, cols);
    const Eigen::Map<const tedfam::RowMatrix> mb(b, rows, cols);
    *out = tedfam::space_distance(ma, mb);
  });
}

tedfam_status tedfam_rmse(const tedfam_series* estimated, const tedfam_series* reference,
                          double* out) {
  if (require(estimated != nullptr && reference != nullptr && out != nullptr,
              "null pointer argument") != TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  return guarded([&] { *out = tedfam::rmse(estimated->series, reference->series); });
}

tedfam_status tedfam_psnr_mean(const tedfam_series* x, const tedfam_series* x_hat, double* out,
                               double* per_observation) {
  if (require(x != nullptr && x_hat != nullptr && out != nullptr, "null pointer argument") !=
      TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  return guarded([&] {
    const std::vector<double> values =
        tedfam::per_observation_psnr(x->series, x_hat->series);
    if (per_observation) {
      std::memcpy(per_observation, values.data(), values.size() * sizeof(double));
    }
    double sum = 0.0;
    bool infinite = false;
    for (double v : values) {
      if (std::isinf(v)) {
        infinite = true;
      } else {
        sum += v;
      }
    }
    *out = infinite ? std::numeric_limits<double>::infinity()
                    : sum / static_cast<double>(values.size());
  });
}

tedfam_status tedfam_correlation_distance(const tedfam_series* a, const tedfam_series* b,
                                          int mode, double* out) {
  if (require(a != nullptr && b != nullptr && out != nullptr, "null pointer argument") !=
      TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  if (mode < TEDFAM_CORRELATION_ROW || mode > TEDFAM_CORRELATION_VECTORIZED) {
    return set_error(TEDFAM_ERR_VALIDATION, "invalid correlation mode");
  }
  return guarded([&] {
    *out = tedfam::correlation_distance(a->series, b->series,
                                        static_cast<tedfam::CorrelationMode>(mode));
  });
}

tedfam_status tedfam_estimate_rank(const double* spectrum, int64_t length, int64_t k_max,
                                   int64_t* out) {
  if (require(spectrum != nullptr && out != nullptr, "null pointer argument") != TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  if (length < 2) {
    return set_error(TEDFAM_ERR_VALIDATION, "spectrum must have at least two entries");
  }
  return guarded([&] {
    const Eigen::Map<const Eigen::VectorXd> vec(spectrum, length);
    *out = tedfam::estimate_rank(vec, k_max);
  });
}

tedfam_status tedfam_varimax(const double* loading, int64_t rows, int64_t cols,
                             int kaiser_normalize, double* rotated, double* rotation) {
  if (require(loading != nullptr && rotated != nullptr, "null pointer argument") != TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  if (rows < 1 || cols < 1) {
    return set_error(TEDFAM_ERR_VALIDATION, "matrix dimensions must be positive");
  }
  return guarded([&] {
    const Eigen::Map<const tedfam::RowMatrix> input(loading, rows, cols);
    const tedfam::VarimaxResult result = tedfam::varimax(input, kaiser_normalize != 0);
    Eigen::Map<tedfam::RowMatrix>(rotated, rows, cols) = result.rotated;
    if (rotation) {
      Eigen::Map<tedfam::RowMatrix>(rotation, cols, cols) = result.rotation;
    }
  });
}

/* ---------------------------------------------------------------------- */

tedfam_status tedfam_matrix_read_csv(const char* path, double** values, int64_t* rows,
                                     int64_t* cols) {
  if (require(path != nullptr && values != nullptr && rows != nullptr && cols != nullptr,
              "null pointer argument") != TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  return guarded([&] {
    const Eigen::MatrixXd matrix = tedfam::read_matrix_csv_file(path);
    double* buffer =
        static_cast<double*>(std::malloc(static_cast<std::size_t>(matrix.size()) * sizeof(double)));
    if (!buffer) {
      throw std::bad_alloc();
    }
    Eigen::Map<tedfam::RowMatrix>(buffer, matrix.rows(), matrix.cols()) = matrix;
    *values = buffer;
    *rows = matrix.rows();
    *cols = matrix.cols();
  });
}

tedfam_status tedfam_matrix_write_csv(const char* path, const double* values, int64_t rows,
                                      int64_t cols) {
  if (require(path != nullptr && values != nullptr, "null pointer argument") != TEDFAM_OK) {
    return TEDFAM_ERR_VALIDATION;
  }
  if (rows < 1 || cols < 1) {
    return set_error(TEDFAM_ERR_VALIDATION, "matrix dimensions must be positive");
  }
  return guarded([&] {
    const Eigen::Map<const tedfam::RowMatrix> matrix(values, rows, cols);
    tedfam::write_matrix_csv_file(matrix, path);
  });
}

} /* extern "C" */
