#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "tedfam.h"

namespace {

struct TempPath {
  std::string path;
  explicit TempPath(const std::string& name) {
    path = std::string("capi_test_") + std::to_string(getpid()) + "_" + name;
  }
  ~TempPath() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("version and initial error state") {
  CHECK(std::string(tedfam_version()) == "0.1.0");
  CHECK(std::string(tedfam_last_error()).empty());
}

TEST_CASE("series creation validates input through the c boundary") {
  const double bad[3] = {1.0, 2.0, 3.0};
  tedfam_series* series = nullptr;
  CHECK(tedfam_series_create(1, 2, 2, nullptr, &series) == TEDFAM_ERR_VALIDATION);
  CHECK(tedfam_series_create(1, 1, 3, bad, &series) == TEDFAM_ERR_VALIDATION);
  CHECK(std::string(tedfam_last_error()).find("p1 >= 2") != std::string::npos);

  const double values[4] = {1.0, 0.0, 0.0, 0.0};
  REQUIRE(tedfam_series_create(1, 2, 2, values, &series) == TEDFAM_OK);
  CHECK(tedfam_series_num_obs(series) == 1);
  CHECK(tedfam_series_rows(series) == 2);
  CHECK(tedfam_series_cols(series) == 2);
  CHECK(tedfam_series_values(series)[0] == 1.0);
  tedfam_series_free(series);
}

TEST_CASE("fit of the hand fixture through the c api") {
  const double values[4] = {1.0, 0.0, 0.0, 0.0};
  tedfam_series* series = nullptr;
  REQUIRE(tedfam_series_create(1, 2, 2, values, &series) == TEDFAM_OK);

  tedfam_fit_options options;
  tedfam_fit_options_init(&options);
  options.k1 = 1;
  options.k2 = 1;

  tedfam_fit* fit = nullptr;
  REQUIRE(tedfam_fit_series(series, &options, &fit) == TEDFAM_OK);
  CHECK(tedfam_fit_k1(fit) == 1);
  CHECK(tedfam_fit_k2(fit) == 1);
  CHECK(tedfam_fit_loading_r(fit)[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(tedfam_fit_loading_r(fit)[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(tedfam_fit_scores_z(fit)[0] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(tedfam_fit_eigvals_row(fit)[0] == doctest::Approx(0.25));
  CHECK(tedfam_fit_spectrum_row(fit)[1] == doctest::Approx(0.0));

  const tedfam_series* signal = nullptr;
  REQUIRE(tedfam_fit_signal(fit, &signal) == TEDFAM_OK);
  CHECK(tedfam_series_values(signal)[0] == doctest::Approx(1.0).epsilon(1e-14));

  // Bilinear baseline shares the loadings; scores differ by sign only.
  double z_tilde = 0.0;
  REQUIRE(tedfam_bilinear_scores(fit, series, &z_tilde) == TEDFAM_OK);
  CHECK(z_tilde == doctest::Approx(0.5).epsilon(1e-14));

  tedfam_series* bilinear = nullptr;
  REQUIRE(tedfam_bilinear_signal(fit, series, &bilinear) == TEDFAM_OK);
  CHECK(tedfam_series_values(bilinear)[0] == doctest::Approx(1.0).epsilon(1e-14));
  tedfam_series_free(bilinear);

  tedfam_fit_free(fit);
  tedfam_series_free(series);
}

TEST_CASE("fit error codes cross the boundary") {
  const double values[4] = {1.0, 0.0, 0.0, 0.0};
  tedfam_series* series = nullptr;
  REQUIRE(tedfam_series_create(1, 2, 2, values, &series) == TEDFAM_OK);

  tedfam_fit_options options;
  tedfam_fit_options_init(&options);
  options.k1 = 2;  // k1 = p1 is invalid
  options.k2 = 1;
  tedfam_fit* fit = nullptr;
  CHECK(tedfam_fit_series(series, &options, &fit) == TEDFAM_ERR_VALIDATION);
  CHECK(std::string(tedfam_last_error()).find("k1") != std::string::npos);
  tedfam_series_free(series);
}

TEST_CASE("series file io through the c api") {
  tedfam_series* series = nullptr;
  CHECK(tedfam_series_read("/nonexistent/file.series", &series) == TEDFAM_ERR_IO);
  CHECK(std::string(tedfam_last_error()).find("/nonexistent/file.series") != std::string::npos);

  const double values[8] = {1, 2, 3, 4, 5, 6, 7, 8};
  REQUIRE(tedfam_series_create(2, 2, 2, values, &series) == TEDFAM_OK);
  TempPath file("series.txt");
  REQUIRE(tedfam_series_write(series, file.path.c_str()) == TEDFAM_OK);

  tedfam_series* round = nullptr;
  REQUIRE(tedfam_series_read(file.path.c_str(), &round) == TEDFAM_OK);
  for (int i = 0; i < 8; ++i) {
    CHECK(tedfam_series_values(round)[i] == values[i]);
  }
  tedfam_series_free(round);
  tedfam_series_free(series);
}

TEST_CASE("simulation determinism through the c api") {
  tedfam_scenario_config config;
  REQUIRE(tedfam_scenario_config_init(TEDFAM_SCENARIO_III, 6, 5, 4, &config) == TEDFAM_OK);
  CHECK(config.k1 == 3);
  CHECK(config.phi == doctest::Approx(0.6));
  config.k1 = 2;
  config.k2 = 2;
  config.seed = 77;

  tedfam_dataset* a = nullptr;
  tedfam_dataset* b = nullptr;
  REQUIRE(tedfam_simulate(&config, &a) == TEDFAM_OK);
  REQUIRE(tedfam_simulate(&config, &b) == TEDFAM_OK);

  const tedfam_series* obs_a = tedfam_dataset_observations(a);
  const tedfam_series* obs_b = tedfam_dataset_observations(b);
  const int64_t n = tedfam_series_num_obs(obs_a) * tedfam_series_rows(obs_a) *
                    tedfam_series_cols(obs_a);
  for (int64_t i = 0; i < n; ++i) {
    CHECK(tedfam_series_values(obs_a)[i] == tedfam_series_values(obs_b)[i]);
  }
  CHECK(tedfam_dataset_truth_r(a)[0] == tedfam_dataset_truth_r(b)[0]);

  // observations = truth + noise, exactly as stored
  const tedfam_series* truth = tedfam_dataset_truth_signal(a);
  const tedfam_series* noise = tedfam_dataset_noise(a);
  for (int64_t i = 0; i < n; ++i) {
    CHECK(tedfam_series_values(obs_a)[i] ==
          tedfam_series_values(truth)[i] + tedfam_series_values(noise)[i]);
  }

  tedfam_dataset_free(a);
  tedfam_dataset_free(b);
}

TEST_CASE("metrics through the c api") {
  // Column-space distance of orthogonal axes is 1.
  const double a[2] = {1.0, 0.0};
  const double b[2] = {0.0, 1.0};
  double distance = 0.0;
  REQUIRE(tedfam_space_distance(a, b, 2, 1, &distance) == TEDFAM_OK);
  CHECK(distance == doctest::Approx(1.0).epsilon(1e-12));

  const double rank_deficient[6] = {1, 2, 2, 4, 3, 6};
  CHECK(tedfam_space_distance(rank_deficient, rank_deficient, 3, 2, &distance) ==
        TEDFAM_ERR_NUMERICAL);

  const double x_values[4] = {1.0, 0.0, 0.0, 0.0};
  tedfam_series* x = nullptr;
  tedfam_series* zero = nullptr;
  const double zeros[4] = {0, 0, 0, 0};
  REQUIRE(tedfam_series_create(1, 2, 2, x_values, &x) == TEDFAM_OK);
  REQUIRE(tedfam_series_create(1, 2, 2, zeros, &zero) == TEDFAM_OK);

  double value = 0.0;
  REQUIRE(tedfam_rmse(zero, x, &value) == TEDFAM_OK);
  CHECK(value == doctest::Approx(0.5));

  double per_obs = 0.0;
  REQUIRE(tedfam_psnr_mean(x, zero, &value, &per_obs) == TEDFAM_OK);
  CHECK(value == doctest::Approx(6.0206).epsilon(1e-3));
  CHECK(per_obs == doctest::Approx(value));

  // PSNR of an all-zero reference is degenerate -> validation.
  CHECK(tedfam_psnr_mean(zero, x, &value, nullptr) == TEDFAM_ERR_VALIDATION);

  const double spectrum[4] = {10.0, 5.0, 1.0, 0.5};
  int64_t rank = 0;
  REQUIRE(tedfam_estimate_rank(spectrum, 4, 3, &rank) == TEDFAM_OK);
  CHECK(rank == 2);
  CHECK(tedfam_estimate_rank(spectrum, 4, 9, &rank) == TEDFAM_ERR_VALIDATION);

  double rotated[6];
  double rotation[4];
  const double loading[6] = {2.0, 0.0, 1.9, 0.1, 0.0, 1.7};
  REQUIRE(tedfam_varimax(loading, 3, 2, 0, rotated, rotation) == TEDFAM_OK);
  CHECK(rotation[0] * rotation[3] - rotation[1] * rotation[2] ==
        doctest::Approx(1.0).epsilon(1e-8));  // proper rotation up to sign

  tedfam_series_free(x);
  tedfam_series_free(zero);
}

TEST_CASE("csv matrix io through the c api") {
  TempPath file("loading.csv");
  const double values[6] = {1.5, -2.0, 3.25, 0.0, 1e-12, 7.0};
  REQUIRE(tedfam_matrix_write_csv(file.path.c_str(), values, 3, 2) == TEDFAM_OK);

  double* read_values = nullptr;
  int64_t rows = 0;
  int64_t cols = 0;
  REQUIRE(tedfam_matrix_read_csv(file.path.c_str(), &read_values, &rows, &cols) == TEDFAM_OK);
  CHECK(rows == 3);
  CHECK(cols == 2);
  for (int i = 0; i < 6; ++i) {
    CHECK(read_values[i] == values[i]);
  }
  tedfam_free(read_values);

  CHECK(tedfam_matrix_read_csv("/nonexistent/file.csv", &read_values, &rows, &cols) ==
        TEDFAM_ERR_IO);
}
