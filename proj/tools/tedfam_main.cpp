// Batch CLI over the tedfam C API: fit, simulate, evaluate, estimate-rank.
//
// Exit codes: 0 success, 2 I/O or parse failure, 3 validation failure
// (bad flags, dimensions, degenerate input), 4 numerical failure.

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tedfam.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;

int exit_code_for(tedfam_status status) {
  switch (status) {
    case TEDFAM_OK: return kExitOk;
    case TEDFAM_ERR_IO: return kExitIo;
    case TEDFAM_ERR_VALIDATION: return kExitValidation;
    case TEDFAM_ERR_NUMERICAL: return kExitNumerical;
  }
  return kExitNumerical;
}

/// Fails the command with the library's last error message.
[[noreturn]] void fail(tedfam_status status) {
  std::cerr << "error: " << tedfam_last_error() << "\n";
  std::exit(exit_code_for(status));
}

void check(tedfam_status status) {
  if (status != TEDFAM_OK) {
    fail(status);
  }
}

[[noreturn]] void fail_validation(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  std::exit(kExitValidation);
}

std::string format_value(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

int env_threads() {
  const char* value = std::getenv("TEDFAM_THREADS");
  if (!value) {
    return 1;
  }
  const int threads = std::atoi(value);
  return threads > 0 ? threads : 1;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open '" << path << "' for digest\n";
    std::exit(kExitIo);
  }
  std::uint64_t hash = 1469598103934665603ULL;
  char buffer[1 << 14];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

/// Flat key-value run manifest written beside the command outputs.
class Manifest {
 public:
  explicit Manifest(std::string command) {
    set("command", std::move(command));
    set("artifact_version", tedfam_version());
  }

  void set(const std::string& key, std::string value) {
    entries_.emplace_back(key, std::move(value));
  }
  void set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, double value) { set(key, format_value(value)); }

  void add_input(const std::string& path) {
    char digest[32];
    std::snprintf(digest, sizeof(digest), "fnv1a64:%016" PRIx64, fnv1a64_file(path));
    set("input_digest." + path, digest);
  }

  void write(const fs::path& path) const {
    std::ofstream out(path);
    if (!out) {
      std::cerr << "error: cannot write manifest '" << path.string() << "'\n";
      std::exit(kExitIo);
    }
    for (const auto& [key, value] : entries_) {
      out << key << "=" << value << "\n";
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory '" << dir << "': " << ec.message()
              << "\n";
    std::exit(kExitIo);
  }
}

/// Parses "auto" or a positive integer rank.
std::int64_t parse_rank(const std::string& text, const char* flag) {
  if (text == "auto") {
    return 0;
  }
  char* end = nullptr;
  const long value = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || value < 1) {
    fail_validation(std::string(flag) + " must be a positive integer or 'auto', got '" + text +
                    "'");
  }
  return value;
}

struct SeriesHandle {
  tedfam_series* ptr = nullptr;
  ~SeriesHandle() { tedfam_series_free(ptr); }
};

struct FitHandle {
  tedfam_fit* ptr = nullptr;
  ~FitHandle() { tedfam_fit_free(ptr); }
};

struct DatasetHandle {
  tedfam_dataset* ptr = nullptr;
  ~DatasetHandle() { tedfam_dataset_free(ptr); }
};

struct MatrixBuffer {
  double* values = nullptr;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  ~MatrixBuffer() { tedfam_free(values); }
};

MatrixBuffer read_csv(const std::string& path) {
  MatrixBuffer m;
  check(tedfam_matrix_read_csv(path.c_str(), &m.values, &m.rows, &m.cols));
  return m;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string k1 = "auto";
  std::string k2 = "auto";
  std::int64_t k_max = 0;
  bool center = true;
  bool with_bilinear = false;
  bool with_varimax = false;
  std::string out_dir;
};

/// Writes the rotated loading plus its table display form (entries
/// multiplied by 30 and truncated toward zero).
void write_varimax_outputs(const double* loading, std::int64_t rows, std::int64_t cols,
                           const fs::path& exact_path, const fs::path& display_path) {
  std::vector<double> rotated(static_cast<std::size_t>(rows * cols));
  check(tedfam_varimax(loading, rows, cols, 0, rotated.data(), nullptr));
  check(tedfam_matrix_write_csv(exact_path.string().c_str(), rotated.data(), rows, cols));

  std::ofstream display(display_path);
  if (!display) {
    std::cerr << "error: cannot write '" << display_path.string() << "'\n";
    std::exit(kExitIo);
  }
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t j = 0; j < cols; ++j) {
      if (j > 0) {
        display << ',';
      }
      display << static_cast<long long>(30.0 * rotated[static_cast<std::size_t>(i * cols + j)]);
    }
    display << '\n';
  }
}

int run_fit(const FitArgs& args) {
  SeriesHandle series;
  check(tedfam_series_read(args.input.c_str(), &series.ptr));

  tedfam_fit_options options;
  tedfam_fit_options_init(&options);
  options.k1 = parse_rank(args.k1, "--k1");
  options.k2 = parse_rank(args.k2, "--k2");
  options.k_max = args.k_max;
  options.center = args.center ? 1 : 0;
  options.with_signal = 1;
  options.threads = env_threads();

  FitHandle fit;
  check(tedfam_fit_series(series.ptr, &options, &fit.ptr));

  const std::int64_t T = tedfam_series_num_obs(series.ptr);
  const std::int64_t p1 = tedfam_series_rows(series.ptr);
  const std::int64_t p2 = tedfam_series_cols(series.ptr);
  const std::int64_t k1 = tedfam_fit_k1(fit.ptr);
  const std::int64_t k2 = tedfam_fit_k2(fit.ptr);

  ensure_directory(args.out_dir);
  const fs::path out(args.out_dir);
  check(tedfam_matrix_write_csv((out / "R.csv").string().c_str(), tedfam_fit_loading_r(fit.ptr),
                                p1, k1));
  check(tedfam_matrix_write_csv((out / "C.csv").string().c_str(), tedfam_fit_loading_c(fit.ptr),
                                p2, k2));
  check(tedfam_matrix_write_csv((out / "Z.csv").string().c_str(), tedfam_fit_scores_z(fit.ptr),
                                T * k1, k2));
  check(tedfam_matrix_write_csv((out / "E.csv").string().c_str(), tedfam_fit_scores_e(fit.ptr),
                                T * p2, k1));
  check(tedfam_matrix_write_csv((out / "F.csv").string().c_str(), tedfam_fit_scores_f(fit.ptr),
                                T * p1, k2));
  check(tedfam_matrix_write_csv((out / "spectrum_row.csv").string().c_str(),
                                tedfam_fit_spectrum_row(fit.ptr), p1, 1));
  check(tedfam_matrix_write_csv((out / "spectrum_col.csv").string().c_str(),
                                tedfam_fit_spectrum_col(fit.ptr), p2, 1));

  const tedfam_series* signal = nullptr;
  check(tedfam_fit_signal(fit.ptr, &signal));
  check(tedfam_series_write(signal, (out / "signal.series").string().c_str()));

  if (args.with_bilinear) {
    SeriesHandle bilinear;
    check(tedfam_bilinear_signal(fit.ptr, series.ptr, &bilinear.ptr));
    check(tedfam_series_write(bilinear.ptr, (out / "bilinear_signal.series").string().c_str()));
  }

  if (args.with_varimax) {
    write_varimax_outputs(tedfam_fit_loading_r(fit.ptr), p1, k1, out / "R_varimax.csv",
                          out / "R_varimax_display.csv");
    write_varimax_outputs(tedfam_fit_loading_c(fit.ptr), p2, k2, out / "C_varimax.csv",
                          out / "C_varimax_display.csv");
  }

  Manifest manifest("fit");
  manifest.set("flag.input", args.input);
  manifest.set("flag.k1", args.k1);
  manifest.set("flag.k2", args.k2);
  manifest.set("flag.k_max", args.k_max);
  manifest.set("flag.center", args.center ? "true" : "false");
  manifest.set("flag.with_bilinear", args.with_bilinear ? "true" : "false");
  manifest.set("flag.varimax", args.with_varimax ? "true" : "false");
  manifest.set("flag.out", args.out_dir);
  manifest.set("selected_k1", k1);
  manifest.set("selected_k2", k2);
  manifest.add_input(args.input);
  manifest.write(out / "manifest.txt");

  std::cout << "k1 " << k1 << "\n" << "k2 " << k2 << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::int64_t T = 0;
  std::int64_t p1 = 0;
  std::int64_t p2 = 0;
  std::int64_t k1 = 3;
  std::int64_t k2 = 3;
  std::optional<double> phi;
  std::optional<double> psi;
  std::optional<double> gamma;
  std::uint64_t seed = 0;
  bool no_noise = false;
  std::string out_dir;
};

int scenario_code(const std::string& name) {
  if (name == "I" || name == "1") return TEDFAM_SCENARIO_I;
  if (name == "II" || name == "2") return TEDFAM_SCENARIO_II;
  if (name == "III" || name == "3") return TEDFAM_SCENARIO_III;
  if (name == "IV" || name == "4") return TEDFAM_SCENARIO_IV;
  fail_validation("unknown scenario '" + name + "' (expected I, II, III, or IV)");
}

int run_simulate(const SimulateArgs& args) {
  tedfam_scenario_config config;
  check(tedfam_scenario_config_init(scenario_code(args.scenario), args.T, args.p1, args.p2,
                                    &config));
  config.k1 = args.k1;
  config.k2 = args.k2;
  if (args.phi) config.phi = *args.phi;
  if (args.psi) config.psi = *args.psi;
  if (args.gamma) config.gamma = *args.gamma;
  config.seed = args.seed;
  config.with_noise = args.no_noise ? 0 : 1;

  DatasetHandle dataset;
  check(tedfam_simulate(&config, &dataset.ptr));

  ensure_directory(args.out_dir);
  const fs::path out(args.out_dir);
  check(tedfam_series_write(tedfam_dataset_observations(dataset.ptr),
                            (out / "observations.series").string().c_str()));
  check(tedfam_series_write(tedfam_dataset_truth_signal(dataset.ptr),
                            (out / "truth_signal.series").string().c_str()));
  check(tedfam_matrix_write_csv((out / "truth_R.csv").string().c_str(),
                                tedfam_dataset_truth_r(dataset.ptr), args.p1, args.k1));
  check(tedfam_matrix_write_csv((out / "truth_C.csv").string().c_str(),
                                tedfam_dataset_truth_c(dataset.ptr), args.p2, args.k2));
  check(tedfam_matrix_write_csv((out / "truth_Z.csv").string().c_str(),
                                tedfam_dataset_truth_z(dataset.ptr), args.T * args.k1, args.k2));
  check(tedfam_matrix_write_csv((out / "truth_E.csv").string().c_str(),
                                tedfam_dataset_truth_e(dataset.ptr), args.T * args.p2, args.k1));
  check(tedfam_matrix_write_csv((out / "truth_F.csv").string().c_str(),
                                tedfam_dataset_truth_f(dataset.ptr), args.T * args.p1, args.k2));

  Manifest manifest("simulate");
  manifest.set("flag.scenario", args.scenario);
  manifest.set("flag.T", args.T);
  manifest.set("flag.p1", args.p1);
  manifest.set("flag.p2", args.p2);
  manifest.set("flag.k1", args.k1);
  manifest.set("flag.k2", args.k2);
  manifest.set("flag.phi", config.phi);
  manifest.set("flag.psi", config.psi);
  manifest.set("flag.gamma", config.gamma);
  manifest.set("flag.no_noise", args.no_noise ? "true" : "false");
  manifest.set("flag.out", args.out_dir);
  manifest.set("seed", static_cast<std::int64_t>(args.seed));
  manifest.write(out / "manifest.txt");

  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string method = "sPCA";
  std::string estimated_signal;
  std::string observations;
  std::string truth_signal;
  std::string estimated_r;
  std::string truth_r;
  std::string estimated_c;
  std::string truth_c;
  std::vector<std::string> metrics;
  bool per_observation = false;
  std::string out;
};

int run_evaluate(const EvaluateArgs& args) {
  static const char* kKnownMetrics[] = {"dist_R",    "dist_C",   "rmse_signal", "rmse_x",
                                        "psnr_mean", "corr_row", "corr_col",    "corr_vec"};
  for (const auto& name : args.metrics) {
    bool known = false;
    for (const char* candidate : kKnownMetrics) {
      known |= name == candidate;
    }
    if (!known) {
      fail_validation("unknown metric '" + name + "'");
    }
  }

  SeriesHandle estimated, observations, truth;
  if (!args.estimated_signal.empty()) {
    check(tedfam_series_read(args.estimated_signal.c_str(), &estimated.ptr));
  }
  if (!args.observations.empty()) {
    check(tedfam_series_read(args.observations.c_str(), &observations.ptr));
  }
  if (!args.truth_signal.empty()) {
    check(tedfam_series_read(args.truth_signal.c_str(), &truth.ptr));
  }

  std::map<std::string, double> values;
  std::vector<double> per_obs;
  std::int64_t k1 = 0;
  std::int64_t k2 = 0;

  auto have = [](const std::string& s) { return !s.empty(); };
  auto requested = [&](const std::string& name) {
    if (args.metrics.empty()) {
      return true;  // default: everything computable
    }
    for (const auto& m : args.metrics) {
      if (m == name) {
        return true;
      }
    }
    return false;
  };
  const bool explicit_metrics = !args.metrics.empty();
  auto missing = [&](const std::string& name, const std::string& needs) {
    if (explicit_metrics && requested(name)) {
      fail_validation("metric '" + name + "' requires " + needs);
    }
  };

  if (requested("dist_R")) {
    if (have(args.estimated_r) && have(args.truth_r)) {
      const MatrixBuffer a = read_csv(args.estimated_r);
      const MatrixBuffer b = read_csv(args.truth_r);
      if (a.rows != b.rows || a.cols != b.cols) {
        fail_validation("loading matrices for dist_R have mismatched shapes");
      }
      k1 = a.cols;
      double d = 0.0;
      check(tedfam_space_distance(a.values, b.values, a.rows, a.cols, &d));
      values["dist_R"] = d;
    } else {
      missing("dist_R", "--estimated-R and --truth-R");
    }
  }
  if (requested("dist_C")) {
    if (have(args.estimated_c) && have(args.truth_c)) {
      const MatrixBuffer a = read_csv(args.estimated_c);
      const MatrixBuffer b = read_csv(args.truth_c);
      if (a.rows != b.rows || a.cols != b.cols) {
        fail_validation("loading matrices for dist_C have mismatched shapes");
      }
      k2 = a.cols;
      double d = 0.0;
      check(tedfam_space_distance(a.values, b.values, a.rows, a.cols, &d));
      values["dist_C"] = d;
    } else {
      missing("dist_C", "--estimated-C and --truth-C");
    }
  }
  if (requested("rmse_signal")) {
    if (estimated.ptr && truth.ptr) {
      double v = 0.0;
      check(tedfam_rmse(estimated.ptr, truth.ptr, &v));
      values["rmse_signal"] = v;
    } else {
      missing("rmse_signal", "--estimated-signal and --truth-signal");
    }
  }
  if (requested("rmse_x")) {
    if (estimated.ptr && observations.ptr) {
      double v = 0.0;
      check(tedfam_rmse(estimated.ptr, observations.ptr, &v));
      values["rmse_x"] = v;
    } else {
      missing("rmse_x", "--estimated-signal and --observations");
    }
  }
  if (requested("psnr_mean")) {
    if (estimated.ptr && observations.ptr) {
      double v = 0.0;
      per_obs.resize(static_cast<std::size_t>(tedfam_series_num_obs(observations.ptr)));
      check(tedfam_psnr_mean(observations.ptr, estimated.ptr, &v, per_obs.data()));
      values["psnr_mean"] = v;
    } else {
      missing("psnr_mean", "--estimated-signal and --observations");
    }
  }
  const std::pair<std::string, int> correlation_modes[] = {
      {"corr_row", TEDFAM_CORRELATION_ROW},
      {"corr_col", TEDFAM_CORRELATION_COLUMN},
      {"corr_vec", TEDFAM_CORRELATION_VECTORIZED},
  };
  for (const auto& [name, mode] : correlation_modes) {
    if (!requested(name)) {
      continue;
    }
    if (estimated.ptr && observations.ptr) {
      double v = 0.0;
      check(tedfam_correlation_distance(estimated.ptr, observations.ptr, mode, &v));
      values[name] = v;
    } else {
      missing(name, "--estimated-signal and --observations");
    }
  }

  if (values.empty()) {
    fail_validation("no metric is computable from the provided inputs");
  }

  std::ofstream out(args.out);
  if (!out) {
    std::cerr << "error: cannot write '" << args.out << "'\n";
    return kExitIo;
  }
  out << "method,metric,value\n";
  if (k1 > 0) out << args.method << ",k1," << k1 << "\n";
  if (k2 > 0) out << args.method << ",k2," << k2 << "\n";
  for (const auto& [name, value] : values) {
    out << args.method << "," << name << "," << format_value(value) << "\n";
  }
  if (args.per_observation) {
    for (std::size_t t = 0; t < per_obs.size(); ++t) {
      out << args.method << ",psnr_obs_" << t << "," << format_value(per_obs[t]) << "\n";
    }
  }
  out.close();

  Manifest manifest("evaluate");
  manifest.set("flag.method", args.method);
  const std::pair<const char*, const std::string*> inputs[] = {
      {"estimated_signal", &args.estimated_signal},
      {"observations", &args.observations},
      {"truth_signal", &args.truth_signal},
      {"estimated_R", &args.estimated_r},
      {"truth_R", &args.truth_r},
      {"estimated_C", &args.estimated_c},
      {"truth_C", &args.truth_c},
  };
  for (const auto& [flag, path] : inputs) {
    if (!path->empty()) {
      manifest.set(std::string("flag.") + flag, *path);
      manifest.add_input(*path);
    }
  }
  manifest.set("flag.out", args.out);
  manifest.write(args.out + ".manifest");

  return kExitOk;
}

// ---------------------------------------------------------------------------
// estimate-rank
// ---------------------------------------------------------------------------

struct RankArgs {
  std::string input;
  std::int64_t k_max = 0;
  bool center = false;
  std::string out;
};

int run_estimate_rank(const RankArgs& args) {
  SeriesHandle series;
  check(tedfam_series_read(args.input.c_str(), &series.ptr));

  tedfam_fit_options options;
  tedfam_fit_options_init(&options);
  options.k_max = args.k_max;
  options.center = args.center ? 1 : 0;
  options.with_signal = 0;

  FitHandle fit;
  check(tedfam_fit_series(series.ptr, &options, &fit.ptr));

  const std::int64_t p1 = tedfam_series_rows(series.ptr);
  const std::int64_t p2 = tedfam_series_cols(series.ptr);
  const std::int64_t k1 = tedfam_fit_k1(fit.ptr);
  const std::int64_t k2 = tedfam_fit_k2(fit.ptr);
  const double* spectrum_row = tedfam_fit_spectrum_row(fit.ptr);
  const double* spectrum_col = tedfam_fit_spectrum_col(fit.ptr);

  auto print_spectrum = [](std::ostream& stream, const char* name, const double* values,
                           std::int64_t count) {
    stream << name;
    for (std::int64_t i = 0; i < count; ++i) {
      stream << ',' << format_value(values[i]);
    }
    stream << "\n";
  };

  std::ofstream out(args.out);
  if (!out) {
    std::cerr << "error: cannot write '" << args.out << "'\n";
    return kExitIo;
  }
  out << "k1," << k1 << "\n" << "k2," << k2 << "\n";
  print_spectrum(out, "spectrum_row", spectrum_row, p1);
  print_spectrum(out, "spectrum_col", spectrum_col, p2);
  out.close();

  std::cout << "k1 " << k1 << "\n" << "k2 " << k2 << "\n";
  print_spectrum(std::cout, "spectrum_row", spectrum_row, p1);
  print_spectrum(std::cout, "spectrum_col", spectrum_col, p2);

  Manifest manifest("estimate-rank");
  manifest.set("flag.input", args.input);
  manifest.set("flag.k_max", args.k_max);
  manifest.set("flag.center", args.center ? "true" : "false");
  manifest.set("flag.out", args.out);
  manifest.add_input(args.input);
  manifest.write(args.out + ".manifest");

  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix factor model estimation, simulation, and evaluation"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Estimate loadings, scores, and signal");
  fit_cmd->add_option("--input", fit_args.input, "Input series file")->required();
  fit_cmd->add_option("--k1", fit_args.k1, "Row factor count or 'auto'");
  fit_cmd->add_option("--k2", fit_args.k2, "Column factor count or 'auto'");
  fit_cmd->add_option("--k-max", fit_args.k_max, "Upper bound for automatic rank selection");
  fit_cmd->add_flag("--center,!--no-center", fit_args.center,
                    "Subtract the per-entry temporal mean (default on)");
  fit_cmd->add_flag("--with-bilinear", fit_args.with_bilinear,
                    "Also write the bilinear baseline signal");
  fit_cmd->add_flag("--varimax", fit_args.with_varimax,
                    "Also write varimax-rotated loadings and their table form");
  fit_cmd->add_option("--out", fit_args.out_dir, "Output directory")->required();

  SimulateArgs sim_args;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Generate a scenario dataset");
  sim_cmd->add_option("--scenario", sim_args.scenario, "Scenario I, II, III, or IV")->required();
  sim_cmd->add_option("--T", sim_args.T, "Number of observations")->required();
  sim_cmd->add_option("--p1", sim_args.p1, "Rows per observation")->required();
  sim_cmd->add_option("--p2", sim_args.p2, "Columns per observation")->required();
  sim_cmd->add_option("--k1", sim_args.k1, "Row factor count");
  sim_cmd->add_option("--k2", sim_args.k2, "Column factor count");
  sim_cmd->add_option("--phi", sim_args.phi, "AR coefficient of vec(Z_t)");
  sim_cmd->add_option("--psi", sim_args.psi, "AR coefficient of vec(F_t)");
  sim_cmd->add_option("--gamma", sim_args.gamma, "AR coefficient of vec(E_t)");
  sim_cmd->add_option("--seed", sim_args.seed, "RNG seed");
  sim_cmd->add_flag("--no-noise", sim_args.no_noise, "Suppress the noise term (test hook)");
  sim_cmd->add_option("--out", sim_args.out_dir, "Output directory")->required();

  EvaluateArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Compute evaluation metrics");
  eval_cmd->add_option("--method", eval_args.method, "Method label for the report");
  eval_cmd->add_option("--estimated-signal", eval_args.estimated_signal,
                       "Estimated signal series");
  eval_cmd->add_option("--observations", eval_args.observations, "Observed series");
  eval_cmd->add_option("--truth-signal", eval_args.truth_signal, "True signal series");
  eval_cmd->add_option("--estimated-R", eval_args.estimated_r, "Estimated row loadings CSV");
  eval_cmd->add_option("--truth-R", eval_args.truth_r, "True row loadings CSV");
  eval_cmd->add_option("--estimated-C", eval_args.estimated_c, "Estimated column loadings CSV");
  eval_cmd->add_option("--truth-C", eval_args.truth_c, "True column loadings CSV");
  eval_cmd->add_option("--metrics", eval_args.metrics,
                       "Metric subset (dist_R dist_C rmse_signal rmse_x psnr_mean corr_row "
                       "corr_col corr_vec)");
  eval_cmd->add_flag("--per-observation", eval_args.per_observation,
                     "Emit per-observation PSNR rows");
  eval_cmd->add_option("--out", eval_args.out, "Report CSV path")->required();

  RankArgs rank_args;
  CLI::App* rank_cmd =
      app.add_subcommand("estimate-rank", "Select factor counts by the eigenvalue-ratio rule");
  rank_cmd->add_option("--input", rank_args.input, "Input series file")->required();
  rank_cmd->add_option("--k-max", rank_args.k_max, "Ratio-rule upper bound");
  rank_cmd->add_flag("--center", rank_args.center, "Center before estimating");
  rank_cmd->add_option("--out", rank_args.out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  if (fit_cmd->parsed()) return run_fit(fit_args);
  if (sim_cmd->parsed()) return run_simulate(sim_args);
  if (eval_cmd->parsed()) return run_evaluate(eval_args);
  if (rank_cmd->parsed()) return run_estimate_rank(rank_args);
  return kExitValidation;
}
