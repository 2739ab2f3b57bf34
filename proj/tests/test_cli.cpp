#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "tedfam/metrics.hpp"
#include "tedfam/series_io.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* path = std::getenv("TEDFAM_CLI_BIN");
  REQUIRE_MESSAGE(path != nullptr, "TEDFAM_CLI_BIN must point at the CLI binary");
  return path;
}

struct RunResult {
  int exit_code;
  std::string stdout_text;
  std::string stderr_text;
};

RunResult run_cli(const std::string& arguments, const fs::path& dir) {
  const fs::path out_file = dir / "stdout.txt";
  const fs::path err_file = dir / "stderr.txt";
  const std::string command = cli_path() + " " + arguments + " > " + out_file.string() +
                              " 2> " + err_file.string();
  const int raw = std::system(command.c_str());
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };
  RunResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.stdout_text = slurp(out_file);
  result.stderr_text = slurp(err_file);
  return result;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path("cli_test_tmp") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp_file(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("fit reproduces the hand fixture") {
  const fs::path dir = fresh_dir("fit_fixture");
  write_file(dir / "input.series", "MATSERIES v1 1 2 2\n1 0\n0 0\n");

  const RunResult result = run_cli("fit --input " + (dir / "input.series").string() +
                                       " --k1 1 --k2 1 --no-center --out " +
                                       (dir / "out").string(),
                                   dir);
  CHECK(result.exit_code == 0);
  CHECK(result.stdout_text.find("k1 1") != std::string::npos);

  CHECK(slurp_file(dir / "out" / "R.csv") == "1.4142135623730951\n0\n");
  CHECK(std::stod(slurp_file(dir / "out" / "Z.csv")) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(slurp_file(dir / "out" / "signal.series") == "MATSERIES v1 1 2 2\n1 0\n0 0\n");
  CHECK(fs::exists(dir / "out" / "manifest.txt"));
  const std::string manifest = slurp_file(dir / "out" / "manifest.txt");
  CHECK(manifest.find("command=fit") != std::string::npos);
  CHECK(manifest.find("input_digest.") != std::string::npos);
}

TEST_CASE("fit reports a missing input as exit 2 naming the path") {
  const fs::path dir = fresh_dir("fit_missing");
  const RunResult result = run_cli(
      "fit --input /nonexistent/input.series --k1 1 --k2 1 --out " + (dir / "out").string(),
      dir);
  CHECK(result.exit_code == 2);
  CHECK(result.stderr_text.find("/nonexistent/input.series") != std::string::npos);
}

TEST_CASE("fit rejects an out-of-range rank with exit 3") {
  const fs::path dir = fresh_dir("fit_badk");
  write_file(dir / "input.series", "MATSERIES v1 1 2 2\n1 0\n0 0\n");
  const RunResult result = run_cli("fit --input " + (dir / "input.series").string() +
                                       " --k1 2 --k2 1 --no-center --out " +
                                       (dir / "out").string(),
                                   dir);
  CHECK(result.exit_code == 3);
}

TEST_CASE("malformed series files fail with exit 2 and a line number") {
  const fs::path dir = fresh_dir("fit_parse");
  write_file(dir / "bad.series", "MATSERIES v1 1 2 2\n1 0\n0 oops\n");
  const RunResult result = run_cli("fit --input " + (dir / "bad.series").string() +
                                       " --k1 1 --k2 1 --out " + (dir / "out").string(),
                                   dir);
  CHECK(result.exit_code == 2);
  CHECK(result.stderr_text.find("line 3") != std::string::npos);
}

TEST_CASE("simulate is byte-deterministic per seed") {
  const fs::path dir = fresh_dir("simulate_det");
  const std::string base = "simulate --scenario I --T 8 --p1 6 --p2 5 --k1 2 --k2 2 --seed 42";
  CHECK(run_cli(base + " --out " + (dir / "a").string(), dir).exit_code == 0);
  CHECK(run_cli(base + " --out " + (dir / "b").string(), dir).exit_code == 0);
  CHECK(slurp_file(dir / "a" / "observations.series") ==
        slurp_file(dir / "b" / "observations.series"));
  CHECK(slurp_file(dir / "a" / "truth_R.csv") == slurp_file(dir / "b" / "truth_R.csv"));

  const std::string other = "simulate --scenario I --T 8 --p1 6 --p2 5 --k1 2 --k2 2 --seed 43";
  CHECK(run_cli(other + " --out " + (dir / "c").string(), dir).exit_code == 0);
  CHECK(slurp_file(dir / "a" / "observations.series") !=
        slurp_file(dir / "c" / "observations.series"));
}

TEST_CASE("simulate header reflects the requested dimensions") {
  const fs::path dir = fresh_dir("simulate_header");
  CHECK(run_cli("simulate --scenario IV --T 5 --p1 7 --p2 4 --seed 1 --out " +
                    (dir / "out").string(),
                dir)
            .exit_code == 0);
  const std::string text = slurp_file(dir / "out" / "observations.series");
  CHECK(text.rfind("MATSERIES v1 5 7 4\n", 0) == 0);
}

TEST_CASE("noise-free bilinear observations have numerical rank at most k") {
  const fs::path dir = fresh_dir("simulate_nonoise");
  CHECK(run_cli("simulate --scenario II --T 4 --p1 10 --p2 9 --seed 3 --no-noise --out " +
                    (dir / "out").string(),
                dir)
            .exit_code == 0);
  const tedfam::MatrixSeries observations =
      tedfam::read_series_file((dir / "out" / "observations.series").string());
  for (tedfam::Index t = 0; t < observations.num_obs(); ++t) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(observations.block(t)));
    const auto& sv = svd.singularValues();
    for (tedfam::Index i = 3; i < sv.size(); ++i) {
      CHECK(sv(i) < 1e-8 * sv(0));
    }
  }
}

TEST_CASE("invalid scenario or flags exit 3") {
  const fs::path dir = fresh_dir("simulate_bad");
  CHECK(run_cli("simulate --scenario V --T 4 --p1 5 --p2 5 --out " + (dir / "out").string(),
                dir)
            .exit_code == 3);
  CHECK(run_cli("simulate --scenario I --T 4 --p1 5 --p2 5 --phi 1.5 --out " +
                    (dir / "out").string(),
                dir)
            .exit_code == 3);
  CHECK(run_cli("bogus-subcommand", dir).exit_code == 3);
}

TEST_CASE("estimate-rank recovers the generating rank and reports spectra") {
  const fs::path dir = fresh_dir("rank_fixture");
  CHECK(run_cli("simulate --scenario I --T 100 --p1 100 --p2 100 --seed 7 --out " +
                    (dir / "sim").string(),
                dir)
            .exit_code == 0);
  const RunResult result = run_cli("estimate-rank --input " +
                                       (dir / "sim" / "observations.series").string() +
                                       " --k-max 8 --out " + (dir / "ranks.csv").string(),
                                   dir);
  CHECK(result.exit_code == 0);
  CHECK(result.stdout_text.find("k1 3") != std::string::npos);
  CHECK(result.stdout_text.find("k2 3") != std::string::npos);

  // Spectra are descending.
  std::istringstream lines(slurp_file(dir / "ranks.csv"));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("spectrum_", 0) == 0) {
      std::stringstream cells(line.substr(line.find(',') + 1));
      std::string cell;
      double previous = std::numeric_limits<double>::infinity();
      while (std::getline(cells, cell, ',')) {
        const double value = std::stod(cell);
        CHECK(value <= previous);
        previous = value;
      }
    }
  }
}

TEST_CASE("estimate-rank rejects k_max >= p with exit 3") {
  const fs::path dir = fresh_dir("rank_badkmax");
  write_file(dir / "input.series", "MATSERIES v1 1 2 2\n1 0\n0 0\n");
  const RunResult result = run_cli("estimate-rank --input " +
                                       (dir / "input.series").string() + " --k-max 2 --out " +
                                       (dir / "ranks.csv").string(),
                                   dir);
  CHECK(result.exit_code == 3);
}

TEST_CASE("fit with auto rank selects the generating rank") {
  const fs::path dir = fresh_dir("fit_auto");
  CHECK(run_cli("simulate --scenario I --T 100 --p1 50 --p2 50 --seed 11 --out " +
                    (dir / "sim").string(),
                dir)
            .exit_code == 0);
  const RunResult result = run_cli("fit --input " +
                                       (dir / "sim" / "observations.series").string() +
                                       " --k1 auto --k2 auto --no-center --out " +
                                       (dir / "fit").string(),
                                   dir);
  CHECK(result.exit_code == 0);
  CHECK(result.stdout_text.find("k1 3") != std::string::npos);
  CHECK(result.stdout_text.find("k2 3") != std::string::npos);
}

TEST_CASE("fit --varimax writes rotated loadings with a column-span check") {
  const fs::path dir = fresh_dir("fit_varimax");
  CHECK(run_cli("simulate --scenario I --T 30 --p1 12 --p2 10 --seed 21 --out " +
                    (dir / "sim").string(),
                dir)
            .exit_code == 0);
  CHECK(run_cli("fit --input " + (dir / "sim" / "observations.series").string() +
                    " --k1 3 --k2 3 --no-center --varimax --out " + (dir / "fit").string(),
                dir)
            .exit_code == 0);

  using Matrix = Eigen::MatrixXd;
  auto read_csv = [](const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return tedfam::read_matrix_csv(in);
  };
  const Matrix original = read_csv(dir / "fit" / "R.csv");
  const Matrix rotated = read_csv(dir / "fit" / "R_varimax.csv");
  REQUIRE(rotated.rows() == original.rows());
  REQUIRE(rotated.cols() == original.cols());
  CHECK(tedfam::space_distance(original, rotated) < 1e-10);

  // Display form: entries are the rotated values scaled by 30, truncated.
  const Matrix display = read_csv(dir / "fit" / "R_varimax_display.csv");
  for (tedfam::Index i = 0; i < display.rows(); ++i) {
    for (tedfam::Index j = 0; j < display.cols(); ++j) {
      CHECK(display(i, j) == std::trunc(30.0 * rotated(i, j)));
    }
  }
}

TEST_CASE("evaluate emits the documented metric rows") {
  const fs::path dir = fresh_dir("evaluate");
  CHECK(run_cli("simulate --scenario I --T 10 --p1 8 --p2 6 --k1 2 --k2 2 --seed 5 --out " +
                    (dir / "sim").string(),
                dir)
            .exit_code == 0);
  CHECK(run_cli("fit --input " + (dir / "sim" / "observations.series").string() +
                    " --k1 2 --k2 2 --no-center --with-bilinear --out " +
                    (dir / "fit").string(),
                dir)
            .exit_code == 0);

  // Estimated signal against itself: rmse_signal must be zero.
  const RunResult self = run_cli(
      "evaluate --estimated-signal " + (dir / "fit" / "signal.series").string() +
          " --truth-signal " + (dir / "fit" / "signal.series").string() +
          " --metrics rmse_signal --out " + (dir / "self.csv").string(),
      dir);
  CHECK(self.exit_code == 0);
  CHECK(slurp_file(dir / "self.csv").find("sPCA,rmse_signal,0\n") != std::string::npos);

  // Full report incl. subspace distances and PSNR.
  const RunResult full = run_cli(
      "evaluate --method sPCA --estimated-signal " + (dir / "fit" / "signal.series").string() +
          " --observations " + (dir / "sim" / "observations.series").string() +
          " --truth-signal " + (dir / "sim" / "truth_signal.series").string() +
          " --estimated-R " + (dir / "fit" / "R.csv").string() + " --truth-R " +
          (dir / "sim" / "truth_R.csv").string() + " --out " + (dir / "report.csv").string(),
      dir);
  CHECK(full.exit_code == 0);
  const std::string report = slurp_file(dir / "report.csv");
  CHECK(report.find("sPCA,dist_R,") != std::string::npos);
  CHECK(report.find("sPCA,rmse_x,") != std::string::npos);
  CHECK(report.find("sPCA,psnr_mean,") != std::string::npos);
  CHECK(report.find("sPCA,corr_row,") != std::string::npos);
  CHECK(fs::exists(dir / "report.csv.manifest"));

  // Dominance harness: the three-term rmse_x never exceeds the bilinear one.
  const RunResult ted = run_cli(
      "evaluate --method sPCA --estimated-signal " + (dir / "fit" / "signal.series").string() +
          " --observations " + (dir / "sim" / "observations.series").string() +
          " --metrics rmse_x --out " + (dir / "ted.csv").string(),
      dir);
  const RunResult bil = run_cli(
      "evaluate --method bilinear --estimated-signal " +
          (dir / "fit" / "bilinear_signal.series").string() + " --observations " +
          (dir / "sim" / "observations.series").string() + " --metrics rmse_x --out " +
          (dir / "bil.csv").string(),
      dir);
  CHECK(ted.exit_code == 0);
  CHECK(bil.exit_code == 0);
  auto rmse_of = [](const std::string& text) {
    const std::size_t pos = text.find("rmse_x,");
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + 7));
  };
  CHECK(rmse_of(slurp_file(dir / "ted.csv")) <= rmse_of(slurp_file(dir / "bil.csv")) + 1e-12);
}

TEST_CASE("evaluate reproduces the psnr hand value") {
  const fs::path dir = fresh_dir("evaluate_psnr");
  write_file(dir / "x.series", "MATSERIES v1 1 2 2\n1 0\n0 0\n");
  write_file(dir / "zero.series", "MATSERIES v1 1 2 2\n0 0\n0 0\n");
  const RunResult result = run_cli(
      "evaluate --estimated-signal " + (dir / "zero.series").string() + " --observations " +
          (dir / "x.series").string() + " --metrics psnr_mean --out " +
          (dir / "psnr.csv").string(),
      dir);
  CHECK(result.exit_code == 0);
  const std::string text = slurp_file(dir / "psnr.csv");
  const std::size_t pos = text.find("psnr_mean,");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(text.substr(pos + 10)) == doctest::Approx(6.0206).epsilon(1e-3));
}

TEST_CASE("evaluate serializes an exact reconstruction's psnr as inf") {
  const fs::path dir = fresh_dir("evaluate_inf");
  write_file(dir / "x.series", "MATSERIES v1 1 2 2\n1 0\n0 0\n");
  const RunResult result = run_cli(
      "evaluate --estimated-signal " + (dir / "x.series").string() + " --observations " +
          (dir / "x.series").string() + " --metrics psnr_mean --out " +
          (dir / "psnr.csv").string(),
      dir);
  CHECK(result.exit_code == 0);
  CHECK(slurp_file(dir / "psnr.csv").find("psnr_mean,inf\n") != std::string::npos);
}

TEST_CASE("evaluate surfaces numerical failures as exit 4") {
  const fs::path dir = fresh_dir("evaluate_numerical");
  // Rank-deficient loadings make the subspace distance undefined.
  write_file(dir / "bad_R.csv", "1,2\n2,4\n3,6\n");
  write_file(dir / "truth_R.csv", "1,0\n0,1\n0,0\n");
  const RunResult result = run_cli(
      "evaluate --estimated-R " + (dir / "bad_R.csv").string() + " --truth-R " +
          (dir / "truth_R.csv").string() + " --metrics dist_R --out " +
          (dir / "report.csv").string(),
      dir);
  CHECK(result.exit_code == 4);
}

TEST_CASE("requesting a metric without its inputs exits 3") {
  const fs::path dir = fresh_dir("evaluate_missing");
  write_file(dir / "x.series", "MATSERIES v1 1 2 2\n1 0\n0 0\n");
  const RunResult result =
      run_cli("evaluate --observations " + (dir / "x.series").string() +
                  " --metrics rmse_signal --out " + (dir / "report.csv").string(),
              dir);
  CHECK(result.exit_code == 3);
}
