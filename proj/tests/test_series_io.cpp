#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "tedfam/series_io.hpp"

using namespace tedfam;

namespace {

std::string serialize(const MatrixSeries& series) {
  std::ostringstream out;
  write_series(series, out);
  return out.str();
}

MatrixSeries parse(const std::string& text) {
  std::istringstream in(text);
  return read_series(in);
}

}  // namespace

TEST_CASE("series round-trip is bit-exact") {
  RngStream rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    MatrixSeries series = tedfam::testing::random_series(3, 4, 3, rng);
    // Sprinkle in awkward magnitudes.
    series.block(0)(0, 0) = 1e-300;
    series.block(0)(0, 1) = -4.9406564584124654e-324;  // smallest denormal
    series.block(0)(0, 2) = 1.7976931348623157e308;
    series.block(1)(1, 1) = -0.0;
    series.block(2)(2, 2) = 1.0 / 3.0;
    const std::string text = serialize(series);
    const MatrixSeries round = parse(text);
    REQUIRE(round.values().size() == series.values().size());
    for (std::size_t i = 0; i < series.values().size(); ++i) {
      // Bit-exact, including the sign of zero.
      CHECK(std::signbit(round.values()[i]) == std::signbit(series.values()[i]));
      CHECK(round.values()[i] == series.values()[i]);
    }
    CHECK(serialize(round) == text);
  }
}

TEST_CASE("series format layout") {
  const MatrixSeries series =
      tedfam::testing::series_from_blocks({{1, 2, 3, 4}, {5, 6, 7, 8}}, 2, 2);
  const std::string text = serialize(series);
  CHECK(text.rfind("MATSERIES v1 2 2 2\n", 0) == 0);
  CHECK(text == "MATSERIES v1 2 2 2\n1 2\n3 4\n5 6\n7 8\n");
}

TEST_CASE("parse errors carry line numbers") {
  auto expect_parse_error = [](const std::string& text, Index line,
                               const std::string& fragment) {
    std::istringstream in(text);
    try {
      read_series(in);
      FAIL("expected ParseError for: " << fragment);
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
      CHECK(std::string(e.what()).find("line " + std::to_string(line)) != std::string::npos);
    }
  };

  expect_parse_error("", 1, "missing header");
  expect_parse_error("MATSERIES v2 1 2 2\n", 1, "header");
  expect_parse_error("MATSERIES v1 1 2\n", 1, "header");
  expect_parse_error("MATSERIES v1 0 2 2\n", 1, "observation count");
  expect_parse_error("MATSERIES v1 1 2 2\n1 2\n", 3, "unexpected end of file");
  expect_parse_error("MATSERIES v1 1 2 2\n1 2\n3\n", 3, "expected 2 values");
  expect_parse_error("MATSERIES v1 1 2 2\n1 2\n3 x\n", 3, "invalid number");
  expect_parse_error("MATSERIES v1 1 2 2\n1 2\n3 nan\n", 3, "non-finite");
  expect_parse_error("MATSERIES v1 1 2 2\n1 2\n3 4\n5 6\n", 4, "trailing content");
}

TEST_CASE("reading a missing file raises an io error naming the path") {
  try {
    read_series_file("/nonexistent/series.txt");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/series.txt") != std::string::npos);
  }
}

TEST_CASE("matrix csv round-trip") {
  Eigen::MatrixXd m(2, 3);
  m << 1.0 / 3.0, -2.5, 1e-100, 4.0, 0.0, -7.25;
  std::ostringstream out;
  write_matrix_csv(m, out);
  std::istringstream in(out.str());
  const Eigen::MatrixXd round = read_matrix_csv(in);
  REQUIRE(round.rows() == 2);
  REQUIRE(round.cols() == 3);
  CHECK((round - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix csv rejects ragged and empty input") {
  {
    std::istringstream in("1,2\n3\n");
    CHECK_THROWS_AS(read_matrix_csv(in), ParseError);
  }
  {
    std::istringstream in("");
    CHECK_THROWS_AS(read_matrix_csv(in), ParseError);
  }
  {
    std::istringstream in("1,oops\n");
    try {
      read_matrix_csv(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
    }
  }
}

TEST_CASE("format_double uses 17 significant digits") {
  CHECK(format_double(std::sqrt(2.0)) == "1.4142135623730951");
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(-0.0) == "-0");
}
