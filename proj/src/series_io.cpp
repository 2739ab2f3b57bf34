#include "tedfam/series_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace tedfam {

namespace {

constexpr const char* kMagic = "MATSERIES";
constexpr const char* kVersion = "v1";

[[noreturn]] void fail_parse(const std::string& message, Index line) {
  throw ParseError(message + " (line " + std::to_string(line) + ")", line);
}

double parse_double(const std::string& token, Index line) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    fail_parse("invalid number '" + token + "'", line);
  }
  if (errno == ERANGE && !std::isfinite(value)) {
    fail_parse("number out of range '" + token + "'", line);
  }
  if (!std::isfinite(value)) {
    fail_parse("non-finite value '" + token + "'", line);
  }
  return value;
}

std::vector<std::string> split_spaces(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream stream(line);
  std::string token;
  while (stream >> token) {
    tokens.push_back(token);
  }
  return tokens;
}

long long parse_positive_int(const std::string& token, const char* what, Index line) {
  errno = 0;
  char* end = nullptr;
  const long long value = std::strtoll(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE || value < 1) {
    fail_parse(std::string("invalid ") + what + " '" + token + "'", line);
  }
  return value;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

MatrixSeries read_series(std::istream& in) {
  std::string line;
  Index line_no = 1;
  if (!std::getline(in, line)) {
    fail_parse("missing header", line_no);
  }
  const std::vector<std::string> header = split_spaces(line);
  if (header.size() != 5 || header[0] != kMagic || header[1] != kVersion) {
    fail_parse("malformed header (expected 'MATSERIES v1 T p1 p2')", line_no);
  }
  const long long T = parse_positive_int(header[2], "observation count", line_no);
  const long long p1 = parse_positive_int(header[3], "row count", line_no);
  const long long p2 = parse_positive_int(header[4], "column count", line_no);
  if (p1 < 2 || p2 < 2) {
    fail_parse("series dimensions must be at least 2x2", line_no);
  }

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(T) * p1 * p2);
  for (long long row = 0; row < T * p1; ++row) {
    ++line_no;
    if (!std::getline(in, line)) {
      fail_parse("unexpected end of file: expected " + std::to_string(T * p1) +
                     " data lines, got " + std::to_string(row),
                 line_no);
    }
    const std::vector<std::string> tokens = split_spaces(line);
    if (static_cast<long long>(tokens.size()) != p2) {
      fail_parse("expected " + std::to_string(p2) + " values, got " +
                     std::to_string(tokens.size()),
                 line_no);
    }
    for (const std::string& token : tokens) {
      values.push_back(parse_double(token, line_no));
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!split_spaces(line).empty()) {
      fail_parse("trailing content after the last block", line_no);
    }
  }

  return MatrixSeries::from_values(T, p1, p2, std::move(values));
}

MatrixSeries read_series_file(const std::string& path) {
  std::ifstream in = open_input(path);
  try {
    return read_series(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

void write_series(const MatrixSeries& series, std::ostream& out) {
  out << kMagic << ' ' << kVersion << ' ' << series.num_obs() << ' ' << series.rows() << ' '
      << series.cols() << '\n';
  for (Index t = 0; t < series.num_obs(); ++t) {
    const auto block = series.block(t);
    for (Index i = 0; i < series.rows(); ++i) {
      for (Index j = 0; j < series.cols(); ++j) {
        if (j > 0) {
          out << ' ';
        }
        out << format_double(block(i, j));
      }
      out << '\n';
    }
  }
}

void write_series_file(const MatrixSeries& series, const std::string& path) {
  std::ofstream out = open_output(path);
  write_series(series, out);
  if (!out) {
    throw IoError("failed writing '" + path + "'");
  }
}

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  Index line_no = 0;
  Index cols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::vector<double> row;
    std::stringstream stream(line);
    std::string cell;
    while (std::getline(stream, cell, ',')) {
      row.push_back(parse_double(cell, line_no));
    }
    if (row.empty()) {
      fail_parse("empty row", line_no);
    }
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
    } else if (static_cast<Index>(row.size()) != cols) {
      fail_parse("ragged row: expected " + std::to_string(cols) + " cells, got " +
                     std::to_string(row.size()),
                 line_no);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    fail_parse("empty CSV matrix", 1);
  }
  Eigen::MatrixXd matrix(static_cast<Index>(rows.size()), cols);
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index j = 0; j < cols; ++j) {
      matrix(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return matrix;
}

Eigen::MatrixXd read_matrix_csv_file(const std::string& path) {
  std::ifstream in = open_input(path);
  try {
    return read_matrix_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

void write_matrix_csv(const Eigen::Ref<const Eigen::MatrixXd>& matrix, std::ostream& out) {
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index j = 0; j < matrix.cols(); ++j) {
      if (j > 0) {
        out << ',';
      }
      out << format_double(matrix(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv_file(const Eigen::Ref<const Eigen::MatrixXd>& matrix,
                           const std::string& path) {
  std::ofstream out = open_output(path);
  write_matrix_csv(matrix, out);
  if (!out) {
    throw IoError("failed writing '" + path + "'");
  }
}

void write_blocks_csv_file(const BlockArray& blocks, const std::string& path) {
  const Eigen::Map<const RowMatrix> stacked(blocks.data(), blocks.count() * blocks.rows(),
                                            blocks.cols());
  write_matrix_csv_file(stacked, path);
}

}  // namespace tedfam
