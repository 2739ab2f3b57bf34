#pragma once

#include <iosfwd>
#include <string>

#include "tedfam/core.hpp"

namespace tedfam {

/// Text format for bulk matrix series:
///   header line  "MATSERIES v1 T p1 p2"
///   body         T blocks of p1 lines, each p2 numbers, single spaces
/// Numbers carry 17 significant digits so that parse(serialize(s)) is
/// bit-exact for finite doubles. LF line endings throughout.
MatrixSeries read_series(std::istream& in);
MatrixSeries read_series_file(const std::string& path);
void write_series(const MatrixSeries& series, std::ostream& out);
void write_series_file(const MatrixSeries& series, const std::string& path);

/// One double with 17 significant digits (round-trip safe).
std::string format_double(double value);

/// Plain numeric CSV (comma-separated, one matrix row per line, 17
/// significant digits). Used for loadings, scores, spectra, and reports.
Eigen::MatrixXd read_matrix_csv(std::istream& in);
Eigen::MatrixXd read_matrix_csv_file(const std::string& path);
void write_matrix_csv(const Eigen::Ref<const Eigen::MatrixXd>& matrix, std::ostream& out);
void write_matrix_csv_file(const Eigen::Ref<const Eigen::MatrixXd>& matrix,
                           const std::string& path);

/// Writes stacked blocks (count*rows lines of cols values) as CSV.
void write_blocks_csv_file(const BlockArray& blocks, const std::string& path);

}  // namespace tedfam
