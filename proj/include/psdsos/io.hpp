#pragma once

#include <string>

#include "psdsos/cvxreg.hpp"
#include "psdsos/psdreg.hpp"

namespace psdsos {

/// Shortest decimal form that reads back to the same double.
std::string format_number(double v);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// CSV schemas, one header line then one sample per line:
//   scalar dataset  x1,...,xp,y
//   PSD dataset     x1,...,xp,m11,m12,...,mdd   (row-major, symmetric within 1e-9)
//   queries         x1,...,xp
// Parse errors carry the 1-based line number.

ScalarDataset parse_scalar_csv(const std::string& text);
std::string scalar_csv(const ScalarDataset& data);

PsdDataset parse_psd_csv(const std::string& text);
std::string psd_csv(const PsdDataset& data);

Mat parse_query_csv(const std::string& text);
std::string query_csv(const Mat& queries);

/// Header x1..xp followed by `tail` column names, then rows of values.
std::string table_csv(const Mat& inputs, const Mat& values, const std::vector<std::string>& tail);

}  // namespace psdsos
