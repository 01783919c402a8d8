#include "psdsos/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "psdsos/errors.hpp"

namespace psdsos {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed for " + path);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<int> lines;  // source line of each row
};

double parse_value(const std::string& cell, int line) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line) + ": not a finite number: '" + cell + "'");
  }
  return v;
}

Table parse_table(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    auto cells = split(raw);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ParseError("line " + std::to_string(line) + ": expected " + std::to_string(t.header.size()) +
                       " fields, found " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_value(c, line));
    t.rows.push_back(std::move(row));
    t.lines.push_back(line);
  }
  if (t.header.empty()) throw ParseError("line 1: missing header");
  if (t.rows.empty()) throw ParseError("dataset has no rows");
  return t;
}

// Number of leading x1..xp columns.
int input_columns(const Table& t) {
  int p = 0;
  while (p < static_cast<int>(t.header.size()) && t.header[static_cast<std::size_t>(p)] == "x" + std::to_string(p + 1)) {
    ++p;
  }
  if (p == 0) throw ParseError("line 1: header must start with x1");
  return p;
}

std::string matrix_name(int i, int j) { return "m" + std::to_string(i + 1) + std::to_string(j + 1); }

std::string header_line(int p, const std::vector<std::string>& tail) {
  std::string out;
  for (int k = 0; k < p; ++k) out += (k ? ",x" : "x") + std::to_string(k + 1);
  for (const auto& name : tail) out += (out.empty() ? "" : ",") + name;
  return out + "\n";
}

void append_row(std::string& out, const std::vector<double>& values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ',';
    out += format_number(values[k]);
  }
  out += '\n';
}

}  // namespace

ScalarDataset parse_scalar_csv(const std::string& text) {
  const Table t = parse_table(text);
  const int p = input_columns(t);
  if (static_cast<int>(t.header.size()) != p + 1 || t.header.back() != "y") {
    throw ParseError("line 1: scalar dataset header must be x1,...,xp,y");
  }
  ScalarDataset d;
  d.inputs.resize(static_cast<Eigen::Index>(t.rows.size()), p);
  d.y.resize(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (int k = 0; k < p; ++k) d.inputs(static_cast<Eigen::Index>(r), k) = t.rows[r][static_cast<std::size_t>(k)];
    d.y[static_cast<Eigen::Index>(r)] = t.rows[r][static_cast<std::size_t>(p)];
  }
  return d;
}

std::string scalar_csv(const ScalarDataset& data) {
  validate(data);
  return table_csv(data.inputs, data.y, {"y"});
}

PsdDataset parse_psd_csv(const std::string& text) {
  const Table t = parse_table(text);
  const int p = input_columns(t);
  const int rest = static_cast<int>(t.header.size()) - p;
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rest))));
  if (d < 1 || d * d != rest) throw ParseError("line 1: PSD dataset needs d^2 matrix columns");
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (t.header[static_cast<std::size_t>(p + i * d + j)] != matrix_name(i, j)) {
        throw ParseError("line 1: expected column " + matrix_name(i, j));
      }
    }
  }
  PsdDataset out;
  out.inputs.resize(static_cast<Eigen::Index>(t.rows.size()), p);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    for (int k = 0; k < p; ++k) out.inputs(static_cast<Eigen::Index>(r), k) = row[static_cast<std::size_t>(k)];
    Mat M(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) M(i, j) = row[static_cast<std::size_t>(p + i * d + j)];
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
      throw ParseError("line " + std::to_string(t.lines[r]) + ": target matrix is not symmetric");
    }
    out.targets.push_back(0.5 * (M + M.transpose()));
  }
  return out;
}

std::string psd_csv(const PsdDataset& data) {
  validate(data);
  const int d = static_cast<int>(data.d());
  std::vector<std::string> tail;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) tail.push_back(matrix_name(i, j));
  Mat values(data.n(), d * d);
  for (Eigen::Index r = 0; r < data.n(); ++r) {
    const Mat& M = data.targets[static_cast<std::size_t>(r)];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) values(r, i * d + j) = M(i, j);
  }
  return table_csv(data.inputs, values, tail);
}

Mat parse_query_csv(const std::string& text) {
  const Table t = parse_table(text);
  const int p = input_columns(t);
  if (static_cast<int>(t.header.size()) != p) throw ParseError("line 1: query header must be x1,...,xp");
  Mat q(static_cast<Eigen::Index>(t.rows.size()), p);
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (int k = 0; k < p; ++k) q(static_cast<Eigen::Index>(r), k) = t.rows[r][static_cast<std::size_t>(k)];
  return q;
}

std::string query_csv(const Mat& queries) { return table_csv(queries, Mat(queries.rows(), 0), {}); }

std::string table_csv(const Mat& inputs, const Mat& values, const std::vector<std::string>& tail) {
  if (values.rows() != inputs.rows() || values.cols() != static_cast<Eigen::Index>(tail.size())) {
    throw DimensionError("table_csv: shape mismatch");
  }
  std::string out = header_line(static_cast<int>(inputs.cols()), tail);
  std::vector<double> row;
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
    row.clear();
    for (Eigen::Index k = 0; k < inputs.cols(); ++k) row.push_back(inputs(r, k));
    for (Eigen::Index k = 0; k < values.cols(); ++k) row.push_back(values(r, k));
    append_row(out, row);
  }
  return out;
}

}  // namespace psdsos
