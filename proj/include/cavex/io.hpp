// io.hpp — CSV readers with line-numbered diagnostics, deterministic number
// formatting, and the config hash embedded in output metadata.
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fitting.hpp"

namespace cavex::io {

// FNV-1a 64-bit hash; used to fingerprint the effective run configuration.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Fixed-format double rendering ('.' decimal point, no locale dependence).
inline std::string format_double(double v, int precision = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(strip(line.substr(start)));
      break;
    }
    out.push_back(strip(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

inline double parse_double(const std::string& cell, const std::string& file, long line,
                           const std::string& column) {
  if (cell.empty()) throw ParseError(file, line, "empty " + column + " cell");
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size())
    throw ParseError(file, line, "cannot parse " + column + " value \"" + cell + "\"");
  return v;
}

}  // namespace detail

// Read avoided-crossing peak data.  Expected header:
//   x,f_peak_GHz,branch,sigma_GHz
// Leading '#' comment lines (output metadata) are skipped; branch must be
// "upper" or "lower"; sigma must be positive.
inline fitting::PeakData read_peak_csv(std::istream& in, const std::string& file) {
  fitting::PeakData data;
  std::string line;
  long line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = detail::strip(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    if (!have_header) {
      if (stripped != "x,f_peak_GHz,branch,sigma_GHz")
        throw ParseError(file, line_no,
                         "expected header \"x,f_peak_GHz,branch,sigma_GHz\", got \"" +
                             stripped + "\"");
      have_header = true;
      continue;
    }
    const std::vector<std::string> cells = detail::split_csv(stripped);
    if (cells.size() != 4)
      throw ParseError(file, line_no, "expected 4 columns, got " +
                                          std::to_string(cells.size()));
    fitting::PeakRow row;
    row.x = detail::parse_double(cells[0], file, line_no, "x");
    row.f_peak = detail::parse_double(cells[1], file, line_no, "f_peak_GHz");
    if (cells[2] == "upper") {
      row.branch = fitting::PeakBranch::upper;
    } else if (cells[2] == "lower") {
      row.branch = fitting::PeakBranch::lower;
    } else {
      throw ParseError(file, line_no,
                       "branch must be \"upper\" or \"lower\", got \"" + cells[2] +
                           "\"");
    }
    row.sigma = detail::parse_double(cells[3], file, line_no, "sigma_GHz");
    if (!(row.sigma > 0.0))
      throw ParseError(file, line_no, "sigma_GHz must be > 0");
    data.push_back(row);
  }
  if (!have_header) throw ParseError(file, line_no, "missing header line");
  return data;
}

// Read exchange-vs-frequency data.  Expected header:
//   f_ge_GHz,J_GHz,sigma_GHz
inline std::vector<fitting::JPoint> read_j_csv(std::istream& in,
                                               const std::string& file) {
  std::vector<fitting::JPoint> data;
  std::string line;
  long line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = detail::strip(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    if (!have_header) {
      if (stripped != "f_ge_GHz,J_GHz,sigma_GHz")
        throw ParseError(file, line_no,
                         "expected header \"f_ge_GHz,J_GHz,sigma_GHz\", got \"" +
                             stripped + "\"");
      have_header = true;
      continue;
    }
    const std::vector<std::string> cells = detail::split_csv(stripped);
    if (cells.size() != 3)
      throw ParseError(file, line_no, "expected 3 columns, got " +
                                          std::to_string(cells.size()));
    fitting::JPoint pt;
    pt.f_ge = detail::parse_double(cells[0], file, line_no, "f_ge_GHz");
    pt.j = detail::parse_double(cells[1], file, line_no, "J_GHz");
    pt.sigma = detail::parse_double(cells[2], file, line_no, "sigma_GHz");
    if (!(pt.sigma > 0.0)) throw ParseError(file, line_no, "sigma_GHz must be > 0");
    data.push_back(pt);
  }
  if (!have_header) throw ParseError(file, line_no, "missing header line");
  return data;
}

}  // namespace cavex::io
