#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace tcs {

// Shortest representation that round-trips a double, for reproducible CSV.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv_row(std::ostream& os, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ',';
    os << fmt_double(row[i]);
  }
  os << '\n';
}

inline void write_csv_header(std::ostream& os, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) os << ',';
    os << names[i];
  }
  os << '\n';
}

}  // namespace tcs
