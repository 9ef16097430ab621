#pragma once

// Headerless CSV sample files: one sample per row, one column per dimension.

#include "psd/types.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace psd {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

}  // namespace detail

inline Samples read_samples_csv(std::istream& in, const std::string& name = "<stream>") {
  std::vector<double> values;
  Eigen::Index cols = -1, rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = detail::trim(line);
    if (body.empty()) continue;
    Eigen::Index count = 0;
    std::size_t pos = 0;
    while (pos <= body.size()) {
      const std::size_t comma = std::min(body.find(',', pos), body.size());
      const std::string_view field = detail::trim(body.substr(pos, comma - pos));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
        throw Error(name + ":" + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "' as a number");
      values.push_back(v);
      ++count;
      pos = comma + 1;
    }
    if (cols < 0) cols = count;
    if (count != cols)
      throw Error(name + ":" + std::to_string(line_no) + ": expected " + std::to_string(cols) + " columns, found " +
                  std::to_string(count));
    ++rows;
  }
  if (rows == 0) throw Error(name + ": no samples");
  return Eigen::Map<const Samples>(values.data(), rows, cols);
}

inline Samples read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_samples_csv(in, path);
}

inline void write_samples_csv(const std::string& path, const Samples& x) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  char buf[32];
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", x(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace psd
