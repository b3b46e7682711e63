#include "cvxwgd/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cvxwgd/errors.hpp"

namespace cvxwgd {

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

void write_samples_csv(std::ostream& os, const Mat& x) {
  for (std::size_t c = 0; c < x.cols(); ++c) os << (c ? ",x" : "x") << c;
  os << '\n';
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t c = 0; c < x.cols(); ++c) os << (c ? "," : "") << format_double(x(i, c));
    os << '\n';
  }
}

void write_samples_csv(const std::string& path, const Mat& x) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path + ": cannot open for writing");
  write_samples_csv(f, x);
  if (!f) throw ConfigError(path + ": write failed");
}

Mat read_samples_csv(std::istream& is, const std::string& origin) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t cols = 0;
  Vec data;
  auto fail = [&](const std::string& msg) { throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg); };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line.empty()) fail("missing header row");
      cols = 1;
      for (char ch : line) cols += ch == ',';
      continue;
    }
    if (line.empty()) continue;
    std::size_t got = 0;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      const std::string field = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      double v = 0.0;
      const char* b = field.data();
      const char* e = b + field.size();
      while (b < e && *b == ' ') ++b;
      const auto r = std::from_chars(b, e, v);
      if (r.ec != std::errc() || r.ptr != e || !std::isfinite(v)) fail("invalid number '" + field + "'");
      data.push_back(v);
      ++got;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (got != cols) fail("expected " + std::to_string(cols) + " fields, got " + std::to_string(got));
  }
  if (lineno == 0) throw ConfigError(origin + ": empty file");
  const std::size_t rows = data.size() / cols;
  return Mat(rows, cols, std::move(data));
}

Mat read_samples_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path + ": cannot open");
  return read_samples_csv(f, path);
}

}  // namespace cvxwgd
