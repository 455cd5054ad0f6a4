#include "common/text.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "common/error.hpp"

namespace cogadapt {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& where) {
  std::string t = trim(s);
  if (t.empty()) throw IoError("empty numeric cell at " + where);
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) {
    // from_chars on libstdc++ 11 handles finite decimals; fall back for
    // inf/nan spellings before declaring the cell bad.
    if (t == "nan" || t == "NaN") return std::nan("");
    throw IoError("bad numeric value '" + t + "' at " + where);
  }
  return v;
}

long long parse_int(const std::string& s, const std::string& where) {
  std::string t = trim(s);
  if (t.empty()) throw IoError("empty integer cell at " + where);
  long long v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) {
    throw IoError("bad integer value '" + t + "' at " + where);
  }
  return v;
}

std::string format_f32(float v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

std::string format_f64(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace cogadapt
