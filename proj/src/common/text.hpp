#pragma once

#include <string>
#include <vector>

namespace cogadapt {

std::vector<std::string> split_csv_line(const std::string& line);

// Locale-independent number parsing; `where` lands in the error message
// (e.g. "row 17, column hr"). Empty cells are not numbers.
double parse_double(const std::string& s, const std::string& where);
long long parse_int(const std::string& s, const std::string& where);

// Shortest decimal form that round-trips a float (data payloads) or a
// double (timestamps). Deterministic across runs.
std::string format_f32(float v);
std::string format_f64(double v);

std::string trim(const std::string& s);

}  // namespace cogadapt
