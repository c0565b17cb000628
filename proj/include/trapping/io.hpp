#pragma once

#include <string>

namespace trapping {

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite.
std::string format_double(double x);

/// Inverse of format_double.
double parse_double(const std::string& s);

}  // namespace trapping
