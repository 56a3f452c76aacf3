#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace varx::csv {

/// Shortest-safe decimal form with 17 significant digits, independent of the
/// global locale. Non-finite values print as NA, Inf or -Inf.
std::string format_double(double x);

/// Parses a number written by format_double; NA maps to quiet NaN.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::vector<std::string> split_line(std::string_view line);

/// Writes one comma-separated row terminated by '\n'.
void write_row(std::ostream& os, const std::vector<std::string>& fields);

}  // namespace varx::csv
