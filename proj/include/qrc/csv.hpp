#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qrc {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);
long parse_long(std::string_view s);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);
/// Splits on commas; cells are trimmed of surrounding whitespace. No quoting.
std::vector<std::string> split_csv_line(std::string_view line);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace qrc
