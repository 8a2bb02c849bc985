#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace isopref::csv {

// Splits one delimited line. Double-quoted fields may contain the delimiter;
// a doubled quote inside a quoted field is a literal quote.
std::vector<std::string> split_line(std::string_view line, char delimiter = ',');

std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);
std::optional<std::uint64_t> parse_uint64(std::string_view text);

// Shortest representation that parses back to the identical double.
std::string format_double(double value);

// Fixed-point representation with the given number of decimals.
std::string format_fixed(double value, int decimals);

// Orders identifiers numerically when both are non-negative integers,
// lexicographically otherwise (numbers sort before non-numbers).
bool identifier_less(std::string_view a, std::string_view b);

std::string_view trim(std::string_view text);

}  // namespace isopref::csv
