#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dsom::text {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view s);
long long parse_integer(std::string_view s);

/// Splits one CSV record. Fields may be double-quoted; "" escapes a quote.
std::vector<std::string> split_csv(std::string_view line);
std::string quote_csv(std::string_view field);
std::string join_csv(const std::vector<std::string>& fields);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace dsom::text
