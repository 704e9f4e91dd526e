#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fallcascade::text {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Splits on commas; fields are trimmed of surrounding whitespace and '\r'.
std::vector<std::string_view> split_csv_line(std::string_view line);

// Strict numeric parsing: the whole field must be consumed.
bool parse_double(std::string_view field, double& out);
bool parse_int(std::string_view field, long long& out);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace fallcascade::text
