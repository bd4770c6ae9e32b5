#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace regbid::detail {

// Shortest representation that parses back to the same double.
std::string format_double(double value);

// Parses a full field as a double; returns false on any trailing garbage.
bool parse_double(std::string_view text, double& value);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

std::string_view trim(std::string_view text);

}  // namespace regbid::detail
