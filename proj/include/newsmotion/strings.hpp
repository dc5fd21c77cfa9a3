#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace newsmotion {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::string to_lower(std::string_view s);

// Shortest representation that parses back to the same double.
std::string format_double(double value);
// Whole-string decimal parse; throws ParseError on junk.
double parse_double(std::string_view text);
std::size_t parse_size(std::string_view text);

}  // namespace newsmotion
