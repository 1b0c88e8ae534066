#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rca::text {

std::vector<std::string> split_ws(std::string_view line);
std::string_view trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with(std::string_view s, std::string_view prefix);
std::vector<std::string_view> split_lines(std::string_view content);

// Full-string parse; throws InputError mentioning `context` on failure.
double parse_double(std::string_view s, std::string_view context);
long long parse_int(std::string_view s, std::string_view context);

// Shortest representation that round-trips through strtod.
std::string exact(double value);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace rca::text
