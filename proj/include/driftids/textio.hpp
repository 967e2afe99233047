#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace driftids::textio {

std::vector<std::string_view> split(std::string_view line, char delim);
std::string_view trim(std::string_view s);
// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> lines(std::string_view text);

// Data error naming `loc` on anything but a finite number.
double parse_double(std::string_view s, const std::string& loc);
std::string format_double(double v, int digits = 17);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace driftids::textio
