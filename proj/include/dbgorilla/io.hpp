#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dbgorilla {

// Throws Error when the file cannot be read.
std::string read_text_file(const std::string& path);
// Creates missing parent directories. Throws Error on failure.
void write_text_file(const std::string& path, std::string_view content);
// Non-empty lines, without trailing '\r'.
std::vector<std::string> split_lines(std::string_view text);

}  // namespace dbgorilla
