#pragma once

#include <string>
#include <string_view>

namespace forcediff {

// Whole-file helpers; failures raise IoError naming the path.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);
bool file_exists(const std::string& path);

// 1-based line number of byte offset `pos` in `text`.
std::size_t line_of_offset(std::string_view text, std::size_t pos);

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace forcediff
