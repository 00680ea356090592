#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace orthoprobe::ingest {

/// Splits on '\n', dropping a trailing '\r' from each line. A final newline
/// does not produce an extra empty line.
std::vector<std::string_view> split_lines(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);

std::string_view trim(std::string_view s);

/// Whole file as bytes; IoError when it cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace orthoprobe::ingest
