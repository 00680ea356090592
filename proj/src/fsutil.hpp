#pragma once

#include <string>
#include <string_view>

namespace orthoprobe {

/// Writes `bytes` to `<path>.tmp` and renames it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::string& path, std::string_view bytes);

}  // namespace orthoprobe
