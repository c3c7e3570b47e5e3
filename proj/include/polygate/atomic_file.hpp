#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace polygate {

/// Writes `content` to a sibling temp file, then renames it over `path`.
/// Parent directories are created as needed.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Whole-file read; throws IoError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace polygate
