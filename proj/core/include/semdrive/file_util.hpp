#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace semdrive {

/// Reads a whole file; throws std::runtime_error naming the path on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes to `<path>.tmp` and renames over `path`, so readers never observe
/// a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// 1-based line number of a byte offset within `text`.
std::size_t line_of_offset(std::string_view text, std::size_t offset);

}  // namespace semdrive
