#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace survey::io {

std::string read_file(const std::filesystem::path& path);  // IoError

// Writes to "<path>.tmp" in the same directory and renames over `path`, so
// readers never observe a partially written file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace survey::io
