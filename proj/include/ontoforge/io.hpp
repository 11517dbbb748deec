#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ontoforge::io {

// Throws Error(io_error) when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

// ISO-8601 UTC, second precision.
std::string utc_now();

}  // namespace ontoforge::io
