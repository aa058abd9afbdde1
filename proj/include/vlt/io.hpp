#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace vlt {

/// Writes to a sibling temp file and renames it over `path`, so readers see
/// either the old file, no file, or the complete new one.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

} // namespace vlt
