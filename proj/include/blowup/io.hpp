#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace blowup {

/// Shortest round-trip-safe decimal form, 17 significant digits.
std::string fmt_real(double x);

/// Writes `content` to `path`, creating parent directories. A path of "-"
/// writes to stdout.
void write_text(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

} // namespace blowup
