#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mobicomm {

/// Splits one delimited line. No quoting: identifiers in the supported
/// formats never contain the delimiter.
std::vector<std::string_view> split_fields(std::string_view line, char delimiter);

std::string_view trim(std::string_view s);

/// Strict integer parse of the whole field; nullopt on any trailing junk.
std::optional<std::int64_t> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

/// 17 significant digits (round-trips every double).
std::string format_double(double v);

/// Reads a whole file; throws DataError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Creates parent directories, truncates, writes. Throws DataError on failure.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace mobicomm
