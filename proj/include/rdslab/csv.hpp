#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace rdslab {

/// Shortest round-trip decimal form of x. Locale independent, so CSV output
/// is byte-identical across runs.
std::string format_double(double x);

std::vector<std::string> split_csv_line(std::string_view line);

/// Opens `path` for writing, creating parent directories; throws on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace rdslab
