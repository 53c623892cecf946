#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rlvm {

// Shortest exact decimal form ("%.17g" trimmed): parsing the result yields
// the same double, so data files round-trip bit-exactly.
std::string fmt_double(double x);

// Fixed "%.*g" formatting used for report CSVs and plots.
std::string fmt_g(double x, int precision);

std::string_view trim(std::string_view s);

// Splits on a single delimiter, keeping empty fields.
std::vector<std::string_view> split(std::string_view s, char delim);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Writes via a sibling temp file plus rename so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace rlvm
