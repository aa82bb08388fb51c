#pragma once

#include "loopgrade/simulate.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace loopgrade {

/// Shortest decimal form that round-trips the exact double (via to_chars).
/// All numeric artifact files use this so rewriting a parsed file is
/// byte-identical.
std::string format_double(double value);

double parse_double(const std::string& text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// FNV-1a over the file bytes; recorded in reports to tie them to their inputs.
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::uint64_t fnv1a_bytes(const std::string& bytes);

/// Two-column time series "t,<name>" with one header line.
struct TimeSeries {
    std::vector<double> t;
    std::vector<double> v;
};

void write_series_csv(const std::filesystem::path& path, const TimeSeries& series,
                      const std::string& value_name);
TimeSeries read_series_csv(const std::filesystem::path& path);

/// Response CSV carries the normalized trajectory on its uniform grid.
void write_response_csv(const std::filesystem::path& path, const RejectionResponse& response);

} // namespace loopgrade
