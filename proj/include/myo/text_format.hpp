#pragma once

// Shortest round-trip number formatting and strict numeric parsing shared by
// every text format in the project.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace myo::text {

/// Shortest representation that parses back to the same double.
std::string format_double(double value);
void append_double(std::string& out, double value);
void append_int(std::string& out, long long value);

/// Whole-string parse. Returns false on trailing garbage or overflow.
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, long long& out);

double to_double(std::string_view s, std::string_view what);
long long to_int(std::string_view s, std::string_view what);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char delim);

/// Reads a whole file; throws IoError.
std::string read_file(const std::string& path);
/// Writes atomically enough for our purposes (truncate + write); throws IoError.
void write_file(const std::string& path, std::string_view content);

}  // namespace myo::text
