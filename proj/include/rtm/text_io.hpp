#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rtm {

inline constexpr const char* kToolVersion = "0.3.1";

std::vector<std::string> splitTabs(std::string_view line);
std::vector<std::string> splitWhitespace(std::string_view line);
std::string trim(std::string_view s);

/// Reads a whole file; throws Error if it cannot be opened.
std::string readFile(const std::string& path);
/// Lines without their terminators; a trailing '\r' is dropped.
std::vector<std::string> readLines(const std::string& path);

/// Writes to `path + ".tmp"` and renames over `path`.
void writeFileAtomic(const std::string& path, const std::string& content);

/// 64-bit FNV-1a; stable across platforms, used for fingerprints.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// Shortest text that parses back to the identical double.
std::string formatExact(double v);
/// Fixed-point with `decimals` digits.
std::string formatFixed(double v, int decimals = 6);

double parseDouble(const std::string& s);
long long parseInt(const std::string& s);

}  // namespace rtm
