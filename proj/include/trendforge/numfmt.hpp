#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace trendforge {

/// 17 significant digits; parses back to the identical double.
std::string format_real(double value);

/// Shortest decimal string that round-trips (std::to_chars).
std::string format_shortest(double value);

std::optional<double> parse_real(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace trendforge
