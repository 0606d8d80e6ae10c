#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace trendforge::labeling {

enum class Signal : std::int8_t { Undefined = 0, Buy = 1, Sell = -1 };

/// MA-crossover target. values[i] is Undefined exactly for i < long_len - 1.
struct LabelColumn {
    std::vector<Signal> values;
    std::size_t short_len = 0;
    std::size_t long_len = 0;

    std::size_t lookback() const noexcept { return long_len - 1; }
};

/// Buy iff SMA(short) >= SMA(long) at the same bar; equality is a Buy.
LabelColumn ma_crossover_labels(std::span<const double> closes, std::size_t short_len = 10,
                                std::size_t long_len = 60);

/// Buy -> 1, Sell -> 0. Throws Parameter on an undefined entry.
std::vector<std::uint8_t> encode_binary(std::span<const Signal> labels);
std::vector<Signal> decode_binary(std::span<const std::uint8_t> bits);

}  // namespace trendforge::labeling
