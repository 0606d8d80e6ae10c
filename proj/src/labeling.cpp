#include "trendforge/labeling.hpp"

#include <string>

#include "trendforge/error.hpp"
#include "trendforge/indicators.hpp"

namespace trendforge::labeling {

LabelColumn ma_crossover_labels(std::span<const double> closes, std::size_t short_len, std::size_t long_len) {
    if (short_len < 1 || short_len >= long_len)
        fail(ErrorKind::Parameter, "MA crossover needs 1 <= short < long (got " + std::to_string(short_len) + ", " +
                                       std::to_string(long_len) + ")");
    if (closes.size() < long_len)
        fail(ErrorKind::InsufficientData, "MA crossover needs at least " + std::to_string(long_len) + " closes");
    const auto fast = indicators::sma(closes, short_len);
    const auto slow = indicators::sma(closes, long_len);
    LabelColumn labels{std::vector<Signal>(closes.size(), Signal::Undefined), short_len, long_len};
    for (std::size_t i = long_len - 1; i < closes.size(); ++i)
        labels.values[i] = fast.values[i] >= slow.values[i] ? Signal::Buy : Signal::Sell;
    return labels;
}

std::vector<std::uint8_t> encode_binary(std::span<const Signal> labels) {
    std::vector<std::uint8_t> bits;
    bits.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == Signal::Undefined)
            fail(ErrorKind::Parameter, "label " + std::to_string(i) + " is undefined");
        bits.push_back(labels[i] == Signal::Buy ? 1 : 0);
    }
    return bits;
}

std::vector<Signal> decode_binary(std::span<const std::uint8_t> bits) {
    std::vector<Signal> labels;
    labels.reserve(bits.size());
    for (auto b : bits) labels.push_back(b ? Signal::Buy : Signal::Sell);
    return labels;
}

}  // namespace trendforge::labeling
