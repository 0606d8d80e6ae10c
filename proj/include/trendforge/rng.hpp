#pragma once

#include <cstdint>
#include <vector>

namespace trendforge {

/// Counter-based generator: output k of stream s is a fixed function of
/// (seed, s, k), so draws are reproducible across platforms and independent
/// of how many other streams were consumed.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint64_t next() noexcept;
    /// Uniform integer in [0, bound); bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;
    /// `count` distinct values from [0, n), in draw order (partial Fisher-Yates).
    std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t count);

    static std::uint64_t mix(std::uint64_t x) noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace trendforge
