#include "trendforge/rng.hpp"

#include <numeric>
#include <utility>

namespace trendforge {

std::uint64_t CounterRng::mix(std::uint64_t x) noexcept {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix(seed ^ mix(stream * 0xd1b54a32d192ed03ULL + 1))) {}

std::uint64_t CounterRng::next() noexcept { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
        const auto r = next();
        if (r >= threshold) return r % bound;
    }
}

std::vector<std::uint32_t> CounterRng::sample_without_replacement(std::uint32_t n, std::uint32_t count) {
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    if (count > n) count = n;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::uint32_t>(below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

}  // namespace trendforge
