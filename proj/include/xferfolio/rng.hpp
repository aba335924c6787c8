#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <vector>

namespace xferfolio {

namespace detail {
// SplitMix64 finalizer. Bijective on 64-bit words, good avalanche.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Counter-based deterministic generator. The output stream is a pure
/// function of (seed, stream path, counter), independent of platform and of
/// how many other generators exist, which is what makes thousand-run
/// experiments replayable under any threading layout.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {}) {
        key_ = detail::mix64(seed ^ 0xA02BD5F1C3E86A97ull);
        for (std::uint64_t id : stream) {
            key_ = detail::mix64(key_ ^ detail::mix64(id));
        }
    }

    /// Derives an independent child stream; the parent is unaffected.
    CounterRng substream(std::uint64_t id) const {
        CounterRng child(*this);
        child.key_ = detail::mix64(key_ ^ detail::mix64(id));
        child.counter_ = 0;
        child.has_cached_gaussian_ = false;
        return child;
    }

    std::uint64_t next_u64() { return detail::mix64(detail::mix64(++counter_) ^ key_); }

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; never returns 0, safe under log().
    double uniform_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; pairs are consumed deterministically.
    double gaussian() {
        if (has_cached_gaussian_) {
            has_cached_gaussian_ = false;
            return cached_gaussian_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_gaussian_ = radius * std::sin(angle);
        has_cached_gaussian_ = true;
        return radius * std::cos(angle);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Multiply-shift; bias is negligible for the n used here (n << 2^32).
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// k distinct indices from [0, n), returned in increasing order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
        }
        std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(chosen.begin(), chosen.end());
        return chosen;
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    double cached_gaussian_ = 0.0;
    bool has_cached_gaussian_ = false;
};

}  // namespace xferfolio
