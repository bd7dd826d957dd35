// SPDX-License-Identifier: Apache-2.0
#ifndef DSOPT_RNG_HPP
#define DSOPT_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace dsopt {

namespace detail {

// SplitMix64 finalizer. Full 64-bit avalanche, used both as the output
// function of the counter-based generator and to derive substream ids.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Counter-based random stream. The value sequence is a pure function of
/// (seed, stream-id, counter), so identical (seed, stream) pairs reproduce
/// the same sequence on every platform and under any scheduling. Streams
/// are values: copy freely, derive disjoint substreams for parallel work.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    /// Derived stream with an independent sample sequence. Counter and
    /// Box-Muller cache start fresh.
    RngStream substream(std::uint64_t a, std::uint64_t b = 0) const noexcept {
        return RngStream(seed_, detail::mix64(stream_ ^ detail::mix64(a ^ detail::mix64(b))));
    }

    std::uint64_t next_u64() noexcept {
        return detail::mix64(counter_++ ^ detail::mix64(stream_ ^ detail::mix64(seed_)));
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double next_uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1]; safe as a log() argument.
    double next_uniform_pos() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Unbiased uniform integer in [0, n), n >= 1.
    std::uint64_t next_below(std::uint64_t n) noexcept {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    /// Standard normal via Box-Muller; the second variate of each pair is
    /// cached, so draws come in deterministic order.
    double next_normal() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform_pos();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    /// Circularly symmetric complex Gaussian CN(0,1): real and imaginary
    /// parts independent N(0, 1/2).
    std::complex<double> next_cn() noexcept {
        constexpr double inv_sqrt2 = 0.70710678118654752440;
        const double re = next_normal() * inv_sqrt2;
        const double im = next_normal() * inv_sqrt2;
        return {re, im};
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace dsopt

#endif
