// SPDX-License-Identifier: MIT
/**
 * @file random.hpp
 * @brief Counter-based random substreams and deterministic block parallelism.
 *
 * Every Monte Carlo path owns a stream keyed by (seed, kind, path index).
 * The n-th draw of a stream is mix64(key + n * golden), i.e. SplitMix64 run
 * from a per-stream key, so a path's randomness does not depend on which
 * thread simulates it or on how many paths precede it.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>

namespace levy_multiscale {

/// Independent stream families derived from one seed.
enum class StreamKind : std::uint64_t {
    Jump = 1,
    Brownian = 2,
    Auxiliary = 3,
};

[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, StreamKind kind, std::uint64_t index) noexcept
        : key_(mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) +
                     mix64(static_cast<std::uint64_t>(kind) * 0x9e3779b97f4a7c15ULL + index))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        counter_ += 0x9e3779b97f4a7c15ULL;
        return mix64(key_ + counter_);
    }

    /// Uniform on the open interval (0, 1).
    double uniform_open() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential() noexcept { return -std::log(uniform_open()); }

    /// Standard normal by Box-Muller; the second variate is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform_open()));
        const double angle = 2.0 * std::numbers::pi * uniform_open();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Worker count: hardware concurrency capped by LEVY_MULTISCALE_THREADS.
[[nodiscard]] unsigned worker_count();

/**
 * Runs body(block) for block = 0..n_blocks-1 across worker threads.
 *
 * Blocks are claimed dynamically, so callers must write per-block results
 * into preallocated slots and reduce them in block order afterwards; that
 * keeps results independent of the thread count.
 */
void parallel_for_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& body);

}  // namespace levy_multiscale
