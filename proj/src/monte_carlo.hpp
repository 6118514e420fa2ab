// SPDX-License-Identifier: MIT
// Block-parallel Monte Carlo reduction with a thread-count independent result.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "levy_multiscale/ergodicity.hpp"
#include "levy_multiscale/errors.hpp"
#include "levy_multiscale/random.hpp"

namespace levy_multiscale::detail {

inline constexpr std::size_t kPathsPerBlock = 256;

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;

    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++n;
    }
};

inline McEstimate finish(const std::vector<Moments>& blocks) {
    Moments total;
    for (const auto& b : blocks) {
        total.sum += b.sum;
        total.sum_sq += b.sum_sq;
        total.n += b.n;
    }
    McEstimate est;
    est.n = total.n;
    if (total.n == 0) return est;
    const double n = static_cast<double>(total.n);
    est.mean = total.sum / n;
    if (total.n > 1) {
        const double var = std::max(0.0, (total.sum_sq - n * est.mean * est.mean) / (n - 1.0));
        est.std_error = std::sqrt(var / n);
    }
    return est;
}

/// Mean and standard error of path_value(p), p = 0..n_paths-1.
template <class PathFn>
McEstimate monte_carlo(std::size_t n_paths, const PathFn& path_value) {
    if (n_paths == 0) throw UsageError("Monte Carlo estimate needs at least one path");
    const std::size_t n_blocks = (n_paths + kPathsPerBlock - 1) / kPathsPerBlock;
    std::vector<Moments> blocks(n_blocks);
    parallel_for_blocks(n_blocks, [&](std::size_t b) {
        Moments m;
        const std::size_t end = std::min(n_paths, (b + 1) * kPathsPerBlock);
        for (std::size_t p = b * kPathsPerBlock; p < end; ++p) m.add(path_value(p));
        blocks[b] = m;
    });
    return finish(blocks);
}

}  // namespace levy_multiscale::detail
