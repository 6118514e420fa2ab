// SPDX-License-Identifier: MIT
#include "levy_multiscale/random.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace levy_multiscale {

unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("LEVY_MULTISCALE_THREADS")) {
        try {
            const long requested = std::stol(cap);
            if (requested >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(requested));
        } catch (const std::exception&) {
            // ignore malformed caps
        }
    }
    return n;
}

void parallel_for_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& body) {
    const unsigned n_workers =
        static_cast<unsigned>(std::min<std::size_t>(worker_count(), n_blocks));
    if (n_workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) body(b);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            for (std::size_t b = next++; b < n_blocks; b = next++) {
                try {
                    body(b);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = n_blocks;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace levy_multiscale
