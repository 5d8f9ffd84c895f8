#pragma once
// Shared error types and the deterministic parallel map used by the particle loops.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mkv {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class BlowupError : public Error {
public:
    BlowupError(std::int64_t particle, std::int64_t step)
        : Error("blow-up at step " + std::to_string(step) +
                " (particle " + std::to_string(particle) + ")"),
          particle(particle), step(step) {}
    std::int64_t particle;
    std::int64_t step;
};

// Partitions [0,count) into contiguous chunks, one per thread. Chunk boundaries
// depend only on (count, threads), and workers must write disjoint slots, so the
// result is identical to a serial run regardless of scheduling.
inline void parallel_for(std::int64_t count, int threads,
                         const std::function<void(std::int64_t, std::int64_t)>& body) {
    if (threads < 1) threads = 1;
    if (threads == 1 || count < 2 * threads) {
        body(0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const std::int64_t chunk = (count + threads - 1) / threads;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (int t = 0; t < threads; ++t) {
        const std::int64_t lo = t * chunk;
        const std::int64_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                body(lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> g(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline bool all_finite(const double* p, std::int64_t count) {
    for (std::int64_t i = 0; i < count; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

}  // namespace mkv
