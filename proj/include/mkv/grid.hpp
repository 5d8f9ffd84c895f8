#pragma once
// Uniform time grids t_i = i/n covering [0, horizon].

#include <cmath>
#include <cstdint>
#include <vector>

#include "mkv/common.hpp"

namespace mkv {

struct TimeGrid {
    std::int64_t n = 1;        // mesh parameter, spacing 1/n
    double horizon = 1.0;      // T
    std::vector<double> times; // t_i = i/n, i = 0..ceil(n*T); last point >= horizon

    std::int64_t steps() const { return static_cast<std::int64_t>(times.size()) - 1; }
    double dt() const { return 1.0 / static_cast<double>(n); }

    // kappa(t): the largest grid point <= t, clamped to the grid range.
    double kappa(double t) const {
        const std::int64_t i = kappa_index(t);
        return times[static_cast<std::size_t>(i)];
    }

    std::int64_t kappa_index(double t) const {
        if (t <= 0.0) return 0;
        auto i = static_cast<std::int64_t>(std::floor(t * static_cast<double>(n) * (1.0 + 1e-12)));
        if (i > steps()) i = steps();
        return i;
    }

    // Index of a grid time, or -1 when t is not on the grid (tolerance 1e-9).
    std::int64_t index_of(double t) const {
        const auto i = static_cast<std::int64_t>(std::llround(t * static_cast<double>(n)));
        if (i < 0 || i > steps()) return -1;
        if (std::abs(times[static_cast<std::size_t>(i)] - t) > 1e-9) return -1;
        return i;
    }
};

inline TimeGrid make_grid(std::int64_t n, double horizon) {
    if (n < 1) throw Error("mesh parameter must be positive");
    if (!(horizon > 0.0)) throw Error("empty horizon");
    TimeGrid g;
    g.n = n;
    g.horizon = horizon;
    const auto steps = static_cast<std::int64_t>(std::ceil(horizon * static_cast<double>(n) - 1e-12));
    g.times.resize(static_cast<std::size_t>(steps) + 1);
    for (std::int64_t i = 0; i <= steps; ++i)
        g.times[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(n);
    return g;
}

}  // namespace mkv
