#pragma once
// Seed-reproducible Brownian increments: one common path shared by all
// particles plus N idiosyncratic paths. The increment for (particle i, step k,
// coordinate j) is a pure function of (seed, i, k, j); the common path uses the
// reserved sentinel stream.

#include <cstdint>
#include <span>
#include <vector>

#include "mkv/common.hpp"
#include "mkv/grid.hpp"
#include "mkv/rng.hpp"

namespace mkv {

struct NoiseBundle {
    std::uint64_t seed = 0;
    std::int64_t particles = 0;
    int d_w = 1;
    int d_b = 1;
    TimeGrid grid;
    std::vector<double> common_increments;  // steps x d_b
    std::vector<double> idio_increments;    // steps x particles x d_w (time-major)

    std::span<const double> common_at(std::int64_t step) const {
        return {common_increments.data() + step * d_b, static_cast<std::size_t>(d_b)};
    }
    std::span<const double> idio_at(std::int64_t step, std::int64_t particle) const {
        return {idio_increments.data() + (step * particles + particle) * d_w,
                static_cast<std::size_t>(d_w)};
    }

    // Common Brownian path at grid index k (cumulative sum of increments, B_0 = 0).
    std::vector<double> common_path_at(std::int64_t k) const {
        std::vector<double> b(static_cast<std::size_t>(d_b), 0.0);
        for (std::int64_t j = 0; j < k; ++j) {
            const auto inc = common_at(j);
            for (int c = 0; c < d_b; ++c) b[static_cast<std::size_t>(c)] += inc[static_cast<std::size_t>(c)];
        }
        return b;
    }
};

inline double common_increment(std::uint64_t seed, std::int64_t step, int coord, double dt) {
    return normal_draw(seed, kCommonStream, static_cast<std::uint32_t>(step),
                       static_cast<std::uint32_t>(coord)) *
           std::sqrt(dt);
}

inline double idio_increment(std::uint64_t seed, std::int64_t particle, std::int64_t step,
                             int coord, double dt) {
    return normal_draw(seed, static_cast<std::uint64_t>(particle),
                       static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(coord)) *
           std::sqrt(dt);
}

inline NoiseBundle sample_bundle(std::uint64_t seed, const TimeGrid& grid, std::int64_t particles,
                                 int d_b, int d_w, int threads = 1) {
    if (particles < 1) throw Error("particle count must be positive");
    NoiseBundle b;
    b.seed = seed;
    b.particles = particles;
    b.d_w = d_w;
    b.d_b = d_b;
    b.grid = grid;
    const std::int64_t steps = grid.steps();
    const double dt = grid.dt();
    b.common_increments.resize(static_cast<std::size_t>(steps * d_b));
    for (std::int64_t k = 0; k < steps; ++k)
        for (int j = 0; j < d_b; ++j)
            b.common_increments[static_cast<std::size_t>(k * d_b + j)] =
                common_increment(seed, k, j, dt);
    b.idio_increments.resize(static_cast<std::size_t>(steps * particles * d_w));
    parallel_for(particles, threads, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i)
            for (std::int64_t k = 0; k < steps; ++k)
                for (int j = 0; j < d_w; ++j)
                    b.idio_increments[static_cast<std::size_t>((k * particles + i) * d_w + j)] =
                        idio_increment(seed, i, k, j, dt);
    });
    return b;
}

}  // namespace mkv
