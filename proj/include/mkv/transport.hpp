#pragma once
// Distances between equal-weight empirical measures: exact Wasserstein-p in one
// dimension by sorting, exact optimal transport on small instances via the
// Hungarian algorithm (with infinite-cost support), a sliced approximation for
// higher dimensions, and a histogram total-variation estimator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "mkv/common.hpp"
#include "mkv/measure.hpp"
#include "mkv/rng.hpp"

namespace mkv {

struct TransportPlan {
    std::vector<std::int64_t> pairing;  // atom i of a matched to pairing[i] of b
    double cost = 0.0;                  // total plan cost; +inf when infeasible
};

namespace detail {

// Replicating every atom k times leaves a uniform measure unchanged, so lifting
// both lists to lcm(Ma,Mb) atoms keeps the 1-D distance exact.
inline void resample_to_common_size(std::vector<double>& a, std::vector<double>& b) {
    const auto ma = static_cast<std::int64_t>(a.size());
    const auto mb = static_cast<std::int64_t>(b.size());
    if (ma == mb) return;
    const std::int64_t g = std::gcd(ma, mb);
    const std::int64_t l = ma / g * mb;
    if (l > (std::int64_t{1} << 24)) throw Error("atom counts too dissimilar to resample exactly");
    std::vector<double> ra, rb;
    ra.reserve(static_cast<std::size_t>(l));
    rb.reserve(static_cast<std::size_t>(l));
    for (double x : a)
        for (std::int64_t r = 0; r < l / ma; ++r) ra.push_back(x);
    for (double x : b)
        for (std::int64_t r = 0; r < l / mb; ++r) rb.push_back(x);
    a = std::move(ra);
    b = std::move(rb);
}

}  // namespace detail

// Exact W_p between 1-D empirical measures: match sorted atoms.
inline double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
    if (p < 1.0) throw Error("not a metric order");
    if (a.d != 1 || b.d != 1) throw Error("wasserstein_1d requires dimension 1");
    if (a.size() == 0 || b.size() == 0) throw Error("degenerate measure");
    std::vector<double> xs(a.atoms), ys(b.atoms);
    detail::resample_to_common_size(xs, ys);
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) acc += std::pow(std::abs(xs[i] - ys[i]), p);
    return std::pow(acc / static_cast<double>(xs.size()), 1.0 / p);
}

// Exact optimal assignment between equal-size atom sets (M <= 256) under an
// arbitrary cost. Infinite entries mark forbidden pairs; they are encoded as a
// finite sentinel above M * max_finite_cost + 1 so the solver stays exact, and
// feasibility is re-checked on the returned pairing.
inline TransportPlan ot_exact_small(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                    const std::function<double(std::span<const double>,
                                                               std::span<const double>)>& cost) {
    const std::int64_t m = a.size();
    if (m != b.size()) throw Error("ot_exact_small requires equal atom counts");
    if (m > 256) throw Error("instance too large for exact solver");
    if (m == 0) throw Error("degenerate measure");
    if (a.d != b.d) throw Error("dimension mismatch");

    std::vector<double> c(static_cast<std::size_t>(m * m));
    double max_finite = 0.0;
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < m; ++j) {
            const double v = cost(a.atom(i), b.atom(j));
            if (v < 0.0 || std::isnan(v)) throw Error("cost must be non-negative");
            c[static_cast<std::size_t>(i * m + j)] = v;
            if (std::isfinite(v)) max_finite = std::max(max_finite, v);
        }
    const double sentinel = static_cast<double>(m) * max_finite + 1.0;
    std::vector<double> capped(c);
    for (auto& v : capped)
        if (!std::isfinite(v)) v = sentinel;

    // Shortest augmenting path assignment (Jonker-Volgenant potentials).
    const auto n = m;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<std::int64_t> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
    for (std::int64_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::int64_t j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
        std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const std::int64_t i0 = p[static_cast<std::size_t>(j0)];
            std::int64_t j1 = 0;
            double delta = inf;
            for (std::int64_t j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = capped[static_cast<std::size_t>((i0 - 1) * n + (j - 1))] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (std::int64_t j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const std::int64_t j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    TransportPlan plan;
    plan.pairing.assign(static_cast<std::size_t>(n), -1);
    for (std::int64_t j = 1; j <= n; ++j)
        if (p[static_cast<std::size_t>(j)] != 0)
            plan.pairing[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    double total = 0.0;
    bool feasible = true;
    for (std::int64_t i = 0; i < n; ++i) {
        const double v0 = c[static_cast<std::size_t>(i * n + plan.pairing[static_cast<std::size_t>(i)])];
        if (!std::isfinite(v0)) feasible = false;
        total += v0;
    }
    plan.cost = feasible ? total : std::numeric_limits<double>::infinity();
    return plan;
}

// Sliced approximation: average W_p of the projections onto seeded random unit
// directions. Deterministic given the seed.
inline double wasserstein_sliced(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p,
                                 std::int64_t n_projections, std::uint64_t seed) {
    if (a.d < 2) throw Error("wasserstein_sliced requires dimension >= 2");
    if (a.d != b.d) throw Error("dimension mismatch");
    if (n_projections < 1) throw Error("need at least one projection");
    const int d = a.d;
    std::vector<double> dir(static_cast<std::size_t>(d));
    std::vector<double> pa(static_cast<std::size_t>(a.size()));
    std::vector<double> pb(static_cast<std::size_t>(b.size()));
    double acc = 0.0;
    for (std::int64_t k = 0; k < n_projections; ++k) {
        double norm2 = 0.0;
        for (int j = 0; j < d; ++j) {
            dir[static_cast<std::size_t>(j)] = normal_draw(seed, kDirectionStream,
                                                           static_cast<std::uint32_t>(k),
                                                           static_cast<std::uint32_t>(j));
            norm2 += dir[static_cast<std::size_t>(j)] * dir[static_cast<std::size_t>(j)];
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::int64_t i = 0; i < a.size(); ++i) {
            double s = 0.0;
            const auto x = a.atom(i);
            for (int j = 0; j < d; ++j) s += dir[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
            pa[static_cast<std::size_t>(i)] = s * inv;
        }
        for (std::int64_t i = 0; i < b.size(); ++i) {
            double s = 0.0;
            const auto x = b.atom(i);
            for (int j = 0; j < d; ++j) s += dir[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
            pb[static_cast<std::size_t>(i)] = s * inv;
        }
        acc += wasserstein_1d(EmpiricalMeasure(1, pa), EmpiricalMeasure(1, pb), p);
    }
    return acc / static_cast<double>(n_projections);
}

struct BoundingBox {
    std::vector<double> lo, hi;  // per dimension
};

inline BoundingBox bounding_box_of(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                   double pad = 1e-9) {
    BoundingBox box;
    const int d = a.d;
    box.lo.assign(static_cast<std::size_t>(d), std::numeric_limits<double>::infinity());
    box.hi.assign(static_cast<std::size_t>(d), -std::numeric_limits<double>::infinity());
    for (const auto* m : {&a, &b})
        for (std::int64_t i = 0; i < m->size(); ++i) {
            const auto x = m->atom(i);
            for (int j = 0; j < d; ++j) {
                box.lo[static_cast<std::size_t>(j)] = std::min(box.lo[static_cast<std::size_t>(j)], x[static_cast<std::size_t>(j)]);
                box.hi[static_cast<std::size_t>(j)] = std::max(box.hi[static_cast<std::size_t>(j)], x[static_cast<std::size_t>(j)]);
            }
        }
    for (int j = 0; j < d; ++j) box.hi[static_cast<std::size_t>(j)] += pad;
    return box;
}

// Histogram estimate of the total variation distance: half the L1 distance of
// the bin frequencies on a regular grid of cells with side bin_width. Atoms
// outside the box are clipped into the boundary cells (clipped count reported
// through the optional pointer).
inline double tv_histogram(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double bin_width,
                           const BoundingBox& box, std::int64_t* clipped = nullptr) {
    if (!(bin_width > 0.0)) throw Error("bin width must be positive");
    if (a.d != b.d) throw Error("dimension mismatch");
    const int d = a.d;
    std::vector<std::int64_t> cells(static_cast<std::size_t>(d));
    std::int64_t total_cells = 1;
    for (int j = 0; j < d; ++j) {
        const double span = box.hi[static_cast<std::size_t>(j)] - box.lo[static_cast<std::size_t>(j)];
        cells[static_cast<std::size_t>(j)] = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::ceil(span / bin_width)));
        total_cells *= cells[static_cast<std::size_t>(j)];
        if (total_cells > (std::int64_t{1} << 26)) throw Error("histogram too fine");
    }
    std::int64_t clip_count = 0;
    auto cell_index = [&](std::span<const double> x) {
        std::int64_t idx = 0;
        for (int j = 0; j < d; ++j) {
            auto c = static_cast<std::int64_t>(
                std::floor((x[static_cast<std::size_t>(j)] - box.lo[static_cast<std::size_t>(j)]) / bin_width));
            if (c < 0 || c >= cells[static_cast<std::size_t>(j)]) {
                ++clip_count;
                c = std::clamp<std::int64_t>(c, 0, cells[static_cast<std::size_t>(j)] - 1);
            }
            idx = idx * cells[static_cast<std::size_t>(j)] + c;
        }
        return idx;
    };
    // integer bin counts keep the distance exactly zero for identical samples
    std::vector<std::int64_t> count_a(static_cast<std::size_t>(total_cells), 0);
    std::vector<std::int64_t> count_b(static_cast<std::size_t>(total_cells), 0);
    for (std::int64_t i = 0; i < a.size(); ++i) ++count_a[static_cast<std::size_t>(cell_index(a.atom(i)))];
    for (std::int64_t i = 0; i < b.size(); ++i) ++count_b[static_cast<std::size_t>(cell_index(b.atom(i)))];
    const double wa = 1.0 / static_cast<double>(a.size());
    const double wb = 1.0 / static_cast<double>(b.size());
    double l1 = 0.0;
    for (std::int64_t c = 0; c < total_cells; ++c)
        l1 += std::abs(static_cast<double>(count_a[static_cast<std::size_t>(c)]) * wa -
                       static_cast<double>(count_b[static_cast<std::size_t>(c)]) * wb);
    if (clipped) *clipped = clip_count;
    return std::min(0.5 * l1, 1.0);
}

inline double tv_histogram(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double bin_width) {
    return tv_histogram(a, b, bin_width, bounding_box_of(a, b));
}

// Scott's bandwidth rule, averaged over dimensions: 3.49 sigma M^(-1/3).
inline double scott_bin_width(const EmpiricalMeasure& a) {
    const auto var = a.variance();
    double s = 0.0;
    for (double v : var) s += std::sqrt(std::max(v, 0.0));
    s /= static_cast<double>(a.d);
    const double w = 3.49 * s * std::pow(static_cast<double>(a.size()), -1.0 / 3.0);
    return w > 0.0 ? w : 1.0;
}

}  // namespace mkv
