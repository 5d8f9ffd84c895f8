#pragma once
// The Euler-type particle approximation: N particles share one common Brownian
// path, each carries its own idiosyncratic path, and the conditional law at a
// grid time is the empirical measure of the ensemble. Coefficients are frozen
// at the left grid point; within a step every particle reads the same immutable
// snapshot (previous states plus the prepared empirical measure), so a parallel
// map over particles reproduces the serial result exactly.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mkv/coefficients.hpp"
#include "mkv/common.hpp"
#include "mkv/grid.hpp"
#include "mkv/measure.hpp"
#include "mkv/noise.hpp"
#include "mkv/stats.hpp"
#include "mkv/transport.hpp"

namespace mkv {

struct ParticleEnsemble {
    std::int64_t particles = 0;
    int d_x = 1;
    TimeGrid grid;
    std::uint64_t seed = 0;
    std::vector<double> paths;  // time-major: (steps+1) x particles x d_x

    std::span<double> block(std::int64_t k) {
        return {paths.data() + k * particles * d_x, static_cast<std::size_t>(particles * d_x)};
    }
    std::span<const double> block(std::int64_t k) const {
        return {paths.data() + k * particles * d_x, static_cast<std::size_t>(particles * d_x)};
    }
    std::span<const double> state(std::int64_t k, std::int64_t i) const {
        return {paths.data() + (k * particles + i) * d_x, static_cast<std::size_t>(d_x)};
    }
    PathView path_view(std::int64_t i, std::int64_t k) const {
        return PathView{paths.data() + i * d_x, particles * d_x, d_x, k};
    }
    EmpiricalMeasure marginal(std::int64_t k) const {
        return EmpiricalMeasure::from_states(block(k), particles, d_x);
    }
};

struct ConditionalLawPath {
    std::vector<double> times;
    std::vector<EmpiricalMeasure> marginals;  // one N-atom measure per grid time

    const EmpiricalMeasure& at(std::int64_t k) const { return marginals[static_cast<std::size_t>(k)]; }
    std::int64_t steps() const { return static_cast<std::int64_t>(times.size()) - 1; }
};

struct SimulationResult {
    ParticleEnsemble ensemble;
    ConditionalLawPath law_path;
    NoiseBundle bundle;
};

namespace detail {

inline void draw_initial(ParticleEnsemble& e, const InitialCondition& init) {
    auto first = e.block(0);
    for (std::int64_t i = 0; i < e.particles; ++i)
        init.sample(e.seed, i, first.subspan(static_cast<std::size_t>(i * e.d_x),
                                             static_cast<std::size_t>(e.d_x)));
}

}  // namespace detail

// One Euler step: fills block k+1 of the ensemble from block k, freezing
// coefficients at t_k. `law` is the measure argument fed to the coefficients
// (the ensemble's own marginal unless an external flow is supplied).
inline void step_ensemble(ParticleEnsemble& e, const CoefficientSpec& spec,
                          const NoiseBundle& bundle, std::int64_t k,
                          const EmpiricalMeasure& law, int threads = 1) {
    if (k >= e.grid.steps()) throw Error("step index beyond grid");
    const int dx = e.d_x;
    const double t = e.grid.times[static_cast<std::size_t>(k)];
    const double dt = e.grid.dt();
    const auto common = bundle.common_at(k);
    auto next = e.block(k + 1);
    const auto current = e.block(k);
    std::optional<BlowupError> blowup;
    std::mutex blowup_mutex;
    parallel_for(e.particles, threads, [&](std::int64_t lo, std::int64_t hi) {
        std::vector<double> b(static_cast<std::size_t>(dx));
        std::vector<double> sig(static_cast<std::size_t>(dx * spec.d_w));
        std::vector<double> rho(static_cast<std::size_t>(dx * spec.d_b));
        for (std::int64_t i = lo; i < hi; ++i) {
            const PathView history = e.path_view(i, k);
            spec.drift(t, history, law, b);
            spec.sigma(t, history, law, sig);
            spec.rho(t, history, law, rho);
            const auto dw = bundle.idio_at(k, i);
            for (int r = 0; r < dx; ++r) {
                double v = current[static_cast<std::size_t>(i * dx + r)] + b[static_cast<std::size_t>(r)] * dt;
                for (int c = 0; c < spec.d_w; ++c)
                    v += sig[static_cast<std::size_t>(r * spec.d_w + c)] * dw[static_cast<std::size_t>(c)];
                for (int c = 0; c < spec.d_b; ++c)
                    v += rho[static_cast<std::size_t>(r * spec.d_b + c)] * common[static_cast<std::size_t>(c)];
                if (!std::isfinite(v)) {
                    std::lock_guard<std::mutex> g(blowup_mutex);
                    if (!blowup) blowup.emplace(i, k);
                    return;
                }
                next[static_cast<std::size_t>(i * dx + r)] = v;
            }
        }
    });
    if (blowup) throw *blowup;
}

inline void validate_simulation_args(const CoefficientSpec& spec, std::int64_t particles) {
    if (particles < 1) throw Error("particle count must be positive");
    if (spec.measure_dependent() && particles < 2)
        throw Error("measure-dependent coefficients need at least 2 particles");
}

// Full trajectory simulation from a prebuilt noise bundle. When `external_flow`
// is given, the coefficients read that flow at each step instead of the
// ensemble's own empirical marginal (used by the law-feedback iteration).
inline SimulationResult simulate_with_bundle(const CoefficientSpec& spec,
                                             const InitialCondition& init, NoiseBundle bundle,
                                             int threads = 1,
                                             const ConditionalLawPath* external_flow = nullptr) {
    validate_simulation_args(spec, bundle.particles);
    if (external_flow &&
        static_cast<std::int64_t>(external_flow->times.size()) != bundle.grid.steps() + 1)
        throw Error("misaligned inputs");
    SimulationResult result;
    ParticleEnsemble& e = result.ensemble;
    e.particles = bundle.particles;
    e.d_x = spec.d_x;
    e.grid = bundle.grid;
    e.seed = bundle.seed;
    e.paths.assign(static_cast<std::size_t>((e.grid.steps() + 1) * e.particles * e.d_x), 0.0);
    detail::draw_initial(e, init);
    if (!all_finite(e.block(0).data(), e.particles * e.d_x)) throw BlowupError(-1, 0);

    ConditionalLawPath& law = result.law_path;
    law.times = e.grid.times;
    law.marginals.reserve(static_cast<std::size_t>(e.grid.steps() + 1));
    for (std::int64_t k = 0; k <= e.grid.steps(); ++k) {
        EmpiricalMeasure marginal = e.marginal(k);
        if (spec.prepare) spec.prepare(e.grid.times[static_cast<std::size_t>(k)], marginal);
        if (k < e.grid.steps()) {
            const EmpiricalMeasure* arg = &marginal;
            EmpiricalMeasure prepared_external;
            if (external_flow) {
                prepared_external = external_flow->at(k);
                if (spec.prepare) spec.prepare(e.grid.times[static_cast<std::size_t>(k)], prepared_external);
                arg = &prepared_external;
            }
            step_ensemble(e, spec, bundle, k, *arg, threads);
        }
        law.marginals.push_back(std::move(marginal));
    }
    result.bundle = std::move(bundle);
    return result;
}

inline SimulationResult simulate(const CoefficientSpec& spec, const InitialCondition& init,
                                 const TimeGrid& grid, std::int64_t particles, std::uint64_t seed,
                                 int threads = 1) {
    return simulate_with_bundle(spec, init,
                                sample_bundle(seed, grid, particles, spec.d_b, spec.d_w, threads),
                                threads);
}

// Streaming simulation for Markovian coefficients: keeps only the current state
// block and hands each completed block to the consumer. Increments are drawn on
// the fly from the same counter-based streams, bit-identical to the stored-path
// mode.
inline void simulate_streaming(
    const CoefficientSpec& spec, const InitialCondition& init, const TimeGrid& grid,
    std::int64_t particles, std::uint64_t seed,
    const std::function<void(std::int64_t k, double t, std::span<const double> states)>& consume,
    int threads = 1) {
    validate_simulation_args(spec, particles);
    if (!spec.markovian()) throw Error("streaming mode requires Markovian coefficients");
    const int dx = spec.d_x;
    const double dt = grid.dt();
    std::vector<double> states(static_cast<std::size_t>(particles * dx));
    std::vector<double> next(states.size());
    for (std::int64_t i = 0; i < particles; ++i)
        init.sample(seed, i, std::span<double>(states).subspan(static_cast<std::size_t>(i * dx),
                                                               static_cast<std::size_t>(dx)));
    consume(0, 0.0, states);
    std::vector<double> common(static_cast<std::size_t>(spec.d_b));
    for (std::int64_t k = 0; k < grid.steps(); ++k) {
        const double t = grid.times[static_cast<std::size_t>(k)];
        EmpiricalMeasure law = EmpiricalMeasure::from_states(states, particles, dx);
        if (spec.prepare) spec.prepare(t, law);
        for (int c = 0; c < spec.d_b; ++c) common[static_cast<std::size_t>(c)] = common_increment(seed, k, c, dt);
        std::optional<BlowupError> blowup;
        std::mutex blowup_mutex;
        parallel_for(particles, threads, [&](std::int64_t lo, std::int64_t hi) {
            std::vector<double> b(static_cast<std::size_t>(dx));
            std::vector<double> sig(static_cast<std::size_t>(dx * spec.d_w));
            std::vector<double> rho(static_cast<std::size_t>(dx * spec.d_b));
            for (std::int64_t i = lo; i < hi; ++i) {
                const PathView x = PathView::single(
                    std::span<const double>(states).subspan(static_cast<std::size_t>(i * dx),
                                                            static_cast<std::size_t>(dx)));
                spec.drift(t, x, law, b);
                spec.sigma(t, x, law, sig);
                spec.rho(t, x, law, rho);
                for (int r = 0; r < dx; ++r) {
                    double v = states[static_cast<std::size_t>(i * dx + r)] + b[static_cast<std::size_t>(r)] * dt;
                    for (int c = 0; c < spec.d_w; ++c)
                        v += sig[static_cast<std::size_t>(r * spec.d_w + c)] * idio_increment(seed, i, k, c, dt);
                    for (int c = 0; c < spec.d_b; ++c)
                        v += rho[static_cast<std::size_t>(r * spec.d_b + c)] * common[static_cast<std::size_t>(c)];
                    if (!std::isfinite(v)) {
                        std::lock_guard<std::mutex> g(blowup_mutex);
                        if (!blowup) blowup.emplace(i, k);
                        return;
                    }
                    next[static_cast<std::size_t>(i * dx + r)] = v;
                }
            }
        });
        if (blowup) throw *blowup;
        states.swap(next);
        consume(k + 1, grid.times[static_cast<std::size_t>(k + 1)], states);
    }
}

// ---------------------------------------------------------------------------
// Moment and Holder diagnostics.

struct LagPair {
    double s = 0.0;
    double t = 0.0;
};

// Monte-Carlo estimate of E[ sup_{s<=u<=t} |X_u - X_s|^q ] over particles, one
// value per lag pair. Lags must sit on the grid.
inline std::vector<std::pair<double, double>> holder_moment_estimate(
    const ParticleEnsemble& e, double q, const std::vector<LagPair>& lags) {
    if (q < 1.0) throw Error("moment order must be >= 1");
    std::vector<std::pair<double, double>> out;
    out.reserve(lags.size());
    const int dx = e.d_x;
    for (const auto& lag : lags) {
        const std::int64_t ks = e.grid.index_of(lag.s);
        const std::int64_t kt = e.grid.index_of(lag.t);
        if (ks < 0 || kt < 0 || kt <= ks) throw Error("lag misaligned");
        double acc = 0.0;
        for (std::int64_t i = 0; i < e.particles; ++i) {
            const auto x0 = e.state(ks, i);
            double sup2 = 0.0;
            for (std::int64_t k = ks + 1; k <= kt; ++k) {
                const auto xk = e.state(k, i);
                double d2 = 0.0;
                for (int j = 0; j < dx; ++j) {
                    const double c = xk[static_cast<std::size_t>(j)] - x0[static_cast<std::size_t>(j)];
                    d2 += c * c;
                }
                sup2 = std::max(sup2, d2);
            }
            acc += std::pow(sup2, q / 2.0);
        }
        out.emplace_back(lag.t - lag.s, acc / static_cast<double>(e.particles));
    }
    return out;
}

// W_p distance between two time marginals of a law path; exact in 1-D, exact
// small-instance assignment otherwise.
inline double marginal_wp(const ConditionalLawPath& law, std::int64_t ks, std::int64_t kt, double p);

// Per-realisation W_p^p estimates between marginals separated by the lags.
inline std::vector<std::pair<double, double>> wp_distances(const ConditionalLawPath& law,
                                                           const TimeGrid& grid, double p,
                                                           const std::vector<LagPair>& lags) {
    if (!(p > 2.0)) throw Error("wp_holder_check requires p > 2");
    std::vector<std::pair<double, double>> out;
    out.reserve(lags.size());
    for (const auto& lag : lags) {
        const std::int64_t ks = grid.index_of(lag.s);
        const std::int64_t kt = grid.index_of(lag.t);
        if (ks < 0 || kt < 0 || kt <= ks) throw Error("lag misaligned");
        const double w = marginal_wp(law, ks, kt, p);
        out.emplace_back(lag.t - lag.s, std::pow(w, p));
    }
    return out;
}

inline double marginal_wp(const ConditionalLawPath& law, std::int64_t ks, std::int64_t kt,
                          double p) {
    const auto& a = law.at(ks);
    const auto& b = law.at(kt);
    if (a.d == 1) return wasserstein_1d(a, b, p);
    if (a.size() > 256) throw Error("use sliced estimator");
    const auto plan = ot_exact_small(a, b, [p](std::span<const double> x, std::span<const double> y) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) d2 += (x[j] - y[j]) * (x[j] - y[j]);
        return std::pow(std::sqrt(d2), p);
    });
    return std::pow(plan.cost / static_cast<double>(a.size()), 1.0 / p);
}

// Disjoint windows of each width, aligned to the grid.
inline std::vector<LagPair> disjoint_windows(const TimeGrid& grid, double width) {
    std::vector<LagPair> lags;
    const auto count = static_cast<std::int64_t>(std::floor(grid.horizon / width + 1e-9));
    for (std::int64_t j = 0; j < count; ++j) {
        const double s = static_cast<double>(j) * width;
        const double t = s + width;
        if (grid.index_of(s) < 0 || grid.index_of(t) < 0) throw Error("lag misaligned");
        lags.push_back({s, t});
    }
    if (lags.empty()) throw Error("lag misaligned");
    return lags;
}

// Fits the log-log slope of E[W_p^p(mu_t, mu_s)] against the lag width, with
// the expectation taken over seeds and disjoint windows.
template <typename SimulateFn>
inline SlopeFit wp_holder_check(SimulateFn&& simulate_seed, const std::vector<std::uint64_t>& seeds,
                                const TimeGrid& grid, double p, const std::vector<double>& widths,
                                int threads = 1) {
    std::vector<std::vector<double>> samples(widths.size());
    const auto rep = replicate(
        [&](std::uint64_t seed) {
            const ConditionalLawPath law = simulate_seed(seed);
            std::vector<double> means(widths.size());
            for (std::size_t wi = 0; wi < widths.size(); ++wi) {
                const auto lags = disjoint_windows(grid, widths[wi]);
                const auto d = wp_distances(law, grid, p, lags);
                double s = 0.0;
                for (const auto& [lag, val] : d) s += val;
                means[wi] = s / static_cast<double>(d.size());
            }
            return means;
        },
        seeds, threads);
    std::vector<std::pair<double, double>> points;
    for (std::size_t wi = 0; wi < widths.size(); ++wi) {
        double s = 0.0;
        for (const auto& per_seed : rep.results) s += per_seed[wi];
        points.emplace_back(widths[wi], s / static_cast<double>(rep.results.size()));
    }
    return fit_loglog(points);
}

}  // namespace mkv
