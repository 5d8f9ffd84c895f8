#pragma once
// Desk-scale uniqueness machinery: simulation of the driftless reference
// system, Doleans-Dade exponentials of theta = sigma^{-1} b along the driftless
// paths, self-normalised reweighting, the small-time contraction constant
//   alpha(T) = c_tv T + 4 (c_bdg c_tv sqrt(T) + 1/2 c_tv^2 T),
// the tailored coupling cost
//   c*(z1,z2) = 1_{x1 != x2} + d(w1,w2) ^ 1   if (u1,b1) = (u2,b2), else +inf,
// and an empirical total-variation contraction experiment for the law-feedback
// map.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mkv/coefficients.hpp"
#include "mkv/common.hpp"
#include "mkv/ensemble.hpp"
#include "mkv/linalg.hpp"
#include "mkv/stats.hpp"
#include "mkv/transport.hpp"

namespace mkv {

// Plain Euler ensemble for dX0 = sigma dW + rho dB. Requires diffusion
// coefficients that do not read the measure argument.
inline SimulationResult simulate_driftless(const CoefficientSpec& spec,
                                           const InitialCondition& init, const TimeGrid& grid,
                                           std::int64_t particles, std::uint64_t seed,
                                           int threads = 1) {
    if (spec.sigma_measure_dependent || spec.rho_measure_dependent)
        throw Error("Assumption 3.1 violated: diffusion coefficients depend on the measure");
    CoefficientSpec driftless = spec;
    driftless.drift = [](double, PathView, const EmpiricalMeasure&, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
    };
    driftless.drift_measure_dependent = false;
    return simulate(driftless, init, grid, particles, seed, threads);
}

struct GirsanovWeight {
    std::vector<double> log_weight;  // per particle
    std::vector<double> weight;

    std::int64_t size() const { return static_cast<std::int64_t>(weight.size()); }
    double mean_weight() const {
        double s = 0.0;
        for (double w : weight) s += w;
        return s / static_cast<double>(weight.size());
    }
    // Effective sample size ratio sum(w) / max(w).
    double effective_samples() const {
        double s = 0.0, mx = 0.0;
        for (double w : weight) {
            s += w;
            mx = std::max(mx, w);
        }
        return mx > 0.0 ? s / mx : 0.0;
    }
};

// Per particle i:
//   log E^i = sum_j theta^i_j . dW^i_j - 1/2 sum_j |theta^i_j|^2 dt,
// with theta = sigma^{-1}(t_j, X0) b(t_j, X0-history, law_j) frozen at the left
// grid point on the driftless path, truncated at kappa(T).
inline GirsanovWeight doleans_weight(const ParticleEnsemble& driftless, const NoiseBundle& bundle,
                                     const CoefficientSpec& drifted_spec,
                                     const ConditionalLawPath& law_path, double horizon) {
    if (drifted_spec.d_x != drifted_spec.d_w)
        throw Error("Assumption 3.1 violated: requires d_x = d_w");
    if (bundle.grid.steps() != driftless.grid.steps() || bundle.particles != driftless.particles ||
        law_path.steps() != driftless.grid.steps())
        throw Error("misaligned inputs");
    const int d = drifted_spec.d_x;
    const std::int64_t kT = driftless.grid.kappa_index(horizon);
    const double dt = driftless.grid.dt();
    GirsanovWeight gw;
    gw.log_weight.assign(static_cast<std::size_t>(driftless.particles), 0.0);
    gw.weight.assign(static_cast<std::size_t>(driftless.particles), 0.0);

    std::vector<double> sig(static_cast<std::size_t>(d * d));
    std::vector<double> sig_inv(static_cast<std::size_t>(d * d));
    std::vector<double> b(static_cast<std::size_t>(d));
    std::vector<double> theta(static_cast<std::size_t>(d));
    std::vector<EmpiricalMeasure> prepared;
    prepared.reserve(static_cast<std::size_t>(kT));
    for (std::int64_t k = 0; k < kT; ++k) {
        EmpiricalMeasure m = law_path.at(k);
        if (drifted_spec.prepare) drifted_spec.prepare(driftless.grid.times[static_cast<std::size_t>(k)], m);
        prepared.push_back(std::move(m));
    }

    for (std::int64_t i = 0; i < driftless.particles; ++i) {
        double acc = 0.0;
        for (std::int64_t k = 0; k < kT; ++k) {
            const double t = driftless.grid.times[static_cast<std::size_t>(k)];
            const PathView history = driftless.path_view(i, k);
            drifted_spec.sigma(t, history, prepared[static_cast<std::size_t>(k)], sig);
            drifted_spec.drift(t, history, prepared[static_cast<std::size_t>(k)], b);
            if (condition_number(sig, d) > 1e12) throw Error("sigma not invertible");
            if (!invert_matrix(sig, d, sig_inv)) throw Error("sigma not invertible");
            double norm2 = 0.0;
            for (int r = 0; r < d; ++r) {
                double v = 0.0;
                for (int c = 0; c < d; ++c)
                    v += sig_inv[static_cast<std::size_t>(r * d + c)] * b[static_cast<std::size_t>(c)];
                theta[static_cast<std::size_t>(r)] = v;
                norm2 += v * v;
            }
            const auto dw = bundle.idio_at(k, i);
            double dot = 0.0;
            for (int r = 0; r < d; ++r) dot += theta[static_cast<std::size_t>(r)] * dw[static_cast<std::size_t>(r)];
            acc += dot - 0.5 * norm2 * dt;
        }
        gw.log_weight[static_cast<std::size_t>(i)] = acc;
        gw.weight[static_cast<std::size_t>(i)] = std::exp(acc);
    }
    return gw;
}

struct ReweightedResult {
    double value = 0.0;
    double effective_samples = 0.0;
    bool weight_degeneracy = false;  // effective_samples < 10
};

// Self-normalised importance estimator sum_i w_i f_i / sum_i w_i.
inline ReweightedResult reweighted_expectation(const GirsanovWeight& weights,
                                               const std::vector<double>& functional) {
    if (static_cast<std::int64_t>(functional.size()) != weights.size())
        throw Error("weights and functional must be index-aligned");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < functional.size(); ++i) {
        num += weights.weight[i] * functional[i];
        den += weights.weight[i];
    }
    ReweightedResult r;
    r.value = num / den;
    r.effective_samples = weights.effective_samples();
    r.weight_degeneracy = r.effective_samples < 10.0;
    return r;
}

struct ContractionParams {
    double c_tv = 0.0;
    double c_bdg = 2.0;
};

inline double contraction_alpha(const ContractionParams& p, double horizon) {
    if (p.c_tv < 0.0 || p.c_bdg < 0.0 || horizon < 0.0) throw Error("contraction constants must be >= 0");
    return p.c_tv * horizon +
           4.0 * (p.c_bdg * p.c_tv * std::sqrt(horizon) + 0.5 * p.c_tv * p.c_tv * horizon);
}

// Largest T with alpha(T) <= target: alpha is a quadratic in s = sqrt(T) with
// non-negative coefficients, so the positive root gives T* = s*^2. Returns
// +infinity when c_tv = 0.
inline double solve_contraction_horizon(const ContractionParams& p, double target_alpha) {
    if (!(target_alpha > 0.0)) throw Error("target alpha must be positive");
    if (p.c_tv == 0.0) return std::numeric_limits<double>::infinity();
    const double a = p.c_tv + 2.0 * p.c_tv * p.c_tv;  // s^2 coefficient
    const double b = 4.0 * p.c_bdg * p.c_tv;          // s coefficient
    double s = 0.0;
    if (a == 0.0) {
        s = target_alpha / b;
    } else {
        s = (-b + std::sqrt(b * b + 4.0 * a * target_alpha)) / (2.0 * a);
    }
    return s * s;
}

// ---------------------------------------------------------------------------
// Tailored coupling cost c*.

struct CoupledSample {
    std::vector<double> x_path;  // (steps+1) x d_x
    std::vector<double> w_path;  // (steps+1) x d_w
    std::uint64_t tag_seed = 0;            // the u of (u, b): the run's seed tuple
    std::vector<double> tag_common;        // the b of (u, b): the common increment array
};

struct CouplingCostSpec {
    double tol_eq = 1e-9;  // sup-norm tolerance for the path-equality indicator
};

namespace detail {

inline double sup_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace detail

inline bool tags_equal(const CoupledSample& a, const CoupledSample& b) {
    return a.tag_seed == b.tag_seed && a.tag_common == b.tag_common;
}

inline double coupling_cost(const CoupledSample& a, const CoupledSample& b,
                            const CouplingCostSpec& spec) {
    if (!tags_equal(a, b)) return std::numeric_limits<double>::infinity();
    const double x_mismatch = detail::sup_norm_diff(a.x_path, b.x_path) < spec.tol_eq ? 0.0 : 1.0;
    const double w_dist = std::min(detail::sup_norm_diff(a.w_path, b.w_path), 1.0);
    return x_mismatch + w_dist;
}

// Optimal assignment cost between two runs' samples under c*.
inline double coupling_cost_estimate(const std::vector<CoupledSample>& run1,
                                     const std::vector<CoupledSample>& run2,
                                     const CouplingCostSpec& spec,
                                     TransportPlan* plan_out = nullptr) {
    const auto m = static_cast<std::int64_t>(run1.size());
    if (m == 0 || static_cast<std::int64_t>(run2.size()) != m)
        throw Error("coupling_cost_estimate requires equal sample counts");
    if (m > 256) throw Error("instance too large for exact solver");
    // Index atoms; costs are looked up from the sample lists.
    std::vector<double> ia(static_cast<std::size_t>(m)), ib(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < m; ++i) {
        ia[static_cast<std::size_t>(i)] = static_cast<double>(i);
        ib[static_cast<std::size_t>(i)] = static_cast<double>(i);
    }
    const EmpiricalMeasure ma(1, ia), mb(1, ib);
    auto plan = ot_exact_small(ma, mb, [&](std::span<const double> x, std::span<const double> y) {
        return coupling_cost(run1[static_cast<std::size_t>(std::llround(x[0]))],
                             run2[static_cast<std::size_t>(std::llround(y[0]))], spec);
    });
    if (plan_out) *plan_out = plan;
    return plan.cost;
}

// Extracts coupled samples (X path, W path, tags) from a simulation.
inline std::vector<CoupledSample> coupled_samples(const SimulationResult& sim, std::int64_t count) {
    const auto& e = sim.ensemble;
    if (count > e.particles) throw Error("not enough particles for the requested sample count");
    const std::int64_t steps = e.grid.steps();
    std::vector<CoupledSample> out(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        auto& s = out[static_cast<std::size_t>(i)];
        s.tag_seed = e.seed;
        s.tag_common = sim.bundle.common_increments;
        s.x_path.resize(static_cast<std::size_t>((steps + 1) * e.d_x));
        for (std::int64_t k = 0; k <= steps; ++k) {
            const auto x = e.state(k, i);
            for (int j = 0; j < e.d_x; ++j)
                s.x_path[static_cast<std::size_t>(k * e.d_x + j)] = x[static_cast<std::size_t>(j)];
        }
        s.w_path.assign(static_cast<std::size_t>((steps + 1) * sim.bundle.d_w), 0.0);
        for (std::int64_t k = 0; k < steps; ++k) {
            const auto dw = sim.bundle.idio_at(k, i);
            for (int j = 0; j < sim.bundle.d_w; ++j)
                s.w_path[static_cast<std::size_t>((k + 1) * sim.bundle.d_w + j)] =
                    s.w_path[static_cast<std::size_t>(k * sim.bundle.d_w + j)] + dw[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Empirical TV contraction of the law-feedback map.

struct ContractionReport {
    double alpha = 0.0;
    double bin_width = 0.0;
    std::vector<double> times;
    // tv[iteration][time index]: mean over seeds of d_TV between the two runs'
    // flows after `iteration` applications of the law-feedback map.
    std::vector<std::vector<double>> tv;
    std::vector<double> sup_tv;       // per iteration, sup over time of the seed-mean TV
    std::vector<double> decay_ratio;  // sup_tv[m+1] / sup_tv[m] while above resolution
};

struct ContractionConfig {
    ContractionParams params;
    double horizon = 0.0;      // T; must satisfy alpha(T) < 1
    int iterations = 8;
    double perturbation = 0.5; // shift applied to run 1's bootstrap ensemble
    double bin_width = 0.0;    // 0: Scott's rule on the unperturbed initial ensemble
};

// Runs two particle systems with identical (xi, B, W); run 1 bootstraps its
// law flow from a perturbed initial ensemble. Each iteration re-simulates both
// systems reading the previous iteration's flow and reports the TV distance
// between the resulting flows, which contracts like the fixed-point map.
inline ContractionReport tv_contraction_experiment(const CoefficientSpec& spec,
                                                   const InitialCondition& init,
                                                   const TimeGrid& grid, std::int64_t particles,
                                                   const std::vector<std::uint64_t>& seeds,
                                                   const ContractionConfig& cfg, int threads = 1) {
    const double alpha = contraction_alpha(cfg.params, cfg.horizon);
    if (alpha >= 1.0) throw Error("no contraction guarantee at this T");
    if (spec.sigma_measure_dependent || spec.rho_measure_dependent)
        throw Error("Assumption 3.1 violated: diffusion coefficients depend on the measure");
    if (cfg.iterations < 1) throw Error("need at least one iteration");

    ContractionReport rep;
    rep.alpha = alpha;
    rep.times = grid.times;
    const auto steps = grid.steps();
    rep.tv.assign(static_cast<std::size_t>(cfg.iterations) + 1,
                  std::vector<double>(static_cast<std::size_t>(steps + 1), 0.0));

    double bin_width = cfg.bin_width;
    for (std::uint64_t seed : seeds) {
        NoiseBundle bundle = sample_bundle(seed, grid, particles, spec.d_b, spec.d_w, threads);

        // Bootstrap flows: constant-in-time empirical measures of the initial
        // ensemble (run 2) and of the perturbed initial ensemble (run 1).
        std::vector<double> init_states(static_cast<std::size_t>(particles * spec.d_x));
        for (std::int64_t i = 0; i < particles; ++i)
            init.sample(seed, i, std::span<double>(init_states).subspan(
                static_cast<std::size_t>(i * spec.d_x), static_cast<std::size_t>(spec.d_x)));
        EmpiricalMeasure base = EmpiricalMeasure::from_states(init_states, particles, spec.d_x);
        std::vector<double> shifted(init_states);
        for (auto& v : shifted) v += cfg.perturbation;
        EmpiricalMeasure perturbed = EmpiricalMeasure::from_states(shifted, particles, spec.d_x);
        if (bin_width <= 0.0) bin_width = scott_bin_width(base);

        ConditionalLawPath flow1, flow2;
        flow1.times = flow2.times = grid.times;
        flow1.marginals.assign(static_cast<std::size_t>(steps + 1), perturbed);
        flow2.marginals.assign(static_cast<std::size_t>(steps + 1), base);

        for (int m = 0; m <= cfg.iterations; ++m) {
            for (std::int64_t k = 0; k <= steps; ++k) {
                const auto box = bounding_box_of(flow1.at(k), flow2.at(k));
                rep.tv[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] +=
                    tv_histogram(flow1.at(k), flow2.at(k), bin_width, box) /
                    static_cast<double>(seeds.size());
            }
            if (m == cfg.iterations) break;
            auto next1 = simulate_with_bundle(spec, init, bundle, threads, &flow1);
            auto next2 = simulate_with_bundle(spec, init, bundle, threads, &flow2);
            flow1 = std::move(next1.law_path);
            flow2 = std::move(next2.law_path);
        }
    }
    rep.bin_width = bin_width;
    for (const auto& per_time : rep.tv) {
        double sup = 0.0;
        for (double v : per_time) sup = std::max(sup, v);
        rep.sup_tv.push_back(sup);
    }
    const double resolution = 2.0 / static_cast<double>(particles);
    for (std::size_t m = 0; m + 1 < rep.sup_tv.size(); ++m) {
        if (rep.sup_tv[m] < resolution) break;
        rep.decay_ratio.push_back(rep.sup_tv[m + 1] / rep.sup_tv[m]);
    }
    return rep;
}

// Empirical TV-Lipschitz constant of sigma^{-1} b over probe measure pairs:
// sup |sigma^{-1} b(t,x,mu) - sigma^{-1} b(t,x,nu)| / d_TV(mu, nu).
inline double estimate_c_tv(const CoefficientSpec& spec, const std::vector<double>& probe_states,
                            const std::vector<std::pair<EmpiricalMeasure, EmpiricalMeasure>>& pairs,
                            double bin_width) {
    const int d = spec.d_x;
    if (spec.d_w != d) throw Error("Assumption 3.1 violated: requires d_x = d_w");
    std::vector<double> sig(static_cast<std::size_t>(d * d)), sig_inv(static_cast<std::size_t>(d * d));
    std::vector<double> b1(static_cast<std::size_t>(d)), b2(static_cast<std::size_t>(d));
    double sup = 0.0;
    for (const auto& [mu, nu] : pairs) {
        const double tv = tv_histogram(mu, nu, bin_width, bounding_box_of(mu, nu));
        if (tv <= 0.0) continue;
        EmpiricalMeasure pmu = mu, pnu = nu;
        if (spec.prepare) {
            spec.prepare(0.0, pmu);
            spec.prepare(0.0, pnu);
        }
        for (std::size_t si = 0; si + d <= probe_states.size(); si += static_cast<std::size_t>(d)) {
            const std::span<const double> x(probe_states.data() + si, static_cast<std::size_t>(d));
            const PathView view = PathView::single(x);
            spec.sigma(0.0, view, pmu, sig);
            if (!invert_matrix(sig, d, sig_inv)) throw Error("sigma not invertible");
            spec.drift(0.0, view, pmu, b1);
            spec.drift(0.0, view, pnu, b2);
            double diff2 = 0.0;
            for (int r = 0; r < d; ++r) {
                double v = 0.0;
                for (int c = 0; c < d; ++c)
                    v += sig_inv[static_cast<std::size_t>(r * d + c)] *
                         (b1[static_cast<std::size_t>(c)] - b2[static_cast<std::size_t>(c)]);
                diff2 += v * v;
            }
            sup = std::max(sup, std::sqrt(diff2) / tv);
        }
    }
    return sup;
}

}  // namespace mkv
