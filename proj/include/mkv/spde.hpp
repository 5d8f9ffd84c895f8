#pragma once
// Residual checks for the measure-valued dynamics of the time marginals:
//   <nu_t, phi> = <nu_0, phi> + int <nu_s, L phi> ds + int <nu_s, d_x phi rho> dB_s
// with L phi = b . grad phi + 1/2 trace((sigma sigma^T + rho rho^T) hess phi),
// evaluated on the simulated ensemble with left-point (Ito) quadrature. Also
// the discrete Fubini-type interchange identities for conditional expectations
// of stochastic integrals, with the conditional expectation given the common
// noise realised as the cross-particle average.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mkv/coefficients.hpp"
#include "mkv/common.hpp"
#include "mkv/ensemble.hpp"
#include "mkv/test_functions.hpp"

namespace mkv {

// L phi at a point: b(t,x,m) . grad phi(x) + 1/2 sum_jl (sigma sigma^T + rho rho^T)_jl hess_jl.
inline double apply_generator(const CoefficientSpec& spec, const TestFunction& phi, double t,
                              std::span<const double> x, const EmpiricalMeasure& m) {
    if (!spec.markovian()) throw Error("generator requires Markovian coefficients");
    const int dx = spec.d_x;
    EmpiricalMeasure prepared = m;
    if (spec.prepare) spec.prepare(t, prepared);
    const PathView view = PathView::single(x);
    std::vector<double> b(static_cast<std::size_t>(dx));
    std::vector<double> sig(static_cast<std::size_t>(dx * spec.d_w));
    std::vector<double> rho(static_cast<std::size_t>(dx * spec.d_b));
    spec.drift(t, view, prepared, b);
    spec.sigma(t, view, prepared, sig);
    spec.rho(t, view, prepared, rho);
    std::vector<double> grad(static_cast<std::size_t>(dx));
    std::vector<double> hess(static_cast<std::size_t>(dx * dx));
    phi.gradient(x, grad);
    phi.hessian(x, hess);
    double out = 0.0;
    for (int j = 0; j < dx; ++j) out += b[static_cast<std::size_t>(j)] * grad[static_cast<std::size_t>(j)];
    for (int j = 0; j < dx; ++j)
        for (int l = 0; l < dx; ++l) {
            double a = 0.0;
            for (int c = 0; c < spec.d_w; ++c)
                a += sig[static_cast<std::size_t>(j * spec.d_w + c)] * sig[static_cast<std::size_t>(l * spec.d_w + c)];
            for (int c = 0; c < spec.d_b; ++c)
                a += rho[static_cast<std::size_t>(j * spec.d_b + c)] * rho[static_cast<std::size_t>(l * spec.d_b + c)];
            out += 0.5 * a * hess[static_cast<std::size_t>(j * dx + l)];
        }
    return out;
}

struct SpdeResidualReport {
    std::string phi_id;
    std::vector<double> times;
    std::vector<double> residual;    // r(t_k)
    std::vector<double> value_term;  // <nu_t, phi> - <nu_0, phi>
    std::vector<double> drift_term;  // cumulative sum of <nu_s, b . grad phi> dt
    std::vector<double> trace_term;  // cumulative sum of <nu_s, 1/2 tr(...) hess phi> dt
    std::vector<double> db_term;     // cumulative sum of <nu_s, grad phi . rho> dB

    double sup_abs_residual() const {
        double m = 0.0;
        for (double r : residual) m = std::max(m, std::abs(r));
        return m;
    }
};

// r(t_k) := <nu_k, phi> - <nu_0, phi> - sum_{j<k} <nu_j, L phi> dt
//                         - sum_{j<k} <nu_j, grad phi . rho> dB_j.
inline SpdeResidualReport spde_residual(const ParticleEnsemble& e, const ConditionalLawPath& law,
                                        const CoefficientSpec& spec, const TestFunction& phi,
                                        const NoiseBundle& bundle) {
    if (!spec.markovian()) throw Error("generator requires Markovian coefficients");
    if (law.steps() != e.grid.steps() || bundle.grid.steps() != e.grid.steps() ||
        bundle.particles != e.particles)
        throw Error("misaligned inputs");
    const int dx = e.d_x;
    const std::int64_t steps = e.grid.steps();
    SpdeResidualReport rep;
    rep.phi_id = phi.id;
    rep.times = e.grid.times;
    rep.residual.resize(static_cast<std::size_t>(steps + 1));
    rep.value_term.resize(static_cast<std::size_t>(steps + 1));
    rep.drift_term.resize(static_cast<std::size_t>(steps + 1));
    rep.trace_term.resize(static_cast<std::size_t>(steps + 1));
    rep.db_term.resize(static_cast<std::size_t>(steps + 1));

    auto mean_phi = [&](std::int64_t k) {
        double s = 0.0;
        for (std::int64_t i = 0; i < e.particles; ++i) s += phi.value(e.state(k, i));
        return s / static_cast<double>(e.particles);
    };
    const double phi0 = mean_phi(0);
    const double dt = e.grid.dt();

    std::vector<double> b(static_cast<std::size_t>(dx));
    std::vector<double> sig(static_cast<std::size_t>(dx * spec.d_w));
    std::vector<double> rhoc(static_cast<std::size_t>(dx * spec.d_b));
    std::vector<double> grad(static_cast<std::size_t>(dx));
    std::vector<double> hess(static_cast<std::size_t>(dx * dx));

    double acc_drift = 0.0, acc_trace = 0.0, acc_db = 0.0;
    rep.residual[0] = 0.0;
    for (std::int64_t k = 0; k < steps; ++k) {
        const double t = e.grid.times[static_cast<std::size_t>(k)];
        EmpiricalMeasure marginal = law.at(k);
        if (spec.prepare) spec.prepare(t, marginal);
        double drift_mean = 0.0, trace_mean = 0.0;
        std::vector<double> db_mean(static_cast<std::size_t>(spec.d_b), 0.0);
        for (std::int64_t i = 0; i < e.particles; ++i) {
            const auto x = e.state(k, i);
            const PathView view = PathView::single(x);
            spec.drift(t, view, marginal, b);
            spec.sigma(t, view, marginal, sig);
            spec.rho(t, view, marginal, rhoc);
            phi.gradient(x, grad);
            phi.hessian(x, hess);
            for (int j = 0; j < dx; ++j) drift_mean += b[static_cast<std::size_t>(j)] * grad[static_cast<std::size_t>(j)];
            for (int j = 0; j < dx; ++j)
                for (int l = 0; l < dx; ++l) {
                    double a = 0.0;
                    for (int c = 0; c < spec.d_w; ++c)
                        a += sig[static_cast<std::size_t>(j * spec.d_w + c)] *
                             sig[static_cast<std::size_t>(l * spec.d_w + c)];
                    for (int c = 0; c < spec.d_b; ++c)
                        a += rhoc[static_cast<std::size_t>(j * spec.d_b + c)] *
                             rhoc[static_cast<std::size_t>(l * spec.d_b + c)];
                    trace_mean += 0.5 * a * hess[static_cast<std::size_t>(j * dx + l)];
                }
            for (int c = 0; c < spec.d_b; ++c) {
                double g = 0.0;
                for (int j = 0; j < dx; ++j)
                    g += grad[static_cast<std::size_t>(j)] * rhoc[static_cast<std::size_t>(j * spec.d_b + c)];
                db_mean[static_cast<std::size_t>(c)] += g;
            }
        }
        const double inv_n = 1.0 / static_cast<double>(e.particles);
        acc_drift += drift_mean * inv_n * dt;
        acc_trace += trace_mean * inv_n * dt;
        const auto dB = bundle.common_at(k);
        for (int c = 0; c < spec.d_b; ++c)
            acc_db += db_mean[static_cast<std::size_t>(c)] * inv_n * dB[static_cast<std::size_t>(c)];
        rep.value_term[static_cast<std::size_t>(k + 1)] = mean_phi(k + 1) - phi0;
        rep.drift_term[static_cast<std::size_t>(k + 1)] = acc_drift;
        rep.trace_term[static_cast<std::size_t>(k + 1)] = acc_trace;
        rep.db_term[static_cast<std::size_t>(k + 1)] = acc_db;
        rep.residual[static_cast<std::size_t>(k + 1)] =
            rep.value_term[static_cast<std::size_t>(k + 1)] - acc_drift - acc_trace - acc_db;
    }
    return rep;
}

enum class FubiniTarget { dW, dB };

// Bounded predictable per-particle integrand H^i_j, evaluated from the history
// up to grid index j.
struct FubiniIntegrand {
    double bound = 1.0;
    std::function<double(std::int64_t particle, std::int64_t step, PathView history)> eval;
};

// For dW: residual_t = (1/N) sum_i sum_{j<k} H^i_j dW^i_j, which is an average
// of centred martingale increments and shrinks like N^{-1/2}. For dB: the
// cross-particle average and the dB sum commute exactly, so
// residual_t = (1/N) sum_i sum_j H^i_j dB_j - sum_j ((1/N) sum_i H^i_j) dB_j
// vanishes to rounding.
inline std::vector<double> fubini_residual(const ParticleEnsemble& e, const NoiseBundle& bundle,
                                           const FubiniIntegrand& H, FubiniTarget target) {
    if (bundle.grid.steps() != e.grid.steps() || bundle.particles != e.particles)
        throw Error("misaligned inputs");
    if (e.d_x < 1) throw Error("empty ensemble");
    if ((target == FubiniTarget::dW && bundle.d_w != 1) ||
        (target == FubiniTarget::dB && bundle.d_b != 1))
        throw Error("fubini_residual requires scalar noise in the chosen target");
    const std::int64_t steps = e.grid.steps();
    const std::int64_t n = e.particles;
    std::vector<double> residual(static_cast<std::size_t>(steps + 1), 0.0);
    std::vector<double> hval(static_cast<std::size_t>(n));
    if (target == FubiniTarget::dW) {
        double acc = 0.0;
        for (std::int64_t j = 0; j < steps; ++j) {
            double inc = 0.0;
            for (std::int64_t i = 0; i < n; ++i) {
                const double h = H.eval(i, j, e.path_view(i, j));
                if (std::abs(h) > H.bound) throw Error("integrand bound violated");
                inc += h * bundle.idio_at(j, i)[0];
            }
            acc += inc / static_cast<double>(n);
            residual[static_cast<std::size_t>(j + 1)] = acc;
        }
    } else {
        double acc_lhs = 0.0, acc_rhs = 0.0;
        for (std::int64_t j = 0; j < steps; ++j) {
            const double db = bundle.common_at(j)[0];
            double mean_h = 0.0;
            double lhs_inc = 0.0;
            for (std::int64_t i = 0; i < n; ++i) {
                const double h = H.eval(i, j, e.path_view(i, j));
                if (std::abs(h) > H.bound) throw Error("integrand bound violated");
                hval[static_cast<std::size_t>(i)] = h;
                mean_h += h;
                lhs_inc += h * db;
            }
            acc_lhs += lhs_inc / static_cast<double>(n);
            acc_rhs += (mean_h / static_cast<double>(n)) * db;
            residual[static_cast<std::size_t>(j + 1)] = acc_lhs - acc_rhs;
        }
    }
    return residual;
}

}  // namespace mkv
