#pragma once
// Coefficient triples (b, sigma, rho) for the particle dynamics. Two admissible
// classes are modelled: closed-form Markovian coefficients, reading only the
// current state and the current time marginal, and bounded measurable scalar
// interaction kernels f(t,x,nu) = (1/M) sum_y f~(t,x,y) over the atoms of the
// marginal. Progressive path-dependent coefficients receive the particle's
// discrete history up to the current grid index.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mkv/common.hpp"
#include "mkv/linalg.hpp"
#include "mkv/measure.hpp"
#include "mkv/rng.hpp"

namespace mkv {

// Read-only view of one particle's discrete history up to grid index k.
// Accessing an index beyond k clamps to k, matching the stopped-path argument
// of progressive coefficients.
struct PathView {
    const double* base = nullptr;  // state at grid index 0
    std::int64_t stride = 0;       // doubles between consecutive grid indices
    int d = 1;
    std::int64_t k = 0;            // current grid index

    std::span<const double> at(std::int64_t j) const {
        if (j > k) j = k;
        if (j < 0) j = 0;
        return {base + j * stride, static_cast<std::size_t>(d)};
    }
    std::span<const double> current() const { return {base + k * stride, static_cast<std::size_t>(d)}; }

    static PathView single(std::span<const double> state) {
        return PathView{state.data(), 0, static_cast<int>(state.size()), 0};
    }
};

enum class CoeffForm { closed_form_markovian, scalar_kernel, progressive_path };

using CoeffFn =
    std::function<void(double t, PathView x, const EmpiricalMeasure& m, std::span<double> out)>;

struct CoefficientSpec {
    int d_x = 1, d_w = 1, d_b = 1;
    CoeffForm form = CoeffForm::closed_form_markovian;
    double bound = 1.0;  // declared uniform bound on |b|, |sigma|, |rho|
    bool drift_measure_dependent = false;
    bool sigma_measure_dependent = false;
    bool rho_measure_dependent = false;
    CoeffFn drift;  // out: d_x
    CoeffFn sigma;  // out: d_x * d_w, row-major
    CoeffFn rho;    // out: d_x * d_b, row-major
    // Optional once-per-step hook caching measure reductions in m.summary before
    // the (read-only) particle map runs.
    std::function<void(double t, EmpiricalMeasure& m)> prepare;

    bool markovian() const { return form != CoeffForm::progressive_path; }
    bool measure_dependent() const {
        return drift_measure_dependent || sigma_measure_dependent || rho_measure_dependent;
    }
};

// Interaction kernel f~(t, x, y) with values of a declared target shape.
struct ScalarKernel {
    int d_x = 1;
    int out_size = 1;  // d_x for a drift kernel, d_x*d_w / d_x*d_b for diffusion kernels
    double bound = 1.0;
    std::function<void(double t, std::span<const double> x, std::span<const double> y,
                       std::span<double> out)>
        eval;
};

// Empirical integral of the kernel against the time-t atoms of m.
inline std::vector<double> eval_kernel_coefficient(const ScalarKernel& kernel, double t,
                                                   std::span<const double> x,
                                                   const EmpiricalMeasure& m) {
    if (m.size() == 0) throw Error("degenerate measure");
    std::vector<double> acc(static_cast<std::size_t>(kernel.out_size), 0.0);
    std::vector<double> val(static_cast<std::size_t>(kernel.out_size));
    for (std::int64_t i = 0; i < m.size(); ++i) {
        kernel.eval(t, x, m.atom(i), val);
        for (int j = 0; j < kernel.out_size; ++j) {
            if (!std::isfinite(val[static_cast<std::size_t>(j)])) throw Error("kernel overflow");
            acc[static_cast<std::size_t>(j)] += val[static_cast<std::size_t>(j)];
        }
    }
    for (auto& v : acc) v /= static_cast<double>(m.size());
    return acc;
}

struct CoefficientProbe {
    double t = 0.0;
    std::vector<double> state;
    EmpiricalMeasure measure;
};

// Sampled sup of |b|, |sigma|, |rho| over the probes (Frobenius norms).
// A result <= spec.bound certifies the declared bound on the probe set;
// boundedness is an assumption, so sampling is all that can be checked.
inline double check_bounds(const CoefficientSpec& spec,
                           const std::vector<CoefficientProbe>& probes) {
    if (probes.empty()) throw Error("no probes");
    double sup = 0.0;
    std::vector<double> b(static_cast<std::size_t>(spec.d_x));
    std::vector<double> sig(static_cast<std::size_t>(spec.d_x * spec.d_w));
    std::vector<double> rho(static_cast<std::size_t>(spec.d_x * spec.d_b));
    auto norm = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    for (const auto& probe : probes) {
        EmpiricalMeasure m = probe.measure;
        if (spec.prepare) spec.prepare(probe.t, m);
        const PathView x = PathView::single(probe.state);
        spec.drift(probe.t, x, m, b);
        spec.sigma(probe.t, x, m, sig);
        spec.rho(probe.t, x, m, rho);
        sup = std::max({sup, norm(b), norm(sig), norm(rho)});
    }
    return sup;
}

// Smallest eigenvalue of Sigma Sigma^T over the probes, Sigma = [sigma rho].
// Strictly positive output certifies the sampled non-degeneracy condition.
inline double check_nondegeneracy(const CoefficientSpec& spec,
                                  const std::vector<CoefficientProbe>& probes) {
    if (probes.empty()) throw Error("no probes");
    const int dx = spec.d_x;
    double worst = std::numeric_limits<double>::infinity();
    std::vector<double> sig(static_cast<std::size_t>(dx * spec.d_w));
    std::vector<double> rho(static_cast<std::size_t>(dx * spec.d_b));
    for (const auto& probe : probes) {
        EmpiricalMeasure m = probe.measure;
        if (spec.prepare) spec.prepare(probe.t, m);
        const PathView x = PathView::single(probe.state);
        spec.sigma(probe.t, x, m, sig);
        spec.rho(probe.t, x, m, rho);
        std::vector<double> gram(static_cast<std::size_t>(dx * dx), 0.0);
        for (int i = 0; i < dx; ++i)
            for (int j = 0; j < dx; ++j) {
                double s = 0.0;
                for (int c = 0; c < spec.d_w; ++c)
                    s += sig[static_cast<std::size_t>(i * spec.d_w + c)] * sig[static_cast<std::size_t>(j * spec.d_w + c)];
                for (int c = 0; c < spec.d_b; ++c)
                    s += rho[static_cast<std::size_t>(i * spec.d_b + c)] * rho[static_cast<std::size_t>(j * spec.d_b + c)];
                gram[static_cast<std::size_t>(i * dx + j)] = s;
            }
        for (int i = 0; i < dx; ++i)
            for (int j = i + 1; j < dx; ++j)
                if (std::abs(gram[static_cast<std::size_t>(i * dx + j)] - gram[static_cast<std::size_t>(j * dx + i)]) > 1e-10)
                    throw Error("eigensolver input");
        worst = std::min(worst, jacobi_eigenvalues(gram, dx).front());
    }
    return worst;
}

namespace detail {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(static_cast<std::size_t>(n));
    weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = x;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

}  // namespace detail

// Convolution of the kernel against the scaled bump mollifier. The bump is
// exp(-1/(1-u^2)) in the scaled joint radius u = sqrt(2)|(x,y)|, which vanishes
// whenever |x|+|y| >= 1 and integrates to one; the normalisation uses the same
// tensor-product Gauss-Legendre rule as the convolution, so averaging against
// it preserves constants and the declared bound exactly.
inline ScalarKernel mollify_kernel(const ScalarKernel& kernel, int n, int quadrature_points) {
    if (quadrature_points < 2) throw Error("insufficient quadrature");
    if (n < 1) throw Error("mollification index must be positive");
    const int joint_dim = 2 * kernel.d_x;
    const double radius = 1.0 / std::sqrt(2.0);

    std::vector<double> nodes, weights;
    detail::gauss_legendre(quadrature_points, nodes, weights);
    // Tensor grid over [-radius, radius]^joint_dim with the bump evaluated once.
    std::int64_t total = 1;
    for (int j = 0; j < joint_dim; ++j) {
        total *= quadrature_points;
        if (total > (std::int64_t{1} << 24)) throw Error("quadrature grid too large");
    }
    auto bump = [radius](double r2_scaled) {
        return r2_scaled < 1.0 ? std::exp(-1.0 / (1.0 - r2_scaled)) : 0.0;
    };
    std::vector<double> offsets(static_cast<std::size_t>(total * joint_dim));
    std::vector<double> zeta_w(static_cast<std::size_t>(total));
    double mass = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(joint_dim), 0);
    for (std::int64_t cell = 0; cell < total; ++cell) {
        double w = 1.0;
        double r2 = 0.0;
        for (int j = 0; j < joint_dim; ++j) {
            const double u = nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] * radius;
            offsets[static_cast<std::size_t>(cell * joint_dim + j)] = u;
            w *= weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] * radius;
            r2 += 2.0 * u * u;  // scaled radius squared
        }
        const double zw = w * bump(r2);
        zeta_w[static_cast<std::size_t>(cell)] = zw;
        mass += zw;
        for (int j = joint_dim - 1; j >= 0; --j) {
            if (++idx[static_cast<std::size_t>(j)] < quadrature_points) break;
            idx[static_cast<std::size_t>(j)] = 0;
        }
    }
    for (auto& w : zeta_w) w /= mass;

    ScalarKernel out;
    out.d_x = kernel.d_x;
    out.out_size = kernel.out_size;
    out.bound = kernel.bound;
    const int dx = kernel.d_x;
    const double inv_n = 1.0 / static_cast<double>(n);
    out.eval = [kernel, offsets, zeta_w, total, dx, inv_n](double t, std::span<const double> x,
                                                           std::span<const double> y,
                                                           std::span<double> res) {
        std::vector<double> xs(static_cast<std::size_t>(dx)), ys(static_cast<std::size_t>(dx));
        std::vector<double> val(res.size());
        std::fill(res.begin(), res.end(), 0.0);
        const int joint = 2 * dx;
        for (std::int64_t cell = 0; cell < total; ++cell) {
            const double w = zeta_w[static_cast<std::size_t>(cell)];
            if (w == 0.0) continue;
            for (int j = 0; j < dx; ++j) {
                xs[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] -
                                                  offsets[static_cast<std::size_t>(cell * joint + j)] * inv_n;
                ys[static_cast<std::size_t>(j)] = y[static_cast<std::size_t>(j)] -
                                                  offsets[static_cast<std::size_t>(cell * joint + dx + j)] * inv_n;
            }
            kernel.eval(t, xs, ys, val);
            for (std::size_t j = 0; j < res.size(); ++j) res[j] += w * val[j];
        }
    };
    return out;
}

struct InitialCondition {
    int d = 1;
    double moment_order = 4.0;  // p in (2, inf]
    std::function<void(std::uint64_t seed, std::int64_t index, std::span<double> out)> sample;
};

inline InitialCondition gaussian_initial(int d, double mean, double variance,
                                         double moment_order = 4.0) {
    if (variance < 0.0) throw Error("initial variance must be >= 0");
    if (!(moment_order > 2.0)) throw Error("moment order must lie in (2, inf]");
    InitialCondition init;
    init.d = d;
    init.moment_order = moment_order;
    const double sd = std::sqrt(variance);
    init.sample = [d, mean, sd](std::uint64_t seed, std::int64_t index, std::span<double> out) {
        for (int j = 0; j < d; ++j)
            out[static_cast<std::size_t>(j)] =
                mean + sd * normal_draw(seed, static_cast<std::uint64_t>(index), kInitStep,
                                        static_cast<std::uint32_t>(j));
    };
    return init;
}

// ---------------------------------------------------------------------------
// Builtin model registry (1-D models reachable from the config file).

struct ModelSpec {
    std::string name;
    CoefficientSpec coeffs;
    InitialCondition init;
    std::map<std::string, double> params;
    // Drift interaction kernel when the model is of scalar-kernel form.
    ScalarKernel drift_kernel;
    bool has_drift_kernel = false;
};

namespace detail {

inline double param_or(const std::map<std::string, double>& params, const std::string& key,
                       double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

inline CoeffFn constant_matrix_fn(double value) {
    return [value](double, PathView, const EmpiricalMeasure&, std::span<double> out) {
        out[0] = value;
    };
}

}  // namespace detail

inline const std::map<std::string, std::vector<std::string>>& model_parameter_names() {
    static const std::map<std::string, std::vector<std::string>> names = {
        {"constant", {"b", "sigma", "rho", "mean0", "var0"}},
        {"ou_conditional_mean", {"a", "sigma", "rho", "mean0", "var0"}},
        {"kuramoto_kernel", {"coupling", "sigma", "rho", "mean0", "var0"}},
        {"step_kernel", {"height", "sigma", "rho", "mean0", "var0"}},
    };
    return names;
}

inline ModelSpec make_model(const std::string& name, const std::map<std::string, double>& params) {
    const auto& known = model_parameter_names();
    auto it = known.find(name);
    if (it == known.end()) throw Error("unknown model '" + name + "'");
    for (const auto& [key, value] : params) {
        (void)value;
        if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
            throw Error("unknown parameter '" + key + "' for model '" + name + "'");
    }

    ModelSpec model;
    model.name = name;
    model.params = params;
    const double mean0 = detail::param_or(params, "mean0", 0.0);
    const double var0 = detail::param_or(params, "var0", 1.0);
    const double sigma = detail::param_or(params, "sigma", 1.0);
    const double rho = detail::param_or(params, "rho", 0.0);
    model.init = gaussian_initial(1, mean0, var0);

    CoefficientSpec& c = model.coeffs;
    c.d_x = c.d_w = c.d_b = 1;
    c.sigma = detail::constant_matrix_fn(sigma);
    c.rho = detail::constant_matrix_fn(rho);

    if (name == "constant") {
        const double b = detail::param_or(params, "b", 0.0);
        c.form = CoeffForm::closed_form_markovian;
        c.bound = std::max({std::abs(b), std::abs(sigma), std::abs(rho), 1e-12});
        c.drift = detail::constant_matrix_fn(b);
    } else if (name == "ou_conditional_mean") {
        const double a = detail::param_or(params, "a", 1.0);
        c.form = CoeffForm::closed_form_markovian;
        c.drift_measure_dependent = true;
        c.bound = std::max({std::abs(sigma), std::abs(rho), 1.0});  // |b| bounded only on bounded probes
        c.drift = [a](double, PathView x, const EmpiricalMeasure& m, std::span<double> out) {
            out[0] = a * (m.mean()[0] - x.current()[0]);
        };
    } else if (name == "kuramoto_kernel") {
        const double coupling = detail::param_or(params, "coupling", 1.0);
        c.form = CoeffForm::scalar_kernel;
        c.drift_measure_dependent = true;
        c.bound = std::max({std::abs(coupling), std::abs(sigma), std::abs(rho)});
        // sum_y sin(y - x) = cos(x) E[sin y] - sin(x) E[cos y]; cached per step.
        c.prepare = [](double, EmpiricalMeasure& m) {
            double s = 0.0, cs = 0.0;
            for (std::int64_t i = 0; i < m.size(); ++i) {
                s += std::sin(m.atom(i)[0]);
                cs += std::cos(m.atom(i)[0]);
            }
            m.summary = {s / static_cast<double>(m.size()), cs / static_cast<double>(m.size())};
        };
        c.drift = [coupling](double, PathView x, const EmpiricalMeasure& m, std::span<double> out) {
            const double xi = x.current()[0];
            double s, cs;
            if (m.summary.size() == 2) {
                s = m.summary[0];
                cs = m.summary[1];
            } else {  // no prepared cache: reduce directly
                s = cs = 0.0;
                for (std::int64_t i = 0; i < m.size(); ++i) {
                    s += std::sin(m.atom(i)[0]);
                    cs += std::cos(m.atom(i)[0]);
                }
                s /= static_cast<double>(m.size());
                cs /= static_cast<double>(m.size());
            }
            out[0] = coupling * (std::cos(xi) * s - std::sin(xi) * cs);
        };
        model.has_drift_kernel = true;
        model.drift_kernel.d_x = 1;
        model.drift_kernel.out_size = 1;
        model.drift_kernel.bound = std::abs(coupling);
        model.drift_kernel.eval = [coupling](double, std::span<const double> x,
                                             std::span<const double> y, std::span<double> out) {
            out[0] = coupling * std::sin(y[0] - x[0]);
        };
    } else {  // step_kernel
        const double height = detail::param_or(params, "height", 1.0);
        c.form = CoeffForm::scalar_kernel;
        c.drift_measure_dependent = true;
        c.bound = std::max({std::abs(height), std::abs(sigma), std::abs(rho)});
        ScalarKernel k;
        k.d_x = 1;
        k.out_size = 1;
        k.bound = std::abs(height);
        k.eval = [height](double, std::span<const double> x, std::span<const double> y,
                          std::span<double> out) { out[0] = y[0] > x[0] ? height : 0.0; };
        model.drift_kernel = k;
        model.has_drift_kernel = true;
        c.drift = [k](double t, PathView x, const EmpiricalMeasure& m, std::span<double> out) {
            const auto v = eval_kernel_coefficient(k, t, x.current(), m);
            out[0] = v[0];
        };
    }
    return model;
}

}  // namespace mkv
