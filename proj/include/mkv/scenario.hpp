#pragma once
// Scenario orchestration: runs one configured diagnostic, writes its CSV
// tables, a plot-description sidecar, and a manifest recording the config
// hash, seed, version and wall time. Exit codes: 0 success, 2 assertion
// violation (when enabled), 1 error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mkv/config.hpp"
#include "mkv/csv.hpp"
#include "mkv/ensemble.hpp"
#include "mkv/girsanov.hpp"
#include "mkv/spde.hpp"
#include "mkv/stats.hpp"
#include "mkv/transport.hpp"

namespace mkv {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
    bool assert_mode = false;
    int threads = 1;
    std::ostream* log = &std::cout;
};

namespace detail {

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct PlotSeries {
    std::string file, x_col, y_col, label;
};

struct PlotSpec {
    std::string title, x_label, y_label;
    std::vector<PlotSeries> series;
};

class ScenarioOutput {
public:
    ScenarioOutput(const ScenarioConfig& cfg, const RunOptions& opts)
        : cfg_(cfg), opts_(opts), start_(std::chrono::steady_clock::now()) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.output_dir, ec);
        const auto probe = std::filesystem::path(cfg.output_dir) / ".write_probe";
        std::ofstream test(probe);
        if (!test) throw Error("output_dir '" + cfg.output_dir + "' is not writable");
        test.close();
        std::filesystem::remove(probe, ec);
    }

    std::string path(const std::string& name) {
        files_.push_back(name);
        return (std::filesystem::path(cfg_.output_dir) / name).string();
    }

    void add_plot(PlotSpec plot) { plots_.push_back(std::move(plot)); }

    void fail_assert(const std::string& message) {
        if (opts_.assert_mode) {
            violations_.push_back(message);
        } else {
            *opts_.log << "note (assertion not enforced): " << message << "\n";
        }
    }

    // Writes plot sidecar + manifest; returns the exit code.
    int finish() {
        if (!plots_.empty()) {
            nlohmann::json j;
            j["plots"] = nlohmann::json::array();
            for (const auto& p : plots_) {
                nlohmann::json jp;
                jp["title"] = p.title;
                jp["x_label"] = p.x_label;
                jp["y_label"] = p.y_label;
                jp["series"] = nlohmann::json::array();
                for (const auto& s : p.series)
                    jp["series"].push_back({{"file", s.file},
                                            {"x_col", s.x_col},
                                            {"y_col", s.y_col},
                                            {"label", s.label}});
                j["plots"].push_back(jp);
            }
            std::ofstream out(path("plot.json"), std::ios::binary);
            out << j.dump(2) << "\n";
        }
        const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        nlohmann::json manifest;
        manifest["version"] = kVersion;
        manifest["scenario"] = cfg_.scenario;
        manifest["seed"] = cfg_.seed;
        manifest["config_hash"] = fnv1a64(cfg_.text);
        manifest["threads"] = opts_.threads;
        manifest["wall_time_s"] = elapsed;
        manifest["files"] = files_;
        if (!extra_.is_null()) manifest["results"] = extra_;
        std::ofstream out((std::filesystem::path(cfg_.output_dir) / "manifest.json").string(),
                          std::ios::binary);
        out << manifest.dump(2) << "\n";
        if (!violations_.empty()) {
            for (const auto& v : violations_) *opts_.log << "ASSERT FAILED: " << v << "\n";
            return 2;
        }
        return 0;
    }

    nlohmann::json& results() { return extra_; }

private:
    const ScenarioConfig& cfg_;
    const RunOptions& opts_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> files_;
    std::vector<PlotSpec> plots_;
    std::vector<std::string> violations_;
    nlohmann::json extra_;
};

inline std::vector<LagPair> all_windows(const TimeGrid& grid, const std::vector<double>& widths,
                                        std::vector<std::size_t>& width_of) {
    std::vector<LagPair> lags;
    width_of.clear();
    for (std::size_t wi = 0; wi < widths.size(); ++wi) {
        for (const auto& lag : disjoint_windows(grid, widths[wi])) {
            lags.push_back(lag);
            width_of.push_back(wi);
        }
    }
    return lags;
}

// ---- simulate ----
inline int run_simulate(const ScenarioConfig& cfg, const RunOptions& opts, ScenarioOutput& out) {
    const ModelSpec model = make_model(cfg.model_name, cfg.model_params);
    const TimeGrid grid = make_grid(cfg.mesh, cfg.horizon);
    CsvWriter moments(out.path("moments.csv"), {"time", "mean_1", "var_1"});
    if (cfg.storage == "streaming") {
        simulate_streaming(
            model.coeffs, model.init, grid, cfg.particles, cfg.seed,
            [&](std::int64_t k, double t, std::span<const double> states) {
                (void)k;
                const auto m = EmpiricalMeasure::from_states(states, cfg.particles, 1);
                moments.row({cell(t), cell(m.mean()[0]), cell(m.variance()[0])});
            },
            opts.threads);
    } else {
        const auto sim = simulate(model.coeffs, model.init, grid, cfg.particles, cfg.seed, opts.threads);
        CsvWriter traj(out.path("trajectory.csv"), {"step", "time", "particle", "coord", "value"});
        for (std::int64_t k = 0; k <= grid.steps(); ++k)
            for (std::int64_t i = 0; i < cfg.particles; ++i)
                for (int c = 0; c < sim.ensemble.d_x; ++c)
                    traj.row({cell(k), cell(grid.times[static_cast<std::size_t>(k)]), cell(i), cell(c),
                              cell(sim.ensemble.state(k, i)[static_cast<std::size_t>(c)])});
        for (std::int64_t k = 0; k <= grid.steps(); ++k) {
            const auto& m = sim.law_path.at(k);
            moments.row({cell(grid.times[static_cast<std::size_t>(k)]), cell(m.mean()[0]),
                         cell(m.variance()[0])});
        }
    }
    out.add_plot({"conditional moments", "time", "mean / variance",
                  {{"moments.csv", "time", "mean_1", "conditional mean"},
                   {"moments.csv", "time", "var_1", "conditional variance"}}});
    return 0;
}

// ---- holder_check ----
inline int run_holder(const ScenarioConfig& cfg, const RunOptions& opts, ScenarioOutput& out) {
    const ModelSpec model = make_model(cfg.model_name, cfg.model_params);
    const TimeGrid grid = make_grid(cfg.mesh, cfg.horizon);
    std::vector<std::size_t> width_of;
    const auto lags = all_windows(grid, cfg.lags, width_of);
    const auto rep = replicate(
        [&](std::uint64_t seed) {
            const auto sim = simulate(model.coeffs, model.init, grid, cfg.particles, seed, 1);
            const auto est = holder_moment_estimate(sim.ensemble, cfg.q, lags);
            std::vector<double> sums(cfg.lags.size(), 0.0), counts(cfg.lags.size(), 0.0);
            for (std::size_t j = 0; j < est.size(); ++j) {
                sums[width_of[j]] += est[j].second;
                counts[width_of[j]] += 1.0;
            }
            for (std::size_t w = 0; w < sums.size(); ++w) sums[w] /= counts[w];
            return sums;
        },
        seed_range(cfg.seed, cfg.replications), opts.threads);
    std::vector<std::pair<double, double>> points;
    for (std::size_t w = 0; w < cfg.lags.size(); ++w) {
        double s = 0.0;
        for (const auto& r : rep.results) s += r[w];
        points.emplace_back(cfg.lags[w], s / static_cast<double>(rep.results.size()));
    }
    const SlopeFit fit = fit_loglog(points);
    CsvWriter pts(out.path("holder_points.csv"), {"lag", "estimate"});
    for (const auto& [lag, est] : points) pts.row({cell(lag), cell(est)});
    CsvWriter fitcsv(out.path("holder_fit.csv"), {"slope", "intercept", "stderr"});
    fitcsv.row({cell(fit.slope), cell(fit.intercept), cell(fit.stderr_slope)});
    out.add_plot({"sup-increment moment", "lag", "estimate",
                  {{"holder_points.csv", "lag", "estimate", "E sup |X_u - X_s|^q"}}});
    out.results()["slope"] = fit.slope;
    *opts.log << "holder_check: slope = " << fit.slope << " (stderr " << fit.stderr_slope << ")\n";
    if (cfg.asserts.slope_min && fit.slope < *cfg.asserts.slope_min)
        out.fail_assert("slope " + format_double(fit.slope) + " below " + format_double(*cfg.asserts.slope_min));
    if (cfg.asserts.slope_max && fit.slope > *cfg.asserts.slope_max)
        out.fail_assert("slope " + format_double(fit.slope) + " above " + format_double(*cfg.asserts.slope_max));
    return 0;
}

// ---- wp_holder_check ----
inline int run_wp_holder(const ScenarioConfig& cfg, const RunOptions& opts, ScenarioOutput& out) {
    const ModelSpec model = make_model(cfg.model_name, cfg.model_params);
    const TimeGrid grid = make_grid(cfg.mesh, cfg.horizon);
    const SlopeFit fit = wp_holder_check(
        [&](std::uint64_t seed) {
            return simulate(model.coeffs, model.init, grid, cfg.particles, seed, 1).law_path;
        },
        seed_range(cfg.seed, cfg.replications), grid, cfg.p, cfg.lags, opts.threads);
    CsvWriter pts(out.path("wp_points.csv"), {"lag", "estimate"});
    for (const auto& [x, y] : fit.points) pts.row({cell(std::exp(x)), cell(std::exp(y))});
    CsvWriter fitcsv(out.path("wp_fit.csv"), {"slope", "intercept", "stderr"});
    fitcsv.row({cell(fit.slope), cell(fit.intercept), cell(fit.stderr_slope)});
    out.add_plot({"W_p lag moment", "lag", "E W_p^p",
                  {{"wp_points.csv", "lag", "estimate", "E W_p^p(mu_t, mu_s)"}}});
    out.results()["slope"] = fit.slope;
    *opts.log << "wp_holder_check: slope = " << fit.slope << " (stderr " << fit.stderr_slope << ")\n";
    if (cfg.asserts.slope_min && fit.slope < *cfg.asserts.slope_min)
        out.fail_assert("slope " + format_double(fit.slope) + " below " + format_double(*cfg.asserts.slope_min));
    if (cfg.asserts.slope_max && fit.slope > *cfg.asserts.slope_max)
        out.fail_assert("slope " + format_double(fit.slope) + " above " + format_double(*cfg.asserts.slope_max));
    return 0;
}

// ---- spde_check ----
inline int run_spde(const ScenarioConfig& cfg, const RunOptions& opts, ScenarioOutput& out) {
    const ModelSpec model = make_model(cfg.model_name, cfg.model_params);
    const TimeGrid grid = make_grid(cfg.mesh, cfg.horizon);
    std::vector<TestFunction> phis;
    for (const auto& id : cfg.phis) phis.push_back(test_function_by_id(id));

    CsvWriter res(out.path("spde_residuals.csv"),
                  {"time", "phi_id", "residual", "drift_term", "trace_term", "db_term"});
    CsvWriter summary(out.path("spde_summary.csv"), {"phi_id", "sup_rms"});
    double worst = 0.0;
    for (const auto& phi : phis) {
        const auto rep = replicate(
            [&](std::uint64_t seed) {
                const auto sim = simulate(model.coeffs, model.init, grid, cfg.particles, seed, 1);
                const auto r = spde_residual(sim.ensemble, sim.law_path, model.coeffs, phi, sim.bundle);
                if (seed == cfg.seed)
                    for (std::size_t k = 0; k < r.times.size(); ++k)
                        res.row({cell(r.times[k]), phi.id, cell(r.residual[k]), cell(r.drift_term[k]),
                                 cell(r.trace_term[k]), cell(r.db_term[k])});
                return r.sup_abs_residual();
            },
            seed_range(cfg.seed, cfg.replications), 1);
        std::vector<double> sups(rep.results.begin(), rep.results.end());
        const double rms = rms_of(sups);
        summary.row({phi.id, cell(rms)});
        out.results()["sup_rms_" + phi.id] = rms;
        worst = std::max(worst, rms);
        *opts.log << "spde_check: phi=" << phi.id << " sup-residual RMS = " << rms << "\n";
    }
    out.add_plot({"residual over time", "time", "residual",
                  {{"spde_residuals.csv", "time", "residual", "r(t)"}}});
    if (cfg.asserts.max_residual && worst > *cfg.asserts.max_residual)
        out.fail_assert("sup residual RMS " + format_double(worst) + " above " +
                        format_double(*cfg.asserts.max_residual));
    return 0;
}

// ---- fubini_check ----
inline int run_fubini(const ScenarioConfig& cfg, const RunOptions& opts, ScenarioOutput& out) {
    const ModelSpec model = make_model(cfg.model_name, cfg.model_params);
    const TimeGrid grid = make_grid(cfg.mesh, cfg.horizon);
    const auto sim = simulate(model.coeffs, model.init, grid, cfg.particles, cfg.seed, opts.threads);
    FubiniIntegrand H;
    if (cfg.integrand == "one") {
        H.bound = 1.0;
        H.eval = [](std::int64_t, std::int64_t, PathView) { return 1.0; };
    } else {
        double sup = 1.0;
        for (std::int64_t k = 0; k <= grid.steps(); ++k)
            for (std::int64_t i = 0; i < cfg.particles; ++i)
                sup = std::max(sup, sim.ensemble.state(k, i)[0] * sim.ensemble.state(k, i)[0]);
        H.bound = sup;
        H.eval = [](std::int64_t, std::int64_t, PathView x) {
            return x.current()[0] * x.current()[0];
        };
    }
    CsvWriter res(out.path("fubini.csv"), {"time", "target", "residual"});
    double db_max = 0.0;
    if (cfg.target == "dw" || cfg.target == "both") {
        const auto r = fubini_residual(sim.ensemble, sim.bundle, H, FubiniTarget::dW);
        for (std::size_t k = 0; k < r.size(); ++k)
            res.row({cell(grid.times[k]), "dW", cell(r[k])});
    }
    if (cfg.target == "db" || cfg.target == "both") {
        const auto r = fubini_residual(sim.ensemble, sim.bundle, H, FubiniTarget::dB);
        for (std::size_t k = 0; k < r.size(); ++k) {
            res.row({cell(grid.times[k]), "dB", cell(r[k])});
            db_max = std::max(db_max, std::abs(r[k]));
        }
        out.results()["db_max"] = db_max;
        *opts.log << "fubini_check: max |dB residual| = " << db_max << "\n";
        if (cfg.asserts.max_residual && db_max > *cfg.asserts.max_residual)
            out.fail_assert("dB residual " + format_double(db_max) + " above " +
                            format_double(*cfg.asserts.max_residual));
    }
    out.add_plot({"fubini residuals", "time", "residual",
                  {{"fubini.csv", "time", "residual", "interchange residual"}}});
    return 0;
}

// ---- girsanov_check ----
inline int run_girsanov(const ScenarioConfig& cfg, const RunOptions& opts, ScenarioOutput& out) {
    const ModelSpec model = make_model(cfg.model_name, cfg.model_params);
    const TimeGrid grid = make_grid(cfg.mesh, cfg.horizon);
    const double T = cfg.girsanov_horizon > 0.0 ? cfg.girsanov_horizon : cfg.horizon;
    // Drifted run and driftless reference share the same noise (common random numbers).
    const auto drifted = simulate(model.coeffs, model.init, grid, cfg.particles, cfg.seed, opts.threads);
    auto driftless = simulate_driftless(model.coeffs, model.init, grid, cfg.particles, cfg.seed, opts.threads);
    const auto weights = doleans_weight(driftless.ensemble, driftless.bundle, model.coeffs,
                                        drifted.law_path, T);
    const std::int64_t kT = grid.kappa_index(T);
    std::vector<double> terminal(static_cast<std::size_t>(cfg.particles));
    std::vector<double> drifted_terminal(static_cast<std::size_t>(cfg.particles));
    for (std::int64_t i = 0; i < cfg.particles; ++i) {
        terminal[static_cast<std::size_t>(i)] = driftless.ensemble.state(kT, i)[0];
        drifted_terminal[static_cast<std::size_t>(i)] = drifted.ensemble.state(kT, i)[0];
    }
    const auto rew = reweighted_expectation(weights, terminal);
    if (rew.weight_degeneracy)
        *opts.log << "warning: weight degeneracy (effective samples = " << rew.effective_samples << ")\n";
    double direct_mean = 0.0;
    for (double v : drifted_terminal) direct_mean += v;
    direct_mean /= static_cast<double>(cfg.particles);
    const double ks = ks_distance_weighted(terminal, weights.weight, drifted_terminal);

    CsvWriter wcsv(out.path("weights.csv"), {"particle", "log_weight"});
    for (std::int64_t i = 0; i < weights.size(); ++i)
        wcsv.row({cell(i), cell(weights.log_weight[static_cast<std::size_t>(i)])});
    CsvWriter summary(out.path("girsanov_summary.csv"),
                      {"reweighted_mean", "direct_mean", "mean_weight", "ks_distance",
                       "effective_samples"});
    summary.row({cell(rew.value), cell(direct_mean), cell(weights.mean_weight()), cell(ks),
                 cell(rew.effective_samples)});
    out.results()["reweighted_mean"] = rew.value;
    out.results()["direct_mean"] = direct_mean;
    out.results()["ks_distance"] = ks;
    out.results()["mean_weight"] = weights.mean_weight();
    *opts.log << "girsanov_check: reweighted mean = " << rew.value << ", direct mean = "
              << direct_mean << ", KS = " << ks << ", mean weight = " << weights.mean_weight() << "\n";
    out.add_plot({"log-weights", "particle", "log_weight",
                  {{"weights.csv", "particle", "log_weight", "log Doleans-Dade weight"}}});
    if (cfg.asserts.ks_max && ks > *cfg.asserts.ks_max)
        out.fail_assert("KS distance " + format_double(ks) + " above " + format_double(*cfg.asserts.ks_max));
    return 0;
}

// ---- contraction ----
inline int run_contraction(const ScenarioConfig& cfg, const RunOptions& opts, ScenarioOutput& out) {
    const ModelSpec model = make_model(cfg.model_name, cfg.model_params);
    ContractionParams params{cfg.c_tv, cfg.c_bdg};
    double T = cfg.contraction_horizon;
    if (T <= 0.0) {
        T = solve_contraction_horizon(params, cfg.target_alpha);
        if (!std::isfinite(T)) throw Error("c_tv = 0: contraction horizon unbounded");
    }
    const double alpha = contraction_alpha(params, T);
    *opts.log << "contraction: alpha(T=" << T << ") = " << alpha << "\n";
    if (alpha >= 1.0) throw Error("no contraction guarantee at this T");
    const TimeGrid grid = make_grid(cfg.mesh, T);
    ContractionConfig expcfg;
    expcfg.params = params;
    expcfg.horizon = T;
    expcfg.iterations = cfg.iterations;
    expcfg.perturbation = cfg.perturbation;
    expcfg.bin_width = cfg.bin_width;
    const auto rep = tv_contraction_experiment(model.coeffs, model.init, grid, cfg.particles,
                                               seed_range(cfg.seed, cfg.replications), expcfg,
                                               opts.threads);
    CsvWriter report(out.path("contraction_report.csv"),
                     {"iteration", "time", "tv_distance", "alpha_bound"});
    for (std::size_t m = 0; m < rep.tv.size(); ++m)
        for (std::size_t k = 0; k < rep.times.size(); ++k)
            report.row({cell(static_cast<std::int64_t>(m)), cell(rep.times[k]), cell(rep.tv[m][k]),
                        cell(rep.alpha)});
    CsvWriter summary(out.path("contraction_summary.csv"), {"iteration", "sup_tv", "decay_ratio"});
    for (std::size_t m = 0; m < rep.sup_tv.size(); ++m)
        summary.row({cell(static_cast<std::int64_t>(m)), cell(rep.sup_tv[m]),
                     m < rep.decay_ratio.size() ? cell(rep.decay_ratio[m]) : std::string("")});
    double worst_ratio = 0.0;
    for (double r : rep.decay_ratio) worst_ratio = std::max(worst_ratio, r);
    out.results()["alpha"] = alpha;
    out.results()["worst_decay_ratio"] = worst_ratio;
    *opts.log << "contraction: worst per-iteration decay ratio = " << worst_ratio << "\n";
    out.add_plot({"TV contraction", "iteration", "sup_t TV",
                  {{"contraction_summary.csv", "iteration", "sup_tv", "sup-TV per iteration"}}});
    if (cfg.asserts.ratio_max && worst_ratio > *cfg.asserts.ratio_max)
        out.fail_assert("decay ratio " + format_double(worst_ratio) + " above " +
                        format_double(*cfg.asserts.ratio_max));
    return 0;
}

// ---- coupling_cost ----
inline int run_coupling(const ScenarioConfig& cfg, const RunOptions& opts, ScenarioOutput& out) {
    // Two runs of the same model; the second optionally rescales the drift or
    // uses another seed (different tags force the infinite branch).
    std::map<std::string, double> params1 = cfg.model_params;
    std::map<std::string, double> params2 = cfg.model_params;
    const std::string name = cfg.model_name.empty() ? "constant" : cfg.model_name;
    if (cfg.drift_scale != 1.0) {
        for (const char* key : {"b", "a", "coupling", "height"}) {
            auto it = params2.find(key);
            if (it != params2.end()) it->second *= cfg.drift_scale;
        }
    }
    const ModelSpec model1 = make_model(name, params1);
    const ModelSpec model2 = make_model(name, params2);
    const TimeGrid grid = make_grid(cfg.mesh, cfg.horizon);
    const std::uint64_t seed2 = cfg.seed2_set ? cfg.seed2 : cfg.seed;
    const auto sim1 = simulate(model1.coeffs, model1.init, grid, cfg.particles, cfg.seed, opts.threads);
    const auto sim2 = simulate(model2.coeffs, model2.init, grid, cfg.particles, seed2, opts.threads);
    const auto run1 = coupled_samples(sim1, cfg.samples);
    const auto run2 = coupled_samples(sim2, cfg.samples);
    const double cost = coupling_cost_estimate(run1, run2, CouplingCostSpec{});
    CsvWriter csv(out.path("coupling_cost.csv"), {"samples", "cost"});
    csv.row({cell(cfg.samples), std::isfinite(cost) ? cell(cost) : std::string("inf")});
    out.results()["cost"] = std::isfinite(cost) ? nlohmann::json(cost) : nlohmann::json("inf");
    *opts.log << "coupling_cost: optimal assignment cost = "
              << (std::isfinite(cost) ? format_double(cost) : std::string("inf")) << "\n";
    if (cfg.asserts.cost_max && !(cost <= *cfg.asserts.cost_max))
        out.fail_assert("coupling cost above " + format_double(*cfg.asserts.cost_max));
    return 0;
}

// ---- mollify_demo ----
inline int run_mollify(const ScenarioConfig& cfg, const RunOptions& opts, ScenarioOutput& out) {
    // Mollifies the 1-D step kernel and reports values plus sup-distances.
    ScalarKernel step;
    step.d_x = 1;
    step.out_size = 1;
    step.bound = 1.0;
    step.eval = [](double, std::span<const double>, std::span<const double> y, std::span<double> o) {
        o[0] = y[0] > 0.0 ? 1.0 : 0.0;
    };
    CsvWriter values(out.path("mollify_values.csv"), {"n", "y", "original", "mollified"});
    CsvWriter sup(out.path("mollify_sup.csv"), {"n", "sup_distance"});
    const double x0 = 0.0;
    std::vector<double> one{1.0};
    for (double nd : cfg.mollify_ns) {
        const int n = static_cast<int>(nd);
        const ScalarKernel smooth = mollify_kernel(step, n, cfg.quadrature_points);
        double worst = 0.0;
        for (int i = 0; i < cfg.eval_points; ++i) {
            const double y = -cfg.eval_range +
                             2.0 * cfg.eval_range * static_cast<double>(i) /
                                 static_cast<double>(cfg.eval_points - 1);
            std::vector<double> orig(1), mol(1);
            const std::vector<double> xs{x0}, ys{y};
            step.eval(0.0, xs, ys, orig);
            smooth.eval(0.0, xs, ys, mol);
            values.row({cell(n), cell(y), cell(orig[0]), cell(mol[0])});
            worst = std::max(worst, std::abs(orig[0] - mol[0]));
        }
        sup.row({cell(n), cell(worst)});
        *opts.log << "mollify_demo: n=" << n << " sup distance = " << worst << "\n";
    }
    out.add_plot({"mollified step kernel", "y", "value",
                  {{"mollify_values.csv", "y", "mollified", "mollified kernel"},
                   {"mollify_values.csv", "y", "original", "step kernel"}}});
    return 0;
}

}  // namespace detail

inline int run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
    detail::ScenarioOutput out(cfg, opts);
    *opts.log << "mkvsim " << kVersion << ": scenario=" << cfg.scenario << " seed=" << cfg.seed
              << " N=" << cfg.particles << " n=" << cfg.mesh << "\n";
    int rc = 0;
    if (cfg.scenario == "simulate") rc = detail::run_simulate(cfg, opts, out);
    else if (cfg.scenario == "holder_check") rc = detail::run_holder(cfg, opts, out);
    else if (cfg.scenario == "wp_holder_check") rc = detail::run_wp_holder(cfg, opts, out);
    else if (cfg.scenario == "spde_check") rc = detail::run_spde(cfg, opts, out);
    else if (cfg.scenario == "fubini_check") rc = detail::run_fubini(cfg, opts, out);
    else if (cfg.scenario == "girsanov_check") rc = detail::run_girsanov(cfg, opts, out);
    else if (cfg.scenario == "contraction") rc = detail::run_contraction(cfg, opts, out);
    else if (cfg.scenario == "coupling_cost") rc = detail::run_coupling(cfg, opts, out);
    else if (cfg.scenario == "mollify_demo") rc = detail::run_mollify(cfg, opts, out);
    else throw Error("unknown scenario '" + cfg.scenario + "'");
    const int finish_rc = out.finish();
    return rc != 0 ? rc : finish_rc;
}

}  // namespace mkv
