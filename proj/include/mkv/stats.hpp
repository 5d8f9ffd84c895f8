#pragma once
// Cross-cutting statistics: log-log slope fits with standard errors, seeded
// replication harnesses, and the Kolmogorov-Smirnov distance used by the
// reweighting diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "mkv/common.hpp"

namespace mkv {

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    std::vector<std::pair<double, double>> points;  // (log lag, log estimate)
    std::vector<double> residuals;
};

// Ordinary least squares on (log lag, log estimate).
inline SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& lag_estimate) {
    if (lag_estimate.size() < 3) throw Error("fit_loglog needs at least 3 points");
    SlopeFit fit;
    for (const auto& [lag, est] : lag_estimate) {
        if (!(lag > 0.0) || !(est > 0.0)) throw Error("fit_loglog needs positive lags and estimates");
        fit.points.emplace_back(std::log(lag), std::log(est));
    }
    const auto n = static_cast<double>(fit.points.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : fit.points) {
        sx += x;
        sy += y;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : fit.points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (const auto& [x, y] : fit.points) {
        const double r = y - (fit.intercept + fit.slope * x);
        fit.residuals.push_back(r);
        sse += r * r;
    }
    const double dof = std::max(n - 2.0, 1.0);
    fit.stderr_slope = std::sqrt(sse / dof / sxx);
    return fit;
}

template <typename T>
struct Replication {
    std::vector<T> results;  // in seed order
    double mean = 0.0;
    double standard_error = 0.0;  // sample std over seeds / sqrt(#seeds)
};

// Runs a deterministic seeded procedure over the given seeds. Results are kept
// in seed order and errors abort with the offending seed.
template <typename Fn>
auto replicate(Fn&& experiment, const std::vector<std::uint64_t>& seeds, int threads = 1)
    -> Replication<std::invoke_result_t<Fn, std::uint64_t>> {
    using T = std::invoke_result_t<Fn, std::uint64_t>;
    Replication<T> rep;
    rep.results.resize(seeds.size());
    std::vector<std::string> errors(seeds.size());
    parallel_for(static_cast<std::int64_t>(seeds.size()), threads,
                 [&](std::int64_t lo, std::int64_t hi) {
                     for (std::int64_t i = lo; i < hi; ++i) {
                         try {
                             rep.results[static_cast<std::size_t>(i)] = experiment(seeds[static_cast<std::size_t>(i)]);
                         } catch (const std::exception& e) {
                             errors[static_cast<std::size_t>(i)] = e.what();
                         }
                     }
                 });
    for (std::size_t i = 0; i < seeds.size(); ++i)
        if (!errors[i].empty())
            throw Error("replication failed for seed " + std::to_string(seeds[i]) + ": " + errors[i]);
    if constexpr (std::is_arithmetic_v<T>) {
        double s = 0.0;
        for (const auto& r : rep.results) s += static_cast<double>(r);
        rep.mean = s / static_cast<double>(rep.results.size());
        if (rep.results.size() > 1) {
            double ss = 0.0;
            for (const auto& r : rep.results) {
                const double c = static_cast<double>(r) - rep.mean;
                ss += c * c;
            }
            rep.standard_error = std::sqrt(ss / static_cast<double>(rep.results.size() - 1) /
                                           static_cast<double>(rep.results.size()));
        }
    }
    return rep;
}

inline std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) seeds[static_cast<std::size_t>(i)] = first + static_cast<std::uint64_t>(i);
    return seeds;
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

inline double standard_error_of_mean(const std::vector<double>& v) {
    return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

inline double rms_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

// Kolmogorov-Smirnov distance between a weighted empirical CDF on atoms `a`
// (weights normalised internally) and an unweighted empirical CDF on `b`.
// Both CDFs are right-continuous steps, so the supremum is attained right
// after one of the merged jump locations.
inline double ks_distance_weighted(const std::vector<double>& a, const std::vector<double>& wa,
                                   std::vector<double> b) {
    std::vector<std::pair<double, double>> ja;  // (location, normalised jump)
    double wsum = 0.0;
    for (double w : wa) wsum += w;
    ja.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) ja.emplace_back(a[i], wa[i] / wsum);
    std::sort(ja.begin(), ja.end());
    std::sort(b.begin(), b.end());
    const double jb = 1.0 / static_cast<double>(b.size());
    double fa = 0.0, fb = 0.0, dmax = 0.0;
    std::size_t i = 0, j = 0;
    while (i < ja.size() || j < b.size()) {
        const double x = (j >= b.size() || (i < ja.size() && ja[i].first <= b[j])) ? ja[i].first : b[j];
        while (i < ja.size() && ja[i].first <= x) fa += ja[i++].second;
        while (j < b.size() && b[j] <= x) {
            fb += jb;
            ++j;
        }
        dmax = std::max(dmax, std::abs(fa - fb));
    }
    return dmax;
}

}  // namespace mkv
