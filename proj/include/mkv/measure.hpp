#pragma once
// Uniformly weighted empirical measures: the finite-sample stand-in for both
// the conditional law of the particle system and its time marginals.

#include <cstdint>
#include <span>
#include <vector>

#include "mkv/common.hpp"

namespace mkv {

struct EmpiricalMeasure {
    int d = 1;
    std::vector<double> atoms;    // size x d, row-major
    std::vector<double> mean_;    // componentwise mean, filled on construction
    std::vector<double> summary;  // optional per-step cache filled by CoefficientSpec::prepare

    EmpiricalMeasure() = default;
    EmpiricalMeasure(int dim, std::vector<double> pts) : d(dim), atoms(std::move(pts)) {
        recompute_mean();
    }

    static EmpiricalMeasure from_states(std::span<const double> states, std::int64_t count, int dim) {
        EmpiricalMeasure m;
        m.d = dim;
        m.atoms.assign(states.begin(), states.begin() + count * dim);
        m.recompute_mean();
        return m;
    }

    std::int64_t size() const { return static_cast<std::int64_t>(atoms.size()) / d; }

    std::span<const double> atom(std::int64_t i) const {
        return {atoms.data() + i * d, static_cast<std::size_t>(d)};
    }

    std::span<const double> mean() const { return mean_; }

    void recompute_mean() {
        mean_.assign(static_cast<std::size_t>(d), 0.0);
        const std::int64_t m = size();
        if (m == 0) return;
        for (std::int64_t i = 0; i < m; ++i)
            for (int j = 0; j < d; ++j) mean_[static_cast<std::size_t>(j)] += atoms[static_cast<std::size_t>(i * d + j)];
        for (int j = 0; j < d; ++j) mean_[static_cast<std::size_t>(j)] /= static_cast<double>(m);
    }

    // Sample variance per component (Bessel-corrected).
    std::vector<double> variance() const {
        std::vector<double> v(static_cast<std::size_t>(d), 0.0);
        const std::int64_t m = size();
        if (m < 2) return v;
        for (std::int64_t i = 0; i < m; ++i)
            for (int j = 0; j < d; ++j) {
                const double c = atoms[static_cast<std::size_t>(i * d + j)] - mean_[static_cast<std::size_t>(j)];
                v[static_cast<std::size_t>(j)] += c * c;
            }
        for (int j = 0; j < d; ++j) v[static_cast<std::size_t>(j)] /= static_cast<double>(m - 1);
        return v;
    }

    bool finite() const { return all_finite(atoms.data(), static_cast<std::int64_t>(atoms.size())); }
};

}  // namespace mkv
