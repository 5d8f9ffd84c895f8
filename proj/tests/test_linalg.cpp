#include <catch_amalgamated.hpp>

#include <cmath>

#include "mkv/girsanov.hpp"
#include "mkv/linalg.hpp"

using namespace mkv;

TEST_CASE("jacobi eigenvalues of a known symmetric matrix") {
    // eigenvalues of [[2,1,0],[1,2,1],[0,1,2]] are 2 - sqrt(2), 2, 2 + sqrt(2)
    const std::vector<double> m{2, 1, 0, 1, 2, 1, 0, 1, 2};
    const auto eig = jacobi_eigenvalues(m, 3);
    REQUIRE(eig.size() == 3);
    CHECK(eig[0] == Catch::Approx(2.0 - std::sqrt(2.0)).margin(1e-12));
    CHECK(eig[1] == Catch::Approx(2.0).margin(1e-12));
    CHECK(eig[2] == Catch::Approx(2.0 + std::sqrt(2.0)).margin(1e-12));
}

TEST_CASE("matrix inversion on a reference 2x2") {
    const std::vector<double> m{1.0, 2.0, 3.0, 4.0};  // det = -2
    std::vector<double> inv(4);
    REQUIRE(invert_matrix(m, 2, inv));
    CHECK(inv[0] == Catch::Approx(-2.0).margin(1e-14));
    CHECK(inv[1] == Catch::Approx(1.0).margin(1e-14));
    CHECK(inv[2] == Catch::Approx(1.5).margin(1e-14));
    CHECK(inv[3] == Catch::Approx(-0.5).margin(1e-14));
    const std::vector<double> singular{1.0, 2.0, 2.0, 4.0};
    CHECK(!invert_matrix(singular, 2, inv));
}

TEST_CASE("condition number of orthogonal and scaled matrices") {
    const double c = std::cos(0.4), s = std::sin(0.4);
    CHECK(condition_number(std::vector<double>{c, -s, s, c}, 2) == Catch::Approx(1.0).margin(1e-9));
    CHECK(condition_number(std::vector<double>{10.0, 0.0, 0.0, 0.1}, 2) ==
          Catch::Approx(100.0).epsilon(1e-9));
    CHECK(std::isinf(condition_number(std::vector<double>{1.0, 0.0, 0.0, 0.0}, 2)));
}

namespace {

// 2-D spec with constant matrix coefficients.
CoefficientSpec matrix_spec(std::vector<double> b, std::vector<double> sigma,
                            std::vector<double> rho, int d_b) {
    CoefficientSpec spec;
    spec.d_x = 2;
    spec.d_w = 2;
    spec.d_b = d_b;
    spec.drift = [b](double, PathView, const EmpiricalMeasure&, std::span<double> out) {
        std::copy(b.begin(), b.end(), out.begin());
    };
    spec.sigma = [sigma](double, PathView, const EmpiricalMeasure&, std::span<double> out) {
        std::copy(sigma.begin(), sigma.end(), out.begin());
    };
    spec.rho = [rho](double, PathView, const EmpiricalMeasure&, std::span<double> out) {
        std::copy(rho.begin(), rho.end(), out.begin());
    };
    return spec;
}

}  // namespace

TEST_CASE("two-dimensional simulation matches a reference loop") {
    const std::vector<double> b{0.3, -0.2};
    const std::vector<double> sigma{1.0, 0.5, 0.0, 0.8};
    const std::vector<double> rho{0.4, 0.1};  // d_b = 1
    const auto spec = matrix_spec(b, sigma, rho, 1);
    const TimeGrid grid = make_grid(16, 1.0);
    const auto sim = simulate(spec, gaussian_initial(2, 0.0, 1.0), grid, 3, 23);
    for (std::int64_t i = 0; i < 3; ++i) {
        double x0 = sim.ensemble.state(0, i)[0];
        double x1 = sim.ensemble.state(0, i)[1];
        for (std::int64_t k = 0; k < grid.steps(); ++k) {
            const auto dw = sim.bundle.idio_at(k, i);
            const auto db = sim.bundle.common_at(k);
            double v0 = x0 + b[0] * grid.dt();
            v0 += sigma[0] * dw[0];
            v0 += sigma[1] * dw[1];
            v0 += rho[0] * db[0];
            double v1 = x1 + b[1] * grid.dt();
            v1 += sigma[2] * dw[0];
            v1 += sigma[3] * dw[1];
            v1 += rho[1] * db[0];
            x0 = v0;
            x1 = v1;
            CHECK(sim.ensemble.state(k + 1, i)[0] == x0);
            CHECK(sim.ensemble.state(k + 1, i)[1] == x1);
        }
    }
}

TEST_CASE("doleans weights in two dimensions telescope with theta = sigma^{-1} b") {
    const std::vector<double> b{0.5, -0.3};
    const std::vector<double> sigma{2.0, 1.0, 0.0, 1.0};  // invertible, non-diagonal
    const auto spec = matrix_spec(b, sigma, {0.0, 0.0}, 1);
    const TimeGrid grid = make_grid(32, 1.0);
    const auto driftless = simulate_driftless(spec, gaussian_initial(2, 0.0, 1.0), grid, 8, 31);
    const auto w = doleans_weight(driftless.ensemble, driftless.bundle, spec,
                                  driftless.law_path, 1.0);
    // sigma^{-1} = [[0.5, -0.5], [0, 1]], theta = sigma^{-1} b = (0.4, -0.3)
    const double t0 = 0.4, t1 = -0.3;
    for (std::int64_t i = 0; i < 8; ++i) {
        double w0 = 0.0, w1 = 0.0;
        for (std::int64_t k = 0; k < grid.steps(); ++k) {
            w0 += driftless.bundle.idio_at(k, i)[0];
            w1 += driftless.bundle.idio_at(k, i)[1];
        }
        const double expected = t0 * w0 + t1 * w1 - 0.5 * (t0 * t0 + t1 * t1);
        CHECK(w.log_weight[static_cast<std::size_t>(i)] == Catch::Approx(expected).margin(1e-12));
    }
}

TEST_CASE("doleans weights reject mismatched noise dimension") {
    CoefficientSpec spec;
    spec.d_x = 2;
    spec.d_w = 1;  // violates d_x = d_w
    spec.d_b = 1;
    CHECK_THROWS_WITH(doleans_weight(ParticleEnsemble{}, NoiseBundle{}, spec, ConditionalLawPath{}, 1.0),
                      Catch::Matchers::ContainsSubstring("d_x = d_w"));
}
