#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "mkv/coefficients.hpp"
#include "mkv/measure.hpp"

using namespace mkv;

namespace {

ScalarKernel scalar_kernel_1d(double bound,
                              std::function<double(double, double, double)> f) {
    ScalarKernel k;
    k.d_x = 1;
    k.out_size = 1;
    k.bound = bound;
    k.eval = [f = std::move(f)](double t, std::span<const double> x, std::span<const double> y,
                                std::span<double> out) { out[0] = f(t, x[0], y[0]); };
    return k;
}

}  // namespace

TEST_CASE("eval_kernel_coefficient averages the kernel over the atoms") {
    const std::vector<double> x{0.0};

    SECTION("constant kernel integrates to the constant") {
        const auto k = scalar_kernel_1d(3.0, [](double, double, double) { return 3.0; });
        const EmpiricalMeasure m(1, {0.3, -1.2, 5.0});
        CHECK(eval_kernel_coefficient(k, 0.0, x, m)[0] == 3.0);
    }
    SECTION("Dirac evaluation") {
        const auto k = scalar_kernel_1d(10.0, [](double, double, double y) { return y; });
        const EmpiricalMeasure dirac(1, {4.25});
        CHECK(eval_kernel_coefficient(k, 0.0, x, dirac)[0] == 4.25);
    }
    SECTION("two-term sine sum") {
        const auto k = scalar_kernel_1d(1.0, [](double, double xv, double y) { return std::sin(xv - y); });
        const EmpiricalMeasure m(1, {0.0, std::numbers::pi / 2.0});
        // (sin 0 + sin(-pi/2)) / 2
        CHECK(eval_kernel_coefficient(k, 0.0, x, m)[0] == Catch::Approx(-0.5).margin(1e-15));
    }
    SECTION("empty measure is rejected") {
        const auto k = scalar_kernel_1d(1.0, [](double, double, double) { return 1.0; });
        const EmpiricalMeasure empty(1, {});
        CHECK_THROWS_WITH(eval_kernel_coefficient(k, 0.0, x, empty),
                          Catch::Matchers::ContainsSubstring("degenerate measure"));
    }
    SECTION("non-finite kernel values are rejected") {
        const auto k = scalar_kernel_1d(1.0, [](double, double, double y) { return 1.0 / y; });
        const EmpiricalMeasure m(1, {0.0});
        CHECK_THROWS_WITH(eval_kernel_coefficient(k, 0.0, x, m),
                          Catch::Matchers::ContainsSubstring("kernel overflow"));
    }
}

TEST_CASE("kernel evaluation is linear in the measure") {
    const auto k = scalar_kernel_1d(4.0, [](double, double xv, double y) { return std::cos(xv) * y * y; });
    const std::vector<double> x{0.7};
    const EmpiricalMeasure m1(1, {0.1, -0.4, 1.1, 0.0});
    const EmpiricalMeasure m2(1, {2.0, -1.5, 0.25, 0.6});
    std::vector<double> pooled = m1.atoms;
    pooled.insert(pooled.end(), m2.atoms.begin(), m2.atoms.end());
    const EmpiricalMeasure both(1, pooled);
    const double lhs = eval_kernel_coefficient(k, 0.0, x, both)[0];
    const double rhs = 0.5 * (eval_kernel_coefficient(k, 0.0, x, m1)[0] +
                              eval_kernel_coefficient(k, 0.0, x, m2)[0]);
    CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
}

namespace {

CoefficientSpec constant_matrix_spec(int dx, int dw, int db, std::vector<double> sigma,
                                     std::vector<double> rho) {
    CoefficientSpec spec;
    spec.d_x = dx;
    spec.d_w = dw;
    spec.d_b = db;
    spec.drift = [dx](double, PathView, const EmpiricalMeasure&, std::span<double> out) {
        for (int i = 0; i < dx; ++i) out[static_cast<std::size_t>(i)] = 0.0;
    };
    spec.sigma = [sigma](double, PathView, const EmpiricalMeasure&, std::span<double> out) {
        std::copy(sigma.begin(), sigma.end(), out.begin());
    };
    spec.rho = [rho](double, PathView, const EmpiricalMeasure&, std::span<double> out) {
        std::copy(rho.begin(), rho.end(), out.begin());
    };
    return spec;
}

CoefficientProbe trivial_probe(int dx) {
    CoefficientProbe p;
    p.state.assign(static_cast<std::size_t>(dx), 0.0);
    p.measure = EmpiricalMeasure(dx, std::vector<double>(static_cast<std::size_t>(dx), 0.0));
    return p;
}

}  // namespace

TEST_CASE("check_nondegeneracy on reference matrices") {
    SECTION("identity sigma, zero rho") {
        const auto spec = constant_matrix_spec(2, 2, 1, {1, 0, 0, 1}, {0, 0});
        CHECK(check_nondegeneracy(spec, {trivial_probe(2)}) == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("zero coefficients are degenerate") {
        const auto spec = constant_matrix_spec(2, 2, 1, {0, 0, 0, 0}, {0, 0});
        CHECK(check_nondegeneracy(spec, {trivial_probe(2)}) == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("2x2 Gram eigenvalues match the characteristic polynomial roots") {
        // Sigma = [[1,2],[0,1]] (sigma part), rho = 0
        const auto spec = constant_matrix_spec(2, 2, 1, {1, 2, 0, 1}, {0, 0});
        // Gram = [[5,2],[2,1]]: lambda^2 - 6 lambda + 1 = 0
        const double expected = (6.0 - std::sqrt(36.0 - 4.0)) / 2.0;
        CHECK(check_nondegeneracy(spec, {trivial_probe(2)}) ==
              Catch::Approx(expected).margin(1e-10));
    }
    SECTION("invariant under right-multiplication by a rotation") {
        const double c = std::cos(0.83), s = std::sin(0.83);
        // Sigma2 = Sigma * Q with Q orthogonal leaves Sigma Sigma^T unchanged.
        const std::vector<double> sig{0.7, -1.3, 2.0, 0.4};
        const std::vector<double> rotated{0.7 * c + (-1.3) * (-s), 0.7 * s + (-1.3) * c,
                                          2.0 * c + 0.4 * (-s), 2.0 * s + 0.4 * c};
        const auto a = constant_matrix_spec(2, 2, 1, sig, {0, 0});
        const auto b = constant_matrix_spec(2, 2, 1, rotated, {0, 0});
        const double ea = check_nondegeneracy(a, {trivial_probe(2)});
        const double eb = check_nondegeneracy(b, {trivial_probe(2)});
        CHECK(ea == Catch::Approx(eb).margin(1e-9));
    }
}

TEST_CASE("mollify_kernel preserves constants exactly") {
    const auto k = scalar_kernel_1d(2.5, [](double, double, double) { return 2.5; });
    for (int n : {1, 4, 16}) {
        const auto smooth = mollify_kernel(k, n, 15);
        std::vector<double> out(1);
        const std::vector<double> x{0.3}, y{-0.2};
        smooth.eval(0.0, x, y, out);
        CHECK(out[0] == Catch::Approx(2.5).margin(1e-12));
    }
}

TEST_CASE("mollified step evaluates to one half at the jump") {
    ScalarKernel step;
    step.d_x = 1;
    step.out_size = 1;
    step.bound = 1.0;
    step.eval = [](double, std::span<const double>, std::span<const double> y, std::span<double> o) {
        o[0] = y[0] > 0.0 ? 1.0 : 0.0;
    };
    const std::vector<double> x{0.0}, y{0.0};
    std::vector<double> coarse(1), fine(1);
    mollify_kernel(step, 64, 20).eval(0.0, x, y, coarse);
    mollify_kernel(step, 64, 80).eval(0.0, x, y, fine);  // refinement x4 oracle
    CHECK(coarse[0] == Catch::Approx(0.5).margin(5e-3));
    CHECK(fine[0] == Catch::Approx(0.5).margin(5e-3));
    CHECK(coarse[0] == Catch::Approx(fine[0]).margin(5e-3));
}

TEST_CASE("mollification error decays like 1/n on a Lipschitz kernel") {
    const auto lip = scalar_kernel_1d(2.0, [](double, double xv, double y) {
        return std::abs(xv) + std::abs(y);  // Lipschitz constant 1 in each variable
    });
    std::vector<double> sup_dist;
    for (int n : {4, 8, 16, 32}) {
        const auto smooth = mollify_kernel(lip, n, 21);
        double worst = 0.0;
        std::vector<double> orig(1), mol(1);
        for (double xv = -1.0; xv <= 1.0; xv += 0.25)
            for (double y = -1.0; y <= 1.0; y += 0.25) {
                const std::vector<double> xs{xv}, ys{y};
                lip.eval(0.0, xs, ys, orig);
                smooth.eval(0.0, xs, ys, mol);
                worst = std::max(worst, std::abs(orig[0] - mol[0]));
            }
        sup_dist.push_back(worst);
    }
    for (std::size_t i = 0; i + 1 < sup_dist.size(); ++i) {
        CHECK(sup_dist[i + 1] < sup_dist[i]);
        CHECK(sup_dist[i + 1] < 0.75 * sup_dist[i]);  // ~ halves per doubling
    }
    CHECK(sup_dist.back() < 2.0 / 32.0);
}

TEST_CASE("mollification keeps the declared bound") {
    ScalarKernel step;
    step.d_x = 1;
    step.out_size = 1;
    step.bound = 1.0;
    step.eval = [](double, std::span<const double>, std::span<const double> y, std::span<double> o) {
        o[0] = y[0] > 0.0 ? 1.0 : -1.0;
    };
    const auto smooth = mollify_kernel(step, 8, 17);
    CHECK(smooth.bound <= step.bound);
    std::vector<double> out(1);
    for (double y = -2.0; y <= 2.0; y += 0.173) {
        const std::vector<double> xs{0.0}, ys{y};
        smooth.eval(0.0, xs, ys, out);
        CHECK(std::abs(out[0]) <= step.bound + 1e-12);
    }
}

TEST_CASE("mollify rejects degenerate quadrature") {
    const auto k = scalar_kernel_1d(1.0, [](double, double, double) { return 1.0; });
    CHECK_THROWS_WITH(mollify_kernel(k, 4, 1),
                      Catch::Matchers::ContainsSubstring("insufficient quadrature"));
}

TEST_CASE("registry models are Markovian in state and measure") {
    for (const char* name : {"ou_conditional_mean", "kuramoto_kernel", "step_kernel"}) {
        const ModelSpec model = make_model(name, {});
        REQUIRE(model.coeffs.markovian());
        // Two histories agreeing at the evaluation time give the same drift.
        const std::vector<double> hist1{-4.0, 2.0, 0.5};
        const std::vector<double> hist2{9.0, -1.0, 0.5};
        const PathView v1{hist1.data(), 1, 1, 2};
        const PathView v2{hist2.data(), 1, 1, 2};
        EmpiricalMeasure m(1, {0.1, 0.9, -0.3});
        if (model.coeffs.prepare) model.coeffs.prepare(0.0, m);
        std::vector<double> out1(1), out2(1);
        model.coeffs.drift(0.0, v1, m, out1);
        model.coeffs.drift(0.0, v2, m, out2);
        CHECK(out1[0] == out2[0]);
    }
}

TEST_CASE("kuramoto drift matches its interaction kernel") {
    const ModelSpec model = make_model("kuramoto_kernel", {{"coupling", 0.8}});
    REQUIRE(model.has_drift_kernel);
    EmpiricalMeasure m(1, {0.2, -1.0, 2.4, 0.05});
    const std::vector<double> x{0.6};
    const double via_kernel = eval_kernel_coefficient(model.drift_kernel, 0.0, x, m)[0];
    EmpiricalMeasure prepared = m;
    model.coeffs.prepare(0.0, prepared);
    std::vector<double> out(1);
    model.coeffs.drift(0.0, PathView::single(x), prepared, out);
    CHECK(out[0] == Catch::Approx(via_kernel).margin(1e-13));
}

TEST_CASE("sampled coefficient bounds certify the declared bound") {
    std::vector<CoefficientProbe> probes;
    for (double t : {0.0, 0.5}) {
        for (double xv : {-2.0, 0.0, 1.5}) {
            CoefficientProbe p;
            p.t = t;
            p.state = {xv};
            p.measure = EmpiricalMeasure(1, {0.3, -1.8, 2.4, 0.0});
            probes.push_back(std::move(p));
        }
    }
    for (const char* name : {"constant", "kuramoto_kernel", "step_kernel"}) {
        const ModelSpec model = make_model(
            name, {{"sigma", 0.5}, {"rho", 0.25}});
        CHECK(check_bounds(model.coeffs, probes) <= model.coeffs.bound + 1e-12);
    }
    // the OU drift is only locally bounded; the sampled sup is still finite
    const ModelSpec ou = make_model("ou_conditional_mean", {{"a", 1.0}});
    CHECK(std::isfinite(check_bounds(ou.coeffs, probes)));
    CHECK_THROWS_WITH(check_bounds(ou.coeffs, {}), Catch::Matchers::ContainsSubstring("no probes"));
}

TEST_CASE("unknown models and parameters are rejected") {
    CHECK_THROWS_WITH(make_model("nope", {}), Catch::Matchers::ContainsSubstring("unknown model"));
    CHECK_THROWS_WITH(make_model("constant", {{"zeta", 1.0}}),
                      Catch::Matchers::ContainsSubstring("unknown parameter"));
}

TEST_CASE("initial condition moments stabilise with the sample size") {
    const InitialCondition init = gaussian_initial(1, 0.0, 1.0, 4.0);
    auto pth_moment = [&](std::int64_t count) {
        double acc = 0.0;
        std::vector<double> x(1);
        for (std::int64_t i = 0; i < count; ++i) {
            init.sample(3, i, x);
            acc += std::pow(std::abs(x[0]), 4.0);
        }
        return acc / static_cast<double>(count);
    };
    const double m1 = pth_moment(20000);
    const double m2 = pth_moment(80000);
    REQUIRE(std::isfinite(m1));
    // E|Z|^4 = 3 for a standard normal
    CHECK(m1 == Catch::Approx(3.0).epsilon(0.15));
    CHECK(m2 == Catch::Approx(3.0).epsilon(0.08));
}
