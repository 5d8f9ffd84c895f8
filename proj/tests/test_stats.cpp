#include <catch_amalgamated.hpp>

#include <atomic>
#include <cmath>

#include "mkv/rng.hpp"
#include "mkv/stats.hpp"

using namespace mkv;

TEST_CASE("fit_loglog reference fits") {
    SECTION("exact power law") {
        std::vector<std::pair<double, double>> pts;
        for (double x : {0.25, 0.5, 1.0, 2.0, 4.0}) pts.emplace_back(x, std::pow(x, 1.5));
        const auto fit = fit_loglog(pts);
        CHECK(fit.slope == Catch::Approx(1.5).margin(1e-12));
        CHECK(fit.stderr_slope == Catch::Approx(0.0).margin(1e-10));
    }
    SECTION("linear scaling gives slope one and intercept log 2") {
        std::vector<std::pair<double, double>> pts;
        for (double x : {0.5, 1.0, 2.0, 8.0}) pts.emplace_back(x, 2.0 * x);
        const auto fit = fit_loglog(pts);
        CHECK(fit.slope == Catch::Approx(1.0).margin(1e-12));
        CHECK(fit.intercept == Catch::Approx(std::log(2.0)).margin(1e-12));
    }
    SECTION("noisy power law recovers the exponent") {
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < 24; ++i) {
            const double x = std::pow(2.0, -6.0 + 0.25 * i);
            const double noise = 1.0 + 0.1 * (uniform01(5, 0, static_cast<std::uint32_t>(i), 0) - 0.5);
            pts.emplace_back(x, std::pow(x, 0.5) * noise);
        }
        const auto fit = fit_loglog(pts);
        CHECK(fit.slope == Catch::Approx(0.5).margin(0.05));
    }
    SECTION("fewer than three points is an error") {
        CHECK_THROWS_WITH(fit_loglog({{1.0, 1.0}, {2.0, 2.0}}),
                          Catch::Matchers::ContainsSubstring("at least 3"));
    }
    SECTION("non-positive input is an error") {
        CHECK_THROWS_WITH(fit_loglog({{1.0, 1.0}, {2.0, 0.0}, {3.0, 2.0}}),
                          Catch::Matchers::ContainsSubstring("positive"));
    }
    SECTION("scaling the estimates shifts only the intercept") {
        std::vector<std::pair<double, double>> pts, scaled;
        for (double x : {0.1, 0.4, 1.6, 3.0}) {
            const double y = std::pow(x, 0.7) * (1.0 + 0.01 * x);
            pts.emplace_back(x, y);
            scaled.emplace_back(x, 5.0 * y);
        }
        const auto f1 = fit_loglog(pts);
        const auto f2 = fit_loglog(scaled);
        CHECK(f1.slope == Catch::Approx(f2.slope).margin(1e-12));
        CHECK(f2.intercept - f1.intercept == Catch::Approx(std::log(5.0)).margin(1e-12));
    }
}

TEST_CASE("replicate harness") {
    SECTION("constant procedure has zero standard error") {
        const auto rep = replicate([](std::uint64_t) { return 7.25; }, seed_range(0, 10));
        CHECK(rep.mean == 7.25);
        CHECK(rep.standard_error == 0.0);
    }
    SECTION("identity over seeds 1..3") {
        const auto rep = replicate([](std::uint64_t s) { return static_cast<double>(s); }, {1, 2, 3});
        CHECK(rep.mean == Catch::Approx(2.0));
        CHECK(rep.results == std::vector<double>{1.0, 2.0, 3.0});
    }
    SECTION("Monte Carlo grand mean obeys the CLT bound") {
        const auto rep = replicate(
            [](std::uint64_t seed) {
                double acc = 0.0;
                for (std::uint32_t i = 0; i < 10000; ++i) acc += normal_draw(seed, 1, i, 0);
                return acc / 10000.0;
            },
            seed_range(100, 100));
        CHECK(std::abs(rep.mean) < 3e-3);
    }
    SECTION("results independent of execution order") {
        const auto serial = replicate([](std::uint64_t s) { return std::sin(static_cast<double>(s)); },
                                      seed_range(0, 64), 1);
        const auto parallel = replicate([](std::uint64_t s) { return std::sin(static_cast<double>(s)); },
                                        seed_range(0, 64), 8);
        CHECK(serial.results == parallel.results);
    }
    SECTION("errors abort with the offending seed") {
        CHECK_THROWS_WITH(replicate(
                              [](std::uint64_t s) -> double {
                                  if (s == 5) throw Error("boom");
                                  return 0.0;
                              },
                              seed_range(0, 10)),
                          Catch::Matchers::ContainsSubstring("seed 5"));
    }
}

TEST_CASE("weighted KS distance") {
    SECTION("identical samples with unit weights") {
        const std::vector<double> a{1.0, 2.0, 3.0};
        CHECK(ks_distance_weighted(a, {1.0, 1.0, 1.0}, a) == 0.0);
    }
    SECTION("disjoint samples have distance one") {
        CHECK(ks_distance_weighted({0.0, 0.1}, {1.0, 1.0}, {5.0, 6.0}) == 1.0);
    }
    SECTION("hand-computed step difference") {
        // F_a jumps 0.5 at 0 and 1; F_b jumps 1/3 at 0, 1, 2
        const double d = ks_distance_weighted({0.0, 1.0}, {1.0, 1.0}, {0.0, 1.0, 2.0});
        CHECK(d == Catch::Approx(1.0 / 3.0).margin(1e-12));
    }
    SECTION("weights reshape the CDF") {
        // all mass on the atom at 0
        const double d = ks_distance_weighted({0.0, 1.0}, {1.0, 0.0}, {0.0, 1.0});
        CHECK(d == Catch::Approx(0.5).margin(1e-12));
    }
}
