#include <catch_amalgamated.hpp>

#include "mkv/config.hpp"
#include "mkv/girsanov.hpp"

using namespace mkv;

TEST_CASE("minimal simulate config applies the documented defaults") {
    const auto cfg = parse_config(
        "[scenario]\n"
        "name = simulate\n"
        "[model]\n"
        "name = constant\n");
    CHECK(cfg.scenario == "simulate");
    CHECK(cfg.seed == 0);
    CHECK(cfg.mesh == 64);
    CHECK(cfg.particles == 1024);
    CHECK(cfg.horizon == 1.0);
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.storage == "full");
}

TEST_CASE("type mismatches report the offending line") {
    const std::string text =
        "[scenario]\n"       // line 1
        "name = simulate\n"  // line 2
        "N = abc\n"          // line 3
        "[model]\n"
        "name = constant\n";
    CHECK_THROWS_WITH(parse_config(text), Catch::Matchers::ContainsSubstring("line 3"));
    CHECK_THROWS_WITH(parse_config(text), Catch::Matchers::ContainsSubstring("'N'"));
}

TEST_CASE("unknown keys are rejected in strict mode") {
    CHECK_THROWS_WITH(parse_config("[scenario]\n"
                                   "name = simulate\n"
                                   "typo_key = 3\n"
                                   "[model]\n"
                                   "name = constant\n"),
                      Catch::Matchers::ContainsSubstring("unknown key 'typo_key'"));
    CHECK_THROWS_WITH(parse_config("[scenario]\n"
                                   "name = simulate\n"
                                   "[model]\n"
                                   "name = constant\n"
                                   "zeta = 1\n"),
                      Catch::Matchers::ContainsSubstring("unknown key 'zeta'"));
    CHECK_THROWS_WITH(parse_config("[scenario]\n"
                                   "name = simulate\n"
                                   "[model]\n"
                                   "name = constant\n"
                                   "[mystery]\n"
                                   "k = 1\n"),
                      Catch::Matchers::ContainsSubstring("unknown section"));
}

TEST_CASE("missing required keys are named") {
    CHECK_THROWS_WITH(parse_config("[scenario]\nname = simulate\n"),
                      Catch::Matchers::ContainsSubstring("[model]"));
    CHECK_THROWS_WITH(parse_config("[scenario]\n"
                                   "name = contraction\n"
                                   "[model]\n"
                                   "name = kuramoto_kernel\n"),
                      Catch::Matchers::ContainsSubstring("'c_tv'"));
    CHECK_THROWS_WITH(parse_config("[model]\nname = constant\n"),
                      Catch::Matchers::ContainsSubstring("[scenario]"));
}

TEST_CASE("malformed documents are rejected with line numbers") {
    CHECK_THROWS_WITH(parse_config("key_outside = 1\n"),
                      Catch::Matchers::ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(parse_config("[scenario\nname = simulate\n"),
                      Catch::Matchers::ContainsSubstring("malformed section"));
    CHECK_THROWS_WITH(parse_config("[scenario]\nname = simulate\nname = simulate\n"),
                      Catch::Matchers::ContainsSubstring("duplicate key"));
    CHECK_THROWS_WITH(parse_config("[scenario]\nname = warp_drive\n[model]\nname = constant\n"),
                      Catch::Matchers::ContainsSubstring("unknown scenario"));
}

TEST_CASE("scenario-specific sections must match the scenario") {
    CHECK_THROWS_WITH(parse_config("[scenario]\n"
                                   "name = simulate\n"
                                   "[model]\n"
                                   "name = constant\n"
                                   "[holder_check]\n"
                                   "q = 2\n"),
                      Catch::Matchers::ContainsSubstring("does not match scenario"));
}

TEST_CASE("contraction config echoes alpha consistent with the formula") {
    const auto cfg = parse_config(
        "[scenario]\n"
        "name = contraction\n"
        "[model]\n"
        "name = kuramoto_kernel\n"
        "coupling = 0.5\n"
        "sigma = 1.0\n"
        "[contraction]\n"
        "c_tv = 1.0\n"
        "c_bdg = 2.0\n"
        "target_alpha = 0.5\n");
    const ContractionParams p{cfg.c_tv, cfg.c_bdg};
    const double t_star = solve_contraction_horizon(p, cfg.target_alpha);
    // recomputation by the ContractionParams formula
    const double alpha = cfg.c_tv * t_star +
                         4.0 * (cfg.c_bdg * cfg.c_tv * std::sqrt(t_star) +
                                0.5 * cfg.c_tv * cfg.c_tv * t_star);
    CHECK(alpha == Catch::Approx(cfg.target_alpha).margin(1e-10));
}

TEST_CASE("model parameters are validated against the registry") {
    CHECK_THROWS_WITH(parse_config("[scenario]\n"
                                   "name = simulate\n"
                                   "[model]\n"
                                   "name = ou_conditional_mean\n"
                                   "coupling = 2\n"),
                      Catch::Matchers::ContainsSubstring("unknown key 'coupling'"));
    const auto cfg = parse_config(
        "[scenario]\n"
        "name = simulate\n"
        "[model]\n"
        "name = ou_conditional_mean\n"
        "a = 1.5\n"
        "sigma = 0.25\n");
    CHECK(cfg.model_params.at("a") == 1.5);
    CHECK(cfg.model_params.at("sigma") == 0.25);
}

TEST_CASE("measure-dependent models need N >= 2") {
    CHECK_THROWS_WITH(parse_config("[scenario]\n"
                                   "name = simulate\n"
                                   "N = 1\n"
                                   "[model]\n"
                                   "name = ou_conditional_mean\n"),
                      Catch::Matchers::ContainsSubstring("N must be >= 2"));
}

TEST_CASE("comments and blank lines are ignored") {
    const auto cfg = parse_config(
        "# a comment\n"
        "\n"
        "[scenario]\n"
        "name = holder_check  # trailing comment\n"
        "seed = 9\n"
        "; another comment style\n"
        "[model]\n"
        "name = constant\n"
        "[holder_check]\n"
        "q = 4\n"
        "lags = 0.125, 0.25\n"
        "[assert]\n"
        "slope_min = 0.9\n"
        "slope_max = 1.1\n");
    CHECK(cfg.seed == 9);
    CHECK(cfg.q == 4.0);
    CHECK(cfg.lags == std::vector<double>{0.125, 0.25});
    REQUIRE(cfg.asserts.slope_min.has_value());
    CHECK(*cfg.asserts.slope_min == 0.9);
}
