#pragma once
// Strict INI-style configuration: [section] headers, key = value lines, '#' or
// ';' comments. Unknown sections or keys are errors, type mismatches report
// the offending line, and scenario-specific keys live in a section named after
// the scenario tag.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mkv/coefficients.hpp"
#include "mkv/common.hpp"

namespace mkv {

struct AssertSpec {
    std::optional<double> slope_min, slope_max;
    std::optional<double> max_residual;   // spde / fubini sup tolerance
    std::optional<double> ks_max;         // girsanov CDF agreement
    std::optional<double> ratio_max;      // contraction decay ratio
    std::optional<double> cost_max;       // coupling cost
};

struct ScenarioConfig {
    std::string scenario;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    std::int64_t particles = 1024;  // N
    std::int64_t mesh = 64;         // n
    double horizon = 1.0;           // T
    int replications = 30;          // seeds-for-replication

    std::string model_name;
    std::map<std::string, double> model_params;

    // simulate
    std::string storage = "full";  // full | streaming

    // holder_check / wp_holder_check
    double q = 2.0;
    double p = 3.0;
    std::vector<double> lags;  // window widths; default 2^-6 .. 2^-2

    // spde_check / fubini_check
    std::vector<std::string> phis = {"x", "x2", "sin"};
    std::string integrand = "x2";  // one | x2
    std::string target = "both";   // dw | db | both

    // girsanov_check
    double girsanov_horizon = 0.0;  // 0: use horizon

    // contraction
    double c_tv = 0.0;
    double c_bdg = 2.0;
    double contraction_horizon = 0.0;  // 0: solve from target_alpha
    double target_alpha = 0.5;
    int iterations = 8;
    double perturbation = 0.5;
    double bin_width = 0.0;  // 0: Scott's rule

    // coupling_cost
    std::int64_t samples = 16;
    std::uint64_t seed2 = 0;
    bool seed2_set = false;
    double drift_scale = 1.0;

    // mollify_demo
    std::vector<double> mollify_ns = {4, 8, 16, 32};
    int quadrature_points = 20;  // even counts keep the rule symmetric about 0
    int eval_points = 41;
    double eval_range = 1.0;

    AssertSpec asserts;
    std::string text;  // raw config text (hashed into the manifest)
};

namespace detail {

struct IniEntry {
    std::string value;
    int line = 0;
};

struct IniDoc {
    // section -> key -> entry
    std::map<std::string, std::map<std::string, IniEntry>> sections;
    std::vector<std::string> order;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline IniDoc parse_ini(const std::string& text) {
    IniDoc doc;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw Error("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw Error("line " + std::to_string(lineno) + ": empty section name");
            if (!doc.sections.count(section)) doc.order.push_back(section);
            doc.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw Error("line " + std::to_string(lineno) + ": empty key");
        if (section.empty()) throw Error("line " + std::to_string(lineno) + ": key outside any [section]");
        if (doc.sections[section].count(key))
            throw Error("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        doc.sections[section][key] = {value, lineno};
    }
    return doc;
}

inline double parse_double(const IniEntry& e, const std::string& key) {
    const std::string& s = e.value;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error("line " + std::to_string(e.line) + ": expected a number for key '" + key + "'");
    return v;
}

inline std::int64_t parse_int(const IniEntry& e, const std::string& key) {
    const std::string& s = e.value;
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error("line " + std::to_string(e.line) + ": expected an integer for key '" + key + "'");
    return v;
}

inline std::uint64_t parse_uint(const IniEntry& e, const std::string& key) {
    const std::string& s = e.value;
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error("line " + std::to_string(e.line) + ": expected a non-negative integer for key '" + key + "'");
    return v;
}

inline std::vector<double> parse_double_list(const IniEntry& e, const std::string& key) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(e.value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc() || res.ptr != item.data() + item.size())
            throw Error("line " + std::to_string(e.line) + ": expected a number list for key '" + key + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw Error("line " + std::to_string(e.line) + ": empty list for key '" + key + "'");
    return out;
}

inline std::vector<std::string> parse_string_list(const IniEntry& e) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(e.value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace detail

inline const std::set<std::string>& scenario_tags() {
    static const std::set<std::string> tags = {
        "simulate",     "spde_check",  "fubini_check", "holder_check", "wp_holder_check",
        "girsanov_check", "contraction", "coupling_cost", "mollify_demo"};
    return tags;
}

inline ScenarioConfig parse_config(const std::string& text) {
    using namespace detail;
    const IniDoc doc = parse_ini(text);
    ScenarioConfig cfg;
    cfg.text = text;
    cfg.lags = {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};

    auto section = doc.sections.find("scenario");
    if (section == doc.sections.end()) throw Error("missing required section [scenario]");
    {
        auto keys = section->second;
        auto take = [&](const std::string& k) -> std::optional<IniEntry> {
            auto it = keys.find(k);
            if (it == keys.end()) return std::nullopt;
            IniEntry e = it->second;
            keys.erase(it);
            return e;
        };
        auto name = take("name");
        if (!name) throw Error("missing required key 'name' in [scenario]");
        cfg.scenario = name->value;
        if (!scenario_tags().count(cfg.scenario))
            throw Error("line " + std::to_string(name->line) + ": unknown scenario '" + cfg.scenario + "'");
        if (auto e = take("output_dir")) cfg.output_dir = e->value;
        if (auto e = take("seed")) cfg.seed = parse_uint(*e, "seed");
        if (auto e = take("N")) cfg.particles = parse_int(*e, "N");
        if (auto e = take("n")) cfg.mesh = parse_int(*e, "n");
        if (auto e = take("horizon")) cfg.horizon = parse_double(*e, "horizon");
        if (auto e = take("seeds")) cfg.replications = static_cast<int>(parse_int(*e, "seeds"));
        for (const auto& [k, v] : keys)
            throw Error("line " + std::to_string(v.line) + ": unknown key '" + k + "' in [scenario]");
        if (cfg.particles < 1) throw Error("N must be positive");
        if (cfg.mesh < 1) throw Error("n must be positive");
        if (!(cfg.horizon > 0.0)) throw Error("empty horizon");
        if (cfg.replications < 1) throw Error("seeds must be positive");
    }

    const bool needs_model = cfg.scenario != "mollify_demo" && cfg.scenario != "coupling_cost";
    auto model = doc.sections.find("model");
    if (model != doc.sections.end()) {
        auto keys = model->second;
        auto it = keys.find("name");
        if (it == keys.end()) throw Error("missing required key 'name' in [model]");
        cfg.model_name = it->second.value;
        const auto& known = model_parameter_names();
        auto reg = known.find(cfg.model_name);
        if (reg == known.end())
            throw Error("line " + std::to_string(it->second.line) + ": unknown model '" + cfg.model_name + "'");
        keys.erase(it);
        for (const auto& [k, v] : keys) {
            if (std::find(reg->second.begin(), reg->second.end(), k) == reg->second.end())
                throw Error("line " + std::to_string(v.line) + ": unknown key '" + k + "' in [model]");
            cfg.model_params[k] = parse_double(v, k);
        }
    } else if (needs_model) {
        throw Error("missing required section [model]");
    }

    // Scenario-specific section, named after the tag.
    auto extra = doc.sections.find(cfg.scenario);
    std::map<std::string, IniEntry> keys;
    if (extra != doc.sections.end()) keys = extra->second;
    auto take = [&](const std::string& k) -> std::optional<IniEntry> {
        auto it = keys.find(k);
        if (it == keys.end()) return std::nullopt;
        IniEntry e = it->second;
        keys.erase(it);
        return e;
    };
    if (cfg.scenario == "simulate") {
        if (auto e = take("storage")) {
            cfg.storage = e->value;
            if (cfg.storage != "full" && cfg.storage != "streaming")
                throw Error("line " + std::to_string(e->line) + ": storage must be 'full' or 'streaming'");
        }
    } else if (cfg.scenario == "holder_check") {
        if (auto e = take("q")) cfg.q = parse_double(*e, "q");
        if (auto e = take("lags")) cfg.lags = parse_double_list(*e, "lags");
        if (cfg.q < 1.0) throw Error("q must be >= 1");
    } else if (cfg.scenario == "wp_holder_check") {
        if (auto e = take("p")) cfg.p = parse_double(*e, "p");
        if (auto e = take("lags")) cfg.lags = parse_double_list(*e, "lags");
        if (!(cfg.p > 2.0)) throw Error("p must lie in (2, inf)");
    } else if (cfg.scenario == "spde_check") {
        if (auto e = take("phis")) cfg.phis = parse_string_list(*e);
    } else if (cfg.scenario == "fubini_check") {
        if (auto e = take("integrand")) {
            cfg.integrand = e->value;
            if (cfg.integrand != "one" && cfg.integrand != "x2")
                throw Error("line " + std::to_string(e->line) + ": integrand must be 'one' or 'x2'");
        }
        if (auto e = take("target")) {
            cfg.target = e->value;
            if (cfg.target != "dw" && cfg.target != "db" && cfg.target != "both")
                throw Error("line " + std::to_string(e->line) + ": target must be 'dw', 'db' or 'both'");
        }
    } else if (cfg.scenario == "girsanov_check") {
        if (auto e = take("T")) cfg.girsanov_horizon = parse_double(*e, "T");
    } else if (cfg.scenario == "contraction") {
        auto e_ctv = take("c_tv");
        if (!e_ctv) throw Error("missing required key 'c_tv' in [contraction]");
        cfg.c_tv = parse_double(*e_ctv, "c_tv");
        if (auto e = take("c_bdg")) cfg.c_bdg = parse_double(*e, "c_bdg");
        if (auto e = take("T")) cfg.contraction_horizon = parse_double(*e, "T");
        if (auto e = take("target_alpha")) cfg.target_alpha = parse_double(*e, "target_alpha");
        if (auto e = take("iterations")) cfg.iterations = static_cast<int>(parse_int(*e, "iterations"));
        if (auto e = take("perturbation")) cfg.perturbation = parse_double(*e, "perturbation");
        if (auto e = take("bin_width")) cfg.bin_width = parse_double(*e, "bin_width");
    } else if (cfg.scenario == "coupling_cost") {
        if (auto e = take("samples")) cfg.samples = parse_int(*e, "samples");
        if (auto e = take("seed2")) {
            cfg.seed2 = parse_uint(*e, "seed2");
            cfg.seed2_set = true;
        }
        if (auto e = take("drift_scale")) cfg.drift_scale = parse_double(*e, "drift_scale");
        if (cfg.samples < 1 || cfg.samples > 256) throw Error("samples must lie in [1, 256]");
    } else if (cfg.scenario == "mollify_demo") {
        if (auto e = take("n_list")) cfg.mollify_ns = parse_double_list(*e, "n_list");
        if (auto e = take("quadrature_points"))
            cfg.quadrature_points = static_cast<int>(parse_int(*e, "quadrature_points"));
        if (auto e = take("eval_points")) cfg.eval_points = static_cast<int>(parse_int(*e, "eval_points"));
        if (auto e = take("range")) cfg.eval_range = parse_double(*e, "range");
    }
    for (const auto& [k, v] : keys)
        throw Error("line " + std::to_string(v.line) + ": unknown key '" + k + "' in [" + cfg.scenario + "]");

    // Optional assertions, enforced when the CLI runs with --assert.
    auto asserts = doc.sections.find("assert");
    if (asserts != doc.sections.end()) {
        auto akeys = asserts->second;
        auto atake = [&](const std::string& k) -> std::optional<IniEntry> {
            auto it = akeys.find(k);
            if (it == akeys.end()) return std::nullopt;
            IniEntry e = it->second;
            akeys.erase(it);
            return e;
        };
        if (auto e = atake("slope_min")) cfg.asserts.slope_min = parse_double(*e, "slope_min");
        if (auto e = atake("slope_max")) cfg.asserts.slope_max = parse_double(*e, "slope_max");
        if (auto e = atake("max_residual")) cfg.asserts.max_residual = parse_double(*e, "max_residual");
        if (auto e = atake("ks_max")) cfg.asserts.ks_max = parse_double(*e, "ks_max");
        if (auto e = atake("ratio_max")) cfg.asserts.ratio_max = parse_double(*e, "ratio_max");
        if (auto e = atake("cost_max")) cfg.asserts.cost_max = parse_double(*e, "cost_max");
        for (const auto& [k, v] : akeys)
            throw Error("line " + std::to_string(v.line) + ": unknown key '" + k + "' in [assert]");
    }

    // Reject sections that belong to no part of the schema.
    for (const auto& name : doc.order) {
        if (name == "scenario" || name == "model" || name == "assert" || name == cfg.scenario) continue;
        if (scenario_tags().count(name))
            throw Error("section [" + name + "] does not match scenario '" + cfg.scenario + "'");
        throw Error("unknown section [" + name + "]");
    }

    if (needs_model) {
        ModelSpec probe = make_model(cfg.model_name, cfg.model_params);
        if (probe.coeffs.measure_dependent() && cfg.particles < 2)
            throw Error("N must be >= 2 for measure-dependent models");
    }
    return cfg;
}

}  // namespace mkv
