#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lecam/errors.hpp"
#include "lecam/function.hpp"
#include "lecam/model.hpp"

namespace lecam {

/// A model plus the grid and regularity data a run needs.
struct RunConfig {
    ModelSpec spec;
    std::size_t n = 1;
    std::optional<std::vector<double>> grid_times;  // explicit grid; uniform otherwise
    std::optional<double> C1;
    std::optional<HolderClassParams> holder;

    Grid grid() const { return grid_times ? Grid(*grid_times) : Grid::uniform(spec.horizon, n); }
    Grid grid(std::size_t n_override) const { return Grid::uniform(spec.horizon, n_override); }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where,
                           const std::set<std::string>& allowed) {
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError(where + "." + item.key() + ": unknown key");
        }
    }
}

inline const json& require(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.is_object() || !obj.contains(key)) throw ConfigError(where + key + ": missing key");
    return obj.at(key);
}

inline double number(const json& obj, const std::string& where, const std::string& key) {
    const json& v = require(obj, where, key);
    if (!v.is_number()) throw ConfigError(where + key + ": expected a number");
    return v.get<double>();
}

inline double number_or(const json& obj, const std::string& where, const std::string& key,
                        double fallback) {
    return obj.contains(key) ? number(obj, where, key) : fallback;
}

inline RealFunction parse_function(const json& node, const std::string& key) {
    if (!node.is_object()) throw ConfigError(key + ": expected an object with a kind");
    const std::string where = key + ".";
    const json& kind_node = require(node, where, "kind");
    if (!kind_node.is_string()) throw ConfigError(where + "kind: expected a string");
    const std::string kind = kind_node.get<std::string>();
    if (kind == "constant") {
        reject_unknown(node, key, {"kind", "value"});
        return RealFunction::constant(number(node, where, "value"));
    }
    if (kind == "affine") {
        reject_unknown(node, key, {"kind", "intercept", "slope"});
        return RealFunction::affine(number(node, where, "intercept"), number(node, where, "slope"));
    }
    if (kind == "sine") {
        reject_unknown(node, key, {"kind", "offset", "amplitude", "omega", "frequency", "phase"});
        const double offset = number_or(node, where, "offset", 0.0);
        const double amplitude = number(node, where, "amplitude");
        const double phase = number_or(node, where, "phase", 0.0);
        const bool has_omega = node.contains("omega");
        const bool has_freq = node.contains("frequency");
        if (has_omega == has_freq) {
            throw ConfigError(where + "omega: give exactly one of omega and frequency");
        }
        if (has_freq) {
            return RealFunction::sine_cycles(offset, amplitude, number(node, where, "frequency"), phase);
        }
        return RealFunction::sine(offset, amplitude, number(node, where, "omega"), phase);
    }
    if (kind == "exponential") {
        reject_unknown(node, key, {"kind", "scale", "rate"});
        return RealFunction::exponential(number(node, where, "scale"), number(node, where, "rate"));
    }
    if (kind == "power") {
        reject_unknown(node, key, {"kind", "scale", "exponent"});
        const double exponent = number(node, where, "exponent");
        if (!(exponent > 0.0)) throw ConfigError(where + "exponent: must be positive");
        return RealFunction::power(number(node, where, "scale"), exponent);
    }
    throw ConfigError(where + "kind: unknown function kind '" + kind + "'");
}

inline json serialize_function(const RealFunction& f, const std::string& key) {
    if (!f.descriptor()) throw ConfigError(key + ": function has no serializable description");
    json out;
    out["kind"] = f.descriptor()->kind;
    for (const auto& [name, value] : f.descriptor()->params) out[name] = value;
    return out;
}

inline JumpLaw parse_jump_law(const json& node) {
    const std::string where = "jump_law.";
    if (!node.is_object()) throw ConfigError("jump_law: expected an object with a kind");
    const json& kind_node = require(node, where, "kind");
    if (!kind_node.is_string()) throw ConfigError(where + "kind: expected a string");
    const std::string kind = kind_node.get<std::string>();
    try {
        if (kind == "dirac") {
            reject_unknown(node, "jump_law", {"kind", "point"});
            return JumpLaw::dirac(number(node, where, "point"));
        }
        if (kind == "lattice") {
            reject_unknown(node, "jump_law", {"kind", "pmf"});
            const json& pmf_node = require(node, where, "pmf");
            if (!pmf_node.is_object()) throw ConfigError(where + "pmf: expected an object");
            std::map<long, double> pmf;
            for (const auto& item : pmf_node.items()) {
                std::size_t used = 0;
                long k = 0;
                try {
                    k = std::stol(item.key(), &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != item.key().size()) {
                    throw ConfigError(where + "pmf." + item.key() + ": key is not an integer");
                }
                if (!item.value().is_number()) {
                    throw ConfigError(where + "pmf." + item.key() + ": expected a number");
                }
                pmf[k] = item.value().get<double>();
            }
            return JumpLaw::lattice(std::move(pmf));
        }
        if (kind == "uniform") {
            reject_unknown(node, "jump_law", {"kind", "a", "b", "N1"});
            return JumpLaw::uniform(number(node, where, "a"), number(node, where, "b"),
                                    number_or(node, where, "N1", 1.0));
        }
        if (kind == "gaussian") {
            reject_unknown(node, "jump_law", {"kind", "mean", "sd", "N1"});
            return JumpLaw::gaussian(number(node, where, "mean"), number(node, where, "sd"),
                                     number_or(node, where, "N1", 1.0));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError(where + "kind: unknown jump law kind '" + kind + "'");
}

inline json serialize_jump_law(const JumpLaw& law) {
    json out;
    out["kind"] = law.kind_name();
    switch (law.kind()) {
        case JumpLaw::Kind::dirac:
            out["point"] = law.point();
            return out;
        case JumpLaw::Kind::lattice: {
            json pmf = json::object();
            for (const auto& [k, p] : law.lattice_pmf()) pmf[std::to_string(k)] = p;
            out["pmf"] = pmf;
            return out;
        }
        case JumpLaw::Kind::continuous:
            break;
    }
    switch (law.family()) {
        case JumpLaw::Family::uniform:
            out["a"] = law.uniform_lo();
            out["b"] = law.uniform_hi();
            out["N1"] = law.n1();
            return out;
        case JumpLaw::Family::gaussian:
            out["mean"] = law.gaussian_mean();
            out["sd"] = law.gaussian_sd();
            out["N1"] = law.n1();
            return out;
        case JumpLaw::Family::custom:
            break;
    }
    throw ConfigError("jump_law: custom densities cannot be serialized");
}

}  // namespace detail

/// Parses and validates a JSON config. Every error names the offending key.
inline RunConfig parse_config_text(const std::string& text) {
    using detail::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    detail::reject_unknown(root, "config", {"drift", "sigma", "epsilon_n", "intensity", "jump_law",
                                            "horizon", "n", "initial", "grid", "C1", "holder"});
    RunConfig cfg;
    ModelSpec& spec = cfg.spec;
    spec.drift = detail::parse_function(detail::require(root, "", "drift"), "drift");
    spec.sigma = detail::parse_function(detail::require(root, "", "sigma"), "sigma");
    spec.epsilon_n = detail::number(root, "", "epsilon_n");
    if (!(spec.epsilon_n > 0.0)) throw ConfigError("epsilon_n: must be positive");
    spec.intensity = detail::parse_function(detail::require(root, "", "intensity"), "intensity");
    spec.horizon = detail::number(root, "", "horizon");
    if (!(spec.horizon > 0.0)) throw ConfigError("horizon: must be positive");
    spec.initial = detail::number_or(root, "", "initial", 0.0);
    if (root.contains("jump_law")) spec.jump_law = detail::parse_jump_law(root.at("jump_law"));

    const json& n_node = detail::require(root, "", "n");
    if (!n_node.is_number_unsigned() || n_node.get<std::size_t>() == 0) {
        throw ConfigError("n: must be a positive integer");
    }
    cfg.n = n_node.get<std::size_t>();

    if (root.contains("grid")) {
        const json& g = root.at("grid");
        if (!g.is_object()) throw ConfigError("grid: expected an object with a kind");
        const json& kind = detail::require(g, "grid.", "kind");
        if (kind == "uniform") {
            detail::reject_unknown(g, "grid", {"kind"});
        } else if (kind == "explicit") {
            detail::reject_unknown(g, "grid", {"kind", "times"});
            const json& times = detail::require(g, "grid.", "times");
            if (!times.is_array()) throw ConfigError("grid.times: expected an array of numbers");
            std::vector<double> t;
            for (const auto& v : times) {
                if (!v.is_number()) throw ConfigError("grid.times: expected an array of numbers");
                t.push_back(v.get<double>());
            }
            try {
                Grid check(t);
                if (std::abs(check.horizon() - spec.horizon) > 1e-12 * spec.horizon) {
                    throw ConfigError("grid.times: last time must equal horizon");
                }
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("grid.times: ") + e.what());
            }
            if (t.size() - 1 != cfg.n) throw ConfigError("grid.times: must hold n + 1 times");
            cfg.grid_times = std::move(t);
        } else {
            throw ConfigError("grid.kind: must be 'uniform' or 'explicit'");
        }
    }

    if (root.contains("C1")) cfg.C1 = detail::number(root, "", "C1");
    if (root.contains("holder")) {
        const json& h = root.at("holder");
        if (!h.is_object()) throw ConfigError("holder: expected an object");
        detail::reject_unknown(h, "holder", {"alpha", "M", "B"});
        HolderClassParams p{detail::number(h, "holder.", "alpha"), detail::number(h, "holder.", "M"),
                            detail::number(h, "holder.", "B")};
        try {
            p.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        cfg.holder = p;
    }

    const Grid grid = cfg.grid();
    try {
        spec.validate(&grid);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.C1 && !check_sigma_log_derivative(spec.sigma, *cfg.C1, grid)) {
        std::ostringstream msg;
        msg << "C1: |d/dt ln sigma| exceeds C1 = " << *cfg.C1;
        throw ConfigError(msg.str());
    }
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json out;
    out["drift"] = detail::serialize_function(cfg.spec.drift, "drift");
    out["sigma"] = detail::serialize_function(cfg.spec.sigma, "sigma");
    out["epsilon_n"] = cfg.spec.epsilon_n;
    out["intensity"] = detail::serialize_function(cfg.spec.intensity, "intensity");
    out["jump_law"] = detail::serialize_jump_law(cfg.spec.jump_law);
    out["horizon"] = cfg.spec.horizon;
    out["initial"] = cfg.spec.initial;
    out["n"] = cfg.n;
    if (cfg.grid_times) {
        out["grid"] = {{"kind", "explicit"}, {"times", *cfg.grid_times}};
    } else {
        out["grid"] = {{"kind", "uniform"}};
    }
    if (cfg.C1) out["C1"] = *cfg.C1;
    if (cfg.holder) {
        out["holder"] = {{"alpha", cfg.holder->alpha}, {"M", cfg.holder->M}, {"B", cfg.holder->B}};
    }
    return out;
}

inline std::string serialize_config(const RunConfig& cfg) { return config_to_json(cfg).dump(2); }

}  // namespace lecam
