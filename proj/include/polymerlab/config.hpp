// Experiment configuration: strict JSON schema, full-error-list validation,
// and a round-trip serializer (parse(serialize(c)) == c).

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "polymerlab/disorder.hpp"
#include "polymerlab/errors.hpp"

namespace polymerlab {

struct ResourceCaps {
    double max_memory_mb = 4096.0;
    double max_enumeration = 1e6;

    friend bool operator==(const ResourceCaps&, const ResourceCaps&) = default;
};

struct ModelSpec {
    std::string kind;
    // Parameter names fixed per kind: gaussian{sigma},
    // centered_exponential{rate}, centered_gamma{shape, scale},
    // centered_uniform{half_width}.
    std::vector<std::pair<std::string, double>> params;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct ExperimentConfig {
    int dimension = 1;
    double beta = 0.0;
    ModelSpec model;
    std::vector<std::int64_t> N_grid;
    std::int64_t replicas = 2;
    std::uint64_t base_seed = 0;
    std::vector<double> t_grid;          // concentration; defaulted when absent
    std::int64_t block_length = 0;       // skeletons; 0 = unset
    double K13 = 1.0;
    ResourceCaps caps;
    std::int64_t resamples_per_replica = 16;
    std::vector<std::vector<std::int64_t>> influence_sites; // rows [m, x1, (x2)]
    std::vector<std::int64_t> endpoint;  // length = dimension; defaults to origin

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline std::vector<double> default_t_grid() {
    std::vector<double> t;
    for (int i = 0; i <= 20; ++i) t.push_back(0.25 * i);
    return t;
}

namespace detail {

inline bool get_number(const nlohmann::json& j, double& out) {
    if (!j.is_number()) return false;
    out = j.get<double>();
    return true;
}

inline bool get_integer(const nlohmann::json& j, std::int64_t& out) {
    if (!j.is_number_integer()) return false;
    out = j.get<std::int64_t>();
    return true;
}

} // namespace detail

// Build the runtime model from its serialized form (also validates
// parameter names and positivity).
inline DisorderModel make_model(const ModelSpec& spec) {
    auto param = [&](const char* name) -> double {
        for (const auto& [k, v] : spec.params) {
            if (k == name) return v;
        }
        throw std::invalid_argument("model '" + spec.kind + "' missing parameter '" + name +
                                    "'");
    };
    auto expect_count = [&](std::size_t n) {
        if (spec.params.size() != n) {
            throw std::invalid_argument("model '" + spec.kind + "' takes " +
                                        std::to_string(n) + " parameter(s)");
        }
    };
    if (spec.kind == "gaussian") {
        expect_count(1);
        return DisorderModel::make_gaussian(param("sigma"));
    }
    if (spec.kind == "centered_exponential") {
        expect_count(1);
        return DisorderModel::make_centered_exponential(param("rate"));
    }
    if (spec.kind == "centered_gamma") {
        expect_count(2);
        return DisorderModel::make_centered_gamma(param("shape"), param("scale"));
    }
    if (spec.kind == "centered_uniform") {
        expect_count(1);
        return DisorderModel::make_centered_uniform(param("half_width"));
    }
    throw std::invalid_argument("unknown disorder kind '" + spec.kind + "'");
}

// Parse and validate; throws ConfigError carrying every problem found.
inline ExperimentConfig parse_config(const std::string& text) {
    std::vector<std::string> errs;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({std::string("JSON parse error: ") + e.what()});
    }
    if (!j.is_object()) throw ConfigError({"top level must be a JSON object"});

    static const std::vector<std::string> known = {
        "dimension",    "beta",       "model",          "N_grid",
        "replicas",     "base_seed",  "t_grid",         "block_length",
        "K13",          "caps",       "resamples_per_replica", "influence_sites",
        "endpoint"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool found = false;
        for (const auto& k : known) {
            if (it.key() == k) {
                found = true;
                break;
            }
        }
        if (!found) errs.push_back("unknown key '" + it.key() + "'");
    }

    ExperimentConfig c;

    auto require = [&](const char* key) -> const nlohmann::json* {
        if (!j.contains(key)) {
            errs.push_back(std::string("missing required key '") + key + "'");
            return nullptr;
        }
        return &j.at(key);
    };

    if (const auto* v = require("dimension")) {
        std::int64_t d = 0;
        if (!detail::get_integer(*v, d) || (d != 1 && d != 2)) {
            errs.push_back("dimension must be 1 or 2");
        } else {
            c.dimension = static_cast<int>(d);
        }
    }
    if (const auto* v = require("beta")) {
        double b = 0.0;
        if (!detail::get_number(*v, b) || !(b >= 0.0)) {
            errs.push_back("beta must be a number >= 0");
        } else {
            c.beta = b;
        }
    }
    if (const auto* v = require("model")) {
        if (!v->is_object() || !v->contains("kind") || !v->at("kind").is_string() ||
            !v->contains("params") || !v->at("params").is_object()) {
            errs.push_back("model must be {\"kind\": string, \"params\": {name: number}}");
        } else {
            for (auto it = v->begin(); it != v->end(); ++it) {
                if (it.key() != "kind" && it.key() != "params") {
                    errs.push_back("unknown key 'model." + it.key() + "'");
                }
            }
            c.model.kind = v->at("kind").get<std::string>();
            const auto& p = v->at("params");
            for (auto it = p.begin(); it != p.end(); ++it) {
                double val = 0.0;
                if (!detail::get_number(it.value(), val)) {
                    errs.push_back("model parameter '" + it.key() + "' must be a number");
                } else {
                    c.model.params.emplace_back(it.key(), val);
                }
            }
            std::sort(c.model.params.begin(), c.model.params.end());
            try {
                (void)make_model(c.model);
            } catch (const std::exception& e) {
                errs.push_back(e.what());
            }
        }
    }
    if (const auto* v = require("N_grid")) {
        if (!v->is_array() || v->empty()) {
            errs.push_back("N_grid must be a nonempty array of integers");
        } else {
            std::int64_t prev = 0;
            for (const auto& e : *v) {
                std::int64_t n = 0;
                if (!detail::get_integer(e, n) || n < 1) {
                    errs.push_back("N_grid entries must be integers >= 1");
                    c.N_grid.clear();
                    break;
                }
                if (!c.N_grid.empty() && n <= prev) {
                    errs.push_back("N_grid must be strictly increasing");
                    c.N_grid.clear();
                    break;
                }
                c.N_grid.push_back(n);
                prev = n;
            }
        }
    }
    if (const auto* v = require("replicas")) {
        std::int64_t r = 0;
        if (!detail::get_integer(*v, r) || r < 2) {
            errs.push_back("replicas must be an integer >= 2");
        } else {
            c.replicas = r;
        }
    }
    if (const auto* v = require("base_seed")) {
        if (v->is_number_unsigned()) {
            c.base_seed = v->get<std::uint64_t>();
        } else if (v->is_number_integer() && v->get<std::int64_t>() >= 0) {
            c.base_seed = static_cast<std::uint64_t>(v->get<std::int64_t>());
        } else {
            errs.push_back("base_seed must be a nonnegative 64-bit integer");
        }
    }

    if (j.contains("t_grid")) {
        const auto& v = j.at("t_grid");
        if (!v.is_array() || v.empty()) {
            errs.push_back("t_grid must be a nonempty array of numbers");
        } else {
            double prev = -1.0;
            for (const auto& e : v) {
                double t = 0.0;
                if (!detail::get_number(e, t) || t < 0.0) {
                    errs.push_back("t_grid entries must be numbers >= 0");
                    c.t_grid.clear();
                    break;
                }
                if (!c.t_grid.empty() && t <= prev) {
                    errs.push_back("t_grid must be strictly increasing");
                    c.t_grid.clear();
                    break;
                }
                c.t_grid.push_back(t);
                prev = t;
            }
        }
    } else {
        c.t_grid = default_t_grid();
    }
    if (j.contains("block_length")) {
        std::int64_t n = 0;
        if (!detail::get_integer(j.at("block_length"), n) || n < 1) {
            errs.push_back("block_length must be an integer >= 1");
        } else {
            c.block_length = n;
        }
    }
    if (j.contains("K13")) {
        double k = 0.0;
        if (!detail::get_number(j.at("K13"), k) || !(k > 0.0)) {
            errs.push_back("K13 must be a number > 0");
        } else {
            c.K13 = k;
        }
    }
    if (j.contains("caps")) {
        const auto& v = j.at("caps");
        if (!v.is_object()) {
            errs.push_back("caps must be an object");
        } else {
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (it.key() == "max_memory_mb") {
                    double m = 0.0;
                    if (!detail::get_number(it.value(), m) || !(m > 0.0)) {
                        errs.push_back("caps.max_memory_mb must be a number > 0");
                    } else {
                        c.caps.max_memory_mb = m;
                    }
                } else if (it.key() == "max_enumeration") {
                    double m = 0.0;
                    if (!detail::get_number(it.value(), m) || !(m > 0.0)) {
                        errs.push_back("caps.max_enumeration must be a number > 0");
                    } else {
                        c.caps.max_enumeration = m;
                    }
                } else {
                    errs.push_back("unknown key 'caps." + it.key() + "'");
                }
            }
        }
    }
    if (j.contains("resamples_per_replica")) {
        std::int64_t k = 0;
        if (!detail::get_integer(j.at("resamples_per_replica"), k) || k < 2) {
            errs.push_back("resamples_per_replica must be an integer >= 2");
        } else {
            c.resamples_per_replica = k;
        }
    }
    if (j.contains("influence_sites")) {
        const auto& v = j.at("influence_sites");
        if (!v.is_array()) {
            errs.push_back("influence_sites must be an array of [m, x...] rows");
        } else {
            for (const auto& row : v) {
                std::vector<std::int64_t> site;
                bool ok = row.is_array() &&
                          row.size() == static_cast<std::size_t>(c.dimension) + 1;
                if (ok) {
                    for (const auto& e : row) {
                        std::int64_t val = 0;
                        if (!detail::get_integer(e, val)) {
                            ok = false;
                            break;
                        }
                        site.push_back(val);
                    }
                }
                if (!ok) {
                    errs.push_back("influence_sites rows must be integer arrays of length "
                                   "dimension+1");
                    c.influence_sites.clear();
                    break;
                }
                c.influence_sites.push_back(std::move(site));
            }
        }
    }
    if (j.contains("endpoint")) {
        const auto& v = j.at("endpoint");
        bool ok = v.is_array() && v.size() == static_cast<std::size_t>(c.dimension);
        if (ok) {
            for (const auto& e : v) {
                std::int64_t val = 0;
                if (!detail::get_integer(e, val)) {
                    ok = false;
                    break;
                }
                c.endpoint.push_back(val);
            }
        }
        if (!ok) {
            errs.push_back("endpoint must be an integer array of length dimension");
            c.endpoint.clear();
        }
    }
    if (c.endpoint.empty()) {
        c.endpoint.assign(static_cast<std::size_t>(c.dimension), 0);
    }

    if (!errs.empty()) throw ConfigError(std::move(errs));
    return c;
}

inline std::string serialize_config(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["dimension"] = c.dimension;
    j["beta"] = c.beta;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : c.model.params) params[k] = v;
    j["model"] = {{"kind", c.model.kind}, {"params", params}};
    j["N_grid"] = c.N_grid;
    j["replicas"] = c.replicas;
    j["base_seed"] = c.base_seed;
    j["t_grid"] = c.t_grid;
    if (c.block_length > 0) j["block_length"] = c.block_length;
    j["K13"] = c.K13;
    j["caps"] = {{"max_memory_mb", c.caps.max_memory_mb},
                 {"max_enumeration", c.caps.max_enumeration}};
    j["resamples_per_replica"] = c.resamples_per_replica;
    if (!c.influence_sites.empty()) j["influence_sites"] = c.influence_sites;
    j["endpoint"] = c.endpoint;
    return j.dump(2);
}

} // namespace polymerlab
