#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "hatm/ode_system.hpp"

namespace hatm {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) { known = true; break; }
        if (!known) throw ConfigError(path + ": unknown field '" + key + "'");
    }
}

inline double require_real(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    return v.get<double>();
}

inline HivCd8Params apply_overrides(const nlohmann::json& overrides) {
    HivCd8Params p;
    const std::map<std::string, double*> fields = {
        {"lambda_T", &p.lambda_T}, {"mu_T", &p.mu_T},   {"chi", &p.chi},
        {"mu_I", &p.mu_I},         {"eps_V", &p.eps_V}, {"mu_V", &p.mu_V},
        {"alpha", &p.alpha},       {"lambda_Z", &p.lambda_Z},
        {"mu_Z", &p.mu_Z},         {"beta", &p.beta},   {"mu_Za", &p.mu_Za},
        {"T0", &p.T0},             {"I0", &p.I0},       {"V0", &p.V0},
        {"Z0", &p.Z0},             {"Za0", &p.Za0},
    };
    if (!overrides.is_object()) throw ConfigError("overrides: expected an object");
    for (const auto& [key, value] : overrides.items()) {
        auto it = fields.find(key);
        if (it == fields.end()) throw ConfigError("overrides: unknown parameter '" + key + "'");
        *it->second = require_real(value, "overrides." + key);
    }
    return p;
}

}  // namespace detail

/// Parse a model-config document. Either `preset` ("hiv-cd8", optionally with
/// `overrides`) or a full `states`/`constant`/`linear`/`quadratic` description.
inline QuadraticOdeSystem load_system(const std::string& document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("model config: parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("model config: expected a JSON object");
    detail::reject_unknown_keys(
        doc, {"preset", "states", "constant", "linear", "quadratic", "overrides"}, "model config");

    const bool has_preset = doc.contains("preset");
    const bool has_states = doc.contains("states");
    if (has_preset == has_states)
        throw ConfigError("model config: exactly one of 'preset'/'states' must be present");

    if (has_preset) {
        if (!doc["preset"].is_string() || doc["preset"].get<std::string>() != "hiv-cd8")
            throw ConfigError("preset: unknown preset (only \"hiv-cd8\" is available)");
        for (const char* forbidden : {"constant", "linear", "quadratic"})
            if (doc.contains(forbidden))
                throw ConfigError(std::string(forbidden) + ": not valid with 'preset'");
        HivCd8Params params;
        if (doc.contains("overrides")) params = detail::apply_overrides(doc["overrides"]);
        return hiv_cd8_system(params);
    }

    if (doc.contains("overrides"))
        throw ConfigError("overrides: valid only with 'preset'");

    QuadraticOdeSystem sys;
    const auto& states = doc["states"];
    if (!states.is_array() || states.empty())
        throw ConfigError("states: expected a nonempty array");
    const int n = static_cast<int>(states.size());
    sys.init.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto path = "states[" + std::to_string(i) + "]";
        if (!states[i].is_object()) throw ConfigError(path + ": expected an object");
        detail::reject_unknown_keys(states[i], {"name", "init"}, path);
        if (!states[i].contains("name") || !states[i]["name"].is_string())
            throw ConfigError(path + ".name: expected a string");
        if (!states[i].contains("init"))
            throw ConfigError(path + ".init: missing");
        sys.names.push_back(states[i]["name"].get<std::string>());
        sys.init[i] = detail::require_real(states[i]["init"], path + ".init");
    }

    if (!doc.contains("constant") || !doc["constant"].is_array() ||
        static_cast<int>(doc["constant"].size()) != n)
        throw ConfigError("constant: expected an array of length " + std::to_string(n));
    sys.constant.resize(n);
    for (int i = 0; i < n; ++i)
        sys.constant[i] = detail::require_real(doc["constant"][i], "constant[" + std::to_string(i) + "]");

    if (!doc.contains("linear") || !doc["linear"].is_array() ||
        static_cast<int>(doc["linear"].size()) != n * n)
        throw ConfigError("linear: expected a row-major array of length " + std::to_string(n * n));
    sys.linear.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            sys.linear(i, j) = detail::require_real(
                doc["linear"][i * n + j], "linear[" + std::to_string(i * n + j) + "]");

    if (doc.contains("quadratic")) {
        if (!doc["quadratic"].is_array()) throw ConfigError("quadratic: expected an array");
        int idx = 0;
        for (const auto& entry : doc["quadratic"]) {
            const auto path = "quadratic[" + std::to_string(idx++) + "]";
            if (!entry.is_object()) throw ConfigError(path + ": expected an object");
            detail::reject_unknown_keys(entry, {"target", "j", "k", "coef"}, path);
            for (const char* field : {"target", "j", "k", "coef"})
                if (!entry.contains(field))
                    throw ConfigError(path + "." + field + ": missing");
            QuadraticTerm q;
            auto state_index = [&](const char* field) {
                const auto& v = entry[field];
                if (!v.is_string()) throw ConfigError(path + "." + field + ": expected a state name");
                return sys.index_of(v.get<std::string>());
            };
            q.target = state_index("target");
            q.j = state_index("j");
            q.k = state_index("k");
            if (q.j > q.k) std::swap(q.j, q.k);
            q.coef = detail::require_real(entry["coef"], path + ".coef");
            sys.quadratic.push_back(q);
        }
    }

    sys.validate();
    return sys;
}

}  // namespace hatm
