#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hatm/engine.hpp"

namespace hatm {

inline nlohmann::json poly_to_json(const BiPoly& p) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [k, c] : p.terms())
        terms.push_back({{"hbar_exp", k.hbar_exp}, {"t_exp", k.t_exp}, {"coef", c}});
    return terms;
}

inline BiPoly poly_from_json(const nlohmann::json& terms) {
    if (!terms.is_array()) throw ConfigError("series document: term list is not an array");
    BiPoly p;
    for (const auto& t : terms)
        p.add_term(t.at("hbar_exp").get<int>(), t.at("t_exp").get<int>(),
                   t.at("coef").get<double>());
    return p;
}

/// Series export document: order components and partial sum per state.
inline nlohmann::json series_to_json(const DeformationSeries& series) {
    nlohmann::json states = nlohmann::json::array();
    for (int i = 0; i < series.system.state_count(); ++i) {
        nlohmann::json components = nlohmann::json::array();
        for (const auto& c : series.components[i]) components.push_back(poly_to_json(c));
        states.push_back({{"name", series.system.names[i]},
                          {"components", components},
                          {"partial_sum", poly_to_json(partial_sum(series, i))}});
    }
    return {{"order", series.order}, {"states", states}};
}

/// Reads back the per-state partial sums of a series export document.
inline std::vector<std::pair<std::string, BiPoly>> partial_sums_from_json(
    const std::string& document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("series document: parse error: ") + e.what());
    }
    std::vector<std::pair<std::string, BiPoly>> sums;
    for (const auto& state : doc.at("states"))
        sums.emplace_back(state.at("name").get<std::string>(),
                          poly_from_json(state.at("partial_sum")));
    return sums;
}

}  // namespace hatm
