#pragma once

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "advisor/dialogue.hpp"
#include "advisor/simulator.hpp"

namespace advisor {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything a deployment can tune. Built-in defaults here; a JSON config file
/// overrides them; command-line flags override the file.
struct EngineConfig {
    std::string catalog_dir = "data";
    std::string data_dir = "state";
    std::string messages_path;  // empty: built-in wording
    DialogueConfig dialogue{};
    bool adapt = true;
    int port = 8080;
    std::string bind_address = "127.0.0.1";

    std::size_t sim_users = 20;
    std::size_t sim_sessions = 15;
    std::uint64_t sim_seed = 42;
    PopulationParams population{};

    void validate() const {
        dialogue.validate();
        if (port < 0 || port > 65535) throw ConfigError("port outside 0..65535");
        if (sim_users < 1 || sim_sessions < 1) throw ConfigError("simulation needs at least one user and session");
    }
};

inline std::string to_string(ConstrainStrategy s) { return s == ConstrainStrategy::ByWeight ? "by-weight" : "by-entropy"; }
inline std::string to_string(RelaxStrategy s) { return s == RelaxStrategy::ByWeight ? "by-weight" : "by-size"; }

inline ConstrainStrategy parse_constrain_strategy(const std::string& s) {
    if (s == "by-weight") return ConstrainStrategy::ByWeight;
    if (s == "by-entropy") return ConstrainStrategy::ByEntropy;
    throw ConfigError("unknown constrain strategy '" + s + "' (by-weight, by-entropy)");
}

inline RelaxStrategy parse_relax_strategy(const std::string& s) {
    if (s == "by-weight") return RelaxStrategy::ByWeight;
    if (s == "by-size") return RelaxStrategy::BySize;
    throw ConfigError("unknown relax strategy '" + s + "' (by-weight, by-size)");
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [k, v] : obj.items())
        if (!known.count(k)) throw ConfigError("unknown config key '" + where + k + "'");
}

template <class T>
void read_if(const nlohmann::json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace detail

/// Overlays the keys present in `doc` onto `cfg`.
inline void apply_config_json(EngineConfig& cfg, const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    try {
        detail::reject_unknown_keys(doc,
                                    {"catalog", "data_dir", "messages", "similarity_threshold", "presentation_threshold",
                                     "learn_rate", "constrain_strategy", "relax_strategy", "values_to_list",
                                     "max_start_overs", "max_turns", "diversity", "adapt", "port", "bind_address",
                                     "simulation"},
                                    "");
        detail::read_if(doc, "catalog", cfg.catalog_dir);
        detail::read_if(doc, "data_dir", cfg.data_dir);
        detail::read_if(doc, "messages", cfg.messages_path);
        auto& d = cfg.dialogue;
        detail::read_if(doc, "similarity_threshold", d.similarity.similarity_threshold);
        detail::read_if(doc, "presentation_threshold", d.similarity.presentation_threshold);
        detail::read_if(doc, "learn_rate", d.policy.learn_rate);
        if (doc.contains("constrain_strategy"))
            d.constrain_strategy = parse_constrain_strategy(doc["constrain_strategy"].get<std::string>());
        if (doc.contains("relax_strategy")) d.relax_strategy = parse_relax_strategy(doc["relax_strategy"].get<std::string>());
        detail::read_if(doc, "values_to_list", d.values_to_list);
        detail::read_if(doc, "max_start_overs", d.max_start_overs);
        detail::read_if(doc, "max_turns", d.max_turns);
        if (doc.contains("diversity")) {
            const auto& dv = doc["diversity"];
            detail::reject_unknown_keys(dv, {"enabled", "k_item", "k_value", "t_item_gap", "t_value_gap"}, "diversity.");
            detail::read_if(dv, "enabled", d.diversity.enabled);
            detail::read_if(dv, "k_item", d.diversity.k_item);
            detail::read_if(dv, "k_value", d.diversity.k_value);
            detail::read_if(dv, "t_item_gap", d.diversity.t_item_gap);
            detail::read_if(dv, "t_value_gap", d.diversity.t_value_gap);
        }
        detail::read_if(doc, "adapt", cfg.adapt);
        detail::read_if(doc, "port", cfg.port);
        detail::read_if(doc, "bind_address", cfg.bind_address);
        if (doc.contains("simulation")) {
            const auto& s = doc["simulation"];
            detail::reject_unknown_keys(s,
                                        {"users", "sessions", "seed", "importance_alpha", "dominance_boost",
                                         "min_dominant", "max_dominant", "value_alpha", "care_threshold",
                                         "accept_noise"},
                                        "simulation.");
            detail::read_if(s, "users", cfg.sim_users);
            detail::read_if(s, "sessions", cfg.sim_sessions);
            detail::read_if(s, "seed", cfg.sim_seed);
            auto& p = cfg.population;
            detail::read_if(s, "importance_alpha", p.importance_alpha);
            detail::read_if(s, "dominance_boost", p.dominance_boost);
            detail::read_if(s, "min_dominant", p.min_dominant);
            detail::read_if(s, "max_dominant", p.max_dominant);
            detail::read_if(s, "value_alpha", p.value_alpha);
            detail::read_if(s, "care_threshold", p.care_threshold);
            detail::read_if(s, "accept_noise", p.accept_noise);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline EngineConfig load_config_file(const std::string& path, EngineConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false, true);
    if (doc.is_discarded()) throw ConfigError("config file " + path + " is not valid JSON");
    apply_config_json(base, doc);
    return base;
}

inline nlohmann::json config_to_json(const EngineConfig& cfg) {
    const auto& d = cfg.dialogue;
    const auto& p = cfg.population;
    return {
        {"catalog", cfg.catalog_dir},
        {"data_dir", cfg.data_dir},
        {"messages", cfg.messages_path},
        {"similarity_threshold", d.similarity.similarity_threshold},
        {"presentation_threshold", d.similarity.presentation_threshold},
        {"learn_rate", d.policy.learn_rate},
        {"constrain_strategy", to_string(d.constrain_strategy)},
        {"relax_strategy", to_string(d.relax_strategy)},
        {"values_to_list", d.values_to_list},
        {"max_start_overs", d.max_start_overs},
        {"max_turns", d.max_turns},
        {"diversity",
         {{"enabled", d.diversity.enabled},
          {"k_item", d.diversity.k_item},
          {"k_value", d.diversity.k_value},
          {"t_item_gap", d.diversity.t_item_gap},
          {"t_value_gap", d.diversity.t_value_gap}}},
        {"adapt", cfg.adapt},
        {"port", cfg.port},
        {"bind_address", cfg.bind_address},
        {"simulation",
         {{"users", cfg.sim_users},
          {"sessions", cfg.sim_sessions},
          {"seed", cfg.sim_seed},
          {"importance_alpha", p.importance_alpha},
          {"dominance_boost", p.dominance_boost},
          {"min_dominant", p.min_dominant},
          {"max_dominant", p.max_dominant},
          {"value_alpha", p.value_alpha},
          {"care_threshold", p.care_threshold},
          {"accept_noise", p.accept_noise}}},
    };
}

}  // namespace advisor
