#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "advisor/catalog.hpp"

namespace advisor {

/// Seconds since the epoch.
using Timestamp = std::int64_t;

using Distribution = std::map<std::string, double>;

class ModelError : public std::runtime_error {
public:
    enum class Kind { UnknownTarget, VersionMismatch, CorruptPayload, SchemaMismatch, InvariantViolated };

    ModelError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct ItemStats {
    std::int64_t accepted = 0;
    std::int64_t presented = 0;
    std::optional<Timestamp> last_accepted_at;

    double ratio() const { return static_cast<double>(accepted) / static_cast<double>(presented); }
    friend bool operator==(const ItemStats&, const ItemStats&) = default;
};

struct UpdatePolicy {
    double learn_rate = 0.1;
    std::int64_t init_accepted = 9;
    std::int64_t init_presented = 10;

    void validate() const {
        if (!(learn_rate > 0.0 && learn_rate < 1.0))
            throw std::invalid_argument("learn_rate must lie in (0,1)");
        if (init_accepted <= 0 || init_accepted > init_presented)
            throw std::invalid_argument("initial item counts must satisfy 0 < accepted <= presented");
    }

    double init_ratio() const { return static_cast<double>(init_accepted) / static_cast<double>(init_presented); }
};

/// Long-term preferences of one user: attribute weights, per-attribute value
/// distributions, item accept/present counts, and last-use times.
struct UserModel {
    std::string user_id;
    Distribution attribute_weights;
    std::map<std::string, Distribution> value_prefs;
    std::map<std::string, ItemStats> item_stats;
    std::map<std::pair<std::string, std::string>, Timestamp> value_last_used;

    /// Accept/present ratio, or the policy's initial ratio for items the model has not seen.
    double item_ratio(const std::string& item_id, const UpdatePolicy& policy = {}) const {
        auto it = item_stats.find(item_id);
        return it == item_stats.end() ? policy.init_ratio() : it->second.ratio();
    }

    friend bool operator==(const UserModel&, const UserModel&) = default;
};

inline UserModel init_user_model(const std::string& user_id, const AttributeSchema& schema,
                                 const UpdatePolicy& policy, const std::vector<std::string>& item_ids) {
    UserModel m;
    m.user_id = user_id;
    for (const auto& a : schema.attributes()) {
        m.attribute_weights[a.name] = a.prior_weight;
        Distribution& d = m.value_prefs[a.name];
        const double p = 1.0 / static_cast<double>(a.values.size());
        for (const auto& v : a.values) d[v] = p;
    }
    for (const auto& id : item_ids) m.item_stats[id] = {policy.init_accepted, policy.init_presented, std::nullopt};
    return m;
}

/// Multiplies `key`'s probability by (1 + learn_rate) and renormalizes the distribution.
inline void reinforce(Distribution& dist, const std::string& key, double learn_rate) {
    auto it = dist.find(key);
    if (it == dist.end()) throw ModelError(ModelError::Kind::UnknownTarget, "unknown reinforcement target '" + key + "'");
    it->second *= 1.0 + learn_rate;
    double total = 0.0;
    for (const auto& [k, p] : dist) total += p;
    for (auto& [k, p] : dist) p /= total;
}

inline void reinforce_attribute(UserModel& model, const std::string& attribute, double learn_rate) {
    reinforce(model.attribute_weights, attribute, learn_rate);
}

inline void reinforce_value(UserModel& model, const std::string& attribute, const std::string& value,
                            double learn_rate) {
    auto it = model.value_prefs.find(attribute);
    if (it == model.value_prefs.end())
        throw ModelError(ModelError::Kind::UnknownTarget, "unknown attribute '" + attribute + "'");
    reinforce(it->second, value, learn_rate);
}

inline void record_presentation(UserModel& model, const std::string& item_id, bool accepted, Timestamp now) {
    auto it = model.item_stats.find(item_id);
    if (it == model.item_stats.end())
        throw ModelError(ModelError::Kind::UnknownTarget, "unknown item '" + item_id + "'");
    ItemStats& s = it->second;
    ++s.presented;
    if (accepted) {
        ++s.accepted;
        s.last_accepted_at = now;
    }
}

namespace detail {

inline void reinforce_constraints(UserModel& model, const ConstraintSet& constrained, const UpdatePolicy& policy,
                                  Timestamp now) {
    for (const auto& [attr, values] : constrained) {
        reinforce_attribute(model, attr, policy.learn_rate);
        for (const auto& v : values) {
            reinforce_value(model, attr, v, policy.learn_rate);
            model.value_last_used[{attr, v}] = now;
        }
    }
}

}  // namespace detail

/// The user accepted a recommended item: the item's counts, the attributes the user
/// constrained, and the values the user provided all gain weight.
inline void on_item_accepted(UserModel& model, const ConstraintSet& constrained, const std::string& item_id,
                             const UpdatePolicy& policy, Timestamp now) {
    record_presentation(model, item_id, true, now);
    detail::reinforce_constraints(model, constrained, policy, now);
}

/// A rejection says nothing about the item's characteristics; only the item's count moves.
inline void on_item_rejected(UserModel& model, const std::string& item_id, Timestamp now) {
    record_presentation(model, item_id, false, now);
}

/// Called before an accepted relaxation is applied.
inline void on_relax_accepted(UserModel& model, const ConstraintSet& constrained, const UpdatePolicy& policy,
                              Timestamp now) {
    detail::reinforce_constraints(model, constrained, policy, now);
}

/// Throws ModelError(InvariantViolated) describing the first broken invariant.
/// `allow_zero` admits zero probabilities (hand-written models); learned models never contain them.
inline void check_invariants(const UserModel& model, double tol = 1e-9, bool allow_zero = false) {
    auto check_dist = [&](const Distribution& d, const std::string& what) {
        double total = 0.0;
        for (const auto& [k, p] : d) {
            if (!std::isfinite(p) || p < 0.0 || (p == 0.0 && !allow_zero))
                throw ModelError(ModelError::Kind::InvariantViolated, what + ": entry '" + k + "' is not positive");
            total += p;
        }
        if (std::abs(total - 1.0) > tol)
            throw ModelError(ModelError::Kind::InvariantViolated, what + " sums to " + std::to_string(total));
    };
    check_dist(model.attribute_weights, "attribute weights");
    for (const auto& [attr, d] : model.value_prefs) check_dist(d, "value distribution of '" + attr + "'");
    for (const auto& [id, s] : model.item_stats)
        if (!(0 < s.accepted && s.accepted <= s.presented))
            throw ModelError(ModelError::Kind::InvariantViolated, "item '" + id + "' has invalid counts");
}

// ---------------------------------------------------------------------------
// Persistence

inline constexpr int kModelFormatVersion = 1;

inline std::string save_model(const UserModel& m) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["user_id"] = m.user_id;
    j["attribute_weights"] = m.attribute_weights;
    j["value_prefs"] = m.value_prefs;
    nlohmann::json items = nlohmann::json::object();
    for (const auto& [id, s] : m.item_stats) {
        nlohmann::json e{{"accepted", s.accepted}, {"presented", s.presented}};
        e["last_accepted_at"] = s.last_accepted_at ? nlohmann::json(*s.last_accepted_at) : nlohmann::json(nullptr);
        items[id] = std::move(e);
    }
    j["item_stats"] = std::move(items);
    nlohmann::json used = nlohmann::json::object();
    for (const auto& [key, t] : m.value_last_used) used[key.first][key.second] = t;
    j["value_last_used"] = std::move(used);
    return j.dump(2);
}

/// Parses a saved model. When `schema` is given, every attribute and value must belong to it.
inline UserModel load_model(std::string_view bytes, const AttributeSchema* schema = nullptr) {
    nlohmann::json j = nlohmann::json::parse(bytes, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ModelError(ModelError::Kind::CorruptPayload, "model payload is not valid JSON");
    if (!j.contains("format_version") || !j["format_version"].is_number_integer())
        throw ModelError(ModelError::Kind::CorruptPayload, "model payload lacks format_version");
    if (j["format_version"].get<int>() != kModelFormatVersion)
        throw ModelError(ModelError::Kind::VersionMismatch,
                         "model format version " + std::to_string(j["format_version"].get<int>()) +
                             " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
    UserModel m;
    try {
        m.user_id = j.at("user_id").get<std::string>();
        m.attribute_weights = j.at("attribute_weights").get<Distribution>();
        m.value_prefs = j.at("value_prefs").get<std::map<std::string, Distribution>>();
        for (const auto& [id, e] : j.at("item_stats").items()) {
            ItemStats s;
            s.accepted = e.at("accepted").get<std::int64_t>();
            s.presented = e.at("presented").get<std::int64_t>();
            if (e.contains("last_accepted_at") && !e["last_accepted_at"].is_null())
                s.last_accepted_at = e["last_accepted_at"].get<Timestamp>();
            m.item_stats[id] = s;
        }
        for (const auto& [attr, vals] : j.at("value_last_used").items())
            for (const auto& [v, t] : vals.items()) m.value_last_used[{attr, v}] = t.get<Timestamp>();
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(ModelError::Kind::CorruptPayload, std::string("malformed model payload: ") + e.what());
    }

    if (schema) {
        auto check_attr = [&](const std::string& a) {
            if (!schema->contains(a))
                throw ModelError(ModelError::Kind::SchemaMismatch, "model names unknown attribute '" + a + "'");
        };
        for (const auto& [a, w] : m.attribute_weights) check_attr(a);
        for (const auto& [a, d] : m.value_prefs) {
            check_attr(a);
            const Attribute& attr = schema->at(a);
            for (const auto& [v, p] : d)
                if (!attr.has_value(v))
                    throw ModelError(ModelError::Kind::SchemaMismatch,
                                     "model names unknown value '" + v + "' of attribute '" + a + "'");
        }
        for (const auto& a : schema->attributes()) {
            if (!m.attribute_weights.count(a.name) || !m.value_prefs.count(a.name))
                throw ModelError(ModelError::Kind::SchemaMismatch, "model lacks attribute '" + a.name + "'");
            for (const auto& v : a.values)
                if (!m.value_prefs[a.name].count(v))
                    throw ModelError(ModelError::Kind::SchemaMismatch,
                                     "model lacks value '" + v + "' of attribute '" + a.name + "'");
        }
    }
    try {
        check_invariants(m, 1e-9, true);
    } catch (const ModelError& e) {
        throw ModelError(ModelError::Kind::CorruptPayload, std::string("model payload violates invariants: ") + e.what());
    }
    return m;
}

}  // namespace advisor
