#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "advisor/catalog.hpp"
#include "advisor/speech_acts.hpp"
#include "advisor/user_model.hpp"

namespace advisor {

enum class EntryMode { Distribution, Constrained, Dropped };
enum class Provenance { ModelPrior, UserConstraint, RelaxReset };

struct QueryEntry {
    EntryMode mode = EntryMode::Distribution;
    Distribution probs;  // covers the attribute's whole domain
    Provenance provenance = Provenance::ModelPrior;

    friend bool operator==(const QueryEntry&, const QueryEntry&) = default;
};

/// Probabilistic item description: explicit constraints (indicator entries) on top of
/// the user model's priors for everything not yet settled in the conversation.
struct ExpandedQuery {
    Distribution attribute_weights;
    std::map<std::string, QueryEntry> entries;

    /// Constrained attributes and the values currently marked 1.
    ConstraintSet constraints() const {
        ConstraintSet out;
        for (const auto& [attr, e] : entries) {
            if (e.mode != EntryMode::Constrained) continue;
            auto& allowed = out[attr];
            for (const auto& [v, p] : e.probs)
                if (p == 1.0) allowed.insert(v);
        }
        return out;
    }

    double weight(const std::string& attr) const {
        auto it = attribute_weights.find(attr);
        return it == attribute_weights.end() ? 0.0 : it->second;
    }

    friend bool operator==(const ExpandedQuery&, const ExpandedQuery&) = default;
};

struct SimilarityParams {
    double similarity_threshold = 0.05;
    std::size_t presentation_threshold = 3;

    void validate() const {
        if (!(similarity_threshold >= 0.0 && similarity_threshold < 1.0))
            throw std::invalid_argument("similarity_threshold must lie in [0,1)");
        if (presentation_threshold < 1) throw std::invalid_argument("presentation_threshold must be >= 1");
    }
};

struct DiversityParams {
    bool enabled = false;
    double k_item = 1.0;
    double k_value = 1.0;
    double t_item_gap = 0.0;   // seconds
    double t_value_gap = 0.0;  // seconds

    void validate() const {
        if (!(k_item > 0.0 && k_value > 0.0)) throw std::invalid_argument("diversity slopes must be positive");
        if (t_item_gap < 0.0 || t_value_gap < 0.0) throw std::invalid_argument("diversity gaps must be >= 0");
    }
};

enum class ConstrainStrategy { ByWeight, ByEntropy };
enum class RelaxStrategy { ByWeight, BySize };

/// Attribute bookkeeping the ranking functions need from the dialogue.
struct AttributeSets {
    std::set<std::string> constrained;
    std::set<std::string> rejected;
    std::set<std::string> fixed;
    std::set<std::string> relaxed;  // relaxed on the system's suggestion; not asked again

    friend bool operator==(const AttributeSets&, const AttributeSets&) = default;
};

// ---------------------------------------------------------------------------

inline ExpandedQuery init_query(const UserModel& model) {
    ExpandedQuery q;
    q.attribute_weights = model.attribute_weights;
    for (const auto& [attr, dist] : model.value_prefs) q.entries[attr] = {EntryMode::Distribution, dist, Provenance::ModelPrior};
    return q;
}

namespace detail {

inline QueryEntry& entry_for(ExpandedQuery& q, const std::string& attr) {
    auto it = q.entries.find(attr);
    if (it == q.entries.end()) throw std::invalid_argument("query has no attribute '" + attr + "'");
    return it->second;
}

inline void constrain(ExpandedQuery& q, const UserModel& model, const std::string& attr,
                      const std::set<std::string>& values) {
    QueryEntry& e = entry_for(q, attr);
    if (values.empty()) throw std::invalid_argument("constraint on '" + attr + "' provides no values");
    for (const auto& v : values)
        if (!e.probs.count(v)) throw std::invalid_argument("value '" + v + "' is not in the domain of '" + attr + "'");
    if (e.mode == EntryMode::Dropped) q.attribute_weights[attr] = model.attribute_weights.at(attr);
    for (auto& [v, p] : e.probs) p = values.count(v) ? 1.0 : 0.0;
    e.mode = EntryMode::Constrained;
    e.provenance = Provenance::UserConstraint;
}

inline void drop(ExpandedQuery& q, const std::string& attr) {
    QueryEntry& e = entry_for(q, attr);
    e.mode = EntryMode::Dropped;
    q.attribute_weights[attr] = 0.0;
}

inline void relax_reset(ExpandedQuery& q, const UserModel& model, const std::string& attr) {
    QueryEntry& e = entry_for(q, attr);
    e.probs = model.value_prefs.at(attr);
    e.mode = EntryMode::Distribution;
    e.provenance = Provenance::RelaxReset;
}

inline const std::string& require_attribute(const std::optional<std::string>& a, const char* what) {
    if (!a) throw std::invalid_argument(std::string(what) + " requires an attribute");
    return *a;
}

}  // namespace detail

/// Applies the effect of one (system move, user move) exchange to the query.
///
///   CONSTRAIN + PROVIDE-CONSTRAIN  provided values -> 1, rest -> 0; a dropped attribute
///                                  gets its weight back from the model
///   CONSTRAIN + REJECT             attribute weight -> 0
///   RELAX + REJECT                 no change
///   RELAX + ACCEPT                 value probabilities reset from the model
///   RECOMMEND + ACCEPT/REJECT      no change (item counts live in the user model)
///   any + PROVIDE-RELAX            value probabilities reset from the model
///   any + START-OVER               reinitialized from the model
///
/// Constraint bindings carried alongside another act are applied after it. Throws
/// std::invalid_argument for combinations with no query effect.
inline ExpandedQuery apply_effect(ExpandedQuery query, const SystemMove& system_move, const UserMove& user_move,
                                  const UserModel& model) {
    const SystemAct sys = system_move.act;
    const bool constrain_context = sys == SystemAct::AttemptConstrain || sys == SystemAct::ProvideValues;
    auto illegal = [&]() -> std::invalid_argument {
        return std::invalid_argument("no query effect for " + std::string(to_string(sys)) + " + " +
                                     std::string(to_string(user_move.act)));
    };

    switch (user_move.act) {
        case UserAct::StartOver:
            return init_query(model);
        case UserAct::ProvideConstrain:
            if (user_move.bindings.empty()) throw std::invalid_argument("PROVIDE-CONSTRAIN carries no bindings");
            break;
        case UserAct::ProvideRelax:
            if (user_move.relax.empty()) throw std::invalid_argument("PROVIDE-RELAX names no attribute");
            break;
        case UserAct::Reject:
            if (user_move.attribute)
                detail::drop(query, *user_move.attribute);
            else if (constrain_context)
                detail::drop(query, detail::require_attribute(system_move.attribute, "REJECT"));
            else if (sys != SystemAct::SuggestRelax && sys != SystemAct::RecommendItem)
                throw illegal();
            break;
        case UserAct::Accept:
            if (sys == SystemAct::SuggestRelax)
                detail::relax_reset(query, model, detail::require_attribute(system_move.attribute, "SUGGEST-RELAX"));
            else if (sys != SystemAct::RecommendItem)
                throw illegal();
            break;
        case UserAct::Quit:
        case UserAct::QueryValues:
        case UserAct::Unparseable:
            throw illegal();
    }
    for (const auto& attr : user_move.relax) detail::relax_reset(query, model, attr);
    for (const auto& [attr, values] : user_move.bindings) detail::constrain(query, model, attr, values);
    return query;
}

// ---------------------------------------------------------------------------
// Similarity

/// Sim(Q, I) = R_I * sum_j w_j * P(V_j). Dropped attributes carry weight zero.
inline double similarity(const ExpandedQuery& query, const AttributeSchema& schema, const Item& item,
                         double item_ratio) {
    double sum = 0.0;
    const auto& attrs = schema.attributes();
    for (std::size_t a = 0; a < attrs.size(); ++a) {
        auto e = query.entries.find(attrs[a].name);
        if (e == query.entries.end() || e->second.mode == EntryMode::Dropped) continue;
        auto p = e->second.probs.find(item.values[a]);
        if (p == e->second.probs.end()) continue;
        sum += query.weight(attrs[a].name) * p->second;
    }
    return item_ratio * sum;
}

/// Logistic damping 1 / (1 + exp(-slope * (elapsed - gap))).
inline double diversity_factor(double slope, double elapsed, double gap) {
    return 1.0 / (1.0 + std::exp(-slope * (elapsed - gap)));
}

/// Similarity with recently accepted items and recently chosen values damped by logistic
/// factors of the time since their last use. Items and values never used are not damped.
inline double diversity_adjusted_similarity(const ExpandedQuery& query, const AttributeSchema& schema, const Item& item,
                                            const UserModel& model, const DiversityParams& dparams, Timestamp now) {
    double ratio = model.item_ratio(item.id);
    if (auto s = model.item_stats.find(item.id); s != model.item_stats.end() && s->second.last_accepted_at)
        ratio *= diversity_factor(dparams.k_item, static_cast<double>(now - *s->second.last_accepted_at),
                                  dparams.t_item_gap);
    double sum = 0.0;
    const auto& attrs = schema.attributes();
    for (std::size_t a = 0; a < attrs.size(); ++a) {
        auto e = query.entries.find(attrs[a].name);
        if (e == query.entries.end() || e->second.mode == EntryMode::Dropped) continue;
        auto p = e->second.probs.find(item.values[a]);
        if (p == e->second.probs.end()) continue;
        double prob = p->second;
        if (auto t = model.value_last_used.find({attrs[a].name, item.values[a]}); t != model.value_last_used.end())
            prob *= diversity_factor(dparams.k_value, static_cast<double>(now - t->second), dparams.t_value_gap);
        sum += query.weight(attrs[a].name) * prob;
    }
    return ratio * sum;
}

struct ScoredItem {
    const Item* item = nullptr;
    double score = 0.0;
};

/// How items are scored: plain similarity, or diversity-adjusted when enabled.
struct ScoringContext {
    DiversityParams diversity{};
    Timestamp now = 0;
};

inline double score_item(const ExpandedQuery& query, const AttributeSchema& schema, const Item& item,
                         const UserModel& model, const ScoringContext& ctx) {
    if (ctx.diversity.enabled) return diversity_adjusted_similarity(query, schema, item, model, ctx.diversity, ctx.now);
    return similarity(query, schema, item, model.item_ratio(item.id));
}

/// Exact matches on the query's constraints whose score exceeds the similarity threshold,
/// best first (ties by id).
inline std::vector<ScoredItem> retrieve_and_rank(const ExpandedQuery& query, const Catalog& catalog,
                                                 const UserModel& model, const SimilarityParams& params,
                                                 const ScoringContext& ctx = {}) {
    std::vector<ScoredItem> out;
    for (const Item* item : query_exact(catalog, query.constraints())) {
        const double s = score_item(query, catalog.schema(), *item, model, ctx);
        if (s > params.similarity_threshold) out.push_back({item, s});
    }
    std::sort(out.begin(), out.end(), [](const ScoredItem& a, const ScoredItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item->id < b.item->id;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Attribute ranking

/// Shannon entropy (bits) of `attribute`'s empirical value distribution over `items`.
inline double value_entropy(const AttributeSchema& schema, const std::string& attribute,
                            const std::vector<const Item*>& items) {
    const std::size_t a = *schema.index_of(attribute);
    std::map<std::string, std::size_t> counts;
    for (const Item* it : items) ++counts[it->values[a]];
    double h = 0.0;
    const double n = static_cast<double>(items.size());
    for (const auto& [v, c] : counts) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

/// Attributes worth asking about next, best first.
inline std::vector<std::string> rank_constrain_candidates(const ExpandedQuery& query, const AttributeSets& sets,
                                                          ConstrainStrategy strategy, const AttributeSchema& schema,
                                                          const std::vector<const Item*>& candidates) {
    std::vector<std::pair<double, std::string>> keyed;
    for (const auto& attr : schema.attributes()) {
        const std::string& a = attr.name;
        if (sets.constrained.count(a) || sets.rejected.count(a) || sets.relaxed.count(a)) continue;
        const double key = strategy == ConstrainStrategy::ByWeight ? query.weight(a)
                                                                   : value_entropy(schema, a, candidates);
        keyed.emplace_back(key, a);
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return x.second < y.second;
    });
    std::vector<std::string> out;
    for (auto& [k, a] : keyed) out.push_back(std::move(a));
    return out;
}

/// Number of items that would pass retrieval if each constrained attribute were relaxed
/// on its own. With a zero threshold this equals `relax_preview_counts`.
inline std::map<std::string, std::size_t> relax_preview_sizes(const ExpandedQuery& query, const Catalog& catalog,
                                                              const UserModel& model, const SimilarityParams& params,
                                                              const ScoringContext& ctx = {}) {
    std::map<std::string, std::size_t> out;
    for (const auto& [attr, allowed] : query.constraints()) {
        ExpandedQuery relaxed = query;
        detail::relax_reset(relaxed, model, attr);
        out[attr] = retrieve_and_rank(relaxed, catalog, model, params, ctx).size();
    }
    return out;
}

/// Attributes to propose relaxing, best first. By weight: least important first. By size:
/// smallest non-empty resulting case base first.
inline std::vector<std::string> rank_relax_candidates(const ExpandedQuery& query, const AttributeSets& sets,
                                                      RelaxStrategy strategy, const Catalog& catalog,
                                                      const UserModel& model, const SimilarityParams& params,
                                                      const ScoringContext& ctx = {}) {
    std::vector<std::pair<double, std::string>> keyed;
    std::map<std::string, std::size_t> sizes;
    if (strategy == RelaxStrategy::BySize) sizes = relax_preview_sizes(query, catalog, model, params, ctx);
    for (const auto& a : sets.constrained) {
        if (sets.fixed.count(a)) continue;
        if (strategy == RelaxStrategy::ByWeight) {
            keyed.emplace_back(query.weight(a), a);
        } else {
            auto it = sizes.find(a);
            if (it == sizes.end() || it->second == 0) continue;
            keyed.emplace_back(static_cast<double>(it->second), a);
        }
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first < y.first;
        return x.second < y.second;
    });
    std::vector<std::string> out;
    for (auto& [k, a] : keyed) out.push_back(std::move(a));
    return out;
}

/// Same ranking from a plain preview table (e.g. `relax_preview_counts`).
inline std::vector<std::string> rank_by_preview(const std::map<std::string, std::size_t>& previews,
                                                const std::set<std::string>& fixed = {}) {
    std::vector<std::pair<std::size_t, std::string>> keyed;
    for (const auto& [a, n] : previews)
        if (n > 0 && !fixed.count(a)) keyed.emplace_back(n, a);
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::string> out;
    for (auto& [n, a] : keyed) out.push_back(std::move(a));
    return out;
}

}  // namespace advisor
