#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "advisor.hpp"

namespace testing_support {

using namespace advisor;

/// Spelled out so two string literals are never read as an iterator pair.
using Values = std::set<std::string>;

inline Attribute attr(std::string name, std::vector<std::string> values, double w,
                      std::map<std::string, std::string> syn = {}) {
    return Attribute{std::move(name), std::move(values), std::move(syn), w};
}

inline Item item(std::string id, std::vector<std::string> values) {
    Item it;
    it.id = id;
    it.values = std::move(values);
    it.display = {"Place " + id, id + " Main St", "(650) 555-0000"};
    return it;
}

inline Catalog sample_catalog() { return load_catalog_dir(std::string(ADVISOR_FIXTURES) + "/sample_dialogue"); }

/// Homer's profile: cuisine, price and parking, plus one filler attribute carrying the
/// remaining weight.
inline AttributeSchema homer_schema() {
    return AttributeSchema({attr("cuisine", {"Italian", "French", "Turkish", "Chinese", "German", "English"}, 0.4),
                            attr("price", {"one", "two", "three", "four", "five"}, 0.2),
                            attr("parking", {"Valet", "Street", "Lot"}, 0.1),
                            attr("rating", {"good", "great"}, 0.3)});
}

inline UserModel homer_model() {
    UserModel m;
    m.user_id = "homer";
    m.attribute_weights = {{"cuisine", 0.4}, {"price", 0.2}, {"parking", 0.1}, {"rating", 0.3}};
    m.value_prefs["cuisine"] = {{"Italian", 0.35}, {"French", 0.2},  {"Turkish", 0.25},
                                {"Chinese", 0.1},  {"German", 0.1}, {"English", 0.0}};
    m.value_prefs["price"] = {{"one", 0.2}, {"two", 0.3}, {"three", 0.3}, {"four", 0.1}, {"five", 0.1}};
    m.value_prefs["parking"] = {{"Valet", 0.5}, {"Street", 0.4}, {"Lot", 0.1}};
    m.value_prefs["rating"] = {{"good", 0.5}, {"great", 0.5}};
    m.item_stats["0815"] = {23, 25, std::nullopt};
    m.item_stats["5372"] = {10, 19, std::nullopt};
    m.item_stats["7638"] = {33, 36, std::nullopt};
    m.item_stats["6399"] = {12, 23, std::nullopt};
    return m;
}

/// A random schema of `n_attrs` attributes with 2..max_values values each and random
/// prior weights summing to one.
inline AttributeSchema random_schema(std::mt19937_64& rng, std::size_t n_attrs, std::size_t max_values) {
    std::uniform_int_distribution<std::size_t> nv(2, max_values);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> w(n_attrs);
    double total = 0;
    for (auto& x : w) total += (x = u(rng));
    std::vector<Attribute> attrs;
    double acc = 0;
    for (std::size_t a = 0; a < n_attrs; ++a) {
        std::vector<std::string> values;
        const std::size_t k = nv(rng);
        for (std::size_t v = 0; v < k; ++v) values.push_back("a" + std::to_string(a) + "v" + std::to_string(v));
        double weight = w[a] / total;
        if (a + 1 == n_attrs) weight = 1.0 - acc;
        acc += weight;
        attrs.push_back(attr("attr" + std::to_string(a), values, weight));
    }
    return AttributeSchema(std::move(attrs));
}

inline Catalog random_catalog(std::mt19937_64& rng, std::size_t n_items, std::size_t n_attrs = 7,
                              std::size_t max_values = 5) {
    AttributeSchema schema = random_schema(rng, n_attrs, max_values);
    std::vector<Item> items;
    for (std::size_t i = 0; i < n_items; ++i) {
        std::vector<std::string> values;
        for (const auto& a : schema.attributes()) {
            std::uniform_int_distribution<std::size_t> pick(0, a.values.size() - 1);
            values.push_back(a.values[pick(rng)]);
        }
        char id[24];
        std::snprintf(id, sizeof id, "i%05zu", i);
        items.push_back(item(id, std::move(values)));
    }
    return Catalog(std::move(schema), std::move(items));
}

/// A model with random (strictly positive, normalized) preferences and random item counts.
inline UserModel random_model(std::mt19937_64& rng, const Catalog& catalog) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    UserModel m = init_user_model("u", catalog.schema(), UpdatePolicy{}, catalog.item_ids());
    auto randomize = [&](Distribution& d) {
        double total = 0;
        for (auto& [k, p] : d) total += (p = u(rng));
        for (auto& [k, p] : d) p /= total;
    };
    randomize(m.attribute_weights);
    for (auto& [a, d] : m.value_prefs) randomize(d);
    std::uniform_int_distribution<int> pres(1, 40);
    for (auto& [id, s] : m.item_stats) {
        s.presented = pres(rng);
        s.accepted = std::uniform_int_distribution<int>(1, static_cast<int>(s.presented))(rng);
    }
    return m;
}

/// Random constraints: each attribute constrained with probability p_constrain to a random
/// non-empty subset of its domain.
inline ConstraintSet random_constraints(std::mt19937_64& rng, const AttributeSchema& schema, double p_constrain) {
    std::bernoulli_distribution coin(p_constrain), half(0.4);
    ConstraintSet c;
    for (const auto& a : schema.attributes()) {
        if (!coin(rng)) continue;
        std::set<std::string> vs;
        for (const auto& v : a.values)
            if (half(rng)) vs.insert(v);
        if (vs.empty()) vs.insert(a.values[std::uniform_int_distribution<std::size_t>(0, a.values.size() - 1)(rng)]);
        c[a.name] = vs;
    }
    return c;
}

/// A query derived from `model` with `constraints` applied as PROVIDE-CONSTRAIN answers.
inline ExpandedQuery constrained_query(const UserModel& model, const ConstraintSet& constraints) {
    ExpandedQuery q = init_query(model);
    if (constraints.empty()) return q;
    SystemMove ask{SystemAct::AttemptConstrain, constraints.begin()->first, std::nullopt, {}};
    UserMove say;
    say.act = UserAct::ProvideConstrain;
    say.bindings = constraints;
    return apply_effect(q, ask, say, model);
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Replays a fixed list of utterances, then quits.
inline MoveSource scripted(std::vector<std::string> lines) {
    auto state = std::make_shared<std::pair<std::vector<std::string>, std::size_t>>(std::move(lines), 0);
    return [state](const Turn&) -> std::optional<std::string> {
        if (state->second >= state->first.size()) return std::nullopt;
        return state->first[state->second++];
    };
}

inline Clock counting_clock(Timestamp start = 1000) {
    auto t = std::make_shared<Timestamp>(start);
    return [t] { return (*t)++; };
}

}  // namespace testing_support
