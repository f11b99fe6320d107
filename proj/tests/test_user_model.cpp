#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace advisor;
using namespace testing_support;

namespace {

AttributeSchema small_schema() {
    return AttributeSchema({attr("cuisine", {"Chinese", "Indian", "Italian", "Thai", "French", "Greek"}, 0.5),
                            attr("price", {"one", "two", "three", "four"}, 0.3),
                            attr("parking", {"lot", "street"}, 0.2)});
}

UserModel fresh() { return init_user_model("u1", small_schema(), UpdatePolicy{}, {"a", "b", "c"}); }

}  // namespace

TEST(InitModel, DefaultItemRatioIsNineTenths) {
    UserModel m = fresh();
    for (const auto& [id, s] : m.item_stats) {
        EXPECT_EQ(s.accepted, 9);
        EXPECT_EQ(s.presented, 10);
        EXPECT_DOUBLE_EQ(s.ratio(), 0.9);
        EXPECT_FALSE(s.last_accepted_at);
    }
    EXPECT_TRUE(m.value_last_used.empty());
}

TEST(InitModel, UniformValuesAndPriorWeights) {
    UserModel m = fresh();
    for (const auto& [v, p] : m.value_prefs.at("cuisine")) EXPECT_DOUBLE_EQ(p, 1.0 / 6.0);
    EXPECT_DOUBLE_EQ(m.attribute_weights.at("cuisine"), 0.5);
    EXPECT_DOUBLE_EQ(m.attribute_weights.at("price"), 0.3);
    EXPECT_DOUBLE_EQ(m.attribute_weights.at("parking"), 0.2);
}

TEST(Reinforce, UniformFourValueHandExample) {
    Distribution d{{"a", 0.25}, {"b", 0.25}, {"c", 0.25}, {"d", 0.25}};
    reinforce(d, "b", 0.1);
    EXPECT_NEAR(d["b"], 0.268293, 1e-6);
    EXPECT_NEAR(d["a"], 0.243902, 1e-6);
    EXPECT_NEAR(d["c"], 0.243902, 1e-6);
    EXPECT_NEAR(d["d"], 0.243902, 1e-6);
}

TEST(Reinforce, ZeroRateIsIdentity) {
    Distribution d{{"a", 0.1}, {"b", 0.6}, {"c", 0.3}};
    Distribution before = d;
    reinforce(d, "a", 0.0);
    for (const auto& [k, p] : d) EXPECT_NEAR(p, before[k], 1e-15);
}

TEST(Reinforce, TwiceEqualsOnceAtCompoundedRate) {
    Distribution twice{{"a", 0.1}, {"b", 0.6}, {"c", 0.3}};
    Distribution once = twice;
    reinforce(twice, "a", 0.1);
    reinforce(twice, "a", 0.1);
    reinforce(once, "a", 1.1 * 1.1 - 1.0);
    for (const auto& [k, p] : once) EXPECT_NEAR(twice[k], p, 1e-12);
}

TEST(Reinforce, UnknownTargetThrows) {
    Distribution d{{"a", 1.0}};
    try {
        reinforce(d, "z", 0.1);
        FAIL();
    } catch (const ModelError& e) {
        EXPECT_EQ(e.kind(), ModelError::Kind::UnknownTarget);
    }
}

TEST(Presentation, HomerCounts) {
    UserModel m = homer_model();
    record_presentation(m, "0815", true, 5);
    EXPECT_EQ(m.item_stats["0815"].accepted, 24);
    EXPECT_EQ(m.item_stats["0815"].presented, 26);
    EXPECT_EQ(m.item_stats["0815"].last_accepted_at, 5);

    UserModel r = homer_model();
    on_item_rejected(r, "0815", 5);
    EXPECT_EQ(r.item_stats["0815"].accepted, 23);
    EXPECT_EQ(r.item_stats["0815"].presented, 26);
    EXPECT_NEAR(r.item_ratio("0815"), 0.884615, 1e-6);
}

TEST(Presentation, FiveRejectionsOfAFreshItem) {
    UserModel m = fresh();
    for (int k = 0; k < 5; ++k) on_item_rejected(m, "a", k);
    EXPECT_EQ(m.item_stats["a"].accepted, 9);
    EXPECT_EQ(m.item_stats["a"].presented, 15);
    EXPECT_DOUBLE_EQ(m.item_ratio("a"), 0.6);
}

TEST(Presentation, RejectThenAccept) {
    UserModel m = fresh();
    on_item_rejected(m, "a", 1);
    on_item_accepted(m, {}, "a", UpdatePolicy{}, 2);
    EXPECT_EQ(m.item_stats["a"].accepted, 10);
    EXPECT_EQ(m.item_stats["a"].presented, 12);
}

TEST(Presentation, UnknownItemThrows) {
    UserModel m = fresh();
    EXPECT_THROW(on_item_rejected(m, "zzz", 1), ModelError);
}

TEST(ItemRejected, LeavesDistributionsBitIdentical) {
    UserModel m = fresh();
    reinforce_value(m, "cuisine", "Thai", 0.3);
    const UserModel before = m;
    on_item_rejected(m, "b", 9);
    EXPECT_EQ(m.attribute_weights, before.attribute_weights);
    EXPECT_EQ(m.value_prefs, before.value_prefs);
}

TEST(ItemAccepted, ComposesReinforceOracles) {
    UserModel m = fresh();
    on_item_accepted(m, {{"cuisine", {"Italian"}}}, "a", UpdatePolicy{}, 77);
    // Attribute weights (0.5, 0.3, 0.2) with cuisine scaled by 1.1: total 1.05.
    EXPECT_NEAR(m.attribute_weights["cuisine"], 0.55 / 1.05, 1e-12);
    EXPECT_NEAR(m.attribute_weights["price"], 0.3 / 1.05, 1e-12);
    // Six uniform values, Italian scaled by 1.1: total (5 + 1.1) / 6.
    EXPECT_NEAR(m.value_prefs["cuisine"]["Italian"], 1.1 / 6.1, 1e-12);
    EXPECT_NEAR(m.value_prefs["cuisine"]["Thai"], 1.0 / 6.1, 1e-12);
    EXPECT_EQ(m.item_stats["a"].accepted, 10);
    EXPECT_EQ(m.item_stats["a"].presented, 11);
    EXPECT_EQ((m.value_last_used.at({"cuisine", "Italian"})), 77);
}

TEST(ItemAccepted, EmptyConstraintsOnlyMoveCounts) {
    UserModel m = fresh();
    const UserModel before = m;
    on_item_accepted(m, {}, "c", UpdatePolicy{}, 1);
    EXPECT_EQ(m.attribute_weights, before.attribute_weights);
    EXPECT_EQ(m.value_prefs, before.value_prefs);
    EXPECT_EQ(m.item_stats["c"].presented, 11);
}

TEST(ItemAccepted, TwoValuesOfOneAttributeAreOrderIndependent) {
    UserModel m = fresh();
    on_item_accepted(m, {{"cuisine", Values{"Chinese", "Thai"}}}, "a", UpdatePolicy{}, 1);
    Distribution d = fresh().value_prefs.at("cuisine");
    reinforce(d, "Thai", 0.1);
    reinforce(d, "Chinese", 0.1);
    for (const auto& [v, p] : d) EXPECT_NEAR(m.value_prefs["cuisine"][v], p, 1e-9);
}

TEST(RelaxAccepted, ReinforcesWithoutTouchingItems) {
    UserModel m = fresh();
    on_relax_accepted(m, {{"cuisine", {"Indian"}}, {"price", {"one"}}}, UpdatePolicy{}, 3);
    EXPECT_GT(m.attribute_weights["cuisine"], 0.5);
    EXPECT_GT(m.value_prefs["cuisine"]["Indian"], 1.0 / 6.0);
    EXPECT_GT(m.value_prefs["price"]["one"], 0.25);
    EXPECT_EQ(m.item_stats, fresh().item_stats);
}

TEST(RelaxAccepted, EmptyConstraintsLeaveModelUnchanged) {
    UserModel m = fresh();
    on_relax_accepted(m, {}, UpdatePolicy{}, 3);
    EXPECT_EQ(m, fresh());
}

TEST(RelaxAccepted, EqualsItemAcceptedMinusCountsOnRandomInputs) {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 200; ++round) {
        Catalog c = random_catalog(rng, 10, 5, 6);
        UserModel base = random_model(rng, c);
        ConstraintSet cs = random_constraints(rng, c.schema(), 0.5);
        UserModel relaxed = base, accepted = base;
        on_relax_accepted(relaxed, cs, UpdatePolicy{}, 42);
        on_item_accepted(accepted, cs, c.items()[0].id, UpdatePolicy{}, 42);
        accepted.item_stats = base.item_stats;
        EXPECT_EQ(relaxed, accepted);
    }
}

// Properties ------------------------------------------------------------------------

TEST(ModelProperty, InvariantsHoldAfterTenThousandRandomEvents) {
    std::mt19937_64 rng(99);
    Catalog c = random_catalog(rng, 30, 7, 8);
    UserModel m = init_user_model("u", c.schema(), UpdatePolicy{}, c.item_ids());
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_int_distribution<std::size_t> pick_item(0, c.size() - 1);
    for (int k = 0; k < 10000; ++k) {
        const std::string id = c.items()[pick_item(rng)].id;
        const ConstraintSet cs = random_constraints(rng, c.schema(), 0.3);
        switch (kind(rng)) {
            case 0: on_item_accepted(m, cs, id, UpdatePolicy{}, k); break;
            case 1: on_item_rejected(m, id, k); break;
            case 2: on_relax_accepted(m, cs, UpdatePolicy{}, k); break;
        }
    }
    EXPECT_NO_THROW(check_invariants(m, 1e-9, false));
}

TEST(ModelProperty, ReinforcePreservesOrderOfOthersAndRaisesTarget) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int round = 0; round < 500; ++round) {
        Distribution d;
        double total = 0;
        for (int k = 0; k < 6; ++k) total += (d["v" + std::to_string(k)] = u(rng));
        for (auto& [k, p] : d) p /= total;
        const std::string target = "v" + std::to_string(round % 6);
        Distribution after = d;
        reinforce(after, target, 0.1);
        EXPECT_GT(after[target], d[target]);
        for (const auto& [a, pa] : d)
            for (const auto& [b, pb] : d) {
                if (a == target || b == target) continue;
                if (pa < pb) {
                    EXPECT_LT(after[a], after[b]);
                }
            }
    }
}

TEST(ModelProperty, RejectionNeverChangesArgmax) {
    std::mt19937_64 rng(8);
    Catalog c = random_catalog(rng, 10, 4, 5);
    UserModel m = random_model(rng, c);
    auto argmaxes = [](const UserModel& mm) {
        std::vector<std::string> out;
        for (const auto& [a, d] : mm.value_prefs)
            out.push_back(std::max_element(d.begin(), d.end(), [](auto& x, auto& y) { return x.second < y.second; })->first);
        return out;
    };
    const auto before = argmaxes(m);
    for (const auto& id : c.item_ids()) on_item_rejected(m, id, 1);
    EXPECT_EQ(argmaxes(m), before);
}

TEST(ModelProperty, ReplayingEventsReproducesModelExactly) {
    std::mt19937_64 rng(10);
    Catalog c = random_catalog(rng, 20, 5, 5);
    UserModel direct = init_user_model("u", c.schema(), UpdatePolicy{}, c.item_ids());
    UserModel replayed = direct;
    std::vector<ModelEvent> log;
    std::uniform_int_distribution<int> kind(0, 2);
    for (int k = 0; k < 500; ++k) {
        const std::string id = c.items()[static_cast<std::size_t>(k) % c.size()].id;
        const ConstraintSet cs = random_constraints(rng, c.schema(), 0.4);
        switch (kind(rng)) {
            case 0:
                on_item_accepted(direct, cs, id, UpdatePolicy{}, k);
                log.push_back({ModelEvent::Kind::ItemAccepted, cs, id, k});
                break;
            case 1:
                on_item_rejected(direct, id, k);
                log.push_back({ModelEvent::Kind::ItemRejected, {}, id, k});
                break;
            default:
                on_relax_accepted(direct, cs, UpdatePolicy{}, k);
                log.push_back({ModelEvent::Kind::RelaxAccepted, cs, std::nullopt, k});
        }
    }
    for (const auto& e : log) apply_event(replayed, e, UpdatePolicy{});
    EXPECT_EQ(replayed, direct);
}

// Persistence ----------------------------------------------------------------------

TEST(Persistence, HomerModelRoundTrips) {
    const UserModel m = homer_model();
    const AttributeSchema schema = homer_schema();
    EXPECT_EQ(load_model(save_model(m), &schema), m);
}

TEST(Persistence, LearnedModelRoundTripsBitExactly) {
    std::mt19937_64 rng(3);
    Catalog c = random_catalog(rng, 40);
    UserModel m = random_model(rng, c);
    for (int k = 0; k < 50; ++k) on_item_accepted(m, random_constraints(rng, c.schema(), 0.5), c.items()[k % 40].id, {}, k);
    const UserModel back = load_model(save_model(m), &c.schema());
    EXPECT_EQ(back, m);
    EXPECT_EQ(save_model(back), save_model(m));
}

TEST(Persistence, TruncatedPayloadIsCorrupt) {
    const std::string bytes = save_model(homer_model());
    try {
        load_model(bytes.substr(0, bytes.size() / 2));
        FAIL();
    } catch (const ModelError& e) {
        EXPECT_EQ(e.kind(), ModelError::Kind::CorruptPayload);
    }
}

TEST(Persistence, VersionMismatch) {
    auto j = nlohmann::json::parse(save_model(homer_model()));
    j["format_version"] = 99;
    try {
        load_model(j.dump());
        FAIL();
    } catch (const ModelError& e) {
        EXPECT_EQ(e.kind(), ModelError::Kind::VersionMismatch);
    }
}

TEST(Persistence, UnknownSchemaAttributeIsNamed) {
    auto j = nlohmann::json::parse(save_model(homer_model()));
    j["attribute_weights"]["ambience"] = 0.0;
    j["value_prefs"]["ambience"] = {{"quiet", 1.0}};
    const AttributeSchema schema = homer_schema();
    try {
        load_model(j.dump(), &schema);
        FAIL();
    } catch (const ModelError& e) {
        EXPECT_EQ(e.kind(), ModelError::Kind::SchemaMismatch);
        EXPECT_NE(std::string(e.what()).find("ambience"), std::string::npos);
    }
}

TEST(Persistence, BrokenCountsRejected) {
    auto j = nlohmann::json::parse(save_model(homer_model()));
    j["item_stats"]["0815"]["accepted"] = 30;
    EXPECT_THROW(load_model(j.dump()), ModelError);
}
