#include <gtest/gtest.h>

#include "support.hpp"

using namespace advisor;
using namespace testing_support;

namespace {

const AttributeSchema& schema() {
    static const AttributeSchema s = sample_catalog().schema();
    return s;
}

SystemMove ask(const std::string& a) { return {SystemAct::AttemptConstrain, a, std::nullopt, {}}; }
SystemMove relax(const std::string& a) { return {SystemAct::SuggestRelax, a, std::nullopt, {}}; }
SystemMove recommend() { return {SystemAct::RecommendItem, std::nullopt, "r010", {}}; }
SystemMove qsm() { return {SystemAct::QuitStartMod, std::nullopt, std::nullopt, {}}; }

UserMove parse(const std::string& text, const SystemMove& ctx) { return parse_utterance(text, ctx, schema()); }

}  // namespace

TEST(Grammar, Quit) {
    for (const char* t : {"quit", "Goodbye!", "ok I quit now"}) EXPECT_EQ(parse(t, ask("cuisine")).act, UserAct::Quit) << t;
    EXPECT_EQ(parse("quit, start over", ask("cuisine")).act, UserAct::Quit);
}

TEST(Grammar, StartOver) {
    EXPECT_EQ(parse("Let's start over.", recommend()).act, UserAct::StartOver);
    EXPECT_EQ(parse("start over with Thai", ask("cuisine")).act, UserAct::StartOver);
}

TEST(Grammar, QueryValuesTakesContextAttribute) {
    UserMove u = parse("What types are there?", ask("cuisine"));
    EXPECT_EQ(u.act, UserAct::QueryValues);
    EXPECT_EQ(u.attribute, "cuisine");
    EXPECT_EQ(parse("what are my options", ask("parking")).attribute, "parking");
    EXPECT_EQ(parse("help", ask("price")).act, UserAct::QueryValues);
}

TEST(Grammar, DontCareRejectsAskedAttribute) {
    for (const char* t : {"i don't care", "It doesn't matter", "I do not care."}) {
        UserMove u = parse(t, ask("parking"));
        EXPECT_EQ(u.act, UserAct::Reject) << t;
        EXPECT_EQ(u.attribute, "parking") << t;
        EXPECT_TRUE(u.bindings.empty()) << t;
    }
}

TEST(Grammar, DontCareWithBindingsRidesAlong) {
    UserMove u = parse("I don't care, as long as it's in Palo Alto.", ask("parking"));
    EXPECT_EQ(u.act, UserAct::Reject);
    EXPECT_EQ(u.attribute, "parking");
    EXPECT_EQ(u.bindings, (ConstraintSet{{"location", {"Palo_Alto"}}}));
}

TEST(Grammar, AnyAttributeRejectsThatAttribute) {
    UserMove u = parse("any price is fine", ask("cuisine"));
    EXPECT_EQ(u.act, UserAct::Reject);
    EXPECT_EQ(u.attribute, "price");
}

TEST(Grammar, ItemRejection) {
    for (const char* t : {"No, what else do you have?", "next", "what else"}) {
        UserMove u = parse(t, recommend());
        EXPECT_EQ(u.act, UserAct::Reject) << t;
        EXPECT_FALSE(u.attribute) << t;
    }
}

TEST(Grammar, RelaxRejectionKeepsNewBindings) {
    UserMove u = parse("No, I think I'd like Chinese instead.", relax("price"));
    EXPECT_EQ(u.act, UserAct::Reject);
    EXPECT_FALSE(u.attribute);
    EXPECT_EQ(u.bindings, (ConstraintSet{{"cuisine", {"Chinese"}}}));
}

TEST(Grammar, Accept) {
    EXPECT_EQ(parse("Sure, that sounds fine.", recommend()).act, UserAct::Accept);
    EXPECT_EQ(parse("yes", relax("price")).act, UserAct::Accept);
    EXPECT_EQ(parse("sounds good", recommend()).act, UserAct::Accept);
}

TEST(Grammar, YesWithValuesAfterQuestionIsAConstraint) {
    UserMove u = parse("yes, Thai", ask("cuisine"));
    EXPECT_EQ(u.act, UserAct::ProvideConstrain);
    EXPECT_EQ(u.bindings, (ConstraintSet{{"cuisine", {"Thai"}}}));
}

TEST(Grammar, ProvideRelaxAfterSuggestRelaxOrQuitStartMod) {
    UserMove u = parse("relax parking", relax("price"));
    EXPECT_EQ(u.act, UserAct::ProvideRelax);
    EXPECT_EQ(u.relax, (std::vector<std::string>{"parking"}));
    UserMove v = parse("any cuisine, but make it cheap", qsm());
    EXPECT_EQ(v.act, UserAct::ProvideRelax);
    EXPECT_EQ(v.relax, (std::vector<std::string>{"cuisine"}));
    EXPECT_EQ(v.bindings, (ConstraintSet{{"price", {"one"}}}));
}

TEST(Grammar, ProvideConstrainWithSynonymAndSeveralAttributes) {
    UserMove u = parse("Oh, maybe a cheap Indian place.", ask("cuisine"));
    EXPECT_EQ(u.act, UserAct::ProvideConstrain);
    EXPECT_EQ(u.bindings, (ConstraintSet{{"cuisine", {"Indian"}}, {"price", {"one"}}}));
}

TEST(Grammar, DisjunctionBindsBothValues) {
    UserMove u = parse("Chinese or Thai", ask("cuisine"));
    EXPECT_EQ(u.bindings, (ConstraintSet{{"cuisine", Values{"Chinese", "Thai"}}}));
}

TEST(Grammar, MultiWordValueIsNotReadAsItsParts) {
    UserMove u = parse("somewhere in mountain view", ask("location"));
    EXPECT_EQ(u.bindings, (ConstraintSet{{"location", {"Mountain_View"}}}));
}

TEST(Grammar, ValueWordsNeedWordBoundaries) {
    // "one" inside "someone" or "lot" inside "lots" is not a value.
    EXPECT_EQ(parse("someone said lots", ask("parking")).act, UserAct::Unparseable);
}

TEST(Grammar, UnparseableFallback) {
    UserMove u = parse("zzqx blorp", ask("cuisine"));
    EXPECT_EQ(u.act, UserAct::Unparseable);
    EXPECT_TRUE(u.bindings.empty());
}

TEST(Grammar, NoOutsideItsContextsIsUnparseable) {
    EXPECT_EQ(parse("no", ask("cuisine")).act, UserAct::Unparseable);
}

TEST(Grammar, DeterministicAndCaseInsensitive) {
    EXPECT_EQ(parse("CHEAP INDIAN", ask("cuisine")), parse("cheap indian", ask("cuisine")));
}
