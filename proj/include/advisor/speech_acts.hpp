#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advisor/catalog.hpp"

namespace advisor {

enum class SystemAct { AttemptConstrain, SuggestRelax, RecommendItem, QuitStartMod, ProvideValues, Clarify };

enum class UserAct { ProvideConstrain, Accept, Reject, ProvideRelax, StartOver, Quit, QueryValues, Unparseable };

inline std::string_view to_string(SystemAct a) {
    switch (a) {
        case SystemAct::AttemptConstrain: return "ATTEMPT-CONSTRAIN";
        case SystemAct::SuggestRelax: return "SUGGEST-RELAX";
        case SystemAct::RecommendItem: return "RECOMMEND-ITEM";
        case SystemAct::QuitStartMod: return "QUIT-START-MOD";
        case SystemAct::ProvideValues: return "PROVIDE-VALUES";
        case SystemAct::Clarify: return "CLARIFY";
    }
    return "?";
}

inline std::string_view to_string(UserAct a) {
    switch (a) {
        case UserAct::ProvideConstrain: return "PROVIDE-CONSTRAIN";
        case UserAct::Accept: return "ACCEPT";
        case UserAct::Reject: return "REJECT";
        case UserAct::ProvideRelax: return "PROVIDE-RELAX";
        case UserAct::StartOver: return "START-OVER";
        case UserAct::Quit: return "QUIT";
        case UserAct::QueryValues: return "QUERY-VALUES";
        case UserAct::Unparseable: return "UNPARSEABLE";
    }
    return "?";
}

struct SystemMove {
    SystemAct act = SystemAct::Clarify;
    std::optional<std::string> attribute;  // ATTEMPT-CONSTRAIN, SUGGEST-RELAX, PROVIDE-VALUES
    std::optional<std::string> item_id;    // RECOMMEND-ITEM
    std::vector<std::string> values;       // PROVIDE-VALUES samples

    friend bool operator==(const SystemMove&, const SystemMove&) = default;
};

/// One user turn. `act` is the principal speech act; an utterance may additionally bind
/// constraints ("I don't care, as long as it's in Palo Alto") or name attributes to relax.
struct UserMove {
    UserAct act = UserAct::Unparseable;
    std::optional<std::string> attribute;  // REJECT(attribute), QUERY-VALUES
    ConstraintSet bindings;                // PROVIDE-CONSTRAIN payload, possibly alongside another act
    std::vector<std::string> relax;        // PROVIDE-RELAX payload

    friend bool operator==(const UserMove&, const UserMove&) = default;
};

inline std::string describe(const SystemMove& m) {
    std::string s(to_string(m.act));
    if (m.attribute) s += "(" + *m.attribute + ")";
    if (m.item_id) s += "(" + *m.item_id + ")";
    return s;
}

inline std::string describe(const UserMove& m) {
    std::string s(to_string(m.act));
    if (m.attribute) s += "(" + *m.attribute + ")";
    for (const auto& a : m.relax) s += " relax:" + a;
    for (const auto& [a, vs] : m.bindings) {
        s += " " + a + "=";
        bool first = true;
        for (const auto& v : vs) {
            s += (first ? "" : "|") + v;
            first = false;
        }
    }
    return s;
}

}  // namespace advisor
