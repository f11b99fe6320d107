#pragma once

#include <algorithm>
#include <cctype>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include "advisor/catalog.hpp"
#include "advisor/speech_acts.hpp"

namespace advisor {

namespace detail {

/// Lowercase, punctuation (other than apostrophes) to spaces, single-spaced, padded with
/// one space at each end so phrases can be matched on word boundaries.
inline std::string normalize_text(const std::string& text) {
    std::string out = " ";
    for (unsigned char c : text) {
        char ch = (std::isalnum(c) || c == '\'') ? static_cast<char>(std::tolower(c)) : ' ';
        if (ch == ' ' && out.back() == ' ') continue;
        out.push_back(ch);
    }
    if (out.back() != ' ') out.push_back(' ');
    return out;
}

inline std::string phrase_of(const std::string& identifier) {
    std::string p = normalize_text(identifier);
    return p.substr(1, p.size() - 2);
}

inline bool has_phrase(const std::string& normalized, const std::string& phrase) {
    return normalized.find(" " + phrase + " ") != std::string::npos;
}

inline bool has_any(const std::string& normalized, std::initializer_list<const char*> phrases) {
    return std::any_of(phrases.begin(), phrases.end(), [&](const char* p) { return has_phrase(normalized, p); });
}

/// Attributes named as "<lead> <attribute>", e.g. "any price" or "relax parking".
inline std::vector<std::string> attributes_after(const std::string& normalized, const AttributeSchema& schema,
                                                 std::initializer_list<const char*> leads) {
    std::vector<std::string> out;
    for (const auto& a : schema.attributes())
        for (const char* lead : leads)
            if (has_phrase(normalized, std::string(lead) + " " + phrase_of(a.name))) {
                out.push_back(a.name);
                break;
            }
    return out;
}

/// Every value identifier or synonym found in the text, longest phrases first so that
/// a multi-word value is not also read as its parts.
inline ConstraintSet find_bindings(std::string normalized, const AttributeSchema& schema) {
    struct Phrase {
        std::string text;
        std::string attribute;
        std::string value;
    };
    std::vector<Phrase> phrases;
    for (const auto& a : schema.attributes()) {
        for (const auto& v : a.values) phrases.push_back({phrase_of(v), a.name, v});
        for (const auto& [token, v] : a.synonyms) phrases.push_back({phrase_of(token), a.name, v});
    }
    std::stable_sort(phrases.begin(), phrases.end(),
                     [](const Phrase& x, const Phrase& y) { return x.text.size() > y.text.size(); });
    ConstraintSet out;
    for (const auto& p : phrases) {
        if (p.text.empty()) continue;
        const std::string needle = " " + p.text + " ";
        std::size_t pos = normalized.find(needle);
        if (pos == std::string::npos) continue;
        out[p.attribute].insert(p.value);
        while (pos != std::string::npos) {
            std::fill(normalized.begin() + static_cast<std::ptrdiff_t>(pos) + 1,
                      normalized.begin() + static_cast<std::ptrdiff_t>(pos + needle.size()) - 1, '#');
            pos = normalized.find(needle, pos + 1);
        }
    }
    return out;
}

inline bool constrain_context(const SystemMove& m) {
    return m.act == SystemAct::AttemptConstrain || m.act == SystemAct::ProvideValues;
}

}  // namespace detail

/// Maps one user utterance to a speech act given the system move it answers.
/// Deterministic; the first matching rule wins:
///
///   1. quit / goodbye                                  QUIT
///   2. start over                                      START-OVER
///   3. what ... are there / options / help             QUERY-VALUES(context attribute)
///   4. don't care / doesn't matter / any <attribute>   REJECT(attribute)
///   5. no / what else / next, after RECOMMEND-ITEM     REJECT(item)
///   6. no, after SUGGEST-RELAX                         REJECT(relaxation)
///   7. yes / sure / sounds fine / sounds good          ACCEPT
///   8. relax <attr> / any <attr>, after SUGGEST-RELAX
///      or QUIT-START-MOD                               PROVIDE-RELAX(attributes)
///   9. any value or synonym in the text                PROVIDE-CONSTRAIN(all bindings)
///  10. anything else                                   unparseable
///
/// Value bindings found in the text ride along with rules 4 to 6 and 8.
inline UserMove parse_utterance(const std::string& text, const SystemMove& context, const AttributeSchema& schema) {
    const std::string t = detail::normalize_text(text);
    const bool relax_context = context.act == SystemAct::SuggestRelax || context.act == SystemAct::QuitStartMod;
    UserMove move;

    if (detail::has_any(t, {"quit", "goodbye"})) {
        move.act = UserAct::Quit;
        return move;
    }
    if (detail::has_phrase(t, "start over")) {
        move.act = UserAct::StartOver;
        return move;
    }
    static const std::regex kWhatAreThere(" what( [a-z']+)* are there ");
    if (std::regex_search(t, kWhatAreThere) || detail::has_any(t, {"options", "help"})) {
        move.act = UserAct::QueryValues;
        move.attribute = context.attribute;
        return move;
    }

    const ConstraintSet bindings = detail::find_bindings(t, schema);
    const std::vector<std::string> relax_named =
        relax_context ? detail::attributes_after(t, schema, {"relax", "any"}) : std::vector<std::string>{};

    // 4
    if (!relax_context) {
        auto named = detail::attributes_after(t, schema, {"any"});
        std::optional<std::string> target;
        if (!named.empty())
            target = named.front();
        else if (detail::has_any(t, {"don't care", "dont care", "do not care", "doesn't matter", "does not matter"}) &&
                 detail::constrain_context(context))
            target = context.attribute;
        if (target) {
            move.act = UserAct::Reject;
            move.attribute = target;
            move.bindings = bindings;
            move.bindings.erase(*target);
            return move;
        }
    }
    // 5
    if (context.act == SystemAct::RecommendItem && (detail::has_any(t, {"no", "what else", "next"}))) {
        move.act = UserAct::Reject;
        move.bindings = bindings;
        return move;
    }
    // 6
    if (context.act == SystemAct::SuggestRelax && detail::has_phrase(t, "no")) {
        move.act = UserAct::Reject;
        move.bindings = bindings;
        move.relax = relax_named;
        return move;
    }
    // 7
    if (detail::has_any(t, {"yes", "sure", "sounds fine", "sounds good"}) &&
        (!detail::constrain_context(context) || bindings.empty())) {
        move.act = UserAct::Accept;
        return move;
    }
    // 8
    if (!relax_named.empty()) {
        move.act = UserAct::ProvideRelax;
        move.relax = relax_named;
        move.bindings = bindings;
        for (const auto& a : relax_named) move.bindings.erase(a);
        return move;
    }
    // 9
    if (!bindings.empty()) {
        move.act = UserAct::ProvideConstrain;
        move.bindings = bindings;
        return move;
    }
    return move;  // 10: unparseable
}

}  // namespace advisor
