#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advisor/catalog.hpp"
#include "advisor/speech_acts.hpp"

namespace advisor {

/// Prompt wording, keyed by system act. Per-attribute overrides take precedence over
/// the act's default template. Templates substitute {attribute} and {values}.
class MessageCatalog {
public:
    MessageCatalog() : MessageCatalog(defaults()) {}

    explicit MessageCatalog(const nlohmann::json& doc) {
        try {
            for (const auto& [key, entry] : doc.items()) {
                if (entry.is_string()) {
                    defaults_[key] = entry.get<std::string>();
                } else {
                    if (entry.contains("default")) defaults_[key] = entry["default"].get<std::string>();
                    if (entry.contains("attributes"))
                        overrides_[key] = entry["attributes"].get<std::map<std::string, std::string>>();
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(std::string("message catalog: ") + e.what());
        }
        for (const char* k : {"attempt_constrain", "suggest_relax", "recommend_item", "quit_start_mod",
                              "provide_values", "clarify", "done", "goodbye"})
            if (!defaults_.count(k)) throw std::runtime_error(std::string("message catalog: missing '") + k + "'");
    }

    static MessageCatalog from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open message catalog " + path);
        nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
        if (doc.is_discarded()) throw std::runtime_error("message catalog " + path + " is not valid JSON");
        return MessageCatalog(doc);
    }

    /// Built-in wording; data/messages.json ships the same content.
    static nlohmann::json defaults() {
        return nlohmann::json::parse(R"({
  "attempt_constrain": {
    "default": "What {attribute} would you like?",
    "attributes": {
      "cuisine": "What type of food would you like?",
      "parking": "What kind of parking would you like?",
      "location": "What city do you prefer?",
      "price": "How much would you like to spend?",
      "rating": "What kind of rating should it have?",
      "reservations": "How do you feel about reservations?",
      "payment": "How would you like to pay?"
    }
  },
  "suggest_relax": "I'm sorry, I don't know of any restaurants like that, would you like to search for any {attribute}?",
  "recommend_item": "How about this one?",
  "quit_start_mod": "I'm sorry, I don't have any other restaurants that match. Would you like to change the search, start over, or quit?",
  "provide_values": "You can say things like {values}.",
  "clarify": "I'm sorry, I didn't understand that.",
  "done": "Done",
  "goodbye": "Goodbye."
})");
    }

    std::string text(const std::string& key, const std::optional<std::string>& attribute = std::nullopt) const {
        if (attribute) {
            auto o = overrides_.find(key);
            if (o != overrides_.end()) {
                auto it = o->second.find(*attribute);
                if (it != o->second.end()) return it->second;
            }
        }
        return defaults_.at(key);
    }

private:
    std::map<std::string, std::string> defaults_;
    std::map<std::string, std::map<std::string, std::string>> overrides_;
};

/// Value identifiers are shown with underscores as spaces ("Palo_Alto" -> "Palo Alto").
inline std::string display_value(std::string v) {
    for (char& c : v)
        if (c == '_') c = ' ';
    return v;
}

/// "A", "A and B", "A, B, and C".
inline std::string join_values(const std::vector<std::string>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += values.size() == 2 ? " and " : (i + 1 == values.size() ? ", and " : ", ");
        out += display_value(values[i]);
    }
    return out;
}

inline std::string substitute(std::string tpl, const std::string& key, const std::string& value) {
    const std::string needle = "{" + key + "}";
    for (std::size_t pos = tpl.find(needle); pos != std::string::npos; pos = tpl.find(needle, pos + value.size()))
        tpl.replace(pos, needle.size(), value);
    return tpl;
}

struct ItemCard {
    std::string id;
    std::string name;
    std::string address;
    std::string phone;
};

struct RenderedMove {
    std::string text;
    std::optional<ItemCard> card;
};

inline std::string message_key(SystemAct act) {
    switch (act) {
        case SystemAct::AttemptConstrain: return "attempt_constrain";
        case SystemAct::SuggestRelax: return "suggest_relax";
        case SystemAct::RecommendItem: return "recommend_item";
        case SystemAct::QuitStartMod: return "quit_start_mod";
        case SystemAct::ProvideValues: return "provide_values";
        case SystemAct::Clarify: return "clarify";
    }
    return "clarify";
}

/// Renders a system move. `context` is the move being clarified, for CLARIFY.
inline RenderedMove render_move(const SystemMove& move, const Catalog& catalog, const MessageCatalog& messages,
                                const std::optional<SystemMove>& context = std::nullopt) {
    RenderedMove out;
    std::string text = messages.text(message_key(move.act), move.attribute);
    if (move.attribute) text = substitute(text, "attribute", display_value(*move.attribute));
    text = substitute(text, "values", join_values(move.values));
    out.text = std::move(text);

    if (move.act == SystemAct::RecommendItem && move.item_id) {
        const Item* item = catalog.find(*move.item_id);
        if (!item) throw std::invalid_argument("render_move: unknown item '" + *move.item_id + "'");
        out.card = ItemCard{item->id, item->display.name, item->display.address, item->display.phone};
    }
    if (move.act == SystemAct::Clarify && context && context->act != SystemAct::Clarify) {
        RenderedMove again = render_move(*context, catalog, messages);
        out.text += " " + again.text;
        out.card = again.card;
    }
    return out;
}

}  // namespace advisor
