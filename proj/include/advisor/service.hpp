#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "advisor/dialogue.hpp"
#include "advisor/messages.hpp"
#include "advisor/store.hpp"

namespace advisor {

class ServiceError : public std::runtime_error {
public:
    enum class Kind { UnknownSession, ClosedSession, Busy, BadRequest, Storage };
    ServiceError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

inline Timestamp wall_clock_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

inline nlohmann::json to_json(const ItemCard& c) {
    return {{"id", c.id}, {"name", c.name}, {"address", c.address}, {"phone", c.phone}};
}

inline nlohmann::json to_json(const SystemMove& m) {
    nlohmann::json j{{"act", std::string(to_string(m.act))}};
    if (m.attribute) j["attribute"] = *m.attribute;
    if (m.item_id) j["item_id"] = *m.item_id;
    if (!m.values.empty()) j["values"] = m.values;
    return j;
}

inline nlohmann::json to_json(const UserMove& m) {
    nlohmann::json j{{"act", std::string(to_string(m.act))}};
    if (m.attribute) j["attribute"] = *m.attribute;
    if (!m.bindings.empty()) j["bindings"] = m.bindings;
    if (!m.relax.empty()) j["relax"] = m.relax;
    return j;
}

/// What a client sees after each exchange.
struct Reply {
    std::string move;  // system act tag, or "DONE" once the conversation ended
    std::string prompt;
    std::optional<ItemCard> item;
    bool terminal = false;
    std::optional<Terminal> outcome;

    nlohmann::json to_json() const {
        nlohmann::json j{{"move", move}, {"prompt", prompt}, {"terminal", terminal}};
        j["item"] = item ? advisor::to_json(*item) : nlohmann::json(nullptr);
        if (outcome) j["outcome"] = std::string(to_string(*outcome));
        return j;
    }
};

struct Opened {
    std::string session_id;
    Reply first;
};

/// Live conversations keyed by unguessable ids, with user models persisted on
/// termination. Exchanges within one session are strictly serialized; a second
/// concurrent post to the same session fails with Busy.
class SessionService {
public:
    struct Options {
        std::filesystem::path data_dir = "state";
        bool adapt = true;
        Clock clock = wall_clock_seconds;
    };

    SessionService(const Catalog& catalog, DialogueConfig config, MessageCatalog messages, Options options)
        : catalog_(catalog),
          config_(std::move(config)),
          messages_(std::move(messages)),
          options_(std::move(options)),
          store_(options_.data_dir, catalog_.schema(), config_.policy, catalog_.item_ids()) {
        config_.validate();
    }

    Opened create_session(const std::string& user_id) {
        if (!valid_user_id(user_id))
            throw ServiceError(ServiceError::Kind::BadRequest, "user_id must match [A-Za-z0-9_.-]{1,64}");
        UserModel model;
        try {
            std::lock_guard<std::mutex> g(store_.lock_for(user_id));
            model = store_.load_or_init(user_id);
        } catch (const std::exception& e) {
            throw ServiceError(ServiceError::Kind::Storage, e.what());
        }
        auto s = std::make_shared<Session>();
        s->user_id = user_id;
        s->created_at = options_.clock();
        s->conversation = std::make_unique<Conversation>(catalog_, config_, messages_, std::move(model), options_.clock);
        Reply first = reply_of(*s);
        std::string id;
        {
            std::lock_guard<std::mutex> g(mu_);
            do id = new_session_id();
            while (sessions_.count(id));
            s->id = id;
            sessions_[id] = s;
        }
        return {id, std::move(first)};
    }

    Reply post_utterance(const std::string& session_id, const std::string& text) {
        auto s = find(session_id);
        std::unique_lock<std::mutex> lk(s->mu, std::try_to_lock);
        if (!lk.owns_lock()) throw ServiceError(ServiceError::Kind::Busy, "session is handling another utterance");
        if (s->closed) throw ServiceError(ServiceError::Kind::ClosedSession, "session " + session_id + " is closed");
        s->conversation->respond(text);
        if (s->conversation->finished()) finish(*s);
        return reply_of(*s);
    }

    /// Read-only view of the dialogue: attribute sets, match count, last moves and the
    /// prompts so far.
    nlohmann::json get_state(const std::string& session_id) {
        auto s = find(session_id);
        std::lock_guard<std::mutex> lk(s->mu);
        if (s->closed)
            throw ServiceError(ServiceError::Kind::ClosedSession, "session " + session_id + " is closed");
        const Conversation& c = *s->conversation;
        const DialogueState& st = c.state();
        nlohmann::json j;
        j["session_id"] = s->id;
        j["user_id"] = s->user_id;
        j["created_at"] = s->created_at;
        j["constrained"] = st.query.constraints();
        j["user_constraints"] = st.user_provided;
        j["rejected"] = st.attrs.rejected;
        j["fixed"] = st.attrs.fixed;
        j["relaxed"] = st.attrs.relaxed;
        j["number_of_items"] = st.number_of_items;
        j["last_system_move"] = st.system_act ? to_json(*st.system_act) : nlohmann::json(nullptr);
        j["last_user_move"] = st.user_move ? to_json(*st.user_move) : nlohmann::json(nullptr);
        nlohmann::json turns = nlohmann::json::array();
        for (const auto& t : c.transcript().turns) {
            nlohmann::json tj{{"move", std::string(to_string(t.system.act))}, {"prompt", t.prompt}};
            tj["item"] = t.card ? to_json(*t.card) : nlohmann::json(nullptr);
            tj["user_text"] = t.user_text ? nlohmann::json(*t.user_text) : nlohmann::json(nullptr);
            turns.push_back(std::move(tj));
        }
        j["turns"] = std::move(turns);
        const Reply r = reply_of(*s);
        j["current"] = r.to_json();
        j["terminal"] = r.terminal;
        return j;
    }

    /// Ends a live session as a QUIT. Closing twice reports ClosedSession.
    void close_session(const std::string& session_id) {
        auto s = find(session_id);
        std::lock_guard<std::mutex> lk(s->mu);
        if (s->closed) throw ServiceError(ServiceError::Kind::ClosedSession, "session " + session_id + " is closed");
        s->conversation->quit();
        finish(*s);
    }

    /// Stored model file contents; nullopt for a user with no stored model.
    std::optional<std::string> get_user_model(const std::string& user_id) const {
        if (!valid_user_id(user_id))
            throw ServiceError(ServiceError::Kind::BadRequest, "user_id must match [A-Za-z0-9_.-]{1,64}");
        return store_.read_raw(user_id);
    }

    const ModelStore& store() const { return store_; }
    ModelStore& store() { return store_; }
    std::size_t live_sessions() const {
        std::lock_guard<std::mutex> g(mu_);
        std::size_t n = 0;
        for (const auto& [id, s] : sessions_) n += s->closed ? 0 : 1;
        return n;
    }

private:
    struct Session {
        std::string id;
        std::string user_id;
        Timestamp created_at = 0;
        std::unique_ptr<Conversation> conversation;
        std::atomic<bool> closed{false};
        std::mutex mu;
    };

    static std::string new_session_id() {
        static thread_local std::random_device rd;
        std::string out;
        for (int i = 0; i < 4; ++i) {
            char buf[9];
            std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(rd()));
            out += buf;
        }
        return out;
    }

    std::shared_ptr<Session> find(const std::string& id) {
        std::lock_guard<std::mutex> g(mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw ServiceError(ServiceError::Kind::UnknownSession, "no session " + id);
        return it->second;
    }

    /// Persists the conversation's model updates by replaying them onto the newest stored
    /// model, so two sessions of one user both land.
    void finish(Session& s) {
        s.closed = true;
        if (!options_.adapt || s.conversation->events().empty()) return;
        try {
            std::lock_guard<std::mutex> g(store_.lock_for(s.user_id));
            UserModel latest = store_.load_or_init(s.user_id);
            for (const auto& e : s.conversation->events()) apply_event(latest, e, config_.policy);
            store_.save(latest);
        } catch (const std::exception& e) {
            throw ServiceError(ServiceError::Kind::Storage, std::string("saving user model: ") + e.what());
        }
    }

    Reply reply_of(const Session& s) const {
        const Conversation& c = *s.conversation;
        Reply r;
        if (c.finished()) {
            r.move = "DONE";
            r.prompt = c.transcript().closing;
            r.terminal = true;
            r.outcome = c.transcript().terminal;
            if (const auto& id = c.transcript().accepted_item)
                if (const Item* it = catalog_.find(*id))
                    r.item = ItemCard{it->id, it->display.name, it->display.address, it->display.phone};
            return r;
        }
        const Turn& t = c.current();
        r.move = std::string(to_string(t.system.act));
        r.prompt = t.prompt;
        r.item = t.card;
        return r;
    }

    const Catalog& catalog_;
    DialogueConfig config_;
    MessageCatalog messages_;
    Options options_;
    ModelStore store_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace advisor
