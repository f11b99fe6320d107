#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "advisor/catalog.hpp"
#include "advisor/grammar.hpp"
#include "advisor/messages.hpp"
#include "advisor/query.hpp"
#include "advisor/speech_acts.hpp"
#include "advisor/user_model.hpp"

namespace advisor {

struct DialogueConfig {
    SimilarityParams similarity{};
    ConstrainStrategy constrain_strategy = ConstrainStrategy::ByWeight;
    RelaxStrategy relax_strategy = RelaxStrategy::ByWeight;
    DiversityParams diversity{};
    UpdatePolicy policy{};
    std::size_t values_to_list = 3;
    std::size_t max_start_overs = 3;  // a longer chain of START-OVERs ends the conversation
    std::size_t max_turns = 200;      // hard stop for sources that never converge

    void validate() const {
        similarity.validate();
        policy.validate();
        if (diversity.enabled) diversity.validate();
        if (values_to_list == 0) throw std::invalid_argument("values_to_list must be positive");
    }
};

enum class Terminal { AcceptedItem, Quit, StartOverChain };

inline std::string_view to_string(Terminal t) {
    switch (t) {
        case Terminal::AcceptedItem: return "accepted-item";
        case Terminal::Quit: return "quit";
        case Terminal::StartOverChain: return "start-over-chain";
    }
    return "?";
}

struct RankedItem {
    std::string id;
    double score = 0.0;
    friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

/// What the system owes the user before resuming the search.
enum class Pending { None, Clarify, ProvideValues };

struct DialogueState {
    AttributeSets attrs;
    std::optional<std::string> constrain_target;
    std::optional<std::string> relax_target;
    ExpandedQuery query;
    std::size_t number_of_items = 0;
    std::vector<RankedItem> ranked_items;
    std::set<std::string> rejected_items;
    std::optional<UserMove> user_move;
    std::optional<SystemMove> system_act;
    std::optional<SystemMove> context;  // last move that set up the search (not CLARIFY / PROVIDE-VALUES)
    std::size_t presentation_cursor = 0;

    ConstraintSet user_provided;              // constraints as the user stated them
    std::size_t rejections_since_change = 0;  // item rejections since the constraints last changed
    std::size_t start_overs = 0;
    Pending pending = Pending::None;
    std::optional<std::string> pending_attribute;
    std::optional<Terminal> terminal;
    std::optional<std::string> accepted_item;

    friend bool operator==(const DialogueState&, const DialogueState&) = default;
};

struct ModelEvent {
    enum class Kind { ItemAccepted, ItemRejected, RelaxAccepted };
    Kind kind;
    ConstraintSet constrained;
    std::optional<std::string> item_id;
    Timestamp at = 0;
    friend bool operator==(const ModelEvent&, const ModelEvent&) = default;
};

/// Replays one recorded update onto a model.
inline void apply_event(UserModel& model, const ModelEvent& e, const UpdatePolicy& policy) {
    switch (e.kind) {
        case ModelEvent::Kind::ItemAccepted: on_item_accepted(model, e.constrained, *e.item_id, policy, e.at); break;
        case ModelEvent::Kind::ItemRejected: on_item_rejected(model, *e.item_id, e.at); break;
        case ModelEvent::Kind::RelaxAccepted: on_relax_accepted(model, e.constrained, policy, e.at); break;
    }
}

/// Read-only inputs shared by every turn of a conversation.
struct DialogueEnv {
    const Catalog& catalog;
    const DialogueConfig& config;
};

// ---------------------------------------------------------------------------

inline void refresh_retrieval(DialogueState& s, const UserModel& model, const DialogueEnv& env, Timestamp now) {
    const ScoringContext ctx{env.config.diversity, now};
    s.ranked_items.clear();
    for (const auto& r : retrieve_and_rank(s.query, env.catalog, model, env.config.similarity, ctx))
        s.ranked_items.push_back({r.item->id, r.score});
    s.number_of_items = static_cast<std::size_t>(std::count_if(
        s.ranked_items.begin(), s.ranked_items.end(), [&](const RankedItem& r) { return !s.rejected_items.count(r.id); }));
}

inline DialogueState init_dialogue(const UserModel& model, const DialogueEnv& env, Timestamp now) {
    DialogueState s;
    s.query = init_query(model);
    refresh_retrieval(s, model, env, now);
    return s;
}

/// Throws std::logic_error naming the first violated state invariant.
inline void check_state(const DialogueState& s) {
    for (const auto& a : s.attrs.constrained)
        if (s.attrs.rejected.count(a)) throw std::logic_error("attribute '" + a + "' both constrained and rejected");
    for (const auto& a : s.attrs.fixed)
        if (!s.attrs.constrained.count(a)) throw std::logic_error("fixed attribute '" + a + "' is not constrained");
    std::size_t live = 0;
    for (const auto& r : s.ranked_items)
        if (!s.rejected_items.count(r.id)) ++live;
    if (live != s.number_of_items) throw std::logic_error("number_of_items disagrees with ranked items");
    std::set<std::string> query_constrained;
    for (const auto& [a, vs] : s.query.constraints()) query_constrained.insert(a);
    if (query_constrained != s.attrs.constrained) throw std::logic_error("query constraints disagree with state");
    for (const auto& [a, vs] : s.user_provided)
        if (!s.attrs.constrained.count(a)) throw std::logic_error("user constraint on unconstrained '" + a + "'");
}

namespace detail {

inline std::vector<const Item*> live_items(const DialogueState& s, const Catalog& catalog) {
    std::vector<const Item*> out;
    for (const auto& r : s.ranked_items)
        if (!s.rejected_items.count(r.id)) out.push_back(catalog.find(r.id));
    return out;
}

inline std::optional<std::string> next_presentable(const DialogueState& s, std::size_t* index = nullptr) {
    for (std::size_t i = 0; i < s.ranked_items.size(); ++i)
        if (!s.rejected_items.count(s.ranked_items[i].id)) {
            if (index) *index = i;
            return s.ranked_items[i].id;
        }
    return std::nullopt;
}

}  // namespace detail

/// Chooses the system's next move from the dialogue state.
///
/// Many matches: ask about the best unasked attribute, or start presenting when none is
/// left. No matches: propose relaxing the best relaxable attribute, or offer to quit,
/// start over, or modify the search when every constrained attribute is Fixed or every
/// match was rejected. A few matches: recommend the best unrejected item.
inline SystemMove next_system_move(const DialogueState& s, const UserModel& model, const DialogueEnv& env,
                                   Timestamp now = 0) {
    if (s.terminal) throw std::logic_error("next_system_move on a finished conversation");
    const DialogueConfig& cfg = env.config;
    SystemMove m;
    if (s.pending == Pending::ProvideValues) {
        m.act = SystemAct::ProvideValues;
        m.attribute = s.pending_attribute;
        m.values = sample_values(env.catalog, *s.pending_attribute, cfg.values_to_list,
                                 &model.value_prefs.at(*s.pending_attribute));
        return m;
    }
    if (s.pending == Pending::Clarify) {
        m.act = SystemAct::Clarify;
        if (s.context) m.attribute = s.context->attribute;
        return m;
    }

    const std::size_t threshold = cfg.similarity.presentation_threshold;
    const std::size_t n = s.number_of_items;
    if (n == 0) {
        if (!s.ranked_items.empty()) {  // everything that matched was rejected
            m.act = SystemAct::QuitStartMod;
            return m;
        }
        auto relax = rank_relax_candidates(s.query, s.attrs, cfg.relax_strategy, env.catalog, model, cfg.similarity,
                                           ScoringContext{cfg.diversity, now});
        if (relax.empty()) {
            m.act = SystemAct::QuitStartMod;
        } else {
            m.act = SystemAct::SuggestRelax;
            m.attribute = relax.front();
        }
        return m;
    }
    if (s.rejections_since_change >= threshold) {
        m.act = SystemAct::QuitStartMod;
        return m;
    }
    if (n > threshold) {
        auto ask = rank_constrain_candidates(s.query, s.attrs, cfg.constrain_strategy, env.catalog.schema(),
                                             detail::live_items(s, env.catalog));
        if (!ask.empty()) {
            m.act = SystemAct::AttemptConstrain;
            m.attribute = ask.front();
            return m;
        }
    }
    m.act = SystemAct::RecommendItem;
    m.item_id = detail::next_presentable(s);
    return m;
}

/// Records that `move` was issued.
inline void commit_system_move(DialogueState& s, const SystemMove& move) {
    s.system_act = move;
    s.pending = Pending::None;
    s.pending_attribute.reset();
    if (move.act == SystemAct::AttemptConstrain) s.constrain_target = move.attribute;
    if (move.act == SystemAct::SuggestRelax) s.relax_target = move.attribute;
    if (move.act == SystemAct::RecommendItem) detail::next_presentable(s, &s.presentation_cursor);
    if (move.act != SystemAct::Clarify && move.act != SystemAct::ProvideValues) s.context = move;
}

namespace detail {

inline bool legal(const UserMove& u, const SystemMove& ctx, const DialogueState& s, const AttributeSchema& schema) {
    auto known = [&](const std::string& a) { return schema.contains(a); };
    for (const auto& [a, vs] : u.bindings)
        if (!known(a)) return false;
    for (const auto& a : u.relax)
        if (!s.attrs.constrained.count(a)) return false;
    switch (u.act) {
        case UserAct::Quit:
        case UserAct::StartOver:
            return true;
        case UserAct::QueryValues:
            return u.attribute && known(*u.attribute);
        case UserAct::Unparseable:
            return false;
        case UserAct::ProvideConstrain:
            return !u.bindings.empty();
        case UserAct::ProvideRelax:
            return !u.relax.empty();
        case UserAct::Accept:
            return ctx.act == SystemAct::SuggestRelax || ctx.act == SystemAct::RecommendItem;
        case UserAct::Reject:
            if (u.attribute) return known(*u.attribute);
            return ctx.act == SystemAct::SuggestRelax || ctx.act == SystemAct::RecommendItem ||
                   (constrain_context(ctx) && ctx.attribute);
    }
    return false;
}

inline void relax_attribute(DialogueState& s, const std::string& a) {
    s.attrs.constrained.erase(a);
    s.attrs.fixed.erase(a);
    s.attrs.relaxed.insert(a);
    s.user_provided.erase(a);
    s.rejections_since_change = 0;
}

}  // namespace detail

/// Applies one user move: updates the attribute sets and the query, fires user-model
/// updates at exactly three points (item accepted, item rejected, relaxation accepted),
/// and recomputes retrieval. An illegal or unparseable move leaves the search untouched and
/// queues a CLARIFY.
inline std::vector<ModelEvent> apply_user_move(DialogueState& s, const UserMove& u, UserModel& model,
                                               const DialogueEnv& env, Timestamp now) {
    if (s.terminal) throw std::logic_error("apply_user_move on a finished conversation");
    std::vector<ModelEvent> events;
    s.user_move = u;
    const SystemMove ctx = s.context.value_or(SystemMove{});

    if (!detail::legal(u, ctx, s, env.catalog.schema())) {
        s.pending = Pending::Clarify;
        return events;
    }
    if (u.act == UserAct::Quit) {
        s.terminal = Terminal::Quit;
        return events;
    }
    if (u.act == UserAct::StartOver) {
        if (++s.start_overs > env.config.max_start_overs) {
            s.terminal = Terminal::StartOverChain;
            return events;
        }
        const std::size_t start_overs = s.start_overs;
        s = init_dialogue(model, env, now);
        s.start_overs = start_overs;
        s.user_move = u;
        return events;
    }
    if (u.act == UserAct::QueryValues) {
        s.pending = Pending::ProvideValues;
        s.pending_attribute = u.attribute;
        return events;
    }

    const bool recommending = ctx.act == SystemAct::RecommendItem && ctx.item_id;
    if (u.act == UserAct::Accept && recommending) {
        ModelEvent e{ModelEvent::Kind::ItemAccepted, s.user_provided, ctx.item_id, now};
        on_item_accepted(model, e.constrained, *ctx.item_id, env.config.policy, now);
        events.push_back(std::move(e));
        s.terminal = Terminal::AcceptedItem;
        s.accepted_item = ctx.item_id;
        return events;
    }
    if (u.act == UserAct::Accept && ctx.act == SystemAct::SuggestRelax) {
        ModelEvent e{ModelEvent::Kind::RelaxAccepted, s.user_provided, std::nullopt, now};
        on_relax_accepted(model, e.constrained, env.config.policy, now);
        events.push_back(std::move(e));
    }
    if (u.act == UserAct::Reject && !u.attribute && recommending) {
        on_item_rejected(model, *ctx.item_id, now);
        events.push_back({ModelEvent::Kind::ItemRejected, {}, ctx.item_id, now});
        s.rejected_items.insert(*ctx.item_id);
        ++s.rejections_since_change;
    }

    s.query = apply_effect(std::move(s.query), ctx, u, model);

    switch (u.act) {
        case UserAct::Reject:
            if (u.attribute || detail::constrain_context(ctx)) {
                const std::string a = u.attribute ? *u.attribute : *ctx.attribute;
                if (s.attrs.constrained.count(a)) {
                    s.attrs.constrained.erase(a);
                    s.attrs.fixed.erase(a);
                    s.user_provided.erase(a);
                    s.rejections_since_change = 0;
                }
                s.attrs.rejected.insert(a);
            } else if (ctx.act == SystemAct::SuggestRelax && ctx.attribute) {
                s.attrs.fixed.insert(*ctx.attribute);
            }
            break;
        case UserAct::Accept:  // relaxation
            detail::relax_attribute(s, *ctx.attribute);
            break;
        default:
            break;
    }
    for (const auto& a : u.relax) detail::relax_attribute(s, a);
    for (const auto& [a, values] : u.bindings) {
        s.attrs.rejected.erase(a);
        s.attrs.relaxed.erase(a);
        s.attrs.constrained.insert(a);
        if (s.user_provided[a] != values) s.rejections_since_change = 0;
        s.user_provided[a] = values;
    }
    refresh_retrieval(s, model, env, now);
    return events;
}

// ---------------------------------------------------------------------------
// Conversations

struct Turn {
    SystemMove system;
    std::string prompt;
    std::optional<ItemCard> card;
    std::optional<std::string> user_text;
    std::optional<UserMove> user_move;
    Timestamp at = 0;
};

struct Transcript {
    std::vector<Turn> turns;  // every prompt that received a response, plus possibly a final unanswered one
    std::optional<Terminal> terminal;
    std::optional<std::string> accepted_item;
    std::string closing;  // "Done" once finished
    bool truncated = false;

    /// Prompts issued, counting the closing message.
    std::size_t system_prompt_count() const { return turns.size() + (closing.empty() ? 0 : 1); }
};

using Clock = std::function<Timestamp()>;

/// One live conversation: owns the dialogue state and a working copy of the user model.
class Conversation {
public:
    Conversation(const Catalog& catalog, const DialogueConfig& config, const MessageCatalog& messages,
                 UserModel model, Clock clock)
        : catalog_(catalog), config_(config), messages_(messages), model_(std::move(model)), clock_(std::move(clock)) {
        const DialogueEnv env{catalog_, config_};
        state_ = init_dialogue(model_, env, clock_());
        issue_next();
    }

    const Turn& current() const { return transcript_.turns.back(); }
    bool finished() const { return state_.terminal.has_value(); }
    const DialogueState& state() const { return state_; }
    const UserModel& model() const { return model_; }
    const Transcript& transcript() const { return transcript_; }
    const std::vector<ModelEvent>& events() const { return events_; }

    /// Feeds one user utterance; returns the system's reply (or the closing turn).
    const Turn& respond(const std::string& text) {
        if (finished()) throw std::logic_error("conversation already finished");
        const SystemMove ctx = state_.context.value_or(transcript_.turns.back().system);
        UserMove u = parse_utterance(text, ctx, catalog_.schema());
        return respond(text, std::move(u));
    }

    /// Same, with the user move already parsed.
    const Turn& respond(const std::string& text, UserMove u) {
        if (finished()) throw std::logic_error("conversation already finished");
        Turn& t = transcript_.turns.back();
        t.user_text = text;
        t.user_move = u;
        const DialogueEnv env{catalog_, config_};
        auto ev = apply_user_move(state_, u, model_, env, clock_());
        events_.insert(events_.end(), ev.begin(), ev.end());
        if (!finished() && transcript_.turns.size() >= config_.max_turns) {
            state_.terminal = Terminal::Quit;
            transcript_.truncated = true;
        }
        if (finished()) {
            close();
            return transcript_.turns.back();
        }
        issue_next();
        return transcript_.turns.back();
    }

    /// Ends the conversation as a QUIT (client hung up or source ran dry).
    void quit() {
        if (finished()) return;
        state_.terminal = Terminal::Quit;
        close();
    }

    std::string closing_text() const { return messages_.text("done"); }

private:
    void issue_next() {
        const DialogueEnv env{catalog_, config_};
        const Timestamp now = clock_();
        const std::optional<SystemMove> context = state_.context;
        SystemMove m = next_system_move(state_, model_, env, now);
        commit_system_move(state_, m);
        RenderedMove r = render_move(m, catalog_, messages_, context);
        transcript_.turns.push_back(Turn{std::move(m), std::move(r.text), std::move(r.card), {}, {}, now});
    }

    void close() {
        transcript_.terminal = state_.terminal;
        transcript_.accepted_item = state_.accepted_item;
        transcript_.closing = messages_.text("done");
    }

    const Catalog& catalog_;
    const DialogueConfig& config_;
    const MessageCatalog& messages_;
    UserModel model_;
    Clock clock_;
    DialogueState state_;
    Transcript transcript_;
    std::vector<ModelEvent> events_;
};

/// Supplies the user's reply to each prompt; nullopt when it has nothing more to say.
using MoveSource = std::function<std::optional<std::string>(const Turn&)>;

struct ConversationResult {
    Transcript transcript;
    UserModel model;
    std::vector<ModelEvent> events;
};

/// Runs prompt/response cycles until a terminal state. The caller decides whether to
/// persist the returned model.
inline ConversationResult run_conversation(const Catalog& catalog, const DialogueConfig& config,
                                           const MessageCatalog& messages, UserModel model, const MoveSource& source,
                                           Clock clock) {
    Conversation conv(catalog, config, messages, std::move(model), std::move(clock));
    while (!conv.finished()) {
        auto reply = source(conv.current());
        if (!reply) {
            conv.quit();
            break;
        }
        conv.respond(*reply);
    }
    return {conv.transcript(), conv.model(), conv.events()};
}

}  // namespace advisor
