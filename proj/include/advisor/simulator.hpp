#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "advisor/catalog.hpp"
#include "advisor/csv.hpp"
#include "advisor/dialogue.hpp"
#include "advisor/messages.hpp"
#include "advisor/stats.hpp"
#include "advisor/user_model.hpp"

namespace advisor {

/// A scripted stand-in for a human subject. Importance and value preferences are hidden
/// from the system; the user answers according to them.
struct SimulatedUser {
    std::string id;
    std::uint64_t seed = 0;
    Distribution importance;                       // per attribute
    std::map<std::string, Distribution> value_prefs;  // per attribute, per value
    double care_threshold = 0.08;  // below this importance the user answers "don't care"
    double accept_noise = 0.0;

    double median_importance() const {
        std::vector<double> v;
        for (const auto& [a, p] : importance) v.push_back(p);
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }

    void validate() const {
        auto check = [](const Distribution& d, const std::string& what) {
            double total = 0.0;
            for (const auto& [k, p] : d) total += p;
            if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument(what + " is not normalized");
        };
        check(importance, "importance");
        for (const auto& [a, d] : value_prefs) check(d, "value preferences of '" + a + "'");
        if (!(care_threshold > 0.0 && care_threshold < 1.0)) throw std::invalid_argument("care_threshold outside (0,1)");
        if (!(accept_noise >= 0.0 && accept_noise < 1.0)) throw std::invalid_argument("accept_noise outside [0,1)");
    }
};

/// Knobs for drawing a population of simulated users.
struct PopulationParams {
    double importance_alpha = 1.0;  // symmetric Dirichlet concentration for attribute importance
    double dominance_boost = 6.0;   // extra mass given to each user's dominant attributes
    int min_dominant = 1;
    int max_dominant = 2;
    double value_alpha = 0.3;  // concentration for value preferences (small = peaked tastes)
    double care_threshold = 0.08;
    double accept_noise = 0.1;
};

namespace detail {

inline Distribution dirichlet(std::mt19937_64& rng, const std::vector<std::string>& keys, double alpha) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    Distribution d;
    double total = 0.0;
    for (const auto& k : keys) {
        const double g = std::max(gamma(rng), 1e-12);
        d[k] = g;
        total += g;
    }
    for (auto& [k, p] : d) p /= total;
    return d;
}

inline void normalize(Distribution& d) {
    double total = 0.0;
    for (const auto& [k, p] : d) total += p;
    for (auto& [k, p] : d) p /= total;
}

template <class Map>
const std::string& sample_key(std::mt19937_64& rng, const Map& dist) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double r = u(rng);
    for (const auto& [k, p] : dist) {
        r -= p;
        if (r <= 0.0) return k;
    }
    return dist.rbegin()->first;
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                      static_cast<std::uint32_t>(b >> 32)};
    std::uint64_t out[1];
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    return out[0];
}

}  // namespace detail

inline SimulatedUser make_simulated_user(const AttributeSchema& schema, const PopulationParams& pp, std::uint64_t seed,
                                         std::string id) {
    std::mt19937_64 rng(seed);
    SimulatedUser u;
    u.id = std::move(id);
    u.seed = seed;
    std::vector<std::string> names;
    for (const auto& a : schema.attributes()) names.push_back(a.name);
    u.importance = detail::dirichlet(rng, names, pp.importance_alpha);
    std::uniform_int_distribution<int> how_many(pp.min_dominant, pp.max_dominant);
    std::vector<std::string> shuffled = names;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const int k = std::min<int>(how_many(rng), static_cast<int>(shuffled.size()));
    for (int i = 0; i < k; ++i) u.importance[shuffled[static_cast<std::size_t>(i)]] += pp.dominance_boost / names.size();
    detail::normalize(u.importance);
    for (const auto& a : schema.attributes()) u.value_prefs[a.name] = detail::dirichlet(rng, a.values, pp.value_alpha);
    u.care_threshold = pp.care_threshold;
    u.accept_noise = pp.accept_noise;
    return u;
}

/// One session's worth of a simulated user's behavior. The values the user wants are
/// drawn once per session, so answers stay consistent within a conversation.
class SimSession {
public:
    SimSession(const SimulatedUser& user, const Catalog& catalog, std::uint64_t session_seed)
        : user_(user), catalog_(catalog), rng_(session_seed), median_(user.median_importance()) {
        for (const auto& a : catalog.schema().attributes())
            wanted_[a.name] = detail::sample_key(rng_, user.value_prefs.at(a.name));
    }

    /// The text the user says in reply to `move`.
    std::string respond(const SystemMove& move) {
        switch (move.act) {
            case SystemAct::AttemptConstrain: {
                const std::string& a = *move.attribute;
                if (user_.importance.at(a) < user_.care_threshold) return "I don't care";
                return display_value(wanted_.at(a));
            }
            case SystemAct::SuggestRelax:
                return user_.importance.at(*move.attribute) < median_ ? "yes" : "no";
            case SystemAct::RecommendItem: {
                const Item* item = catalog_.find(*move.item_id);
                const double p = (1.0 - user_.accept_noise) * match(*item);
                std::uniform_real_distribution<double> u(0.0, 1.0);
                return u(rng_) < p ? "yes" : "what else";
            }
            case SystemAct::QuitStartMod:
            case SystemAct::ProvideValues:
            case SystemAct::Clarify:
                return "quit";
        }
        return "quit";
    }

    /// Importance-weighted agreement between an item and what the user wants, in [0,1].
    /// An attribute scores 1 when the item has the wanted or the favorite value, otherwise
    /// the value's preference relative to the favorite.
    double match(const Item& item) const {
        double m = 0.0;
        const auto& attrs = catalog_.schema().attributes();
        for (std::size_t i = 0; i < attrs.size(); ++i) {
            const std::string& a = attrs[i].name;
            const Distribution& prefs = user_.value_prefs.at(a);
            double top = 0.0;
            for (const auto& [v, p] : prefs) top = std::max(top, p);
            const std::string& v = item.values[i];
            const double s = (v == wanted_.at(a) || prefs.at(v) >= top) ? 1.0 : prefs.at(v) / top;
            m += user_.importance.at(a) * s;
        }
        return std::min(1.0, m);
    }

    const std::map<std::string, std::string>& wanted() const { return wanted_; }

private:
    const SimulatedUser& user_;
    const Catalog& catalog_;
    std::mt19937_64 rng_;
    double median_;
    std::map<std::string, std::string> wanted_;
};

/// Text reply of `user` to one system move (see SimSession).
inline std::string sim_respond(SimSession& session, const SystemMove& move) { return session.respond(move); }

// ---------------------------------------------------------------------------
// Metrics

enum class Condition { Modeling, Control };

inline std::string_view to_string(Condition c) { return c == Condition::Modeling ? "modeling" : "control"; }

struct SessionRecord {
    std::string user_id;
    Condition condition = Condition::Modeling;
    std::size_t session_index = 1;
    std::size_t interactions = 0;
    std::size_t rejections = 0;       // "don't care" answers to ATTEMPT-CONSTRAIN
    std::size_t constrain_prompts = 0;  // ATTEMPT-CONSTRAIN prompts answered
    std::size_t clarifications = 0;
    bool first_item_accepted = false;
    std::size_t interactions_before_first_item = 0;
    Terminal terminal = Terminal::Quit;

    friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

/// Counts prompt/response cycles, "don't care" answers, and whether the first presented
/// item was accepted. Throws std::invalid_argument for an unfinished transcript.
inline SessionRecord measure_session(const Transcript& t, const std::string& user_id = {},
                                     Condition condition = Condition::Modeling, std::size_t session_index = 1) {
    if (!t.terminal) throw std::invalid_argument("measure_session: transcript has not terminated");
    SessionRecord r;
    r.user_id = user_id;
    r.condition = condition;
    r.session_index = session_index;
    r.terminal = *t.terminal;
    bool seen_item = false;
    for (const auto& turn : t.turns) {
        if (!turn.user_text) continue;
        ++r.interactions;
        const SystemAct act = turn.system.act;
        if (act == SystemAct::Clarify) ++r.clarifications;
        if (act == SystemAct::AttemptConstrain) {
            ++r.constrain_prompts;
            if (turn.user_move && turn.user_move->act == UserAct::Reject) ++r.rejections;
        }
        if (act == SystemAct::RecommendItem && !seen_item) {
            seen_item = true;
            r.first_item_accepted = turn.user_move && turn.user_move->act == UserAct::Accept;
        }
        if (!seen_item) ++r.interactions_before_first_item;
    }
    return r;
}

inline void write_metrics_csv(std::ostream& out, const std::vector<SessionRecord>& records) {
    out << "user_id,condition,session_index,interactions,rejections,first_item_accepted,"
           "interactions_before_first_item,terminal\n";
    for (const auto& r : records)
        write_csv_row(out, {r.user_id, std::string(to_string(r.condition)), std::to_string(r.session_index),
                            std::to_string(r.interactions), std::to_string(r.rejections),
                            r.first_item_accepted ? "1" : "0", std::to_string(r.interactions_before_first_item),
                            std::string(to_string(r.terminal))});
}

// ---------------------------------------------------------------------------
// Experiment

struct ExperimentConfig {
    std::size_t n_users = 20;
    std::size_t n_sessions = 15;
    std::vector<Condition> conditions{Condition::Modeling, Condition::Control};
    std::uint64_t seed = 42;
    DialogueConfig engine{};
    PopulationParams population{};
    bool adapt = true;  // false forces control behavior in every condition
    Timestamp start_time = 1'000'000'000;
    Timestamp session_gap = 6 * 3600;  // simulated time between a user's sessions

    void validate() const {
        if (n_users < 1 || n_sessions < 1) throw std::invalid_argument("experiment needs at least one user and session");
        engine.validate();
    }
};

struct SessionLog {
    SessionRecord record;
    Transcript transcript;
};

/// Runs every user through n_sessions conversations per condition. Under modeling the
/// updated user model carries over to the next session; under control each session
/// starts from the initial model.
inline std::vector<SessionLog> run_experiment_logged(const ExperimentConfig& cfg, const Catalog& catalog,
                                                     const MessageCatalog& messages = MessageCatalog{}) {
    cfg.validate();
    std::vector<SessionLog> logs;
    const auto item_ids = catalog.item_ids();
    for (std::size_t u = 0; u < cfg.n_users; ++u) {
        const std::string uid = "sim" + std::to_string(u + 1);
        const std::uint64_t user_seed = detail::mix_seed(cfg.seed, u + 1);
        const SimulatedUser user = make_simulated_user(catalog.schema(), cfg.population, user_seed, uid);
        for (Condition cond : cfg.conditions) {
            const UserModel initial = init_user_model(uid, catalog.schema(), cfg.engine.policy, item_ids);
            UserModel model = initial;
            for (std::size_t s = 1; s <= cfg.n_sessions; ++s) {
                SimSession sim(user, catalog, detail::mix_seed(user_seed, s));
                Timestamp clock_now = cfg.start_time + static_cast<Timestamp>(s) * cfg.session_gap;
                auto clock = [clock_now]() mutable { return clock_now++; };
                auto source = [&sim](const Turn& t) -> std::optional<std::string> { return sim.respond(t.system); };
                ConversationResult res = run_conversation(catalog, cfg.engine, messages, model, source, clock);
                if (cond == Condition::Modeling && cfg.adapt) model = std::move(res.model);
                logs.push_back({measure_session(res.transcript, uid, cond, s), std::move(res.transcript)});
            }
        }
    }
    std::stable_sort(logs.begin(), logs.end(), [](const SessionLog& a, const SessionLog& b) {
        if (a.record.condition != b.record.condition) return a.record.condition < b.record.condition;
        if (a.record.user_id != b.record.user_id) return a.record.user_id < b.record.user_id;
        return a.record.session_index < b.record.session_index;
    });
    return logs;
}

inline std::vector<SessionRecord> run_experiment(const ExperimentConfig& cfg, const Catalog& catalog,
                                                 const MessageCatalog& messages = MessageCatalog{}) {
    std::vector<SessionRecord> out;
    for (auto& log : run_experiment_logged(cfg, catalog, messages)) out.push_back(std::move(log.record));
    return out;
}

// ---------------------------------------------------------------------------
// Summary

struct ConditionSummary {
    Condition condition = Condition::Modeling;
    std::vector<double> mean_interactions;  // by session index (0-based)
    std::vector<double> mean_before_first_item;
    std::vector<double> rejection_rate;
    std::vector<double> hit_rate;
    std::vector<double> user_slopes;  // per-user OLS slope of interactions over sessions
    double mean_slope = 0.0;
    double mean_before_first_item_slope = 0.0;
    LineFit before_first_item_fit{};
};

struct ExperimentSummary {
    std::vector<ConditionSummary> conditions;
    std::optional<SlopeComparison> comparison;  // modeling vs control slopes

    const ConditionSummary* find(Condition c) const {
        for (const auto& s : conditions)
            if (s.condition == c) return &s;
        return nullptr;
    }
};

/// Fraction of sessions in [first, last] (1-based, inclusive) whose first item was accepted.
inline double hit_rate(const std::vector<SessionRecord>& records, Condition c, std::size_t first, std::size_t last) {
    std::size_t hits = 0, n = 0;
    for (const auto& r : records)
        if (r.condition == c && r.session_index >= first && r.session_index <= last) {
            ++n;
            hits += r.first_item_accepted ? 1 : 0;
        }
    return n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
}

inline ExperimentSummary summarize(const std::vector<SessionRecord>& records) {
    ExperimentSummary out;
    for (Condition c : {Condition::Modeling, Condition::Control}) {
        std::map<std::string, std::vector<std::pair<double, double>>> per_user;
        std::map<std::size_t, std::vector<const SessionRecord*>> by_session;
        for (const auto& r : records)
            if (r.condition == c) {
                per_user[r.user_id].emplace_back(static_cast<double>(r.session_index),
                                                 static_cast<double>(r.interactions));
                by_session[r.session_index].push_back(&r);
            }
        if (per_user.empty()) continue;
        ConditionSummary cs;
        cs.condition = c;
        std::vector<std::pair<double, double>> before_points;
        for (const auto& [s, rs] : by_session) {
            double inter = 0, before = 0, rej = 0, asked = 0, hits = 0;
            for (const auto* r : rs) {
                inter += static_cast<double>(r->interactions);
                before += static_cast<double>(r->interactions_before_first_item);
                rej += static_cast<double>(r->rejections);
                asked += static_cast<double>(r->constrain_prompts);
                hits += r->first_item_accepted ? 1.0 : 0.0;
            }
            const double n = static_cast<double>(rs.size());
            cs.mean_interactions.push_back(inter / n);
            cs.mean_before_first_item.push_back(before / n);
            cs.rejection_rate.push_back(asked > 0 ? rej / asked : 0.0);
            cs.hit_rate.push_back(hits / n);
            before_points.emplace_back(static_cast<double>(s), before / n);
        }
        for (const auto& [uid, pts] : per_user)
            if (pts.size() >= 2) cs.user_slopes.push_back(fit_regression(pts).slope);
        if (!cs.user_slopes.empty()) cs.mean_slope = mean_of(cs.user_slopes);
        if (before_points.size() >= 2) {
            cs.before_first_item_fit = fit_regression(before_points);
            cs.mean_before_first_item_slope = cs.before_first_item_fit.slope;
        }
        out.conditions.push_back(std::move(cs));
    }
    const auto* m = out.find(Condition::Modeling);
    const auto* ctl = out.find(Condition::Control);
    if (m && ctl && m->user_slopes.size() >= 2 && ctl->user_slopes.size() >= 2)
        out.comparison = compare_slopes(m->user_slopes, ctl->user_slopes);
    return out;
}

inline void write_summary(std::ostream& out, const ExperimentSummary& s) {
    out << std::fixed << std::setprecision(3);
    for (const auto& cs : s.conditions) {
        out << "condition: " << to_string(cs.condition) << "\n";
        out << "  session  interactions  before_first_item  rejection_rate  hit_rate\n";
        for (std::size_t i = 0; i < cs.mean_interactions.size(); ++i)
            out << "  " << std::setw(7) << i + 1 << "  " << std::setw(12) << cs.mean_interactions[i] << "  "
                << std::setw(17) << cs.mean_before_first_item[i] << "  " << std::setw(14) << cs.rejection_rate[i]
                << "  " << std::setw(8) << cs.hit_rate[i] << "\n";
        out << "  mean per-user slope (interactions/session): " << cs.mean_slope << "\n";
        out << "  slope of mean interactions before first item: " << cs.mean_before_first_item_slope << "\n";
    }
    if (s.comparison) {
        out << "slope difference (modeling - control): " << s.comparison->difference << "\n";
        out << "one-sided Welch t = " << s.comparison->t << ", df = " << s.comparison->df
            << ", p = " << std::setprecision(4) << s.comparison->p_value << "\n";
    }
}

}  // namespace advisor
