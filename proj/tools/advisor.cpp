// advisor: chat with, simulate, or serve the adaptive place advisor.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>

#include "advisor.hpp"
#include "advisor/http.hpp"

namespace {

using namespace advisor;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;

/// Flags shared by every subcommand. Only flags the user actually passed override the
/// config file.
struct EngineFlags {
    std::string config_path;
    std::string catalog, data_dir, messages;
    double similarity_threshold = 0, learn_rate = 0;
    std::size_t presentation_threshold = 0;
    std::string constrain_strategy, relax_strategy;
    bool no_adapt = false;
    bool diversity = false;

    CLI::Option *o_catalog{}, *o_data{}, *o_messages{}, *o_sim{}, *o_pres{}, *o_rate{}, *o_cs{}, *o_rs{};

    void add_to(CLI::App* app) {
        app->add_option("--config", config_path, "JSON config file (flags override it)")->check(CLI::ExistingFile);
        o_catalog = app->add_option("--catalog", catalog, "catalog directory holding schema.json and items.csv");
        o_data = app->add_option("--data", data_dir, "data directory for user models");
        o_messages = app->add_option("--messages", messages, "prompt wording file");
        o_sim = app->add_option("--similarity-threshold", similarity_threshold);
        o_pres = app->add_option("--presentation-threshold", presentation_threshold);
        o_rate = app->add_option("--learn-rate", learn_rate);
        o_cs = app->add_option("--constrain-strategy", constrain_strategy, "by-weight or by-entropy");
        o_rs = app->add_option("--relax-strategy", relax_strategy, "by-weight or by-size");
        app->add_flag("--no-adapt", no_adapt, "never update or persist user models");
        app->add_flag("--diversity", diversity, "enable diversity damping");
    }

    EngineConfig resolve() const {
        EngineConfig cfg = config_path.empty() ? EngineConfig{} : load_config_file(config_path);
        if (o_catalog->count()) cfg.catalog_dir = catalog;
        if (o_data->count()) cfg.data_dir = data_dir;
        if (o_messages->count()) cfg.messages_path = messages;
        if (o_sim->count()) cfg.dialogue.similarity.similarity_threshold = similarity_threshold;
        if (o_pres->count()) cfg.dialogue.similarity.presentation_threshold = presentation_threshold;
        if (o_rate->count()) cfg.dialogue.policy.learn_rate = learn_rate;
        if (o_cs->count()) cfg.dialogue.constrain_strategy = parse_constrain_strategy(constrain_strategy);
        if (o_rs->count()) cfg.dialogue.relax_strategy = parse_relax_strategy(relax_strategy);
        if (no_adapt) cfg.adapt = false;
        if (diversity) cfg.dialogue.diversity.enabled = true;
        try {
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        return cfg;
    }
};

MessageCatalog load_messages(const EngineConfig& cfg) {
    return cfg.messages_path.empty() ? MessageCatalog{} : MessageCatalog::from_file(cfg.messages_path);
}

void print_turn(std::ostream& out, const Turn& t) {
    out << "System: " << t.prompt << "\n";
    if (t.card) out << "        " << t.card->name << "\n        " << t.card->address << "\n        " << t.card->phone << "\n";
}

int run_chat(const EngineFlags& flags, const std::string& user) {
    const EngineConfig cfg = flags.resolve();
    if (!valid_user_id(user)) throw ConfigError("user id must match [A-Za-z0-9_.-]{1,64}");
    const Catalog catalog = load_catalog_dir(cfg.catalog_dir);
    const MessageCatalog messages = load_messages(cfg);
    ModelStore store(cfg.data_dir, catalog.schema(), cfg.dialogue.policy, catalog.item_ids());
    const UserModel initial = store.load_or_init(user);

    Conversation conv(catalog, cfg.dialogue, messages, initial, wall_clock_seconds);
    print_turn(std::cout, conv.current());
    std::string line;
    while (!conv.finished()) {
        std::cout << "> " << std::flush;
        if (!std::getline(std::cin, line)) {
            conv.quit();
            break;
        }
        const Turn& t = conv.respond(line);
        if (!conv.finished()) print_turn(std::cout, t);
    }
    std::cout << "System: " << conv.transcript().closing << "\n";
    if (cfg.adapt && !conv.events().empty()) {
        std::lock_guard<std::mutex> g(store.lock_for(user));
        UserModel latest = store.load_or_init(user);
        for (const auto& e : conv.events()) apply_event(latest, e, cfg.dialogue.policy);
        store.save(latest);
    }
    return kOk;
}

nlohmann::json transcript_json(const SessionLog& log) {
    nlohmann::json turns = nlohmann::json::array();
    for (const auto& t : log.transcript.turns) {
        nlohmann::json j{{"system", to_json(t.system)}, {"prompt", t.prompt}};
        if (t.user_text) j["user"] = *t.user_text;
        if (t.user_move) j["user_move"] = to_json(*t.user_move);
        turns.push_back(std::move(j));
    }
    return {{"user_id", log.record.user_id},
            {"condition", std::string(to_string(log.record.condition))},
            {"session_index", log.record.session_index},
            {"turns", std::move(turns)},
            {"terminal", log.transcript.terminal ? std::string(to_string(*log.transcript.terminal)) : ""},
            {"closing", log.transcript.closing}};
}

struct SimulateFlags {
    std::size_t users = 0, sessions = 0;
    std::uint64_t seed = 0;
    std::string out, transcripts, condition;
    bool both = false;
    CLI::Option *o_users{}, *o_sessions{}, *o_seed{};
};

int run_simulate(const EngineFlags& flags, const SimulateFlags& sf) {
    EngineConfig cfg = flags.resolve();
    const Catalog catalog = load_catalog_dir(cfg.catalog_dir);
    const MessageCatalog messages = load_messages(cfg);
    ExperimentConfig ex;
    ex.n_users = sf.o_users->count() ? sf.users : cfg.sim_users;
    ex.n_sessions = sf.o_sessions->count() ? sf.sessions : cfg.sim_sessions;
    ex.seed = sf.o_seed->count() ? sf.seed : cfg.sim_seed;
    ex.engine = cfg.dialogue;
    ex.population = cfg.population;
    ex.adapt = cfg.adapt;
    if (sf.both || sf.condition.empty())
        ex.conditions = {Condition::Modeling, Condition::Control};
    else if (sf.condition == "modeling")
        ex.conditions = {Condition::Modeling};
    else if (sf.condition == "control")
        ex.conditions = {Condition::Control};
    else
        throw CLI::ValidationError("--condition", "must be modeling or control");

    const auto logs = run_experiment_logged(ex, catalog, messages);
    std::vector<SessionRecord> records;
    for (const auto& l : logs) records.push_back(l.record);
    if (!sf.out.empty()) {
        std::ofstream f(sf.out);
        if (!f) throw StorageError("cannot write " + sf.out);
        write_metrics_csv(f, records);
    } else {
        write_metrics_csv(std::cout, records);
    }
    if (!sf.transcripts.empty()) {
        std::ofstream f(sf.transcripts);
        if (!f) throw StorageError("cannot write " + sf.transcripts);
        for (const auto& l : logs) f << transcript_json(l).dump() << "\n";
    }
    write_summary(sf.out.empty() ? std::cerr : std::cout, summarize(records));
    return kOk;
}

httplib::Server* g_server = nullptr;

int run_serve(const EngineFlags& flags, int port, bool port_given, const std::string& bind) {
    EngineConfig cfg = flags.resolve();
    if (port_given) cfg.port = port;
    if (!bind.empty()) cfg.bind_address = bind;
    const Catalog catalog = load_catalog_dir(cfg.catalog_dir);
    SessionService service(catalog, cfg.dialogue, load_messages(cfg), {cfg.data_dir, cfg.adapt, wall_clock_seconds});
    httplib::Server server;
    install_routes(server, service);
    g_server = &server;
    std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
    std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
    std::cerr << "advisor: serving " << catalog.size() << " items on http://" << cfg.bind_address << ":" << cfg.port
              << std::endl;
    if (!server.listen(cfg.bind_address, cfg.port)) {
        std::cerr << "advisor: cannot listen on " << cfg.bind_address << ":" << cfg.port << "\n";
        return kDataError;
    }
    return kOk;
}

int run_gen_catalog(std::size_t n_items, std::uint64_t seed, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const nlohmann::json schema_doc = restaurant_schema_json();
    const AttributeSchema schema = parse_schema(schema_doc);
    const auto items = generate_items(schema, {n_items, seed});
    {
        std::ofstream f(out_dir + "/schema.json");
        if (!f) throw StorageError("cannot write " + out_dir + "/schema.json");
        f << schema_doc.dump(2) << "\n";
    }
    {
        std::ofstream f(out_dir + "/items.csv");
        if (!f) throw StorageError("cannot write " + out_dir + "/items.csv");
        write_items_csv(f, schema, items);
    }
    std::cerr << "advisor: wrote " << items.size() << " items to " << out_dir << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive place advisor: a conversational recommender that learns each user's preferences"};
    app.require_subcommand(1);

    EngineFlags chat_flags, sim_flags, serve_flags;

    std::string user;
    auto* chat = app.add_subcommand("chat", "interactive conversation on the terminal");
    chat->add_option("--user", user, "user id")->required();
    chat_flags.add_to(chat);

    SimulateFlags sf;
    auto* sim = app.add_subcommand("simulate", "run simulated users and report metrics");
    sf.o_users = sim->add_option("--users", sf.users)->check(CLI::PositiveNumber);
    sf.o_sessions = sim->add_option("--sessions", sf.sessions)->check(CLI::PositiveNumber);
    sf.o_seed = sim->add_option("--seed", sf.seed);
    sim->add_option("--out", sf.out, "metrics CSV path (default: stdout)");
    sim->add_option("--transcripts", sf.transcripts, "write one JSON transcript per line");
    auto* both = sim->add_flag("--both-conditions", sf.both, "run modeling and control");
    sim->add_option("--condition", sf.condition, "modeling or control")
        ->check(CLI::IsMember({"modeling", "control"}))
        ->excludes(both);
    sim_flags.add_to(sim);

    int port = 8080;
    std::string bind;
    auto* serve = app.add_subcommand("serve", "run the HTTP session service");
    auto* port_opt = serve->add_option("--port", port)->check(CLI::Range(0, 65535));
    serve->add_option("--bind", bind, "listen address");
    serve_flags.add_to(serve);

    std::size_t n_items = 1900;
    std::uint64_t gen_seed = 7;
    std::string out_dir = "data";
    auto* gen = app.add_subcommand("gen-catalog", "write a synthetic restaurant catalog");
    gen->add_option("--items", n_items)->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed);
    gen->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*chat) return run_chat(chat_flags, user);
        if (*sim) return run_simulate(sim_flags, sf);
        if (*serve) return run_serve(serve_flags, port, port_opt->count() > 0, bind);
        if (*gen) return run_gen_catalog(n_items, gen_seed, out_dir);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "advisor: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        std::cerr << "advisor: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "advisor: " << e.what() << "\n";
        return kDataError;
    }
    return kUsage;
}
