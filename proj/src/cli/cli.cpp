#include "foldbox/cli.hpp"

#include "foldbox/analysis.hpp"
#include "foldbox/bridge.hpp"
#include "foldbox/codec.hpp"
#include "foldbox/semantics.hpp"
#include "foldbox/service.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace foldbox {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

NetDocument load_net(const std::string& path)
{
    return read_net_any(read_file(path));
}

const Net& natural(const NetDocument& doc)
{
    if (doc.integer) {
        throw UsageError("this command needs a natural-number net; integer nets only support validate and legalize");
    }
    return *doc.net;
}

void emit(std::ostream& out, const std::optional<std::string>& path, const std::string& text)
{
    if (path) {
        write_file(*path, text);
    } else {
        out << text;
    }
}

std::map<std::string, Predicate> document_predicates(const NetDocument& doc)
{
    std::map<std::string, Predicate> out;
    for (const auto& [name, text] : doc.predicates) {
        out.emplace(name, Predicate::parse(text, *doc.places()));
    }
    return out;
}

/// "t3" or "t3@1,0": a transition with an optional explicit token choice.
std::pair<GeneratorId, std::optional<std::vector<std::size_t>>> parse_firing(const Presentation& p,
                                                                            const std::string& text)
{
    const auto at = text.find('@');
    const auto name = text.substr(0, at);
    auto id = p.find_generator(name);
    if (!id) {
        throw UsageError("unknown transition \"" + name + "\"");
    }
    if (at == std::string::npos) {
        return {*id, std::nullopt};
    }
    std::vector<std::size_t> positions;
    std::stringstream ss(text.substr(at + 1));
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            positions.push_back(std::stoul(part, &used));
            if (used != part.size()) {
                throw std::invalid_argument(part);
            }
        } catch (const std::logic_error&) {
            throw UsageError("bad token position \"" + part + "\" in \"" + text + "\"");
        }
    }
    return {*id, positions};
}

// Session files for `step` -----------------------------------------------------

struct StepSession {
    NetDocument doc;
    PresentationRef presentation;
    History history;
};

std::string session_text(const StepSession& s)
{
    ordered_json j;
    j["net"] = ordered_json::parse(write_net_json(s.doc));
    auto initial = ordered_json::array();
    for (auto x : s.history.initial()) {
        initial.push_back(s.presentation->objects()->name(x));
    }
    j["initial"] = std::move(initial);
    auto log = ordered_json::array();
    for (const auto& r : s.history.log()) {
        log.push_back({{"transition", s.presentation->generator(r.label).name}, {"positions", r.positions}});
    }
    j["log"] = std::move(log);
    return j.dump(2) + "\n";
}

StepSession session_from_text(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("session file: ") + e.what());
    }
    if (!j.is_object() || !j.contains("net") || !j.contains("initial") || !j.contains("log")) {
        throw SchemaError("session file needs \"net\", \"initial\" and \"log\"");
    }
    auto doc = read_net_json(j["net"].dump());
    const auto pres = fold(natural(doc));
    ObString initial;
    for (const auto& n : j["initial"]) {
        const auto id = n.is_string() ? pres->objects()->find(n.get<std::string>()) : std::nullopt;
        if (!id) {
            throw SchemaError("session file: unknown place " + n.dump());
        }
        initial.push_back(*id);
    }
    std::vector<FiringRecord> log;
    for (const auto& r : j["log"]) {
        const auto id = pres->find_generator(r.value("transition", ""));
        if (!id || !r.contains("positions")) {
            throw SchemaError("session file: bad log entry " + r.dump());
        }
        log.push_back(FiringRecord{*id, r["positions"].get<std::vector<std::size_t>>()});
    }
    return StepSession{std::move(doc), pres, replay(pres, std::move(initial), log)};
}

std::string names(const Presentation& p, const std::vector<GeneratorId>& labels)
{
    std::string out;
    for (auto l : labels) {
        out += (out.empty() ? "" : ",") + p.generator(l).name;
    }
    return out;
}

void show_step_state(std::ostream& out, const StepSession& s)
{
    const auto& p = *s.presentation;
    const auto& h = s.history;
    out << "marking " << to_string(h.marking()) << "\n";
    out << "tokens";
    for (std::size_t k = 0; k < h.current().size(); ++k) {
        const auto past = token_history(h, k);
        out << "  [" << k << "] " << p.objects()->name(h.current()[k]);
        if (!past.empty()) {
            out << " via " << names(p, past);
        }
    }
    out << "\n";
    for (const auto& g : p.generators()) {
        const auto choices = valid_choices(h, g.id);
        if (choices.empty()) {
            continue;
        }
        out << "enabled " << g.name << " choices";
        for (const auto& c : choices) {
            out << " ";
            for (std::size_t i = 0; i < c.size(); ++i) {
                out << (i > 0 ? "," : "") << c[i];
            }
            if (c.empty()) {
                out << "-";
            }
        }
        out << "\n";
    }
}

int step_command(const std::string& net_path, const std::string& session_path, std::istream& in, std::ostream& out,
                 std::ostream& err)
{
    StepSession s = std::filesystem::exists(session_path) ? session_from_text(read_file(session_path)) : [&] {
        auto doc = load_net(net_path);
        const auto pres = fold(natural(doc));
        auto h = start_from_marking(pres, doc.marking->tokens());
        return StepSession{std::move(doc), pres, std::move(h)};
    }();
    write_file(session_path, session_text(s));
    show_step_state(out, s);
    std::string line;
    while (out << "> " << std::flush, std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cmd;
        ss >> cmd;
        if (cmd.empty()) {
            continue;
        }
        if (cmd == "quit" || cmd == "exit") {
            break;
        }
        try {
            if (cmd == "undo") {
                auto log = s.history.log();
                if (log.empty()) {
                    err << "nothing to undo\n";
                    continue;
                }
                log.pop_back();
                s.history = replay(s.presentation, s.history.initial(), log);
            } else if (cmd == "history") {
                out << print_term(s.history.term()) << "\n";
                continue;
            } else if (cmd == "show") {
            } else {
                if (cmd == "fire" && !(ss >> cmd)) {
                    err << "usage: fire <transition> [positions...]\n";
                    continue;
                }
                const auto id = s.presentation->find_generator(cmd);
                if (!id) {
                    err << "unknown transition \"" << cmd << "\"\n";
                    continue;
                }
                std::vector<std::size_t> positions;
                std::size_t k = 0;
                while (ss >> k) {
                    positions.push_back(k);
                }
                std::optional<std::vector<std::size_t>> choice;
                if (!positions.empty()) {
                    choice = positions;
                }
                s.history = fire_history(s.history, *id, choice);
            }
            write_file(session_path, session_text(s));
            show_step_state(out, s);
        } catch (const UsageError& e) {
            err << "error: " << e.what() << "\n";
        }
    }
    out << "\n";
    return exit_ok;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err)
{
    CLI::App app{"foldbox: Petri nets whose runs are morphisms of free symmetric monoidal categories", "foldbox"};
    app.require_subcommand(1);
    std::uint64_t seed = 20191015;
    app.add_option("--seed", seed, "Seed for randomized generation (also read from FOLDBOX_SEED)");

    std::string net_path;
    std::string in_path;
    std::optional<std::string> out_path;
    std::string binding_path;
    std::vector<std::string> predicates;
    std::vector<std::string> firings;
    std::string tokens_text;
    std::string session_path;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::string> log_path;
    std::optional<std::string> ui_dir;
    bool binary = false;
    bool reachability = false;

    auto* validate = app.add_subcommand("validate", "Check a net file (and optionally a fold binding)");
    validate->add_option("--net", net_path, "Net file (.pn.json or .pnz)")->required();
    validate->add_option("--binding", binding_path, "Fold binding file");

    auto* analyze = app.add_subcommand("analyze", "Reachability, deadlock, liveness and boundedness report");
    analyze->add_option("--net", net_path, "Net file")->required();
    analyze->add_option("--predicate", predicates, "Named predicate of the net file, or a predicate expression");

    auto* encode_cmd = app.add_subcommand("encode", "Net to zero-string");
    encode_cmd->add_option("--in", in_path, "Net file")->required();
    encode_cmd->add_option("--out", out_path, "Output file (default stdout)");
    encode_cmd->add_flag("--binary", binary, "Write unsigned LEB128 instead of text");

    auto* decode_cmd = app.add_subcommand("decode", "Zero-string to net JSON");
    decode_cmd->add_option("--in", in_path, "Zero-string file")->required();
    decode_cmd->add_option("--out", out_path, "Output file (default stdout)");
    decode_cmd->add_flag("--binary", binary, "Read unsigned LEB128 instead of text");

    auto* fold_cmd = app.add_subcommand("fold", "Net to the presentation of its category of executions");
    fold_cmd->add_option("--net", net_path, "Net file")->required();
    fold_cmd->add_option("--out", out_path, "Output file (default stdout)");

    auto* unfold_cmd = app.add_subcommand("unfold", "Presentation JSON to net JSON");
    unfold_cmd->add_option("--in", in_path, "Presentation file")->required();
    unfold_cmd->add_option("--out", out_path, "Output file (default stdout)");

    auto* step = app.add_subcommand("step", "Interactive firing with token choices, persisted to a session file");
    step->add_option("--net", net_path, "Net file (used when the session file does not exist)");
    step->add_option("--session", session_path, "Session file")->required();

    auto* run = app.add_subcommand("run", "Fire transitions and evaluate the history under a fold binding");
    run->add_option("--net", net_path, "Net file")->required();
    run->add_option("--binding", binding_path, "Fold binding file")->required();
    run->add_option("--tokens", tokens_text, "JSON array of values for the initial tokens")->required();
    run->add_option("--fire", firings, "Transition to fire, optionally name@pos,pos");

    auto* dot = app.add_subcommand("export-dot", "Graphviz export of a net or its reachability graph");
    dot->add_option("--net", net_path, "Net file")->required();
    dot->add_option("--out", out_path, "Output file (default stdout)");
    dot->add_flag("--reachability", reachability, "Export the reachability graph instead of the net");

    auto* serve_cmd = app.add_subcommand("serve", "HTTP/JSON API");
    serve_cmd->add_option("--host", host, "Bind address");
    serve_cmd->add_option("--port", port, "Port");
    serve_cmd->add_option("--log", log_path, "Append-only session log, replayed at startup");
    serve_cmd->add_option("--ui-dir", ui_dir, "Static files served under /ui");

    std::vector<std::string> argv_storage{"foldbox"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) {
        argv.push_back(a.data());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_user_error;
    }
    if (const char* env = std::getenv("FOLDBOX_SEED"); env != nullptr && app.count("--seed") == 0) {
        try {
            seed = std::stoull(env);
        } catch (const std::logic_error&) {
            err << "error: FOLDBOX_SEED is not a number\n";
            return exit_user_error;
        }
    }

    try {
        if (validate->parsed()) {
            const auto doc = load_net(net_path);
            ordered_json j{{"valid", true},
                           {"places", doc.places()->size()},
                           {"transitions", doc.integer ? doc.int_net->transition_count() : doc.net->transition_count()},
                           {"integer", doc.integer}};
            if (!binding_path.empty()) {
                const auto b = read_binding_json(read_file(binding_path), fold(natural(doc)));
                validate_binding(b);
                j["binding"] = "valid";
            }
            out << j.dump() << "\n";
        } else if (analyze->parsed()) {
            const auto doc = load_net(net_path);
            const auto& net = natural(doc);
            const auto limits = limits_from_env();
            if (predicates.empty()) {
                out << analysis_report(net, *doc.marking, document_predicates(doc), limits).dump(2) << "\n";
            } else {
                std::map<std::string, Predicate> chosen;
                for (const auto& p : predicates) {
                    const auto it = doc.predicates.find(p);
                    chosen.emplace(p, Predicate::parse(it == doc.predicates.end() ? p : it->second, *net.places()));
                }
                const auto g = explore(net, *doc.marking, limits);
                ordered_json j = ordered_json::object();
                for (const auto& [name, pred] : chosen) {
                    const auto r = check_predicate(g, pred);
                    ordered_json jp{{"predicate", pred.text()}};
                    jp["status"] =
                        r.holds == Verdict::yes ? "holds" : (r.holds == Verdict::no ? "violated" : "unknown");
                    if (r.holds == Verdict::no) {
                        jp["counterexample"] = path_json(net, r.counterexample);
                        jp["marking"] = marking_json(r.violating->tokens());
                    }
                    j[name] = std::move(jp);
                }
                out << j.dump(2) << "\n";
            }
        } else if (encode_cmd->parsed()) {
            const auto doc = load_net(in_path);
            const auto z = encode(*fold(natural(doc)));
            emit(out, out_path, binary ? encode_leb128(z) : format_zero_string(z) + "\n");
        } else if (decode_cmd->parsed()) {
            const auto text = read_file(in_path);
            const auto pres = binary ? decode(decode_leb128(text)) : decode_text(text);
            const auto net = presentation_to_net(*pres);
            emit(out, out_path, write_net_json(make_document(net, empty_marking(*net))));
        } else if (fold_cmd->parsed()) {
            const auto doc = load_net(net_path);
            emit(out, out_path, presentation_json(*fold(natural(doc))).dump(2) + "\n");
        } else if (unfold_cmd->parsed()) {
            const auto net = unfold(*presentation_from_json(read_file(in_path)));
            emit(out, out_path, write_net_json(make_document(net, empty_marking(*net))));
        } else if (step->parsed()) {
            if (net_path.empty() && !std::filesystem::exists(session_path)) {
                throw UsageError("--net is required when the session file does not exist yet");
            }
            return step_command(net_path, session_path, in, out, err);
        } else if (run->parsed()) {
            const auto doc = load_net(net_path);
            const auto pres = fold(natural(doc));
            const auto binding = read_binding_json(read_file(binding_path), pres);
            validate_binding(binding);
            auto h = start_from_marking(pres, doc.marking->tokens());
            for (const auto& f : firings) {
                const auto [id, choice] = parse_firing(*pres, f);
                h = fire_history(h, id, choice);
            }
            json tokens;
            try {
                tokens = json::parse(tokens_text);
            } catch (const json::parse_error& e) {
                throw SchemaError(std::string("--tokens: ") + e.what());
            }
            const auto inputs = values_from_json(tokens, types_of(binding, h.initial()));
            out << values_to_json(run_history(binding, h, inputs)).dump() << "\n";
        } else if (dot->parsed()) {
            const auto doc = load_net(net_path);
            const auto& net = natural(doc);
            emit(out, out_path,
                 reachability ? reachability_dot(net, explore(net, *doc.marking, limits_from_env()))
                              : to_dot(net, &*doc.marking));
        } else if (serve_cmd->parsed()) {
            Service service(log_path);
            const auto replayed = service.recover();
            err << "foldbox: replayed " << replayed << " logged events; listening on " << host << ":" << port << "\n";
            return serve(service, host, port, ui_dir);
        }
        return exit_ok;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return exit_user_error;
    } catch (const FunctionFailure& e) {
        err << "error: " << e.what() << "\n";
        return exit_user_error;
    } catch (const Overflow& e) {
        err << "error: " << e.what() << "\n";
        return exit_user_error;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return exit_internal;
    }
}

} // namespace foldbox
