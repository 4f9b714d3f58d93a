#include "foldbox/service.hpp"

#include "foldbox/analysis.hpp"
#include "foldbox/bridge.hpp"
#include "foldbox/codec.hpp"
#include "foldbox/semantics.hpp"

#include <json.hpp>

#include <fstream>
#include <regex>
#include <sstream>

namespace foldbox {

using nlohmann::json;
using nlohmann::ordered_json;

struct Session {
    std::mutex mutex;
    std::string id;
    json request;
    NetDocument doc;
    PresentationRef presentation;
    std::optional<History> history;
    std::optional<IntMarking> int_initial;
    std::vector<TransitionId> int_log;
};

namespace {

class HttpError : public std::runtime_error {
public:
    HttpError(int status, const std::string& what) : std::runtime_error(what), status(status) {}
    int status;
};

ServiceResponse reply(int status, const ordered_json& body)
{
    return ServiceResponse{status, body.dump()};
}

ServiceResponse error_reply(int status, const std::string& kind, const std::string& message)
{
    return reply(status, ordered_json{{"error", kind}, {"message", message}});
}

json parse_body(const std::string& body)
{
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) {
        return json::object();
    }
    try {
        auto j = json::parse(body);
        if (!j.is_object()) {
            throw HttpError(400, "request body must be a JSON object");
        }
        return j;
    } catch (const json::parse_error& e) {
        throw HttpError(400, std::string("invalid JSON body: ") + e.what());
    }
}

ordered_json names_of(const Universe& u, const ObString& w)
{
    auto j = ordered_json::array();
    for (auto s : w) {
        j.push_back(u.name(s));
    }
    return j;
}

std::string transition_name(const Presentation& p, GeneratorId id)
{
    const auto& g = p.generator(id);
    return g.name.empty() ? "t" + std::to_string(id.value) : g.name;
}

ordered_json labels_json(const Presentation& p, const std::vector<GeneratorId>& labels)
{
    auto j = ordered_json::array();
    for (auto l : labels) {
        j.push_back(transition_name(p, l));
    }
    return j;
}

ordered_json tokens_json(const History& h)
{
    const auto& p = *h.presentation();
    auto j = ordered_json::array();
    const auto& cod = h.current();
    for (std::size_t k = 0; k < cod.size(); ++k) {
        j.push_back({{"position", k},
                     {"place", p.objects()->name(cod[k])},
                     {"history", labels_json(p, token_history(h, k))}});
    }
    return j;
}

ordered_json log_json(const Presentation& p, const std::vector<FiringRecord>& log)
{
    auto j = ordered_json::array();
    for (const auto& r : log) {
        j.push_back({{"transition", transition_name(p, r.label)}, {"label", r.label.value}, {"positions", r.positions}});
    }
    return j;
}

ordered_json int_marking_json(const Universe& u, const IntMarking& m)
{
    ordered_json j = ordered_json::object();
    for (auto p : u.symbols()) {
        if (m[p] != 0) {
            j[u.name(p)] = m[p];
        }
    }
    return j;
}

ordered_json state_json(const Session& s)
{
    ordered_json j;
    j["id"] = s.id;
    if (s.doc.integer) {
        const auto& net = *s.doc.int_net;
        const auto m = int_fire_all(net, *s.int_initial, s.int_log);
        j["integer"] = true;
        j["marking"] = int_marking_json(*net.places(), m);
        j["legal"] = is_legal(m);
        auto enabled = ordered_json::array();
        for (std::size_t i = 0; i < net.transition_count(); ++i) {
            enabled.push_back({{"label", i + 1}, {"name", net.transitions()[i].name}});
        }
        j["enabled"] = std::move(enabled);
        auto log = ordered_json::array();
        for (auto t : s.int_log) {
            log.push_back({{"transition", net.transition(t).name}, {"label", t.value}});
        }
        j["log"] = std::move(log);
        return j;
    }
    const auto& h = *s.history;
    const auto& p = *s.presentation;
    j["integer"] = false;
    j["marking"] = marking_json(h.marking());
    j["cod"] = names_of(*p.objects(), h.current());
    j["tokens"] = tokens_json(h);
    auto enabled = ordered_json::array();
    auto disabled = ordered_json::array();
    for (const auto& g : p.generators()) {
        const auto choices = valid_choices(h, g.id);
        if (choices.empty()) {
            disabled.push_back({{"label", g.id.value}, {"name", transition_name(p, g.id)}});
        } else {
            enabled.push_back({{"label", g.id.value}, {"name", transition_name(p, g.id)}, {"choices", choices}});
        }
    }
    j["enabled"] = std::move(enabled);
    j["disabled"] = std::move(disabled);
    j["log"] = log_json(p, h.log());
    j["term"] = print_term(h.term());
    return j;
}

GeneratorId resolve_transition(const json& v, std::size_t count, const std::function<std::optional<GeneratorId>(
                                                                       const std::string&)>& by_name)
{
    if (v.is_string()) {
        if (auto id = by_name(v.get<std::string>())) {
            return *id;
        }
        throw HttpError(400, "unknown transition \"" + v.get<std::string>() + "\"");
    }
    if (v.is_number_unsigned() && v.get<std::uint64_t>() >= 1 && v.get<std::uint64_t>() <= count) {
        return GeneratorId{static_cast<std::uint32_t>(v.get<std::uint64_t>())};
    }
    throw HttpError(400, "\"transition\" must be a transition name or a label 1.." + std::to_string(count));
}

} // namespace

Service::Service(std::optional<std::string> log_path) : log_path_(std::move(log_path)) {}

Service::~Service() = default;

std::size_t Service::session_count() const
{
    std::shared_lock lock(sessions_mutex_);
    return sessions_.size();
}

std::shared_ptr<Session> Service::find(const std::string& id) const
{
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        throw HttpError(404, "no session \"" + id + "\"");
    }
    return it->second;
}

void Service::append_log(const std::string& line)
{
    if (!log_path_) {
        return;
    }
    std::lock_guard lock(log_mutex_);
    std::ofstream out(*log_path_, std::ios::app);
    out << line << '\n';
    out.flush();
    if (!out) {
        throw InternalError("cannot append to session log " + *log_path_);
    }
}

ServiceResponse Service::handle(const std::string& method, const std::string& path, const std::string& body)
{
    static const std::regex session_route(R"(^/sessions/([A-Za-z0-9_-]+)(/([a-z]+))?/?$)");
    try {
        if (path == "/sessions" || path == "/sessions/") {
            if (method != "POST") {
                throw HttpError(405, "use POST to create a session");
            }
            return create(body, true);
        }
        std::smatch m;
        if (!std::regex_match(path, m, session_route)) {
            throw HttpError(404, "no route for " + path);
        }
        const std::string id = m[1];
        const std::string action = m[3];
        const auto expect = [&](const char* want) {
            if (method != want) {
                throw HttpError(405, "use " + std::string(want) + " for " + path);
            }
        };
        if (action.empty()) {
            expect("GET");
            return state(id);
        }
        if (action == "fire") {
            expect("POST");
            return fire(id, body, true);
        }
        if (action == "history") {
            expect("GET");
            return history(id);
        }
        if (action == "undo") {
            expect("POST");
            return undo(id, true);
        }
        if (action == "analysis") {
            expect("GET");
            return analysis(id);
        }
        if (action == "run") {
            expect("POST");
            return run(id, body);
        }
        if (action == "legalize") {
            expect("POST");
            return legalize(id, body);
        }
        throw HttpError(404, "no route for " + path);
    } catch (const HttpError& e) {
        const char* kind = e.status == 404 ? "NotFound" : (e.status == 405 ? "MethodNotAllowed" : "BadRequest");
        if (e.status == 409) {
            kind = "Conflict";
        }
        return error_reply(e.status, kind, e.what());
    } catch (const NotEnabled& e) {
        return error_reply(409, "NotEnabled", e.what());
    } catch (const BadChoice& e) {
        return error_reply(409, "BadChoice", e.what());
    } catch (const SchemaError& e) {
        return error_reply(400, "SchemaError", e.what());
    } catch (const UsageError& e) {
        return error_reply(400, "UsageError", e.what());
    } catch (const FunctionFailure& e) {
        return error_reply(400, "FunctionFailure", e.what());
    } catch (const Overflow& e) {
        return error_reply(400, "Overflow", e.what());
    } catch (const std::exception& e) {
        return error_reply(500, "InternalError", e.what());
    }
}

ServiceResponse Service::create(const std::string& body, bool logged)
{
    auto req = parse_body(body);
    auto session = std::make_shared<Session>();
    if (req.contains("net")) {
        const auto& n = req["net"];
        session->doc = read_net_json(n.is_string() ? n.get<std::string>() : n.dump());
    } else if (req.contains("pnz")) {
        if (!req["pnz"].is_string()) {
            throw HttpError(400, "\"pnz\" must be a zero-string");
        }
        const auto net = presentation_to_net(*decode_text(req["pnz"].get<std::string>()));
        session->doc = make_document(net, empty_marking(*net));
    } else {
        throw HttpError(400, "provide \"net\" (JSON) or \"pnz\" (zero-string)");
    }
    if (req.contains("marking")) {
        json wrapped = json::parse(write_net_json(session->doc));
        wrapped["marking"] = req["marking"];
        auto again = read_net_json(wrapped.dump());
        again.predicates = session->doc.predicates;
        session->doc = std::move(again);
    }
    if (session->doc.integer) {
        session->int_initial = session->doc.int_marking;
    } else {
        session->presentation = fold(*session->doc.net);
        session->history = start_from_marking(session->presentation, session->doc.marking->tokens());
    }

    std::unique_lock lock(sessions_mutex_);
    if (req.contains("id") && !logged) {
        session->id = req["id"].get<std::string>();
    } else {
        session->id = "s" + std::to_string(next_id_);
    }
    if (session->id.size() > 1 && session->id[0] == 's') {
        try {
            next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(session->id.substr(1)) + 1);
        } catch (const std::exception&) {
        }
    }
    req["id"] = session->id;
    session->request = req;
    if (logged) {
        append_log(json{{"event", "create"}, {"session", session->id}, {"request", req}}.dump());
    }
    sessions_[session->id] = session;
    lock.unlock();

    std::lock_guard guard(session->mutex);
    ordered_json out;
    out["id"] = session->id;
    if (session->presentation) {
        out["presentation"] = presentation_json(*session->presentation);
    }
    out["state"] = state_json(*session);
    return reply(201, out);
}

ServiceResponse Service::state(const std::string& id)
{
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return reply(200, state_json(*s));
}

ServiceResponse Service::fire(const std::string& id, const std::string& body, bool logged)
{
    const auto req = parse_body(body);
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (!req.contains("transition")) {
        throw HttpError(400, "missing \"transition\"");
    }
    ordered_json entry;
    json event{{"event", "fire"}, {"session", s->id}};
    if (s->doc.integer) {
        const auto& net = *s->doc.int_net;
        const auto t = resolve_transition(req["transition"], net.transition_count(), [&](const std::string& n) {
            return net.find_transition(n);
        });
        s->int_log.push_back(t);
        entry = {{"transition", net.transition(t).name}, {"label", t.value}};
        event["transition"] = t.value;
    } else {
        const auto& p = *s->presentation;
        const auto t = resolve_transition(req["transition"], p.generator_count(),
                                          [&](const std::string& n) { return p.find_generator(n); });
        std::optional<std::vector<std::size_t>> choice;
        if (req.contains("choice") && !req["choice"].is_null()) {
            const auto& c = req["choice"];
            if (!c.is_array() || !std::all_of(c.begin(), c.end(), [](const json& x) { return x.is_number_unsigned(); })) {
                throw HttpError(400, "\"choice\" must be an array of token positions");
            }
            choice = c.get<std::vector<std::size_t>>();
        }
        s->history = fire_history(*s->history, t, choice);
        const auto& rec = s->history->log().back();
        entry = {{"transition", transition_name(p, t)}, {"label", t.value}, {"positions", rec.positions}};
        event["transition"] = t.value;
        event["positions"] = rec.positions;
    }
    if (logged) {
        append_log(event.dump());
    }
    return reply(200, ordered_json{{"state", state_json(*s)}, {"entry", entry}});
}

ServiceResponse Service::undo(const std::string& id, bool logged)
{
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (s->doc.integer) {
        if (s->int_log.empty()) {
            throw HttpError(409, "nothing to undo");
        }
        s->int_log.pop_back();
    } else {
        auto log = s->history->log();
        if (log.empty()) {
            throw HttpError(409, "nothing to undo");
        }
        log.pop_back();
        s->history = replay(s->presentation, s->history->initial(), log);
    }
    if (logged) {
        append_log(json{{"event", "undo"}, {"session", s->id}}.dump());
    }
    return reply(200, ordered_json{{"state", state_json(*s)}});
}

ServiceResponse Service::history(const std::string& id)
{
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (s->doc.integer) {
        throw HttpError(400, "integer sessions keep a firing sequence, not a history term");
    }
    const auto& h = *s->history;
    ordered_json out;
    out["term"] = print_term(h.term());
    out["dom"] = names_of(*s->presentation->objects(), h.initial());
    out["cod"] = names_of(*s->presentation->objects(), h.current());
    out["diagram"] = diagram_to_json(to_diagram(h.term()), s->presentation.get());
    out["tokens"] = tokens_json(h);
    out["log"] = log_json(*s->presentation, h.log());
    return reply(200, out);
}

ServiceResponse Service::analysis(const std::string& id)
{
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (s->doc.integer) {
        throw HttpError(400, "state-space analysis needs a natural-number net");
    }
    std::map<std::string, Predicate> preds;
    for (const auto& [name, text] : s->doc.predicates) {
        preds.emplace(name, Predicate::parse(text, *s->doc.net->places()));
    }
    const Marking current(s->history->marking());
    return reply(200, analysis_report(*s->doc.net, current, preds, limits_from_env()));
}

ServiceResponse Service::run(const std::string& id, const std::string& body)
{
    const auto req = parse_body(body);
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (s->doc.integer) {
        throw HttpError(400, "folds run on natural-number nets");
    }
    if (!req.contains("binding") || !req.contains("inputs")) {
        throw HttpError(400, "provide \"binding\" and \"inputs\"");
    }
    const auto& jb = req["binding"];
    const auto binding = read_binding_json(jb.is_string() ? jb.get<std::string>() : jb.dump(), s->presentation);
    validate_binding(binding);
    const auto& h = *s->history;
    const auto inputs = values_from_json(req["inputs"], types_of(binding, h.initial()));
    const auto outputs = run_history(binding, h, inputs);
    ordered_json out;
    out["outputs"] = values_to_json(outputs);
    out["cod"] = names_of(*s->presentation->objects(), h.current());
    return reply(200, out);
}

ServiceResponse Service::legalize(const std::string& id, const std::string& body)
{
    const auto req = parse_body(body);
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (!s->doc.integer) {
        throw HttpError(400, "legalize applies to integer nets");
    }
    const auto& net = *s->doc.int_net;
    std::vector<TransitionId> seq = s->int_log;
    if (req.contains("sequence")) {
        seq.clear();
        for (const auto& v : req["sequence"]) {
            seq.push_back(resolve_transition(v, net.transition_count(),
                                             [&](const std::string& n) { return net.find_transition(n); }));
        }
    }
    const auto r = foldbox::legalize(net, *s->int_initial, seq);
    ordered_json out;
    out["status"] = r.status == Legalization::Status::found
                        ? "found"
                        : (r.status == Legalization::Status::impossible ? "impossible" : "unknown");
    auto order = ordered_json::array();
    for (auto t : r.order) {
        order.push_back(net.transition(t).name);
    }
    out["order"] = std::move(order);
    auto trace = ordered_json::array();
    IntMarking m = *s->int_initial;
    trace.push_back(int_marking_json(*net.places(), m));
    for (auto t : seq) {
        m = int_fire(net, m, t);
        trace.push_back(int_marking_json(*net.places(), m));
    }
    out["observed"] = std::move(trace);
    return reply(200, out);
}

std::size_t Service::recover()
{
    if (!log_path_) {
        return 0;
    }
    std::ifstream in(*log_path_);
    if (!in) {
        return 0;
    }
    std::size_t applied = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        json e;
        try {
            e = json::parse(line);
        } catch (const json::parse_error&) {
            throw SchemaError("session log line " + std::to_string(lineno) + " is not valid JSON");
        }
        const auto event = e.value("event", "");
        const auto id = e.value("session", "");
        try {
            if (event == "create") {
                auto req = e.at("request");
                req["id"] = id;
                create(req.dump(), false);
            } else if (event == "fire") {
                json req{{"transition", e.at("transition")}};
                if (e.contains("positions")) {
                    req["choice"] = e["positions"];
                }
                fire(id, req.dump(), false);
            } else if (event == "undo") {
                undo(id, false);
            } else {
                throw SchemaError("unknown event \"" + event + "\"");
            }
        } catch (const std::exception& ex) {
            throw SchemaError("session log line " + std::to_string(lineno) + ": " + ex.what());
        }
        ++applied;
    }
    return applied;
}

} // namespace foldbox
