#include "testkit.hpp"

#include "foldbox/service.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <thread>

using namespace foldbox;
using nlohmann::json;

namespace {

json call(Service& s, const std::string& method, const std::string& path, const json& body = json::object(),
          int expect = 200)
{
    const auto r = s.handle(method, path, body.dump());
    INFO(method << " " << path << " -> " << r.body);
    CHECK(r.status == expect);
    return json::parse(r.body);
}

std::string create(Service& s, const std::string& net_file, const json& marking = nullptr)
{
    json body{{"net", read_file(testkit::nets_dir() + "/" + net_file)}};
    if (!marking.is_null()) {
        body["marking"] = marking;
    }
    return call(s, "POST", "/sessions", body, 201)["id"].get<std::string>();
}

std::set<std::string> names(const json& list)
{
    std::set<std::string> out;
    for (const auto& e : list) {
        out.insert(e["name"].get<std::string>());
    }
    return out;
}

std::filesystem::path fresh_log(const std::string& name)
{
    const auto path = std::filesystem::temp_directory_path() / ("foldbox-" + name + "-" + std::to_string(testkit::seed()) + ".jsonl");
    std::filesystem::remove(path);
    return path;
}

} // namespace

TEST_CASE("evolution session")
{
    Service svc;
    const auto id = create(svc, "evolution.pn.json", json{{"p1", 2}});
    CHECK(id == "s1");

    const auto doc = testkit::load("evolution.pn.json");
    const auto state = call(svc, "GET", "/sessions/" + id);
    std::set<std::string> expected_enabled;
    for (auto t : enabled_transitions(*doc.net, *doc.marking)) {
        expected_enabled.insert(doc.net->transition(t).name);
    }
    CHECK(names(state["enabled"]) == expected_enabled);
    CHECK(names(state["enabled"]) == std::set<std::string>{"t1", "t2"});
    CHECK(names(state["disabled"]) == std::set<std::string>{"t3"});
    CHECK(state["marking"] == json{{"p1", 2}});

    const auto fired = call(svc, "POST", "/sessions/" + id + "/fire", json{{"transition", "t1"}});
    CHECK(fired["entry"]["transition"] == "t1");
    const auto after = call(svc, "GET", "/sessions/" + id);
    CHECK(after["marking"] == json{{"p1", 1}, {"p2", 1}});
    CHECK(after["log"].size() == 1);

    const auto bad = call(svc, "POST", "/sessions/" + id + "/fire", json{{"transition", "t3"}, {"choice", {7}}}, 409);
    CHECK(bad["error"] == "BadChoice");
    const auto wrong_place = call(svc, "POST", "/sessions/" + id + "/fire", json{{"transition", "t3"}, {"choice", {1}}}, 409);
    CHECK(wrong_place["error"] == "BadChoice");

    call(svc, "POST", "/sessions/" + id + "/fire", json{{"transition", "t2"}});
    call(svc, "POST", "/sessions/" + id + "/fire", json{{"transition", "t3"}});
    CHECK(call(svc, "GET", "/sessions/" + id)["marking"] == json{{"p2", 1}, {"p3", 1}});

    const auto undone = call(svc, "POST", "/sessions/" + id + "/undo");
    CHECK(undone["state"]["marking"] == json{{"p2", 2}});
    CHECK(undone["state"]["log"].size() == 2);
}

TEST_CASE("token choices are listed and honoured")
{
    Service svc;
    const auto id = create(svc, "evolution.pn.json", json{{"p1", 2}});
    call(svc, "POST", "/sessions/" + id + "/fire", json{{"transition", "t1"}});
    const auto s = call(svc, "POST", "/sessions/" + id + "/fire", json{{"transition", "t2"}})["state"];
    const auto t3 = std::find_if(s["enabled"].begin(), s["enabled"].end(), [](const json& e) { return e["name"] == "t3"; });
    REQUIRE(t3 != s["enabled"].end());
    CHECK((*t3)["choices"].size() == 2);

    std::set<std::string> provenance;
    for (const auto& choice : (*t3)["choices"]) {
        const auto pos = choice[0].get<std::size_t>();
        provenance.insert(s["tokens"][pos]["history"][0].get<std::string>());
    }
    CHECK(provenance == std::set<std::string>{"t1", "t2"});

    const auto pick = (*t3)["choices"][1];
    const auto fired = call(svc, "POST", "/sessions/" + id + "/fire", json{{"transition", "t3"}, {"choice", pick}});
    CHECK(fired["entry"]["positions"] == pick);

    const auto h = call(svc, "GET", "/sessions/" + id + "/history");
    CHECK(h["dom"] == json{"p1", "p1"});
    CHECK(h["diagram"].contains("boxes"));
    CHECK(h["tokens"].size() == 2);
    for (const auto& token : h["tokens"]) {
        if (token["place"] == "p3") {
            CHECK(token["history"].size() == 2);
            CHECK(token["history"][1] == "t3");
        }
    }
}

TEST_CASE("errors map to status codes")
{
    Service svc;
    CHECK(call(svc, "GET", "/sessions/s9", {}, 404)["error"] == "NotFound");
    CHECK(call(svc, "GET", "/elsewhere", {}, 404)["error"] == "NotFound");
    CHECK(call(svc, "GET", "/sessions", {}, 405)["error"] == "MethodNotAllowed");
    CHECK(svc.handle("POST", "/sessions", "{oops").status == 400);
    CHECK(call(svc, "POST", "/sessions", json{{"nothing", 1}}, 400)["error"] == "BadRequest");
    CHECK(call(svc, "POST", "/sessions", json{{"net", R"({"places": 3})"}}, 400)["error"] == "SchemaError");
    CHECK(call(svc, "POST", "/sessions", json{{"pnz", "1,0"}}, 400)["error"] == "SchemaError");

    const auto id = create(svc, "evolution.pn.json", json{{"p1", 2}});
    CHECK(call(svc, "POST", "/sessions/" + id + "/fire", json{{"transition", "t3"}}, 409)["error"] == "NotEnabled");
    CHECK(call(svc, "POST", "/sessions/" + id + "/fire", json{{"transition", "t9"}}, 400)["error"] == "BadRequest");
    CHECK(call(svc, "POST", "/sessions/" + id + "/fire", json::object(), 400)["error"] == "BadRequest");
    CHECK(call(svc, "POST", "/sessions/" + id + "/undo", {}, 409)["error"] == "Conflict");
    CHECK(call(svc, "POST", "/sessions/" + id + "/legalize", {}, 400)["error"] == "BadRequest");
    CHECK(svc.session_count() == 1);
}

TEST_CASE("sessions from zero-strings")
{
    Service svc;
    const auto r = call(svc, "POST", "/sessions", json{{"pnz", read_file(testkit::nets_dir() + "/evolution.pnz")}, {"marking", {{"p1", 1}}}}, 201);
    CHECK(r["presentation"]["generators"].size() == 3);
    CHECK(r["state"]["marking"] == json{{"p1", 1}});
}

TEST_CASE("analysis and run")
{
    Service svc;
    const auto tl = create(svc, "trafficlight.pn.json");
    const auto report = call(svc, "GET", "/sessions/" + tl + "/analysis");
    CHECK(report["predicates"]["mutual-exclusion"]["status"] == "holds");
    CHECK(report["deadlock"]["status"] == "no");

    const auto qs = create(svc, "quicksort.pn.json");
    call(svc, "POST", "/sessions/" + qs + "/fire", json{{"transition", "t"}});
    const auto binding = json::parse(read_file(testkit::nets_dir() + "/quicksort.binding.json"));
    const auto out = call(svc, "POST", "/sessions/" + qs + "/run", json{{"binding", binding}, {"inputs", {{3, 1, 2}}}});
    CHECK(out["outputs"] == json{{1, 2, 3}});

    const auto evo = create(svc, "evolution.pn.json", json{{"p1", 2}});
    call(svc, "POST", "/sessions/" + evo + "/fire", json{{"transition", "t1"}});
    call(svc, "POST", "/sessions/" + evo + "/fire", json{{"transition", "t2"}});
    const auto state = call(svc, "GET", "/sessions/" + evo);
    const auto ebinding = json::parse(read_file(testkit::nets_dir() + "/evolution.binding.json"));
    std::set<std::int64_t> results;
    for (const auto& choice : std::find_if(state["enabled"].begin(), state["enabled"].end(),
                                           [](const json& e) { return e["name"] == "t3"; })->at("choices")) {
        const auto fired = call(svc, "POST", "/sessions/" + evo + "/fire", json{{"transition", "t3"}, {"choice", choice}});
        const auto r = call(svc, "POST", "/sessions/" + evo + "/run", json{{"binding", ebinding}, {"inputs", {2, 2}}});
        const auto& cod = r["cod"];
        const auto at = std::find(cod.begin(), cod.end(), "p3") - cod.begin();
        results.insert(r["outputs"][at].get<std::int64_t>());
        call(svc, "POST", "/sessions/" + evo + "/undo");
        CHECK(fired["state"]["marking"] == json{{"p2", 1}, {"p3", 1}});
    }
    CHECK(results == std::set<std::int64_t>{3, 4});

    CHECK(call(svc, "POST", "/sessions/" + evo + "/run", json{{"binding", ebinding}, {"inputs", {2}}}, 400)["error"] ==
          "UsageError");
}

TEST_CASE("integer sessions and legalize")
{
    Service svc;
    const auto id = create(svc, "conflict.pn.json");
    for (const auto* t : {"tau", "nu"}) {
        call(svc, "POST", "/sessions/" + id + "/fire", json{{"transition", t}});
    }
    const auto s = call(svc, "GET", "/sessions/" + id);
    CHECK(s["integer"] == true);
    CHECK(s["legal"] == false);
    CHECK(s["marking"] == json{{"X", -1}, {"Y", 1}, {"Z", 1}});
    call(svc, "POST", "/sessions/" + id + "/fire", json{{"transition", "mu"}});
    const auto r = call(svc, "POST", "/sessions/" + id + "/legalize");
    CHECK(r["status"] == "found");
    CHECK(r["order"] == json{"tau", "mu", "nu"});
    CHECK(r["observed"][2] == json{{"X", -1}, {"Y", 1}, {"Z", 1}});
    CHECK(call(svc, "GET", "/sessions/" + id + "/history", {}, 400)["error"] == "BadRequest");
    CHECK(call(svc, "GET", "/sessions/" + id + "/analysis", {}, 400)["error"] == "BadRequest");
}

TEST_CASE("replaying the log reproduces every session")
{
    const auto log = fresh_log("replay");
    auto g = testkit::rng(70);
    std::vector<std::string> ids;
    std::map<std::string, std::string> states;
    {
        Service svc(log.string());
        for (const auto& file : testkit::bundled_nets()) {
            ids.push_back(create(svc, file));
        }
        ids.push_back(create(svc, "conflict.pn.json"));
        for (int step = 0; step < 300; ++step) {
            const auto& id = ids[testkit::uniform(g, 0, ids.size() - 1)];
            const auto s = call(svc, "GET", "/sessions/" + id);
            if (testkit::uniform(g, 0, 4) == 0 && !s["log"].empty()) {
                call(svc, "POST", "/sessions/" + id + "/undo");
                continue;
            }
            if (s["enabled"].empty()) {
                continue;
            }
            const auto& t = s["enabled"][testkit::uniform(g, 0, s["enabled"].size() - 1)];
            json body{{"transition", t["name"]}};
            if (t.contains("choices")) {
                body["choice"] = t["choices"][testkit::uniform(g, 0, t["choices"].size() - 1)];
            }
            if (s["integer"] == true && s["log"].size() > 8) {
                continue;
            }
            call(svc, "POST", "/sessions/" + id + "/fire", body);
        }
        for (const auto& id : ids) {
            states[id] = svc.handle("GET", "/sessions/" + id, "").body;
        }
    }
    Service again(log.string());
    CHECK(again.recover() > ids.size());
    CHECK(again.session_count() == ids.size());
    for (const auto& id : ids) {
        CHECK(again.handle("GET", "/sessions/" + id, "").body == states[id]);
    }
    CHECK(call(again, "POST", "/sessions", json{{"pnz", "0,0"}}, 201)["id"] == "s" + std::to_string(ids.size() + 1));
    std::filesystem::remove(log);
}

TEST_CASE("a corrupt log is reported")
{
    const auto log = fresh_log("corrupt");
    {
        std::ofstream out(log);
        out << "{\"event\": \"fire\", \"session\": \"s1\", \"transition\": 1}\n";
    }
    Service svc(log.string());
    CHECK_THROWS_AS(svc.recover(), SchemaError);
    std::filesystem::remove(log);
    CHECK(Service().recover() == 0);
}

TEST_CASE("concurrent fires are linearized")
{
    Service svc;
    const auto id = create(svc, "evolution.pn.json", json{{"p1", 40}});
    constexpr int threads = 8;
    constexpr int per_thread = 5;
    std::vector<std::vector<std::size_t>> seen(threads);
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) {
        pool.emplace_back([&, k] {
            for (int i = 0; i < per_thread; ++i) {
                const auto r = svc.handle("POST", "/sessions/" + id + "/fire", json{{"transition", k % 2 ? "t1" : "t2"}}.dump());
                seen[k].push_back(json::parse(r.body)["state"]["log"].size());
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    std::vector<std::size_t> all;
    for (const auto& v : seen) {
        CHECK(std::is_sorted(v.begin(), v.end()));
        all.insert(all.end(), v.begin(), v.end());
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(threads * per_thread);
    std::iota(expected.begin(), expected.end(), 1);
    CHECK(all == expected);
    const auto final = call(svc, "GET", "/sessions/" + id);
    CHECK(final["marking"] == json{{"p2", threads * per_thread}});
}

TEST_CASE("HTTP transport")
{
    httplib::Server server;
    Service svc;
    mount(server, svc);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    const json body{{"net", read_file(testkit::nets_dir() + "/evolution.pn.json")}};
    const auto created = client.Post("/sessions", body.dump(), "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    CHECK(created->get_header_value("Access-Control-Allow-Origin") == "*");
    const auto id = json::parse(created->body)["id"].get<std::string>();

    const auto state = client.Get("/sessions/" + id);
    REQUIRE(state);
    CHECK(state->status == 200);
    CHECK(json::parse(state->body)["marking"] == json{{"p1", 2}});

    const auto missing = client.Get("/sessions/nope");
    REQUIRE(missing);
    CHECK(missing->status == 404);

    const auto bad = client.Post("/sessions/" + id + "/fire", R"({"transition": "t3"})", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 409);

    const auto preflight = client.Options("/sessions");
    REQUIRE(preflight);
    CHECK(preflight->status == 204);
    CHECK(preflight->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

    const auto nowhere = client.Get("/other");
    REQUIRE(nowhere);
    CHECK(nowhere->status == 404);
    CHECK(json::parse(nowhere->body)["error"] == "NotFound");

    server.stop();
    worker.join();
}
