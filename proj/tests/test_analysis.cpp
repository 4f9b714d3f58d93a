#include "testkit.hpp"

#include "foldbox/analysis.hpp"

#include <doctest.h>

#include <deque>
#include <set>

using namespace foldbox;

namespace {

using Dense = std::vector<Count>;

struct Oracle {
    std::vector<Dense> nodes;
    std::map<Dense, std::size_t> index;
    std::vector<std::vector<std::pair<TransitionId, std::size_t>>> succ;
    bool complete = true;
};

/// Plain BFS over dense vectors with a token cap and node cap.
Oracle bfs(const Net& net, const Marking& m0, Count cap, std::size_t max_nodes)
{
    Oracle o;
    const auto add = [&](const Dense& d) {
        auto [it, fresh] = o.index.emplace(d, o.nodes.size());
        if (fresh) {
            o.nodes.push_back(d);
            o.succ.emplace_back();
        }
        return it->second;
    };
    add(m0.tokens().dense());
    for (std::size_t i = 0; i < o.nodes.size(); ++i) {
        for (auto t : net.transition_ids()) {
            auto d = o.nodes[i];
            const auto in = net.input(t).dense();
            const auto out = net.output(t).dense();
            bool ok = true;
            for (std::size_t k = 0; k < d.size(); ++k) {
                ok = ok && d[k] >= in[k];
            }
            if (!ok) {
                continue;
            }
            bool over = false;
            for (std::size_t k = 0; k < d.size(); ++k) {
                d[k] = d[k] - in[k] + out[k];
                over = over || d[k] > cap;
            }
            if (over || (!o.index.contains(d) && o.nodes.size() >= max_nodes)) {
                o.complete = false;
                continue;
            }
            const auto j = add(d);
            o.succ[i].emplace_back(t, j);
        }
    }
    return o;
}

std::vector<std::set<std::size_t>> closure(const Oracle& o)
{
    std::vector<std::set<std::size_t>> reach(o.nodes.size());
    for (std::size_t i = 0; i < o.nodes.size(); ++i) {
        std::deque<std::size_t> queue{i};
        reach[i].insert(i);
        while (!queue.empty()) {
            const auto x = queue.front();
            queue.pop_front();
            for (const auto& [t, y] : o.succ[x]) {
                if (reach[i].insert(y).second) {
                    queue.push_back(y);
                }
            }
        }
    }
    return reach;
}

Count max_in(const Oracle& o, std::size_t place)
{
    Count m = 0;
    for (const auto& d : o.nodes) {
        m = std::max(m, d[place]);
    }
    return m;
}

Marking at(const Net& net, std::map<std::string, Count> named)
{
    std::map<SymbolId, Count> counts;
    for (const auto& [name, n] : named) {
        counts[*net.places()->find(name)] = n;
    }
    return Marking(Multiset(net.places(), counts));
}

testkit::NetShape small_shape()
{
    testkit::NetShape shape;
    shape.max_places = 4;
    shape.max_transitions = 4;
    shape.max_weight = 2;
    return shape;
}

} // namespace

TEST_CASE("exploring the evolution net")
{
    const auto doc = testkit::load("evolution.pn.json");
    const auto& net = *doc.net;
    const auto target = at(net, {{"p2", 1}, {"p3", 1}});
    const auto r = reachable(net, *doc.marking, target);
    CHECK(r.status == Verdict::yes);
    CHECK(r.path.size() == 3);
    auto m = *doc.marking;
    for (auto t : r.path) {
        m = fire(net, m, t);
    }
    CHECK(m == target);

    auto along = *doc.marking;
    for (const auto* name : {"t1", "t2", "t3"}) {
        along = fire(net, along, *net.find_transition(name));
    }
    CHECK(along == target);
    CHECK(reachable(net, *doc.marking, *doc.marking).path.empty());
    CHECK(reachable(net, *doc.marking, *doc.marking).status == Verdict::yes);
}

TEST_CASE("a net without transitions has a single node")
{
    const auto u = make_universe(2);
    const Net net(u, {});
    const auto g = explore(net, Marking(singleton(u, SymbolId(1))));
    CHECK(g.nodes.size() == 1);
    CHECK(g.edges.empty());
    CHECK_FALSE(g.truncated);
}

TEST_CASE("traffic light mutual exclusion")
{
    const auto good = testkit::load("trafficlight.pn.json");
    const auto& net = *good.net;
    const auto g = explore(net, *good.marking);
    CHECK_FALSE(g.truncated);
    const auto g1 = *net.places()->find("green1");
    const auto g2 = *net.places()->find("green2");
    for (const auto& m : g.nodes) {
        CHECK_FALSE((m[g1] >= 1 && m[g2] >= 1));
    }
    const auto both = at(net, {{"green1", 1}, {"green2", 1}});
    CHECK(reachable(net, *good.marking, both).status == Verdict::no);

    const auto bad = testkit::load("trafficlight-bad.pn.json");
    const auto witness = reachable(*bad.net, *bad.marking, both);
    CHECK(witness.status == Verdict::yes);
    CHECK(witness.path ==
          std::vector<TransitionId>{*net.find_transition("turn-green-1"), *net.find_transition("turn-green-2")});

    const auto mutex = Predicate::parse(good.predicates.at("mutual-exclusion"), *net.places());
    CHECK(check_predicate(net, *good.marking, mutex).holds == Verdict::yes);
    const auto violated = check_predicate(*bad.net, *bad.marking, mutex);
    CHECK(violated.holds == Verdict::no);
    CHECK(violated.counterexample.size() == 2);
    CHECK(check_predicate(net, *good.marking, Predicate::parse("true", *net.places())).holds == Verdict::yes);
}

TEST_CASE("deadlocks")
{
    const auto disabled = testkit::load("disabled.pn.json");
    const auto d = find_deadlock(*disabled.net, *disabled.marking);
    CHECK(d.status == Verdict::yes);
    CHECK(d.path.empty());
    CHECK(*d.marking == *disabled.marking);

    const auto good = testkit::load("trafficlight.pn.json");
    CHECK(find_deadlock(*good.net, *good.marking).status == Verdict::no);

    const auto u = make_universe(1);
    const Net spawn(u, {{"t", zero(u), singleton(u, SymbolId(1))}});
    Limits small;
    small.max_tokens = 10;
    const auto s = find_deadlock(spawn, empty_marking(spawn), small);
    CHECK(s.status != Verdict::yes);
    CHECK(explore(spawn, empty_marking(spawn), small).truncated);
}

TEST_CASE("liveness")
{
    const auto good = testkit::load("trafficlight.pn.json");
    for (auto l : liveness(*good.net, *good.marking)) {
        CHECK(l == Liveness::live);
    }
    const auto disabled = testkit::load("disabled.pn.json");
    CHECK(liveness(*disabled.net, *disabled.marking) == std::vector<Liveness>{Liveness::dead});

    const auto u = make_universe(1);
    const Net loop(u, {{"t", singleton(u, SymbolId(1)), singleton(u, SymbolId(1))}});
    CHECK(liveness(loop, Marking(singleton(u, SymbolId(1)))) == std::vector<Liveness>{Liveness::live});

    const Net spawn(u, {{"t", zero(u), singleton(u, SymbolId(1))}});
    Limits small;
    small.max_tokens = 5;
    CHECK_THROWS_AS(liveness(spawn, empty_marking(spawn), small), AnalysisIncomplete);
}

TEST_CASE("boundedness")
{
    const auto production = testkit::load("production.pn.json");
    const auto pb = boundedness(*production.net, *production.marking);
    CHECK_FALSE(pb[production.net->places()->find("a")->index()].has_value());

    const auto good = testkit::load("trafficlight.pn.json");
    for (const auto& b : boundedness(*good.net, *good.marking)) {
        REQUIRE(b.has_value());
        CHECK(*b == 1);
    }

    const auto capacity = testkit::load("capacity.pn.json");
    const auto& cn = *capacity.net;
    const auto cb = boundedness(cn, *capacity.marking);
    CHECK(cb[cn.places()->find("cap")->index()] == std::optional<Count>(6));
    CHECK(cb[cn.places()->find("buf")->index()] == std::optional<Count>(6));
    const auto out = cn.places()->find("out")->index();
    const auto lo = bfs(cn, *capacity.marking, 8, 100000);
    const auto hi = bfs(cn, *capacity.marking, 32, 100000);
    CHECK(max_in(hi, out) > max_in(lo, out));
    CHECK_FALSE(cb[out].has_value());
}

TEST_CASE("exploration agrees with an independent search")
{
    auto g = testkit::rng(50);
    for (int round = 0; round < 300; ++round) {
        const auto net = testkit::random_net(g, small_shape());
        const Marking m0(testkit::random_multiset(g, net->places(), 2));
        Limits limits;
        limits.max_nodes = 2000;
        limits.max_tokens = 6;
        const auto graph = explore(*net, m0, limits);
        const auto oracle = bfs(*net, m0, limits.max_tokens, limits.max_nodes);
        CHECK(graph.truncated == !oracle.complete);
        CHECK(graph.nodes.size() == oracle.nodes.size());
        for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
            CHECK(graph.nodes[i].tokens().dense() == oracle.nodes[i]);
        }
        for (const auto& e : graph.edges) {
            CHECK(fire(*net, graph.nodes[e.from], e.transition) == graph.nodes[e.to]);
        }
        if (!graph.truncated) {
            const Marking probe(testkit::random_multiset(g, net->places(), 2));
            const auto r = reachable(graph, probe);
            CHECK((r.status == Verdict::yes) == oracle.index.contains(probe.tokens().dense()));
            if (r.status == Verdict::yes) {
                auto m = m0;
                for (auto t : r.path) {
                    m = fire(*net, m, t);
                }
                CHECK(m == probe);
            }
        }
        CHECK(explore(*net, m0, limits).edges.size() == graph.edges.size());
    }
}

TEST_CASE("liveness agrees with per-node search")
{
    auto g = testkit::rng(51);
    int checked = 0;
    for (int round = 0; round < 300; ++round) {
        const auto net = testkit::random_net(g, small_shape());
        const Marking m0(testkit::random_multiset(g, net->places(), 2));
        Limits limits;
        limits.max_nodes = 500;
        limits.max_tokens = 5;
        const auto oracle = bfs(*net, m0, limits.max_tokens, limits.max_nodes);
        if (!oracle.complete) {
            CHECK_THROWS_AS(liveness(*net, m0, limits), AnalysisIncomplete);
            continue;
        }
        ++checked;
        const auto reach = closure(oracle);
        const auto result = liveness(*net, m0, limits);
        bool all_live = true;
        for (auto t : net->transition_ids()) {
            std::vector<bool> enables(oracle.nodes.size());
            for (std::size_t i = 0; i < oracle.nodes.size(); ++i) {
                enables[i] = enabled(*net, Marking(Multiset::from_dense(net->places(), oracle.nodes[i])), t);
            }
            const bool dead = std::none_of(enables.begin(), enables.end(), [](bool b) { return b; });
            bool live = true;
            for (std::size_t i = 0; i < oracle.nodes.size(); ++i) {
                live = live && std::any_of(reach[i].begin(), reach[i].end(), [&](std::size_t j) { return enables[j]; });
            }
            const auto expected = dead ? Liveness::dead : (live ? Liveness::live : Liveness::neither);
            CHECK(result[t.index()] == expected);
            all_live = all_live && expected == Liveness::live;
        }
        if (all_live && net->transition_count() > 0) {
            CHECK(find_deadlock(*net, m0, limits).status == Verdict::no);
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("coverability agrees with growing exploration caps")
{
    auto g = testkit::rng(52);
    int unbounded = 0;
    int bounded = 0;
    for (int round = 0; round < 200; ++round) {
        const auto net = testkit::random_net(g, small_shape());
        const Marking m0(testkit::random_multiset(g, net->places(), 2));
        const auto km = boundedness(*net, m0);
        const auto lo = bfs(*net, m0, 10, 200000);
        const auto hi = bfs(*net, m0, 40, 200000);
        for (std::size_t p = 0; p < net->place_count(); ++p) {
            if (km[p]) {
                ++bounded;
                CHECK(max_in(hi, p) == *km[p]);
            } else {
                ++unbounded;
                CHECK(max_in(hi, p) > max_in(lo, p));
            }
        }
    }
    CHECK(bounded > 50);
    CHECK(unbounded > 50);
}

TEST_CASE("predicate language")
{
    const auto u = make_universe(std::vector<std::string>{"a", "b", "a-b"});
    const auto m = Marking(Multiset(u, {{SymbolId(1), 3}, {SymbolId(2), 1}}));
    CHECK(Predicate::parse("a >= 3 && b == 1", *u)(m));
    CHECK(Predicate::parse("2*a - b > 4", *u)(m));
    CHECK(Predicate::parse("!(a < 3) || false", *u)(m));
    CHECK_FALSE(Predicate::parse("a + b != 4", *u)(m));
    CHECK(Predicate::parse("a - b == 2", *u)(m));
    CHECK_THROWS_AS(Predicate::parse("c > 0", *u), UsageError);
    CHECK_THROWS_AS(Predicate::parse("a >", *u), UsageError);
    CHECK_THROWS_AS(Predicate::parse("a > 0 &&", *u), UsageError);
}

TEST_CASE("limits")
{
    const auto l = parse_limits("nodes=5, tokens=3");
    CHECK(l.max_nodes == 5);
    CHECK(l.max_tokens == 3);
    CHECK(parse_limits("").max_nodes == 100000);
    CHECK(parse_limits("").max_tokens == 64);
    CHECK_THROWS_AS(parse_limits("nodes=0"), UsageError);
    CHECK_THROWS_AS(parse_limits("depth=3"), UsageError);
}

TEST_CASE("analysis report")
{
    const auto good = testkit::load("trafficlight.pn.json");
    std::map<std::string, Predicate> preds;
    preds.emplace("mutual-exclusion", Predicate::parse("green1 + green2 <= 1", *good.net->places()));
    const auto r = analysis_report(*good.net, *good.marking, preds);
    CHECK(r["graph"]["complete"] == true);
    CHECK(r["boundedness"]["safe"] == true);
    CHECK(r["deadlock"]["status"] == "no");
    CHECK(r["liveness"]["turn-green-1"] == "live");
    CHECK(r["predicates"]["mutual-exclusion"]["status"] == "holds");

    const auto dot = reachability_dot(*good.net, explore(*good.net, *good.marking));
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("turn-green-1") != std::string::npos);
}
