#include "testkit.hpp"

#include "foldbox/diagram.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace foldbox;

namespace {

struct Evolution {
    NetDocument doc = testkit::load("evolution.pn.json");
    NetRef net = doc.net;
    PresentationRef p = fold(*net);
    SymbolId p1{1};
    SymbolId p2{2};
    SymbolId p3{3};
    GeneratorId t1{1};
    GeneratorId t2{2};
    GeneratorId t3{3};
};

/// The source symbols of `label`, read off the history's codomain at `positions`.
ObString picked(const History& h, const std::vector<std::size_t>& positions)
{
    ObString w;
    for (auto i : positions) {
        w.push_back(h.current()[i]);
    }
    return w;
}

/// Independent rebuild of one firing step: a symmetry realized as
/// p followed by an identity detour, then the generator beside the rest.
Term rebuild_step(const History& before, GeneratorId label, const std::vector<std::size_t>& positions,
                  std::mt19937_64& g)
{
    const auto& w = before.current();
    std::vector<std::size_t> order = positions;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (std::find(positions.begin(), positions.end(), i) == positions.end()) {
            order.push_back(i);
        }
    }
    const Permutation p(order);
    const auto detour = testkit::random_permutation(g, w.size());
    const auto via = foldbox::apply(detour, w);
    const Permutation rest_of = detour.inverse().then(p);
    const auto moved = foldbox::apply(p, w);
    const ObString rest(moved.begin() + static_cast<std::ptrdiff_t>(positions.size()), moved.end());
    const auto& decl = before.presentation()->generator(label);
    return Term::seq(Term::seq(before.term(), sym_from_permutation(w, detour)),
                     Term::seq(sym_from_permutation(via, rest_of), Term::par(Term::gen(decl), Term::id(rest))));
}

} // namespace

TEST_CASE("multiplicity and ordering")
{
    const auto u = make_universe(std::vector<std::string>{"a", "b", "c"});
    const SymbolId a(1);
    const SymbolId b(2);
    const SymbolId c(3);
    CHECK(multiplicity(u, {}) == zero(u));
    CHECK(multiplicity(u, {a, b, a}) == Multiset(u, {{a, 2}, {b, 1}}));
    CHECK(order(zero(u)).empty());
    CHECK(order(Multiset(u, {{a, 2}, {b, 1}})) == ObString{a, a, b});

    const auto x = Multiset(u, {{c, 2}, {b, 2}});
    const auto y = Multiset(u, {{a, 1}, {b, 2}});
    CHECK(order(union_of(x, y)) == ObString{a, b, b, b, b, c, c});
    CHECK(order(union_of(x, y)) != concat(order(x), order(y)));

    auto g = testkit::rng(20);
    for (int round = 0; round < 500; ++round) {
        const auto v = make_universe(testkit::uniform(g, 0, 6));
        const auto m = testkit::random_multiset(g, v, 4);
        CHECK(multiplicity(v, order(m)) == m);
        const auto w1 = testkit::random_word(g, v->size(), 5);
        const auto w2 = testkit::random_word(g, v->size(), 5);
        CHECK(multiplicity(v, concat(w1, w2)) == union_of(multiplicity(v, w1), multiplicity(v, w2)));
    }
}

TEST_CASE("fold")
{
    const auto empty = std::make_shared<const Net>(make_universe(0), std::vector<Transition>{});
    CHECK(fold(*empty)->generator_count() == 0);
    CHECK(fold(*empty)->object_count() == 0);

    Evolution E;
    const auto& gens = E.p->generators();
    REQUIRE(gens.size() == 3);
    CHECK(gens[0].source == ObString{E.p1});
    CHECK(gens[0].target == ObString{E.p2});
    CHECK(gens[1].source == ObString{E.p1});
    CHECK(gens[1].target == ObString{E.p2});
    CHECK(gens[2].source == ObString{E.p2});
    CHECK(gens[2].target == ObString{E.p3});

    const auto u = make_universe(std::vector<std::string>{"p", "q"});
    const Net weighted(u, {{"t", singleton(u, SymbolId(1), 2), singleton(u, SymbolId(2))}});
    CHECK(fold(weighted)->generator(GeneratorId(1)).source == ObString{SymbolId(1), SymbolId(1)});
}

TEST_CASE("unfold after fold is the identity on nets")
{
    for (const auto& file : testkit::bundled_nets()) {
        const auto doc = testkit::load(file);
        CHECK_MESSAGE(*unfold(*fold(*doc.net)) == *doc.net, file);
    }
    auto g = testkit::rng(21);
    for (int round = 0; round < 500; ++round) {
        const auto n = testkit::random_net(g);
        CHECK(*unfold(*fold(*n)) == *n);
    }
    const auto empty = std::make_shared<const Presentation>(make_universe(0), std::vector<GenDecl>{});
    CHECK(unfold(*empty)->transition_count() == 0);
}

TEST_CASE("fold after unfold reorders generator strings only")
{
    auto g = testkit::rng(22);
    for (int round = 0; round < 300; ++round) {
        const auto p = testkit::random_presentation(g, 4, 5, 4);
        const auto back = fold(*unfold(*p));
        REQUIRE(back->generator_count() == p->generator_count());
        for (std::size_t k = 0; k < p->generator_count(); ++k) {
            const auto& a = p->generators()[k];
            const auto& b = back->generators()[k];
            CHECK(foldbox::apply(leftmost_matching(a.source, b.source), a.source) == b.source);
            CHECK(foldbox::apply(leftmost_matching(a.target, b.target), a.target) == b.target);
            CHECK(b.source == order(multiplicity(p->objects(), a.source)));
        }
    }
}

TEST_CASE("unfolding functors")
{
    Evolution E;
    CHECK(unfold_functor(Functor::identity(E.p)) == NetMorphism::identity(unfold(*E.p)));

    const auto q = make_universe(std::vector<std::string>{"q1", "q2", "q3"});
    const auto merge_net = std::make_shared<const Net>(
        q, std::vector<Transition>{{"u", singleton(q, SymbolId(1)), singleton(q, SymbolId(2))},
                                   {"w", singleton(q, SymbolId(2)), singleton(q, SymbolId(3))}});
    const auto mp = fold(*merge_net);
    const Permutation one = Permutation::identity(1);
    const auto merge = Functor::make(E.p, mp, {{SymbolId(1)}, {SymbolId(2)}, {SymbolId(3)}},
                                     {{one, GeneratorId(1), one}, {one, GeneratorId(1), one}, {one, GeneratorId(2), one}});
    const auto mu = NetMorphism::make(unfold(*E.p), unfold(*mp), {TransitionId(1), TransitionId(1), TransitionId(2)},
                                      GroundedHom(E.net->places(), q, {SymbolId(1), SymbolId(2), SymbolId(3)}));
    CHECK(unfold_functor(merge) == mu);
    CHECK(unfold_functor(merge).grounded());

    const auto pa = std::make_shared<const Presentation>(
        make_universe(std::vector<std::string>{"a"}), std::vector<GenDecl>{{GeneratorId(1), "t", {SymbolId(1)}, {}}});
    const auto pxy = std::make_shared<const Presentation>(
        make_universe(std::vector<std::string>{"x", "y"}),
        std::vector<GenDecl>{{GeneratorId(1), "u", {SymbolId(1), SymbolId(2)}, {}}});
    const auto spread = Functor::make(pa, pxy, {{SymbolId(1), SymbolId(2)}},
                                      {{Permutation::identity(2), GeneratorId(1), Permutation::identity(0)}});
    const auto m = unfold_functor(spread);
    CHECK_FALSE(m.grounded());
    CHECK(m.place_map().image(SymbolId(1)) == Multiset(pxy->objects(), {{SymbolId(1), 1}, {SymbolId(2), 1}}));
}

TEST_CASE("lifting round-trips and unfolding is functorial")
{
    Evolution E;
    CHECK(lift_net_morphism(NetMorphism::identity(E.net)) == Functor::identity(fold(*E.net)));

    auto g = testkit::rng(23);
    testkit::NetShape shape;
    shape.max_places = 5;
    shape.max_transitions = 5;
    shape.allow_empty_net = false;
    for (int round = 0; round < 200; ++round) {
        const auto target = testkit::random_net(g, shape);
        const auto m2 = testkit::random_grounded_morphism(g, target);
        const auto m1 = testkit::random_grounded_morphism(g, m2.source());
        CHECK(unfold_functor(lift_net_morphism(m2)) == m2);
        CHECK(unfold_functor(lift_net_morphism(m1)) == m1);

        const auto f = lift_net_morphism(m1);
        const auto h = lift_net_morphism(m2);
        CHECK(unfold_functor(compose(f, h)) == compose(unfold_functor(f), unfold_functor(h)));
        CHECK(unfold_functor(compose(f, h)) == compose(m1, m2));
    }
}

TEST_CASE("lifting is not functorial")
{
    const auto w = testkit::lift_witness();
    const auto composite = compose(w.m1, w.m2);
    const auto lifted_then_composed = compose(lift_net_morphism(w.m1), lift_net_morphism(w.m2));
    const auto composed_then_lifted = lift_net_morphism(composite);
    CHECK_FALSE(lifted_then_composed == composed_then_lifted);
    CHECK(lifted_then_composed.map_generator(GeneratorId(1)).pre == Permutation({1, 0}));
    CHECK(composed_then_lifted.map_generator(GeneratorId(1)).pre.is_identity());
    CHECK(unfold_functor(lifted_then_composed) == composite);
    CHECK(unfold_functor(composed_then_lifted) == composite);
}

TEST_CASE("explicit lift policies")
{
    const auto w = testkit::lift_witness();
    LiftPolicy policy;
    policy.table[TransitionId(1)] = {Permutation({1, 0}), Permutation::identity(0)};
    const auto forced = lift_net_morphism(compose(w.m1, w.m2), policy);
    CHECK(forced == compose(lift_net_morphism(w.m1), lift_net_morphism(w.m2)));
}

TEST_CASE("starting histories")
{
    Evolution E;
    const auto empty = start_history(E.p, {});
    CHECK(empty.current().empty());
    CHECK(empty.log().empty());
    CHECK(start_history(E.p, {E.p1, E.p1}).current() == ObString{E.p1, E.p1});
    const auto from_marking = start_from_marking(E.p, Multiset(E.net->places(), {{E.p1, 2}}));
    CHECK(from_marking.initial() == ObString{E.p1, E.p1});
    CHECK(from_marking.term() == Term::id({E.p1, E.p1}));
    CHECK(token_history(from_marking, 0).empty());
    CHECK_THROWS_AS(start_history(E.p, {SymbolId(9)}), UsageError);
}

TEST_CASE("token choices distinguish histories with the same codomain")
{
    Evolution E;
    auto h = start_history(E.p, {E.p1, E.p1});
    h = fire_history(h, E.t1);
    h = fire_history(h, E.t2);
    CHECK(multiplicity(E.p->objects(), h.current()) == Multiset(E.net->places(), {{E.p2, 2}}));

    const auto choices = valid_choices(h, E.t3);
    REQUIRE(choices.size() == 2);
    const auto a = fire_history(h, E.t3, choices[0]);
    const auto b = fire_history(h, E.t3, choices[1]);
    CHECK(a.current() == b.current());
    CHECK_FALSE(equal(a.term(), b.term()));

    const auto p3_position = [&](const History& x) {
        for (std::size_t i = 0; i < x.current().size(); ++i) {
            if (x.current()[i] == E.p3) {
                return i;
            }
        }
        return x.current().size();
    };
    const auto ha = token_history(a, p3_position(a));
    const auto hb = token_history(b, p3_position(b));
    CHECK(ha.back() == E.t3);
    CHECK(hb.back() == E.t3);
    CHECK(std::set<std::vector<GeneratorId>>{ha, hb} ==
          std::set<std::vector<GeneratorId>>{{E.t1, E.t3}, {E.t2, E.t3}});
}

TEST_CASE("firing inserts the symmetry that brings chosen tokens forward")
{
    const auto u = make_universe(std::vector<std::string>{"A", "B", "C"});
    const SymbolId A(1);
    const SymbolId B(2);
    const SymbolId C(3);
    const auto p = std::make_shared<const Presentation>(
        u, std::vector<GenDecl>{{GeneratorId(1), "m", {}, {B, A}}, {GeneratorId(2), "f", {A, B}, {C}}});
    auto h = start_history(p, {});
    h = fire_history(h, GeneratorId(1));
    h = fire_history(h, GeneratorId(2));
    const auto expected =
        Term::seq(Term::seq(Term::gen(*p, GeneratorId(1)), Term::sym({B}, {A})), Term::gen(*p, GeneratorId(2)));
    CHECK(equal(h.term(), expected));
    CHECK(h.log().back().positions == std::vector<std::size_t>{1, 0});
}

TEST_CASE("firing errors")
{
    Evolution E;
    const auto h = start_history(E.p, {E.p1, E.p1});
    CHECK_THROWS_AS(fire_history(h, E.t3), NotEnabled);
    CHECK_THROWS_AS(fire_history(h, E.t1, std::vector<std::size_t>{5}), BadChoice);
    CHECK_THROWS_AS(fire_history(h, E.t1, std::vector<std::size_t>{0, 1}), BadChoice);
    const auto h2 = fire_history(h, E.t1);
    CHECK_THROWS_AS(fire_history(h2, E.t1, std::vector<std::size_t>{0}), BadChoice);
    CHECK_THROWS_AS(token_history(h2, 2), UsageError);
}

TEST_CASE("single quicksort firing has a one-step token history")
{
    const auto doc = testkit::load("quicksort.pn.json");
    const auto p = fold(*doc.net);
    const auto h = fire_history(start_from_marking(p, doc.marking->tokens()), GeneratorId(1));
    CHECK(token_history(h, 0) == std::vector<GeneratorId>{GeneratorId(1)});
}

TEST_CASE("histories stay consistent with firing replay")
{
    auto g = testkit::rng(24);
    testkit::NetShape shape;
    shape.max_places = 5;
    shape.max_transitions = 5;
    shape.max_weight = 2;
    int steps = 0;
    for (int round = 0; round < 1000; ++round) {
        const auto net = testkit::random_net(g, shape);
        const auto p = fold(*net);
        auto marking = Marking(testkit::random_multiset(g, net->places(), 3));
        auto h = start_from_marking(p, marking.tokens());
        for (int step = 0; step < 8; ++step) {
            const auto enabled = enabled_transitions(*net, marking);
            if (enabled.empty()) {
                break;
            }
            const auto t = enabled[testkit::uniform(g, 0, enabled.size() - 1)];
            const auto choices = valid_choices(h, t, 32);
            REQUIRE_FALSE(choices.empty());
            const auto choice = choices[testkit::uniform(g, 0, choices.size() - 1)];
            CHECK(picked(h, choice) == p->generator(t).source);
            const auto rebuilt = rebuild_step(h, t, choice, g);
            h = fire_history(h, t, choice);
            marking = fire(*net, marking, t);
            CHECK(multiplicity(p->objects(), h.current()) == marking.tokens());
            CHECK(equal(h.term(), rebuilt));
            ++steps;
        }
        CHECK(marking_consistent(*net, h));
        const auto again = replay(p, h.initial(), h.log());
        CHECK(again.term() == h.term());
    }
    CHECK(steps > 2000);
}
