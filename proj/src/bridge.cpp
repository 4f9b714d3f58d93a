#include "foldbox/bridge.hpp"

#include <algorithm>

namespace foldbox {

Multiset multiplicity(const UniverseRef& universe, const ObString& w)
{
    std::map<SymbolId, Count> counts;
    for (auto s : w) {
        if (!universe->contains(s)) {
            throw UnknownId("symbol " + std::to_string(s.value) + " not in universe");
        }
        counts[s] = checked_add(counts[s], 1);
    }
    return Multiset(universe, std::move(counts));
}

ObString order(const Multiset& x)
{
    ObString out;
    for (const auto& [s, n] : x.counts()) {
        out.insert(out.end(), n, s);
    }
    return out;
}

PresentationRef fold(const Net& net)
{
    std::vector<GenDecl> gens;
    for (auto t : net.transition_ids()) {
        const auto& tr = net.transition(t);
        gens.push_back(GenDecl{t, tr.name, order(tr.input), order(tr.output)});
    }
    return std::make_shared<const Presentation>(net.places(), std::move(gens));
}

NetRef unfold(const Presentation& p)
{
    std::vector<Transition> ts;
    for (const auto& g : p.generators()) {
        const auto name = g.name.empty() ? "t" + std::to_string(g.id.value) : g.name;
        ts.push_back(Transition{name, multiplicity(p.objects(), g.source), multiplicity(p.objects(), g.target)});
    }
    return std::make_shared<const Net>(p.objects(), std::move(ts));
}

NetMorphism unfold_functor(const Functor& f)
{
    const auto source = unfold(*f.source());
    const auto target = unfold(*f.target());
    std::vector<TransitionId> tmap;
    for (const auto& img : f.generator_map()) {
        tmap.push_back(img.target);
    }
    try {
        if (f.grounded()) {
            std::vector<SymbolId> base;
            for (const auto& w : f.object_map()) {
                base.push_back(w.front());
            }
            return NetMorphism::make(source, target, std::move(tmap),
                                     GroundedHom(source->places(), target->places(), std::move(base)));
        }
        std::vector<Multiset> images;
        for (const auto& w : f.object_map()) {
            images.push_back(multiplicity(target->places(), w));
        }
        return NetMorphism::make(source, target, std::move(tmap),
                                 MultisetHom(source->places(), target->places(), std::move(images)));
    } catch (const SquareViolation& e) {
        throw InternalError(std::string("unfolding a valid functor broke a square: ") + e.what());
    }
}

Permutation leftmost_matching(const ObString& from, const ObString& to)
{
    if (from.size() != to.size()) {
        throw ShapeMismatch("strings of different length cannot be matched");
    }
    std::vector<bool> used(from.size(), false);
    std::vector<std::size_t> image;
    image.reserve(to.size());
    for (auto s : to) {
        std::size_t k = 0;
        while (k < from.size() && (used[k] || from[k] != s)) {
            ++k;
        }
        if (k == from.size()) {
            throw ShapeMismatch("strings are not permutations of each other");
        }
        used[k] = true;
        image.push_back(k);
    }
    return Permutation(std::move(image));
}

Functor lift_net_morphism(const NetMorphism& m, const LiftPolicy& policy)
{
    if (!m.grounded()) {
        throw UsageError("only grounded net morphisms can be lifted");
    }
    const auto& g = *m.grounding();
    const auto src = fold(*m.source());
    const auto tgt = fold(*m.target());
    std::vector<ObString> objects;
    for (auto s : src->objects()->symbols()) {
        objects.push_back({g(s)});
    }
    std::vector<GeneratorImage> gens;
    for (const auto& alpha : src->generators()) {
        const auto beta_id = m(alpha.id);
        const auto& beta = tgt->generator(beta_id);
        ObString fr;
        ObString fs;
        for (auto s : alpha.source) {
            fr.push_back(g(s));
        }
        for (auto s : alpha.target) {
            fs.push_back(g(s));
        }
        if (const auto it = policy.table.find(alpha.id); it != policy.table.end()) {
            gens.push_back({it->second.first, beta_id, it->second.second});
        } else {
            gens.push_back({leftmost_matching(fr, beta.source), beta_id, leftmost_matching(beta.target, fs)});
        }
    }
    return Functor::make(src, tgt, std::move(objects), std::move(gens));
}

History::History(PresentationRef presentation, ObString initial)
    : presentation_(std::move(presentation)), initial_(std::move(initial)), term_(Term::id(initial_))
{
    presentation_->check_string(initial_);
}

Multiset History::marking() const
{
    return multiplicity(presentation_->objects(), term_.cod());
}

History start_history(PresentationRef p, ObString initial)
{
    return History(std::move(p), std::move(initial));
}

History start_from_marking(PresentationRef p, const Multiset& m)
{
    if (!(*m.universe() == *p->objects())) {
        throw UniverseMismatch();
    }
    return History(std::move(p), order(m));
}

namespace {

void collect_choices(const ObString& cod, const ObString& source, std::vector<std::size_t>& current,
                     std::vector<bool>& used, std::vector<std::vector<std::size_t>>& out, std::size_t limit)
{
    if (out.size() >= limit) {
        return;
    }
    if (current.size() == source.size()) {
        out.push_back(current);
        return;
    }
    const auto want = source[current.size()];
    for (std::size_t k = 0; k < cod.size(); ++k) {
        if (!used[k] && cod[k] == want) {
            used[k] = true;
            current.push_back(k);
            collect_choices(cod, source, current, used, out, limit);
            current.pop_back();
            used[k] = false;
        }
    }
}

} // namespace

std::vector<std::vector<std::size_t>> valid_choices(const History& h, GeneratorId label, std::size_t limit)
{
    const auto& gen = h.presentation()->generator(label);
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> current;
    std::vector<bool> used(h.current().size(), false);
    collect_choices(h.current(), gen.source, current, used, out, limit);
    return out;
}

std::optional<std::vector<std::size_t>> leftmost_choice(const History& h, GeneratorId label)
{
    const auto& gen = h.presentation()->generator(label);
    const auto& cod = h.current();
    std::vector<bool> used(cod.size(), false);
    std::vector<std::size_t> out;
    for (auto s : gen.source) {
        std::size_t k = 0;
        while (k < cod.size() && (used[k] || cod[k] != s)) {
            ++k;
        }
        if (k == cod.size()) {
            return std::nullopt;
        }
        used[k] = true;
        out.push_back(k);
    }
    return out;
}

History fire_history(const History& h, GeneratorId label, const std::optional<std::vector<std::size_t>>& choice)
{
    const auto& gen = h.presentation()->generator(label);
    const auto& cod = h.current();
    auto leftmost = leftmost_choice(h, label);
    if (!leftmost) {
        throw NotEnabled("transition " + (gen.name.empty() ? std::to_string(label.value) : gen.name) +
                         " is not enabled");
    }
    std::vector<std::size_t> positions;
    if (choice) {
        positions = *choice;
        if (positions.size() != gen.source.size()) {
            throw BadChoice("choice selects " + std::to_string(positions.size()) + " tokens but the transition consumes " +
                            std::to_string(gen.source.size()));
        }
        std::vector<bool> used(cod.size(), false);
        for (std::size_t i = 0; i < positions.size(); ++i) {
            const auto k = positions[i];
            if (k >= cod.size() || used[k] || cod[k] != gen.source[i]) {
                throw BadChoice("position " + std::to_string(k) + " does not hold the expected token");
            }
            used[k] = true;
        }
    } else {
        positions = std::move(*leftmost);
    }

    std::vector<bool> taken(cod.size(), false);
    std::vector<std::size_t> image = positions;
    for (auto k : positions) {
        taken[k] = true;
    }
    ObString rest;
    for (std::size_t k = 0; k < cod.size(); ++k) {
        if (!taken[k]) {
            image.push_back(k);
            rest.push_back(cod[k]);
        }
    }
    const Permutation sigma(std::move(image));
    std::vector<Term> parts;
    if (h.term().kind() != Term::Kind::identity) {
        parts.push_back(h.term());
    }
    if (!sigma.is_identity()) {
        parts.push_back(sym_from_permutation(cod, sigma));
    }
    const Term g = Term::gen(gen);
    parts.push_back(rest.empty() ? g : Term::par(g, Term::id(rest)));

    History out = h;
    out.term_ = seq_all(parts, cod);
    out.log_.push_back(FiringRecord{label, std::move(positions)});
    return out;
}

History replay(PresentationRef p, ObString initial, const std::vector<FiringRecord>& log)
{
    History h = start_history(std::move(p), std::move(initial));
    for (const auto& r : log) {
        h = fire_history(h, r.label, r.positions);
    }
    return h;
}

std::vector<GeneratorId> token_history(const History& h, std::size_t position)
{
    if (position >= h.current().size()) {
        throw UsageError("output position " + std::to_string(position) + " out of range");
    }
    const Diagram d = to_diagram(h.term());
    std::vector<GeneratorId> out;
    for (auto b : causal_past(d, position)) {
        out.push_back(d.boxes[b].label);
    }
    return out;
}

bool marking_consistent(const Net& net, const History& h)
{
    Marking m(multiplicity(net.places(), h.initial()));
    for (const auto& r : h.log()) {
        m = fire(net, m, r.label);
    }
    return m.tokens() == h.marking();
}

} // namespace foldbox
