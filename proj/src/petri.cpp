#include "foldbox/petri.hpp"

#include "foldbox/error.hpp"

#include <sstream>

namespace foldbox {

Net::Net(UniverseRef places, std::vector<Transition> transitions)
    : places_(std::move(places)), transitions_(std::move(transitions))
{
    for (const auto& t : transitions_) {
        if (!same_universe(t.input.universe(), places_) || !same_universe(t.output.universe(), places_)) {
            throw UniverseMismatch();
        }
    }
}

std::vector<TransitionId> Net::transition_ids() const
{
    std::vector<TransitionId> ids;
    ids.reserve(transitions_.size());
    for (std::size_t i = 1; i <= transitions_.size(); ++i) {
        ids.emplace_back(static_cast<std::uint32_t>(i));
    }
    return ids;
}

const Transition& Net::transition(TransitionId t) const
{
    if (!t.valid() || t.value > transitions_.size()) {
        throw UnknownId("unknown transition " + std::to_string(t.value));
    }
    return transitions_[t.index()];
}

std::optional<TransitionId> Net::find_transition(const std::string& name) const
{
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
        if (transitions_[i].name == name) {
            return TransitionId(static_cast<std::uint32_t>(i + 1));
        }
    }
    return std::nullopt;
}

bool Net::operator==(const Net& other) const
{
    if (!same_universe(places_, other.places_) || transitions_.size() != other.transitions_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
        const auto& a = transitions_[i];
        const auto& b = other.transitions_[i];
        if (a.name != b.name || !(a.input == b.input) || !(a.output == b.output)) {
            return false;
        }
    }
    return true;
}

Marking empty_marking(const Net& net)
{
    return Marking(zero(net.places()));
}

namespace {

void require_places(const Net& net, const Marking& m)
{
    if (!same_universe(net.places(), m.tokens().universe())) {
        throw UniverseMismatch();
    }
}

Multiset union_over(const Net& net, const std::set<TransitionId>& u, bool inputs)
{
    Multiset acc = zero(net.places());
    for (auto t : u) {
        acc = union_of(acc, inputs ? net.input(t) : net.output(t));
    }
    return acc;
}

} // namespace

bool enabled(const Net& net, const Marking& m, TransitionId t)
{
    require_places(net, m);
    return is_included(net.input(t), m.tokens());
}

bool enabled_set(const Net& net, const Marking& m, const std::set<TransitionId>& u)
{
    require_places(net, m);
    return is_included(union_over(net, u, true), m.tokens());
}

std::vector<TransitionId> enabled_transitions(const Net& net, const Marking& m)
{
    std::vector<TransitionId> out;
    for (auto t : net.transition_ids()) {
        if (enabled(net, m, t)) {
            out.push_back(t);
        }
    }
    return out;
}

Marking fire(const Net& net, const Marking& m, TransitionId t)
{
    if (!enabled(net, m, t)) {
        throw NotEnabled("transition " + net.transition(t).name + " is not enabled at " + to_string(m.tokens()));
    }
    return Marking(union_of(difference(m.tokens(), net.input(t)), net.output(t)));
}

Marking fire_set(const Net& net, const Marking& m, const std::set<TransitionId>& u)
{
    if (!enabled_set(net, m, u)) {
        throw NotEnabled("transition set is not enabled at " + to_string(m.tokens()));
    }
    return Marking(union_of(difference(m.tokens(), union_over(net, u, true)), union_over(net, u, false)));
}

// Morphisms ----------------------------------------------------------------

SquareViolation::SquareViolation(TransitionId t, NetMorphism::Side side, const std::string& detail)
    : UsageError("square violation at transition " + std::to_string(t.value) + " (" +
                 (side == NetMorphism::Side::input ? "input" : "output") + "): " + detail),
      transition_(t), side_(side)
{
}

NetMorphism::NetMorphism(NetRef source, NetRef target, std::vector<TransitionId> transition_map,
                         MultisetHom place_map, std::optional<GroundedHom> grounding)
    : source_(std::move(source)), target_(std::move(target)), transition_map_(std::move(transition_map)),
      place_map_(std::move(place_map)), grounding_(std::move(grounding))
{
    if (transition_map_.size() != source_->transition_count()) {
        throw UsageError("transition map must be total on the source net");
    }
    if (!same_universe(place_map_.source(), source_->places()) ||
        !same_universe(place_map_.target(), target_->places())) {
        throw UniverseMismatch();
    }
    for (auto t : source_->transition_ids()) {
        const auto u = transition_map_[t.index()];
        const auto& image = target_->transition(u);
        const auto in_image = apply_hom(place_map_, source_->input(t));
        if (!(in_image == image.input)) {
            throw SquareViolation(t, Side::input, to_string(in_image) + " != " + to_string(image.input));
        }
        const auto out_image = apply_hom(place_map_, source_->output(t));
        if (!(out_image == image.output)) {
            throw SquareViolation(t, Side::output, to_string(out_image) + " != " + to_string(image.output));
        }
    }
}

NetMorphism NetMorphism::make(NetRef source, NetRef target, std::vector<TransitionId> transition_map,
                              MultisetHom place_map)
{
    return NetMorphism(std::move(source), std::move(target), std::move(transition_map), std::move(place_map),
                       std::nullopt);
}

NetMorphism NetMorphism::make(NetRef source, NetRef target, std::vector<TransitionId> transition_map,
                              GroundedHom place_map)
{
    auto hom = ground(place_map);
    return NetMorphism(std::move(source), std::move(target), std::move(transition_map), std::move(hom),
                       std::move(place_map));
}

NetMorphism NetMorphism::identity(const NetRef& net)
{
    return make(net, net, net->transition_ids(), GroundedHom::identity(net->places()));
}

TransitionId NetMorphism::operator()(TransitionId t) const
{
    source_->transition(t);
    return transition_map_[t.index()];
}

bool NetMorphism::operator==(const NetMorphism& other) const
{
    return *source_ == *other.source_ && *target_ == *other.target_ &&
           transition_map_ == other.transition_map_ && place_map_ == other.place_map_;
}

NetMorphism compose(const NetMorphism& a, const NetMorphism& b)
{
    if (!(*a.target() == *b.source())) {
        throw EndpointMismatch("cannot compose net morphisms: target of the first is not the source of the second");
    }
    std::vector<TransitionId> tmap;
    for (auto t : a.transition_map()) {
        tmap.push_back(b(t));
    }
    if (a.grounded() && b.grounded()) {
        return NetMorphism::make(a.source(), b.target(), std::move(tmap), compose(*a.grounding(), *b.grounding()));
    }
    return NetMorphism::make(a.source(), b.target(), std::move(tmap), compose(a.place_map(), b.place_map()));
}

namespace {

std::string quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out + "\"";
}

} // namespace

std::string to_dot(const Net& net, const Marking* marking)
{
    std::ostringstream os;
    os << "digraph net {\n  rankdir=LR;\n";
    for (auto p : net.places()->symbols()) {
        os << "  p" << p.value << " [shape=circle,label=" << quote(net.places()->name(p));
        if (marking != nullptr && (*marking)[p] != 0) {
            os << ",xlabel=\"" << (*marking)[p] << "\"";
        }
        os << "];\n";
    }
    for (auto t : net.transition_ids()) {
        os << "  t" << t.value << " [shape=box,label=" << quote(net.transition(t).name) << "];\n";
    }
    for (auto t : net.transition_ids()) {
        for (const auto& [p, n] : net.input(t).counts()) {
            os << "  p" << p.value << " -> t" << t.value;
            if (n != 1) {
                os << " [label=\"" << n << "\"]";
            }
            os << ";\n";
        }
        for (const auto& [p, n] : net.output(t).counts()) {
            os << "  t" << t.value << " -> p" << p.value;
            if (n != 1) {
                os << " [label=\"" << n << "\"]";
            }
            os << ";\n";
        }
    }
    os << "}\n";
    return os.str();
}

} // namespace foldbox
