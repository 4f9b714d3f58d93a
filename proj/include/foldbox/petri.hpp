#pragma once

#include "foldbox/error.hpp"
#include "foldbox/multiset.hpp"

#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace foldbox {

struct Transition {
    std::string name;
    Multiset input;
    Multiset output;
};

/// N = (Pl, Tr, in, out). Places are the symbols of a universe; transitions
/// are indexed 1..n in declaration order.
class Net {
public:
    Net(UniverseRef places, std::vector<Transition> transitions);

    const UniverseRef& places() const { return places_; }
    std::size_t place_count() const { return places_->size(); }
    std::size_t transition_count() const { return transitions_.size(); }
    const std::vector<Transition>& transitions() const { return transitions_; }
    std::vector<TransitionId> transition_ids() const;

    const Transition& transition(TransitionId t) const;
    const Multiset& input(TransitionId t) const { return transition(t).input; }
    const Multiset& output(TransitionId t) const { return transition(t).output; }
    std::optional<TransitionId> find_transition(const std::string& name) const;

    bool operator==(const Net& other) const;

private:
    UniverseRef places_;
    std::vector<Transition> transitions_;
};

using NetRef = std::shared_ptr<const Net>;

/// A state of a net: a multiset of tokens over its places.
class Marking {
public:
    explicit Marking(Multiset tokens) : tokens_(std::move(tokens)) {}

    const Multiset& tokens() const { return tokens_; }
    Count operator[](SymbolId p) const { return tokens_.count(p); }

    bool operator==(const Marking& other) const = default;

private:
    Multiset tokens_;
};

Marking empty_marking(const Net& net);

bool enabled(const Net& net, const Marking& m, TransitionId t);
bool enabled_set(const Net& net, const Marking& m, const std::set<TransitionId>& u);
std::vector<TransitionId> enabled_transitions(const Net& net, const Marking& m);

/// Throws NotEnabled when in(t) ⊄ m.
Marking fire(const Net& net, const Marking& m, TransitionId t);
/// Fires every transition of u once, simultaneously.
Marking fire_set(const Net& net, const Marking& m, const std::set<TransitionId>& u);

/// ⟨f, g⟩ : N → M. Construction verifies that g;in_M∘f = in_N;g and the same
/// for out, so every NetMorphism value is a valid morphism.
class NetMorphism {
public:
    enum class Side { input, output };

    static NetMorphism make(NetRef source, NetRef target, std::vector<TransitionId> transition_map,
                            MultisetHom place_map);
    static NetMorphism make(NetRef source, NetRef target, std::vector<TransitionId> transition_map,
                            GroundedHom place_map);
    static NetMorphism identity(const NetRef& net);

    const NetRef& source() const { return source_; }
    const NetRef& target() const { return target_; }
    TransitionId operator()(TransitionId t) const;
    const std::vector<TransitionId>& transition_map() const { return transition_map_; }
    const MultisetHom& place_map() const { return place_map_; }
    bool grounded() const { return grounding_.has_value(); }
    const std::optional<GroundedHom>& grounding() const { return grounding_; }

    /// Structural: equal endpoints and equal maps (the grounded flag is not compared).
    bool operator==(const NetMorphism& other) const;

private:
    NetMorphism(NetRef source, NetRef target, std::vector<TransitionId> transition_map,
                MultisetHom place_map, std::optional<GroundedHom> grounding);

    NetRef source_;
    NetRef target_;
    std::vector<TransitionId> transition_map_;
    MultisetHom place_map_;
    std::optional<GroundedHom> grounding_;
};

class SquareViolation : public UsageError {
public:
    SquareViolation(TransitionId t, NetMorphism::Side side, const std::string& detail);

    TransitionId transition() const { return transition_; }
    NetMorphism::Side side() const { return side_; }

private:
    TransitionId transition_;
    NetMorphism::Side side_;
};

/// First a, then b.
NetMorphism compose(const NetMorphism& a, const NetMorphism& b);

/// Places as circles, transitions as boxes, arc weights as labels.
std::string to_dot(const Net& net, const Marking* marking = nullptr);

} // namespace foldbox
