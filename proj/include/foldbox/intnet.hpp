#pragma once

#include "foldbox/petri.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace foldbox {

using IntCount = std::int64_t;

struct IntTransition {
    std::string name;
    std::map<SymbolId, IntCount> input;
    std::map<SymbolId, IntCount> output;
};

/// A net whose arc weights and markings range over the integers.
class IntNet {
public:
    IntNet(UniverseRef places, std::vector<IntTransition> transitions);
    static IntNet from_net(const Net& net);

    const UniverseRef& places() const { return places_; }
    std::size_t place_count() const { return places_->size(); }
    std::size_t transition_count() const { return transitions_.size(); }
    const std::vector<IntTransition>& transitions() const { return transitions_; }
    const IntTransition& transition(TransitionId t) const;
    std::optional<TransitionId> find_transition(const std::string& name) const;

    bool operator==(const IntNet& other) const;

private:
    UniverseRef places_;
    std::vector<IntTransition> transitions_;
};

class IntMarking {
public:
    explicit IntMarking(std::size_t places) : tokens_(places, 0) {}
    explicit IntMarking(std::vector<IntCount> tokens) : tokens_(std::move(tokens)) {}
    static IntMarking from_marking(const Marking& m);

    IntCount operator[](SymbolId p) const { return tokens_.at(p.index()); }
    void set(SymbolId p, IntCount n) { tokens_.at(p.index()) = n; }
    const std::vector<IntCount>& tokens() const { return tokens_; }

    bool operator==(const IntMarking&) const = default;

private:
    std::vector<IntCount> tokens_;
};

/// "{X:-1,Y:1,Z:1}" with zero places omitted.
std::string to_string(const IntMarking& m, const Universe& names);

/// Integer transitions are always enabled: m − in(t) + out(t).
IntMarking int_fire(const IntNet& net, const IntMarking& m, TransitionId t);
IntMarking int_fire_all(const IntNet& net, const IntMarking& m, const std::vector<TransitionId>& seq);

bool is_legal(const IntMarking& m);

/// Every prefix of `seq` (including the empty one) leaves a legal marking.
bool prefix_legal(const IntNet& net, const IntMarking& m0, const std::vector<TransitionId>& seq);

struct Legalization {
    enum class Status { found, impossible, unknown };
    Status status = Status::unknown;
    std::vector<TransitionId> order;
};

inline constexpr std::size_t legalize_max_length = 10;

/// Searches the permutations of `seq` for one whose prefixes are all legal,
/// preferring the fewest inversions relative to `seq`. Sequences longer than
/// legalize_max_length are reported as unknown. Throws UsageError if m0 is illegal.
Legalization legalize(const IntNet& net, const IntMarking& m0, const std::vector<TransitionId>& seq);

} // namespace foldbox
