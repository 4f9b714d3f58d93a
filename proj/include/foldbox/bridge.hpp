#pragma once

#include "foldbox/diagram.hpp"
#include "foldbox/functor.hpp"
#include "foldbox/petri.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace foldbox {

/// Counts occurrences of each symbol of w.
Multiset multiplicity(const UniverseRef& universe, const ObString& w);

/// Canonical ordering: symbols ascending by index, each repeated X(s) times.
ObString order(const Multiset& x);

/// Fold(N): places become generating objects, transition t becomes a generator
/// order(in(t)) → order(out(t)) with the same label and name.
PresentationRef fold(const Net& net);

/// UnFold(C): generators become transitions via multiplicity.
NetRef unfold(const Presentation& p);

/// UnFold on a generator-preserving functor.
NetMorphism unfold_functor(const Functor& f);

/// Per-generator symmetries for lifting; generators absent from the table use
/// leftmost matching.
struct LiftPolicy {
    std::map<TransitionId, std::pair<Permutation, Permutation>> table;
};

/// A functor between Fold(N) and Fold(M) that unfolds to m. Requires m grounded.
Functor lift_net_morphism(const NetMorphism& m, const LiftPolicy& policy = {});

/// Permutation p with apply(p, from) = to, matching equal symbols leftmost first.
Permutation leftmost_matching(const ObString& from, const ObString& to);

struct FiringRecord {
    GeneratorId label;
    std::vector<std::size_t> positions;

    bool operator==(const FiringRecord&) const = default;
};

/// An execution of a net as a morphism of its Fold, together with the log of
/// firings that built it.
class History {
public:
    History(PresentationRef presentation, ObString initial);

    const PresentationRef& presentation() const { return presentation_; }
    const ObString& initial() const { return initial_; }
    const Term& term() const { return term_; }
    const std::vector<FiringRecord>& log() const { return log_; }
    const ObString& current() const { return term_.cod(); }
    Multiset marking() const;

private:
    friend History fire_history(const History& h, GeneratorId label,
                                const std::optional<std::vector<std::size_t>>& choice);

    PresentationRef presentation_;
    ObString initial_;
    Term term_;
    std::vector<FiringRecord> log_;
};

History start_history(PresentationRef p, ObString initial);
History start_from_marking(PresentationRef p, const Multiset& m);

/// Injective position tuples of cod(h) whose symbols spell the source of the
/// generator, in lexicographic order, at most `limit` of them.
std::vector<std::vector<std::size_t>> valid_choices(const History& h, GeneratorId label, std::size_t limit = 256);

/// The leftmost valid choice, or nothing if the generator is not enabled.
std::optional<std::vector<std::size_t>> leftmost_choice(const History& h, GeneratorId label);

/// term ; σ ; (label ⊗ id(rest)) where σ brings the chosen positions to the
/// front. Throws NotEnabled or BadChoice.
History fire_history(const History& h, GeneratorId label,
                     const std::optional<std::vector<std::size_t>>& choice = std::nullopt);

History replay(PresentationRef p, ObString initial, const std::vector<FiringRecord>& log);

/// Generator labels in the causal past of output wire `position`, earliest first.
std::vector<GeneratorId> token_history(const History& h, std::size_t position);

/// Replays the log through Petri firing and compares with multiplicity(cod).
bool marking_consistent(const Net& net, const History& h);

} // namespace foldbox
