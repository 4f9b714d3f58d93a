#pragma once

#include "foldbox/bridge.hpp"
#include "foldbox/codec.hpp"
#include "foldbox/fssmc.hpp"
#include "foldbox/functor.hpp"
#include "foldbox/multiset.hpp"
#include "foldbox/petri.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace testkit {

using namespace foldbox;

/// FOLDBOX_SEED, or 20191015 when unset.
std::uint64_t seed();
/// A generator seeded from seed() mixed with `stream`, so suites do not
/// share a sequence.
std::mt19937_64 rng(std::uint64_t stream);

std::size_t uniform(std::mt19937_64& g, std::size_t lo, std::size_t hi);
bool coin(std::mt19937_64& g);

std::string nets_dir();
NetDocument load(const std::string& file);
std::vector<std::string> bundled_nets();

Multiset random_multiset(std::mt19937_64& g, const UniverseRef& u, Count max_count);
ObString random_word(std::mt19937_64& g, std::size_t symbols, std::size_t max_len);
Permutation random_permutation(std::mt19937_64& g, std::size_t n);

struct NetShape {
    std::size_t max_places = 8;
    std::size_t max_transitions = 8;
    Count max_weight = 3;
    bool allow_empty_net = true;
};
NetRef random_net(std::mt19937_64& g, const NetShape& shape = {});
PresentationRef random_presentation(std::mt19937_64& g, std::size_t max_objects, std::size_t max_generators,
                                    std::size_t max_len);

/// A random well-typed term with the given domain.
Term random_term_from(std::mt19937_64& g, const Presentation& p, const ObString& dom, int depth);
/// A random well-typed term with a random domain.
Term random_term(std::mt19937_64& g, const Presentation& p, int depth);

/// A grounded morphism into `target` from a random net built by pulling back
/// transitions of `target` along a random place map.
NetMorphism random_grounded_morphism(std::mt19937_64& g, const NetRef& target);

/// Position-tracing oracle for box-free terms: result[i] is the input
/// position feeding output i.
std::vector<std::size_t> trace_wires(const Term& t);

/// Brute-force isomorphism of diagrams fixing the boundary (small inputs).
bool diagrams_isomorphic(const Diagram& a, const Diagram& b);

/// Pointwise multiset oracle over dense vectors.
std::vector<Count> dense_add(const std::vector<Count>& a, const std::vector<Count>& b);

} // namespace testkit

namespace testkit {

/// Grounded morphisms m1 : N1 → N2 and m2 : N2 → N3 whose lifts do not
/// compose to the lift of their composite.
struct LiftWitness {
    foldbox::NetMorphism m1;
    foldbox::NetMorphism m2;
};
LiftWitness lift_witness();

struct AxiomInstance {
    foldbox::Term lhs;
    foldbox::Term rhs;
};
/// One instance of quotient schema `k` (0..9) built from random well-typed
/// subterms: unit and associativity of composition, unit and associativity of
/// tensor, tensor of identities, interchange, hexagon, involution,
/// naturality, symmetry with the unit.
AxiomInstance axiom_instance(std::mt19937_64& g, const foldbox::Presentation& p, int k);

} // namespace testkit
