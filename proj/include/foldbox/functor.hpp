#pragma once

#include "foldbox/fssmc.hpp"

#include <vector>

namespace foldbox {

/// Image of a generator α: r → s under a generator-preserving functor:
/// σ ; β ; σ′ with σ = pre on F(r) and σ′ = post on cod(β).
struct GeneratorImage {
    Permutation pre;
    GeneratorId target;
    Permutation post;

    bool operator==(const GeneratorImage&) const = default;
};

/// A strict symmetric monoidal functor between FSSMCs that sends generators
/// to symmetry;generator;symmetry. Determined by its action on generating
/// objects and generators; validated on construction (ShapeMismatch).
class Functor {
public:
    static Functor make(PresentationRef source, PresentationRef target, std::vector<ObString> object_map,
                        std::vector<GeneratorImage> generator_map);
    static Functor identity(const PresentationRef& p);

    const PresentationRef& source() const { return source_; }
    const PresentationRef& target() const { return target_; }
    const ObString& map_object(SymbolId s) const;
    ObString map_string(const ObString& w) const;
    const GeneratorImage& map_generator(GeneratorId id) const;
    const std::vector<ObString>& object_map() const { return object_map_; }
    const std::vector<GeneratorImage>& generator_map() const { return generator_map_; }

    /// F(α) = σ ; β ; σ′ as a term of the target.
    Term image_of(GeneratorId id) const;
    Term map_term(const Term& t) const;

    /// Maps every generating object to a generating object.
    bool grounded() const;

    bool operator==(const Functor& other) const;

private:
    Functor(PresentationRef source, PresentationRef target, std::vector<ObString> object_map,
            std::vector<GeneratorImage> generator_map);

    PresentationRef source_;
    PresentationRef target_;
    std::vector<ObString> object_map_;
    std::vector<GeneratorImage> generator_map_;
};

/// First f, then g.
Functor compose(const Functor& f, const Functor& g);

/// The permutation F(σ) for a symmetry σ = p on w: blocks F(w_i) move as units.
Permutation block_permutation(const Functor& f, const ObString& w, const Permutation& p);

} // namespace foldbox
