#pragma once

#include "foldbox/error.hpp"
#include "foldbox/multiset.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace foldbox {

/// Objects of a free strict monoidal category: strings over the generating
/// objects. Concatenation is the tensor, the empty string is the unit.
using ObString = std::vector<SymbolId>;

ObString concat(const ObString& a, const ObString& b);
std::string to_string(const ObString& w, const Universe* names = nullptr);

struct GenDecl {
    GeneratorId id;
    std::string name;
    ObString source;
    ObString target;

    bool operator==(const GenDecl&) const = default;
};

/// Generating objects S and generating morphisms T of an FSSMC. Generator k
/// has label k (1-based position).
class Presentation {
public:
    Presentation(UniverseRef objects, std::vector<GenDecl> generators);

    const UniverseRef& objects() const { return objects_; }
    std::size_t object_count() const { return objects_->size(); }
    const std::vector<GenDecl>& generators() const { return generators_; }
    std::size_t generator_count() const { return generators_.size(); }
    const GenDecl& generator(GeneratorId id) const;
    std::optional<GeneratorId> find_generator(const std::string& name) const;
    void check_string(const ObString& w) const;

    bool operator==(const Presentation& other) const;

private:
    UniverseRef objects_;
    std::vector<GenDecl> generators_;
};

using PresentationRef = std::shared_ptr<const Presentation>;

/// A bijection on positions 0..n-1. `image[i]` is the input position that
/// lands at output position i, so apply(p, w)[i] = w[p[i]].
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<std::size_t> image);

    static Permutation identity(std::size_t n);

    std::size_t size() const { return image_.size(); }
    std::size_t operator[](std::size_t i) const { return image_[i]; }
    const std::vector<std::size_t>& image() const { return image_; }
    bool is_identity() const;
    Permutation inverse() const;
    /// Apply this, then `next`.
    Permutation then(const Permutation& next) const;

    bool operator==(const Permutation&) const = default;

private:
    std::vector<std::size_t> image_;
};

ObString apply(const Permutation& p, const ObString& w);

/// Morphism terms of an FSSMC: Id(w) | Sym(u, v) | Gen(α) | Seq(a, b) | Par(a, b).
/// Terms are immutable and share subterms. Every term is well typed: Seq
/// checks cod(a) = dom(b) on construction and throws TypeMismatch otherwise.
class Term {
public:
    enum class Kind { identity, symmetry, generator, seq, par };

    static Term id(ObString w);
    static Term sym(ObString u, ObString v);
    static Term gen(const GenDecl& decl);
    static Term gen(const Presentation& p, GeneratorId id);
    static Term seq(const Term& a, const Term& b);
    static Term par(const Term& a, const Term& b);

    Kind kind() const;
    const ObString& dom() const;
    const ObString& cod() const;

    /// Id word, or left word of a Sym.
    const ObString& word() const;
    /// Right word of a Sym.
    const ObString& right_word() const;
    GeneratorId label() const;
    const Term& lhs() const;
    const Term& rhs() const;

    /// Syntactic equality (same tree). Use fssmc::equal for equality in the category.
    bool operator==(const Term& other) const;

private:
    struct Node;
    explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Seq over a list; id(w) for an empty list.
Term seq_all(const std::vector<Term>& terms, const ObString& w);
std::size_t term_size(const Term& t);
std::size_t generator_count(const Term& t);

/// Realizes p on w with adjacent transpositions; Id(w) for the identity.
Term sym_from_permutation(const ObString& w, const Permutation& p);

/// Pretty-printer for the textual grammar (see docs/term-grammar.md).
std::string print_term(const Term& t);
/// Parser for the same grammar; generators are resolved through `p`.
Term parse_term(const std::string& text, const Presentation& p);

} // namespace foldbox
