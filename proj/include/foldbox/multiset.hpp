#pragma once

#include "foldbox/ids.hpp"

#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace foldbox {

using Count = std::uint64_t;

/// A finite, ordered symbol universe S = {1, ..., n} with display names.
/// Universes compare structurally: same size and same names.
class Universe {
public:
    explicit Universe(std::size_t size, const std::string& prefix = "p");
    explicit Universe(std::vector<std::string> names);

    std::size_t size() const { return names_.size(); }
    bool contains(SymbolId s) const { return s.valid() && s.value <= names_.size(); }
    const std::string& name(SymbolId s) const;
    std::optional<SymbolId> find(const std::string& name) const;
    const std::vector<std::string>& names() const { return names_; }
    std::vector<SymbolId> symbols() const;

    bool operator==(const Universe& other) const { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
};

using UniverseRef = std::shared_ptr<const Universe>;

UniverseRef make_universe(std::size_t size, const std::string& prefix = "p");
UniverseRef make_universe(std::vector<std::string> names);

/// S1 ⊔ S2: left symbols keep their index, right symbols are shifted by |S1|.
/// Names are tagged "(name,left)" / "(name,right)".
UniverseRef tagged_sum(const UniverseRef& left, const UniverseRef& right);

bool same_universe(const UniverseRef& a, const UniverseRef& b);

/// Finite multiset over a universe. Counts are stored sparsely: a symbol
/// with count zero is absent, so equality is map equality.
class Multiset {
public:
    explicit Multiset(UniverseRef universe);
    Multiset(UniverseRef universe, std::map<SymbolId, Count> counts);
    Multiset(UniverseRef universe, std::initializer_list<std::pair<const SymbolId, Count>> counts);

    const UniverseRef& universe() const { return universe_; }
    const std::map<SymbolId, Count>& counts() const { return counts_; }
    Count count(SymbolId s) const;
    Count operator[](SymbolId s) const { return count(s); }
    bool empty() const { return counts_.empty(); }

    /// Dense view indexed by SymbolId::index().
    std::vector<Count> dense() const;
    static Multiset from_dense(UniverseRef universe, const std::vector<Count>& dense);

    bool operator==(const Multiset& other) const;

private:
    UniverseRef universe_;
    std::map<SymbolId, Count> counts_;
};

Multiset zero(const UniverseRef& universe);
Multiset singleton(const UniverseRef& universe, SymbolId s, Count n = 1);

Multiset union_of(const Multiset& a, const Multiset& b);
/// a − b; throws NotIncluded unless b ⊆ a.
Multiset difference(const Multiset& a, const Multiset& b);
/// a ⊆ b pointwise.
bool is_included(const Multiset& a, const Multiset& b);
Multiset scalar(Count n, const Multiset& a);
/// Result lives over tagged_sum(a.universe(), b.universe()).
Multiset disjoint_union(const Multiset& a, const Multiset& b);
/// Same, reusing an already built tagged universe (must match the operands).
Multiset disjoint_union(const Multiset& a, const Multiset& b, const UniverseRef& tagged);
Count cardinality(const Multiset& a);

std::string to_string(const Multiset& m);

/// Multiset homomorphism S^N → S'^N, determined by the image of each symbol.
class MultisetHom {
public:
    MultisetHom(UniverseRef source, UniverseRef target, std::vector<Multiset> images);

    static MultisetHom identity(const UniverseRef& universe);

    const UniverseRef& source() const { return source_; }
    const UniverseRef& target() const { return target_; }
    const Multiset& image(SymbolId s) const;

    bool operator==(const MultisetHom& other) const;

private:
    UniverseRef source_;
    UniverseRef target_;
    std::vector<Multiset> images_;
};

/// A plain function between base sets, i.e. the data of a grounded hom.
class GroundedHom {
public:
    GroundedHom(UniverseRef source, UniverseRef target, std::vector<SymbolId> base);

    static GroundedHom identity(const UniverseRef& universe);

    const UniverseRef& source() const { return source_; }
    const UniverseRef& target() const { return target_; }
    SymbolId operator()(SymbolId s) const;
    const std::vector<SymbolId>& base() const { return base_; }

    bool operator==(const GroundedHom& other) const;

private:
    UniverseRef source_;
    UniverseRef target_;
    std::vector<SymbolId> base_;
};

/// X ↦ ⋃_s X(s)·h(s).
Multiset apply_hom(const MultisetHom& h, const Multiset& a);
MultisetHom ground(const GroundedHom& base);
/// First h1, then h2.
MultisetHom compose(const MultisetHom& h1, const MultisetHom& h2);
GroundedHom compose(const GroundedHom& b1, const GroundedHom& b2);

Count checked_add(Count a, Count b);
Count checked_mul(Count a, Count b);

} // namespace foldbox

template <>
struct std::hash<foldbox::Multiset> {
    std::size_t operator()(const foldbox::Multiset& m) const noexcept;
};
