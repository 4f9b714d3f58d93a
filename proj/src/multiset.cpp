#include "foldbox/multiset.hpp"

#include "foldbox/error.hpp"

#include <limits>
#include <sstream>

namespace foldbox {

Universe::Universe(std::size_t size, const std::string& prefix)
{
    names_.reserve(size);
    for (std::size_t i = 1; i <= size; ++i) {
        names_.push_back(prefix + std::to_string(i));
    }
}

Universe::Universe(std::vector<std::string> names) : names_(std::move(names)) {}

const std::string& Universe::name(SymbolId s) const
{
    if (!contains(s)) {
        throw UnknownId("symbol " + std::to_string(s.value) + " not in universe");
    }
    return names_[s.index()];
}

std::optional<SymbolId> Universe::find(const std::string& name) const
{
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) {
            return SymbolId(static_cast<std::uint32_t>(i + 1));
        }
    }
    return std::nullopt;
}

std::vector<SymbolId> Universe::symbols() const
{
    std::vector<SymbolId> out;
    out.reserve(names_.size());
    for (std::size_t i = 1; i <= names_.size(); ++i) {
        out.emplace_back(static_cast<std::uint32_t>(i));
    }
    return out;
}

UniverseRef make_universe(std::size_t size, const std::string& prefix)
{
    return std::make_shared<const Universe>(size, prefix);
}

UniverseRef make_universe(std::vector<std::string> names)
{
    return std::make_shared<const Universe>(std::move(names));
}

UniverseRef tagged_sum(const UniverseRef& left, const UniverseRef& right)
{
    std::vector<std::string> names;
    names.reserve(left->size() + right->size());
    for (const auto& n : left->names()) {
        names.push_back("(" + n + ",left)");
    }
    for (const auto& n : right->names()) {
        names.push_back("(" + n + ",right)");
    }
    return make_universe(std::move(names));
}

bool same_universe(const UniverseRef& a, const UniverseRef& b)
{
    return a == b || *a == *b;
}

Count checked_add(Count a, Count b)
{
    Count r;
    if (__builtin_add_overflow(a, b, &r)) {
        throw Overflow();
    }
    return r;
}

Count checked_mul(Count a, Count b)
{
    Count r;
    if (__builtin_mul_overflow(a, b, &r)) {
        throw Overflow();
    }
    return r;
}

// Multiset -----------------------------------------------------------------

Multiset::Multiset(UniverseRef universe) : universe_(std::move(universe)) {}

Multiset::Multiset(UniverseRef universe, std::map<SymbolId, Count> counts)
    : universe_(std::move(universe)), counts_(std::move(counts))
{
    for (auto it = counts_.begin(); it != counts_.end();) {
        if (!universe_->contains(it->first)) {
            throw UnknownId("symbol " + std::to_string(it->first.value) + " not in universe");
        }
        it = it->second == 0 ? counts_.erase(it) : std::next(it);
    }
}

Multiset::Multiset(UniverseRef universe, std::initializer_list<std::pair<const SymbolId, Count>> counts)
    : Multiset(std::move(universe), std::map<SymbolId, Count>(counts))
{
}

Count Multiset::count(SymbolId s) const
{
    auto it = counts_.find(s);
    return it == counts_.end() ? 0 : it->second;
}

std::vector<Count> Multiset::dense() const
{
    std::vector<Count> out(universe_->size(), 0);
    for (const auto& [s, n] : counts_) {
        out[s.index()] = n;
    }
    return out;
}

Multiset Multiset::from_dense(UniverseRef universe, const std::vector<Count>& dense)
{
    if (dense.size() != universe->size()) {
        throw UniverseMismatch();
    }
    std::map<SymbolId, Count> counts;
    for (std::size_t i = 0; i < dense.size(); ++i) {
        if (dense[i] != 0) {
            counts.emplace(SymbolId(static_cast<std::uint32_t>(i + 1)), dense[i]);
        }
    }
    return Multiset(std::move(universe), std::move(counts));
}

bool Multiset::operator==(const Multiset& other) const
{
    return same_universe(universe_, other.universe_) && counts_ == other.counts_;
}

Multiset zero(const UniverseRef& universe)
{
    return Multiset(universe);
}

Multiset singleton(const UniverseRef& universe, SymbolId s, Count n)
{
    return Multiset(universe, {{s, n}});
}

namespace {

void require_same(const Multiset& a, const Multiset& b)
{
    if (!same_universe(a.universe(), b.universe())) {
        throw UniverseMismatch();
    }
}

} // namespace

Multiset union_of(const Multiset& a, const Multiset& b)
{
    require_same(a, b);
    auto counts = a.counts();
    for (const auto& [s, n] : b.counts()) {
        auto& slot = counts[s];
        slot = checked_add(slot, n);
    }
    return Multiset(a.universe(), std::move(counts));
}

Multiset difference(const Multiset& a, const Multiset& b)
{
    require_same(a, b);
    if (!is_included(b, a)) {
        throw NotIncluded();
    }
    auto counts = a.counts();
    for (const auto& [s, n] : b.counts()) {
        counts[s] -= n;
    }
    return Multiset(a.universe(), std::move(counts));
}

bool is_included(const Multiset& a, const Multiset& b)
{
    require_same(a, b);
    for (const auto& [s, n] : a.counts()) {
        if (n > b.count(s)) {
            return false;
        }
    }
    return true;
}

Multiset scalar(Count n, const Multiset& a)
{
    std::map<SymbolId, Count> counts;
    if (n != 0) {
        for (const auto& [s, c] : a.counts()) {
            counts.emplace(s, checked_mul(n, c));
        }
    }
    return Multiset(a.universe(), std::move(counts));
}

Multiset disjoint_union(const Multiset& a, const Multiset& b)
{
    return disjoint_union(a, b, tagged_sum(a.universe(), b.universe()));
}

Multiset disjoint_union(const Multiset& a, const Multiset& b, const UniverseRef& tagged)
{
    const auto shift = static_cast<std::uint32_t>(a.universe()->size());
    if (tagged->size() != shift + b.universe()->size()) {
        throw UniverseMismatch();
    }
    std::map<SymbolId, Count> counts = a.counts();
    for (const auto& [s, n] : b.counts()) {
        counts.emplace(SymbolId(s.value + shift), n);
    }
    return Multiset(tagged, std::move(counts));
}

Count cardinality(const Multiset& a)
{
    Count total = 0;
    for (const auto& [s, n] : a.counts()) {
        total = checked_add(total, n);
    }
    return total;
}

std::string to_string(const Multiset& m)
{
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (const auto& [s, n] : m.counts()) {
        os << (first ? "" : ",") << m.universe()->name(s) << ':' << n;
        first = false;
    }
    os << '}';
    return os.str();
}

// Homomorphisms ------------------------------------------------------------

MultisetHom::MultisetHom(UniverseRef source, UniverseRef target, std::vector<Multiset> images)
    : source_(std::move(source)), target_(std::move(target)), images_(std::move(images))
{
    if (images_.size() != source_->size()) {
        throw UsageError("multiset homomorphism must be total on its source universe");
    }
    for (const auto& img : images_) {
        if (!same_universe(img.universe(), target_)) {
            throw UniverseMismatch();
        }
    }
}

MultisetHom MultisetHom::identity(const UniverseRef& universe)
{
    return ground(GroundedHom::identity(universe));
}

const Multiset& MultisetHom::image(SymbolId s) const
{
    if (!source_->contains(s)) {
        throw UnknownId("symbol " + std::to_string(s.value) + " not in hom source");
    }
    return images_[s.index()];
}

bool MultisetHom::operator==(const MultisetHom& other) const
{
    return same_universe(source_, other.source_) && same_universe(target_, other.target_) &&
           images_ == other.images_;
}

GroundedHom::GroundedHom(UniverseRef source, UniverseRef target, std::vector<SymbolId> base)
    : source_(std::move(source)), target_(std::move(target)), base_(std::move(base))
{
    if (base_.size() != source_->size()) {
        throw UsageError("grounded map must be total on its source universe");
    }
    for (auto s : base_) {
        if (!target_->contains(s)) {
            throw UnknownId("grounded map image " + std::to_string(s.value) + " not in target");
        }
    }
}

GroundedHom GroundedHom::identity(const UniverseRef& universe)
{
    return GroundedHom(universe, universe, universe->symbols());
}

SymbolId GroundedHom::operator()(SymbolId s) const
{
    if (!source_->contains(s)) {
        throw UnknownId("symbol " + std::to_string(s.value) + " not in grounded map source");
    }
    return base_[s.index()];
}

bool GroundedHom::operator==(const GroundedHom& other) const
{
    return same_universe(source_, other.source_) && same_universe(target_, other.target_) &&
           base_ == other.base_;
}

Multiset apply_hom(const MultisetHom& h, const Multiset& a)
{
    if (!same_universe(a.universe(), h.source())) {
        throw UniverseMismatch();
    }
    Multiset out = zero(h.target());
    for (const auto& [s, n] : a.counts()) {
        out = union_of(out, scalar(n, h.image(s)));
    }
    return out;
}

MultisetHom ground(const GroundedHom& base)
{
    std::vector<Multiset> images;
    images.reserve(base.base().size());
    for (auto s : base.base()) {
        images.push_back(singleton(base.target(), s));
    }
    return MultisetHom(base.source(), base.target(), std::move(images));
}

MultisetHom compose(const MultisetHom& h1, const MultisetHom& h2)
{
    if (!same_universe(h1.target(), h2.source())) {
        throw UniverseMismatch();
    }
    std::vector<Multiset> images;
    for (auto s : h1.source()->symbols()) {
        images.push_back(apply_hom(h2, h1.image(s)));
    }
    return MultisetHom(h1.source(), h2.target(), std::move(images));
}

GroundedHom compose(const GroundedHom& b1, const GroundedHom& b2)
{
    if (!same_universe(b1.target(), b2.source())) {
        throw UniverseMismatch();
    }
    std::vector<SymbolId> base;
    for (auto s : b1.base()) {
        base.push_back(b2(s));
    }
    return GroundedHom(b1.source(), b2.target(), std::move(base));
}

} // namespace foldbox

std::size_t std::hash<foldbox::Multiset>::operator()(const foldbox::Multiset& m) const noexcept
{
    std::size_t h = 0xcbf29ce484222325ULL;
    for (const auto& [s, n] : m.counts()) {
        h ^= (static_cast<std::size_t>(s.value) << 32) ^ n;
        h *= 0x100000001b3ULL;
    }
    return h;
}
