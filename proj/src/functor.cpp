#include "foldbox/functor.hpp"

namespace foldbox {

Functor::Functor(PresentationRef source, PresentationRef target, std::vector<ObString> object_map,
                 std::vector<GeneratorImage> generator_map)
    : source_(std::move(source)), target_(std::move(target)), object_map_(std::move(object_map)),
      generator_map_(std::move(generator_map))
{
}

Functor Functor::make(PresentationRef source, PresentationRef target, std::vector<ObString> object_map,
                      std::vector<GeneratorImage> generator_map)
{
    if (object_map.size() != source->object_count()) {
        throw ShapeMismatch("object map must cover every generating object");
    }
    if (generator_map.size() != source->generator_count()) {
        throw ShapeMismatch("generator map must cover every generator");
    }
    for (const auto& w : object_map) {
        target->check_string(w);
    }
    Functor f(std::move(source), std::move(target), std::move(object_map), std::move(generator_map));
    for (const auto& g : f.source_->generators()) {
        const auto& img = f.generator_map_[g.id.index()];
        const auto fail = [&](const std::string& why) {
            throw ShapeMismatch("generator " + (g.name.empty() ? "g" + std::to_string(g.id.value) : g.name) + ": " +
                                why);
        };
        if (!img.target.valid() || img.target.value > f.target_->generator_count()) {
            fail("image is not a generator of the target");
        }
        const auto& beta = f.target_->generator(img.target);
        const auto fr = f.map_string(g.source);
        const auto fs = f.map_string(g.target);
        if (img.pre.size() != fr.size() || apply(img.pre, fr) != beta.source) {
            fail("pre-symmetry does not carry F(source) onto the image's source");
        }
        if (img.post.size() != beta.target.size() || apply(img.post, beta.target) != fs) {
            fail("post-symmetry does not carry the image's target onto F(target)");
        }
    }
    return f;
}

Functor Functor::identity(const PresentationRef& p)
{
    std::vector<ObString> objects;
    for (auto s : p->objects()->symbols()) {
        objects.push_back({s});
    }
    std::vector<GeneratorImage> gens;
    for (const auto& g : p->generators()) {
        gens.push_back({Permutation::identity(g.source.size()), g.id, Permutation::identity(g.target.size())});
    }
    return make(p, p, std::move(objects), std::move(gens));
}

const ObString& Functor::map_object(SymbolId s) const
{
    if (!source_->objects()->contains(s)) {
        throw UnknownId("object " + std::to_string(s.value) + " not in functor source");
    }
    return object_map_[s.index()];
}

ObString Functor::map_string(const ObString& w) const
{
    ObString out;
    for (auto s : w) {
        const auto& img = map_object(s);
        out.insert(out.end(), img.begin(), img.end());
    }
    return out;
}

const GeneratorImage& Functor::map_generator(GeneratorId id) const
{
    source_->generator(id);
    return generator_map_[id.index()];
}

Term Functor::image_of(GeneratorId id) const
{
    const auto& g = source_->generator(id);
    const auto& img = generator_map_[id.index()];
    const auto& beta = target_->generator(img.target);
    std::vector<Term> parts;
    if (!img.pre.is_identity()) {
        parts.push_back(sym_from_permutation(map_string(g.source), img.pre));
    }
    parts.push_back(Term::gen(beta));
    if (!img.post.is_identity()) {
        parts.push_back(sym_from_permutation(beta.target, img.post));
    }
    return seq_all(parts, {});
}

Term Functor::map_term(const Term& t) const
{
    switch (t.kind()) {
    case Term::Kind::identity:
        return Term::id(map_string(t.word()));
    case Term::Kind::symmetry:
        return Term::sym(map_string(t.word()), map_string(t.right_word()));
    case Term::Kind::generator:
        return image_of(t.label());
    case Term::Kind::seq:
        return Term::seq(map_term(t.lhs()), map_term(t.rhs()));
    case Term::Kind::par:
        return Term::par(map_term(t.lhs()), map_term(t.rhs()));
    }
    throw InternalError("unreachable term kind");
}

bool Functor::grounded() const
{
    for (const auto& w : object_map_) {
        if (w.size() != 1) {
            return false;
        }
    }
    return true;
}

bool Functor::operator==(const Functor& other) const
{
    return *source_ == *other.source_ && *target_ == *other.target_ && object_map_ == other.object_map_ &&
           generator_map_ == other.generator_map_;
}

Permutation block_permutation(const Functor& f, const ObString& w, const Permutation& p)
{
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> lengths;
    std::size_t total = 0;
    for (auto s : w) {
        offsets.push_back(total);
        lengths.push_back(f.map_object(s).size());
        total += lengths.back();
    }
    std::vector<std::size_t> image;
    image.reserve(total);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto block = p[i];
        for (std::size_t e = 0; e < lengths[block]; ++e) {
            image.push_back(offsets[block] + e);
        }
    }
    return Permutation(std::move(image));
}

Functor compose(const Functor& f, const Functor& g)
{
    if (!(*f.target() == *g.source())) {
        throw EndpointMismatch("cannot compose functors: target of the first is not the source of the second");
    }
    std::vector<ObString> objects;
    for (const auto& w : f.object_map()) {
        objects.push_back(g.map_string(w));
    }
    std::vector<GeneratorImage> gens;
    for (const auto& alpha : f.source()->generators()) {
        const auto& fi = f.map_generator(alpha.id);
        const auto& beta = f.target()->generator(fi.target);
        const auto& gi = g.map_generator(fi.target);
        // G(σ1) ; σ2 ; γ ; σ2′ ; G(σ1′)
        const auto pre = block_permutation(g, f.map_string(alpha.source), fi.pre).then(gi.pre);
        const auto post = gi.post.then(block_permutation(g, beta.target, fi.post));
        gens.push_back({pre, gi.target, post});
    }
    return Functor::make(f.source(), g.target(), std::move(objects), std::move(gens));
}

} // namespace foldbox
