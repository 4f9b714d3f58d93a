#include "foldbox/fssmc.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace foldbox {

ObString concat(const ObString& a, const ObString& b)
{
    ObString out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

std::string to_string(const ObString& w, const Universe* names)
{
    std::string out = "[";
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i != 0) {
            out += ',';
        }
        out += names != nullptr ? names->name(w[i]) : std::to_string(w[i].value);
    }
    return out + "]";
}

// Presentation -------------------------------------------------------------

Presentation::Presentation(UniverseRef objects, std::vector<GenDecl> generators)
    : objects_(std::move(objects)), generators_(std::move(generators))
{
    for (std::size_t k = 0; k < generators_.size(); ++k) {
        auto& g = generators_[k];
        if (!g.id.valid()) {
            g.id = GeneratorId(static_cast<std::uint32_t>(k + 1));
        }
        if (g.id.value != k + 1) {
            throw UsageError("generator labels must be their 1-based positions");
        }
        check_string(g.source);
        check_string(g.target);
    }
}

const GenDecl& Presentation::generator(GeneratorId id) const
{
    if (!id.valid() || id.value > generators_.size()) {
        throw UnknownId("unknown generator g" + std::to_string(id.value));
    }
    return generators_[id.index()];
}

std::optional<GeneratorId> Presentation::find_generator(const std::string& name) const
{
    for (const auto& g : generators_) {
        if (g.name == name) {
            return g.id;
        }
    }
    return std::nullopt;
}

void Presentation::check_string(const ObString& w) const
{
    for (auto s : w) {
        if (!objects_->contains(s)) {
            throw UnknownId("object " + std::to_string(s.value) + " is not a generating object");
        }
    }
}

bool Presentation::operator==(const Presentation& other) const
{
    return same_universe(objects_, other.objects_) && generators_ == other.generators_;
}

// Permutation --------------------------------------------------------------

Permutation::Permutation(std::vector<std::size_t> image) : image_(std::move(image))
{
    std::vector<bool> seen(image_.size(), false);
    for (auto i : image_) {
        if (i >= image_.size() || seen[i]) {
            throw UsageError("not a permutation");
        }
        seen[i] = true;
    }
}

Permutation Permutation::identity(std::size_t n)
{
    std::vector<std::size_t> image(n);
    for (std::size_t i = 0; i < n; ++i) {
        image[i] = i;
    }
    return Permutation(std::move(image));
}

bool Permutation::is_identity() const
{
    for (std::size_t i = 0; i < image_.size(); ++i) {
        if (image_[i] != i) {
            return false;
        }
    }
    return true;
}

Permutation Permutation::inverse() const
{
    std::vector<std::size_t> inv(image_.size());
    for (std::size_t i = 0; i < image_.size(); ++i) {
        inv[image_[i]] = i;
    }
    return Permutation(std::move(inv));
}

Permutation Permutation::then(const Permutation& next) const
{
    if (next.size() != size()) {
        throw UsageError("permutation sizes differ");
    }
    std::vector<std::size_t> out(size());
    for (std::size_t i = 0; i < size(); ++i) {
        out[i] = image_[next[i]];
    }
    return Permutation(std::move(out));
}

ObString apply(const Permutation& p, const ObString& w)
{
    if (p.size() != w.size()) {
        throw ShapeMismatch("permutation of size " + std::to_string(p.size()) + " applied to a string of length " +
                            std::to_string(w.size()));
    }
    ObString out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        out[i] = w[p[i]];
    }
    return out;
}

// Term ---------------------------------------------------------------------

struct Term::Node {
    Kind kind;
    ObString dom;
    ObString cod;
    ObString word;
    ObString right;
    GeneratorId label;
    std::optional<Term> lhs;
    std::optional<Term> rhs;
};

Term Term::id(ObString w)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::identity;
    n->dom = w;
    n->cod = w;
    n->word = std::move(w);
    return Term(std::move(n));
}

Term Term::sym(ObString u, ObString v)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::symmetry;
    n->dom = concat(u, v);
    n->cod = concat(v, u);
    n->word = std::move(u);
    n->right = std::move(v);
    return Term(std::move(n));
}

Term Term::gen(const GenDecl& decl)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::generator;
    n->dom = decl.source;
    n->cod = decl.target;
    n->label = decl.id;
    return Term(std::move(n));
}

Term Term::gen(const Presentation& p, GeneratorId id)
{
    return gen(p.generator(id));
}

Term Term::seq(const Term& a, const Term& b)
{
    if (a.cod() != b.dom()) {
        throw TypeMismatch("sequential composition: codomain " + to_string(a.cod()) + " does not match domain " +
                           to_string(b.dom()));
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::seq;
    n->dom = a.dom();
    n->cod = b.cod();
    n->lhs = a;
    n->rhs = b;
    return Term(std::move(n));
}

Term Term::par(const Term& a, const Term& b)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::par;
    n->dom = concat(a.dom(), b.dom());
    n->cod = concat(a.cod(), b.cod());
    n->lhs = a;
    n->rhs = b;
    return Term(std::move(n));
}

Term::Kind Term::kind() const { return node_->kind; }
const ObString& Term::dom() const { return node_->dom; }
const ObString& Term::cod() const { return node_->cod; }
const ObString& Term::word() const { return node_->word; }
const ObString& Term::right_word() const { return node_->right; }
GeneratorId Term::label() const { return node_->label; }
const Term& Term::lhs() const { return *node_->lhs; }
const Term& Term::rhs() const { return *node_->rhs; }

bool Term::operator==(const Term& other) const
{
    if (node_ == other.node_) {
        return true;
    }
    if (kind() != other.kind() || dom() != other.dom() || cod() != other.cod()) {
        return false;
    }
    switch (kind()) {
    case Kind::identity:
        return true;
    case Kind::symmetry:
        return word() == other.word();
    case Kind::generator:
        return label() == other.label();
    case Kind::seq:
    case Kind::par:
        return lhs() == other.lhs() && rhs() == other.rhs();
    }
    return false;
}

Term seq_all(const std::vector<Term>& terms, const ObString& w)
{
    if (terms.empty()) {
        return Term::id(w);
    }
    Term acc = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) {
        acc = Term::seq(acc, terms[i]);
    }
    return acc;
}

std::size_t term_size(const Term& t)
{
    switch (t.kind()) {
    case Term::Kind::seq:
    case Term::Kind::par:
        return 1 + term_size(t.lhs()) + term_size(t.rhs());
    default:
        return 1;
    }
}

std::size_t generator_count(const Term& t)
{
    switch (t.kind()) {
    case Term::Kind::generator:
        return 1;
    case Term::Kind::seq:
    case Term::Kind::par:
        return generator_count(t.lhs()) + generator_count(t.rhs());
    default:
        return 0;
    }
}

namespace {

Term adjacent_swap(const ObString& w, std::size_t k)
{
    ObString prefix(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k));
    ObString suffix(w.begin() + static_cast<std::ptrdiff_t>(k + 2), w.end());
    Term swap = Term::sym({w[k]}, {w[k + 1]});
    if (!prefix.empty()) {
        swap = Term::par(Term::id(prefix), swap);
    }
    if (!suffix.empty()) {
        swap = Term::par(swap, Term::id(suffix));
    }
    return swap;
}

} // namespace

Term sym_from_permutation(const ObString& w, const Permutation& p)
{
    if (p.size() != w.size()) {
        throw ShapeMismatch("permutation arity " + std::to_string(p.size()) + " does not match string length " +
                            std::to_string(w.size()));
    }
    // cur[i] = original position currently sitting at i.
    std::vector<std::size_t> cur(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        cur[i] = i;
    }
    ObString word = w;
    std::vector<Term> steps;
    for (std::size_t i = 0; i < w.size(); ++i) {
        auto j = static_cast<std::size_t>(std::find(cur.begin(), cur.end(), p[i]) - cur.begin());
        while (j > i) {
            steps.push_back(adjacent_swap(word, j - 1));
            std::swap(cur[j - 1], cur[j]);
            std::swap(word[j - 1], word[j]);
            --j;
        }
    }
    return seq_all(steps, w);
}

// Text grammar ---------------------------------------------------------------

namespace {

std::string print_word(const ObString& w)
{
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i != 0) {
            out += ',';
        }
        out += std::to_string(w[i].value);
    }
    return out;
}

void print_into(const Term& t, std::string& out)
{
    switch (t.kind()) {
    case Term::Kind::identity:
        out += "id[" + print_word(t.word()) + "]";
        return;
    case Term::Kind::symmetry:
        out += "sym[" + print_word(t.word()) + "|" + print_word(t.right_word()) + "]";
        return;
    case Term::Kind::generator:
        out += "g" + std::to_string(t.label().value);
        return;
    case Term::Kind::seq: {
        print_into(t.lhs(), out);
        out += " ; ";
        const bool wrap = t.rhs().kind() == Term::Kind::seq;
        out += wrap ? "(" : "";
        print_into(t.rhs(), out);
        out += wrap ? ")" : "";
        return;
    }
    case Term::Kind::par: {
        const bool wrap_l = t.lhs().kind() == Term::Kind::seq;
        const bool wrap_r = t.rhs().kind() == Term::Kind::seq || t.rhs().kind() == Term::Kind::par;
        out += wrap_l ? "(" : "";
        print_into(t.lhs(), out);
        out += wrap_l ? ")" : "";
        out += " * ";
        out += wrap_r ? "(" : "";
        print_into(t.rhs(), out);
        out += wrap_r ? ")" : "";
        return;
    }
    }
}

class TermParser {
public:
    TermParser(const std::string& text, const Presentation& p) : text_(text), pres_(p) {}

    Term parse()
    {
        Term t = parse_seq();
        skip_ws();
        if (pos_ != text_.size()) {
            fail("unexpected trailing input");
        }
        return t;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw SchemaError("term syntax error at offset " + std::to_string(pos_) + ": " + what);
    }

    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) {
            ++pos_;
        }
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) {
            fail(std::string("expected '") + c + "'");
        }
    }

    bool accept_keyword(const std::string& kw)
    {
        skip_ws();
        if (text_.compare(pos_, kw.size(), kw) == 0) {
            pos_ += kw.size();
            return true;
        }
        return false;
    }

    std::uint32_t number()
    {
        skip_ws();
        const auto start = pos_;
        std::uint64_t v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0) {
            v = v * 10 + static_cast<std::uint64_t>(text_[pos_] - '0');
            if (v > 0xffffffffULL) {
                fail("number too large");
            }
            ++pos_;
        }
        if (pos_ == start) {
            fail("expected a number");
        }
        return static_cast<std::uint32_t>(v);
    }

    ObString word(char terminator)
    {
        ObString w;
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == terminator) {
            return w;
        }
        do {
            SymbolId s(number());
            if (!pres_.objects()->contains(s)) {
                fail("object " + std::to_string(s.value) + " is not a generating object");
            }
            w.push_back(s);
        } while (accept(','));
        return w;
    }

    Term parse_seq()
    {
        Term acc = parse_par();
        while (accept(';')) {
            acc = Term::seq(acc, parse_par());
        }
        return acc;
    }

    Term parse_par()
    {
        Term acc = parse_atom();
        while (accept('*')) {
            acc = Term::par(acc, parse_atom());
        }
        return acc;
    }

    Term parse_atom()
    {
        if (accept('(')) {
            Term t = parse_seq();
            expect(')');
            return t;
        }
        if (accept_keyword("id[")) {
            auto w = word(']');
            expect(']');
            return Term::id(std::move(w));
        }
        if (accept_keyword("sym[")) {
            auto u = word('|');
            expect('|');
            auto v = word(']');
            expect(']');
            return Term::sym(std::move(u), std::move(v));
        }
        if (accept_keyword("g")) {
            GeneratorId id(number());
            if (!id.valid() || id.value > pres_.generator_count()) {
                fail("unknown generator g" + std::to_string(id.value));
            }
            return Term::gen(pres_, id);
        }
        fail("expected id[..], sym[..|..], g<k> or '('");
    }

    const std::string& text_;
    const Presentation& pres_;
    std::size_t pos_ = 0;
};

} // namespace

std::string print_term(const Term& t)
{
    std::string out;
    print_into(t, out);
    return out;
}

Term parse_term(const std::string& text, const Presentation& p)
{
    return TermParser(text, p).parse();
}

} // namespace foldbox
