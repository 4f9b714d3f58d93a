#include "foldbox/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace foldbox {

Limits parse_limits(const std::string& text, Limits base)
{
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part.erase(std::remove_if(part.begin(), part.end(), [](unsigned char c) { return std::isspace(c); }),
                   part.end());
        if (part.empty()) {
            continue;
        }
        const auto eq = part.find('=');
        if (eq == std::string::npos) {
            throw UsageError("limits: expected key=value, got \"" + part + "\"");
        }
        const auto key = part.substr(0, eq);
        const auto val = part.substr(eq + 1);
        std::uint64_t n = 0;
        const auto res = std::from_chars(val.data(), val.data() + val.size(), n);
        if (res.ec != std::errc{} || res.ptr != val.data() + val.size() || n == 0) {
            throw UsageError("limits: \"" + val + "\" is not a positive integer");
        }
        if (key == "nodes") {
            base.max_nodes = n;
        } else if (key == "tokens") {
            base.max_tokens = n;
        } else {
            throw UsageError("limits: unknown key \"" + key + "\"");
        }
    }
    return base;
}

Limits limits_from_env(Limits base)
{
    const char* v = std::getenv("FOLDBOX_LIMITS");
    return v == nullptr ? base : parse_limits(v, base);
}

std::optional<std::size_t> ReachabilityGraph::find(const Marking& m) const
{
    const auto it = index.find(m.tokens());
    if (it == index.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<TransitionId> ReachabilityGraph::path_to(std::size_t i) const
{
    std::vector<TransitionId> path;
    while (parent.at(i)) {
        path.push_back(parent[i]->second);
        i = parent[i]->first;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

ReachabilityGraph explore(const Net& net, const Marking& m0, Limits limits)
{
    if (!(*m0.tokens().universe() == *net.places())) {
        throw UniverseMismatch();
    }
    if (limits.max_nodes == 0 || limits.max_tokens == 0) {
        throw UsageError("exploration limits must be positive");
    }
    ReachabilityGraph g;
    g.limits = limits;
    const auto within = [&](const Marking& m) {
        return std::ranges::all_of(m.tokens().counts(), [&](const auto& kv) { return kv.second <= limits.max_tokens; });
    };
    if (!within(m0)) {
        g.truncated = true;
    }
    g.nodes.push_back(m0);
    g.parent.emplace_back();
    g.index.emplace(m0.tokens(), 0);
    const auto ids = net.transition_ids();
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        for (auto t : ids) {
            if (!enabled(net, g.nodes[i], t)) {
                continue;
            }
            Marking next = fire(net, g.nodes[i], t);
            if (const auto it = g.index.find(next.tokens()); it != g.index.end()) {
                g.edges.push_back(Edge{i, t, it->second});
                continue;
            }
            if (!within(next) || g.nodes.size() >= limits.max_nodes) {
                g.truncated = true;
                continue;
            }
            const auto j = g.nodes.size();
            g.index.emplace(next.tokens(), j);
            g.nodes.push_back(std::move(next));
            g.parent.emplace_back(std::make_pair(i, t));
            g.edges.push_back(Edge{i, t, j});
        }
    }
    return g;
}

PathResult reachable(const ReachabilityGraph& g, const Marking& target)
{
    PathResult r;
    if (const auto i = g.find(target)) {
        r.status = Verdict::yes;
        r.path = g.path_to(*i);
        r.marking = g.nodes[*i];
    } else {
        r.status = g.truncated ? Verdict::unknown : Verdict::no;
    }
    return r;
}

PathResult reachable(const Net& net, const Marking& m0, const Marking& target, Limits limits)
{
    if (!(*target.tokens().universe() == *net.places())) {
        throw UniverseMismatch();
    }
    return reachable(explore(net, m0, limits), target);
}

PathResult find_deadlock(const Net& net, const ReachabilityGraph& g)
{
    PathResult r;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (enabled_transitions(net, g.nodes[i]).empty()) {
            r.status = Verdict::yes;
            r.path = g.path_to(i);
            r.marking = g.nodes[i];
            return r;
        }
    }
    r.status = g.truncated ? Verdict::unknown : Verdict::no;
    return r;
}

PathResult find_deadlock(const Net& net, const Marking& m0, Limits limits)
{
    return find_deadlock(net, explore(net, m0, limits));
}

namespace {

/// Iterative Tarjan. Components come out sinks first.
std::vector<std::size_t> strongly_connected(const std::vector<std::vector<std::size_t>>& adj, std::size_t& count)
{
    const auto n = adj.size();
    constexpr auto unset = ~std::size_t{0};
    std::vector<std::size_t> index(n, unset);
    std::vector<std::size_t> low(n, 0);
    std::vector<std::size_t> comp(n, unset);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::pair<std::size_t, std::size_t>> call;
    std::size_t next_index = 0;
    count = 0;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unset) {
            continue;
        }
        call.emplace_back(root, 0);
        while (!call.empty()) {
            auto& [v, k] = call.back();
            if (k == 0 && index[v] == unset) {
                index[v] = low[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            if (k < adj[v].size()) {
                const auto w = adj[v][k++];
                if (index[w] == unset) {
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::size_t w = 0;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = count;
                } while (w != v);
                ++count;
            }
            const auto done = v;
            call.pop_back();
            if (!call.empty()) {
                low[call.back().first] = std::min(low[call.back().first], low[done]);
            }
        }
    }
    return comp;
}

} // namespace

std::vector<Liveness> liveness(const Net& net, const ReachabilityGraph& g)
{
    if (g.truncated) {
        throw AnalysisIncomplete("liveness needs a complete reachability graph; raise the exploration limits");
    }
    std::vector<std::vector<std::size_t>> adj(g.nodes.size());
    for (const auto& e : g.edges) {
        adj[e.from].push_back(e.to);
    }
    std::size_t count = 0;
    const auto comp = strongly_connected(adj, count);
    std::vector<std::set<std::size_t>> succ(count);
    for (const auto& e : g.edges) {
        if (comp[e.from] != comp[e.to]) {
            succ[comp[e.from]].insert(comp[e.to]);
        }
    }
    std::vector<Liveness> out;
    for (auto t : net.transition_ids()) {
        std::vector<bool> good(count, false);
        bool any = false;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            if (enabled(net, g.nodes[i], t)) {
                good[comp[i]] = true;
                any = true;
            }
        }
        if (!any) {
            out.push_back(Liveness::dead);
            continue;
        }
        // Components are numbered sinks first, so successors are final already.
        for (std::size_t c = 0; c < count; ++c) {
            if (!good[c]) {
                good[c] = std::ranges::any_of(succ[c], [&](std::size_t d) { return good[d]; });
            }
        }
        const bool live = std::ranges::all_of(good, [](bool b) { return b; });
        out.push_back(live ? Liveness::live : Liveness::neither);
    }
    return out;
}

std::vector<Liveness> liveness(const Net& net, const Marking& m0, Limits limits)
{
    return liveness(net, explore(net, m0, limits));
}

// Karp-Miller ----------------------------------------------------------------

namespace {

bool covers(const std::vector<Count>& m, const Multiset& need)
{
    return std::ranges::all_of(need.counts(), [&](const auto& kv) { return m[kv.first.index()] >= kv.second; });
}

std::vector<Count> km_fire(const Net& net, const std::vector<Count>& m, TransitionId t)
{
    auto out = m;
    for (const auto& [p, n] : net.input(t).counts()) {
        if (out[p.index()] != omega) {
            out[p.index()] -= n;
        }
    }
    for (const auto& [p, n] : net.output(t).counts()) {
        if (out[p.index()] != omega) {
            const auto v = checked_add(out[p.index()], n);
            if (v == omega) {
                throw Overflow();
            }
            out[p.index()] = v;
        }
    }
    return out;
}

} // namespace

CoverabilityTree karp_miller(const Net& net, const Marking& m0)
{
    if (!(*m0.tokens().universe() == *net.places())) {
        throw UniverseMismatch();
    }
    CoverabilityTree tree;
    std::set<std::vector<Count>> seen;
    tree.nodes.push_back(CoverabilityNode{m0.tokens().dense(), std::nullopt, std::nullopt});
    seen.insert(tree.nodes[0].marking);
    std::deque<std::size_t> work{0};
    const auto ids = net.transition_ids();
    while (!work.empty()) {
        const auto n = work.front();
        work.pop_front();
        for (auto t : ids) {
            if (!covers(tree.nodes[n].marking, net.input(t))) {
                continue;
            }
            auto next = km_fire(net, tree.nodes[n].marking, t);
            for (std::optional<std::size_t> a = n; a; a = tree.nodes[*a].parent) {
                const auto& anc = tree.nodes[*a].marking;
                bool geq = true;
                bool strict = false;
                for (std::size_t p = 0; p < next.size(); ++p) {
                    if (next[p] < anc[p]) {
                        geq = false;
                        break;
                    }
                    strict = strict || next[p] > anc[p];
                }
                if (geq && strict) {
                    for (std::size_t p = 0; p < next.size(); ++p) {
                        if (next[p] > anc[p]) {
                            next[p] = omega;
                        }
                    }
                }
            }
            if (tree.nodes.size() >= karp_miller_max_nodes) {
                throw AnalysisIncomplete("coverability tree exceeds " + std::to_string(karp_miller_max_nodes) +
                                         " nodes");
            }
            const bool fresh = seen.insert(next).second;
            tree.nodes.push_back(CoverabilityNode{std::move(next), n, t});
            if (fresh) {
                work.push_back(tree.nodes.size() - 1);
            }
        }
    }
    return tree;
}

std::vector<std::optional<Count>> boundedness(const CoverabilityTree& tree, std::size_t places)
{
    std::vector<std::optional<Count>> out(places, Count{0});
    for (const auto& node : tree.nodes) {
        for (std::size_t p = 0; p < places; ++p) {
            if (!out[p]) {
                continue;
            }
            if (node.marking[p] == omega) {
                out[p].reset();
            } else {
                out[p] = std::max(*out[p], node.marking[p]);
            }
        }
    }
    return out;
}

std::vector<std::optional<Count>> boundedness(const Net& net, const Marking& m0)
{
    return boundedness(karp_miller(net, m0), net.place_count());
}

// Predicates -----------------------------------------------------------------

struct Predicate::Node {
    enum class Kind { constant, negate, conj, disj, compare };
    enum class Op { lt, le, gt, ge, eq, ne };

    Kind kind = Kind::constant;
    bool value = false;
    std::vector<std::shared_ptr<const Node>> children;
    /// Linear form Σ coeff·place + constant, compared with zero.
    std::vector<std::pair<std::int64_t, SymbolId>> terms;
    std::int64_t constant = 0;
    Op op = Op::eq;

    bool eval(const Marking& m) const
    {
        switch (kind) {
        case Kind::constant:
            return value;
        case Kind::negate:
            return !children[0]->eval(m);
        case Kind::conj:
            return std::ranges::all_of(children, [&](const auto& c) { return c->eval(m); });
        case Kind::disj:
            return std::ranges::any_of(children, [&](const auto& c) { return c->eval(m); });
        case Kind::compare: {
            __int128 sum = constant;
            for (const auto& [c, p] : terms) {
                sum += static_cast<__int128>(c) * static_cast<__int128>(m[p]);
            }
            switch (op) {
            case Op::lt: return sum < 0;
            case Op::le: return sum <= 0;
            case Op::gt: return sum > 0;
            case Op::ge: return sum >= 0;
            case Op::eq: return sum == 0;
            case Op::ne: return sum != 0;
            }
        }
        }
        return false;
    }
};

namespace {

class PredicateParser {
public:
    using Node = Predicate::Node;
    using NodeRef = std::shared_ptr<const Node>;

    PredicateParser(const std::string& text, const Universe& places) : text_(text), places_(places) {}

    NodeRef parse()
    {
        auto n = disjunction();
        skip();
        if (pos_ != text_.size()) {
            error("unexpected input");
        }
        return n;
    }

private:
    [[noreturn]] void error(const std::string& what) const
    {
        throw SchemaError("predicate: " + what + " at offset " + std::to_string(pos_));
    }

    void skip()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool eat(const std::string& tok)
    {
        skip();
        if (text_.compare(pos_, tok.size(), tok) == 0) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    NodeRef disjunction()
    {
        auto first = conjunction();
        std::vector<NodeRef> parts{first};
        while (eat("||")) {
            parts.push_back(conjunction());
        }
        if (parts.size() == 1) {
            return first;
        }
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::disj;
        n->children = std::move(parts);
        return n;
    }

    NodeRef conjunction()
    {
        auto first = unary();
        std::vector<NodeRef> parts{first};
        while (eat("&&")) {
            parts.push_back(unary());
        }
        if (parts.size() == 1) {
            return first;
        }
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::conj;
        n->children = std::move(parts);
        return n;
    }

    NodeRef unary()
    {
        skip();
        if (pos_ < text_.size() && text_[pos_] == '!' && text_.compare(pos_, 2, "!=") != 0) {
            ++pos_;
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::negate;
            n->children.push_back(unary());
            return n;
        }
        if (eat("(")) {
            auto inner = disjunction();
            if (!eat(")")) {
                error("expected ')'");
            }
            return inner;
        }
        const auto save = pos_;
        const auto word = identifier();
        if (word == "true" || word == "false") {
            auto n = std::make_shared<Node>();
            n->value = word == "true";
            return n;
        }
        pos_ = save;
        return comparison();
    }

    std::string identifier()
    {
        skip();
        const auto start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) != 0 ||
                                       text_[pos_] == '_' || text_[pos_] == '.')) {
            ++pos_;
        }
        return text_.substr(start, pos_ - start);
    }

    /// Adds sign·(sum) into n.
    void sum(Node& n, std::int64_t sign)
    {
        bool first = true;
        while (true) {
            std::int64_t s = sign;
            if (!first) {
                if (eat("+")) {
                } else if (eat("-")) {
                    s = -sign;
                } else {
                    return;
                }
            } else if (eat("-")) {
                s = -sign;
            }
            first = false;
            term(n, s);
        }
    }

    void term(Node& n, std::int64_t sign)
    {
        skip();
        if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0) {
            const auto start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0) {
                ++pos_;
            }
            std::int64_t v = 0;
            const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
            if (res.ec != std::errc{}) {
                error("number out of range");
            }
            if (eat("*")) {
                n.terms.emplace_back(sign * v, place());
            } else {
                n.constant += sign * v;
            }
            return;
        }
        n.terms.emplace_back(sign, place());
    }

    SymbolId place()
    {
        const auto start = pos_;
        const auto name = identifier();
        if (name.empty()) {
            pos_ = start;
            error("expected a place name or number");
        }
        const auto p = places_.find(name);
        if (!p) {
            pos_ = start;
            error("unknown place \"" + name + "\"");
        }
        return *p;
    }

    NodeRef comparison()
    {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::compare;
        sum(*n, 1);
        static const std::pair<const char*, Node::Op> ops[] = {{"<=", Node::Op::le}, {">=", Node::Op::ge},
                                                               {"==", Node::Op::eq}, {"!=", Node::Op::ne},
                                                               {"<", Node::Op::lt},  {">", Node::Op::gt}};
        bool found = false;
        for (const auto& [tok, op] : ops) {
            if (eat(tok)) {
                n->op = op;
                found = true;
                break;
            }
        }
        if (!found) {
            error("expected a comparison operator");
        }
        sum(*n, -1);
        return n;
    }

    const std::string& text_;
    const Universe& places_;
    std::size_t pos_ = 0;
};

} // namespace

Predicate Predicate::parse(const std::string& text, const Universe& places)
{
    Predicate p;
    p.text_ = text;
    p.root_ = PredicateParser(text, places).parse();
    return p;
}

bool Predicate::operator()(const Marking& m) const
{
    return root_->eval(m);
}

PredicateResult check_predicate(const ReachabilityGraph& g, const Predicate& p)
{
    PredicateResult r;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (!p(g.nodes[i])) {
            r.holds = Verdict::no;
            r.counterexample = g.path_to(i);
            r.violating = g.nodes[i];
            return r;
        }
    }
    r.holds = g.truncated ? Verdict::unknown : Verdict::yes;
    return r;
}

PredicateResult check_predicate(const Net& net, const Marking& m0, const Predicate& p, Limits limits)
{
    return check_predicate(explore(net, m0, limits), p);
}

// Reports --------------------------------------------------------------------

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    case Verdict::unknown: return "unknown";
    }
    return "unknown";
}

const char* to_string(Liveness l)
{
    switch (l) {
    case Liveness::dead: return "dead";
    case Liveness::live: return "live";
    case Liveness::neither: return "neither";
    }
    return "neither";
}

nlohmann::ordered_json marking_json(const Multiset& m)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [p, n] : m.counts()) {
        j[m.universe()->name(p)] = n;
    }
    return j;
}

nlohmann::ordered_json path_json(const Net& net, const std::vector<TransitionId>& path)
{
    auto j = nlohmann::ordered_json::array();
    for (auto t : path) {
        j.push_back(net.transition(t).name);
    }
    return j;
}

nlohmann::ordered_json analysis_report(const Net& net, const Marking& m0,
                                       const std::map<std::string, Predicate>& predicates, Limits limits)
{
    using nlohmann::ordered_json;
    const auto g = explore(net, m0, limits);
    ordered_json report;
    report["graph"] = {{"nodes", g.nodes.size()},
                       {"edges", g.edges.size()},
                       {"complete", !g.truncated},
                       {"limits", {{"nodes", limits.max_nodes}, {"tokens", limits.max_tokens}}}};

    ordered_json bounds;
    try {
        const auto b = boundedness(net, m0);
        ordered_json per_place = ordered_json::object();
        bool bounded = true;
        Count max_bound = 0;
        for (auto p : net.places()->symbols()) {
            const auto& v = b[p.index()];
            if (v) {
                per_place[net.places()->name(p)] = *v;
                max_bound = std::max(max_bound, *v);
            } else {
                per_place[net.places()->name(p)] = "unbounded";
                bounded = false;
            }
        }
        bounds["status"] = "complete";
        bounds["places"] = std::move(per_place);
        bounds["bounded"] = bounded;
        bounds["safe"] = bounded && max_bound <= 1;
        bounds["max_bound"] = bounded ? ordered_json(max_bound) : ordered_json(nullptr);
    } catch (const AnalysisIncomplete& e) {
        bounds["status"] = "unknown";
        bounds["reason"] = e.what();
    }
    report["boundedness"] = std::move(bounds);

    const auto dl = find_deadlock(net, g);
    ordered_json deadlock{{"status", to_string(dl.status)}};
    if (dl.status == Verdict::yes) {
        deadlock["path"] = path_json(net, dl.path);
        deadlock["marking"] = marking_json(dl.marking->tokens());
    }
    report["deadlock"] = std::move(deadlock);

    if (g.truncated) {
        report["liveness"] = "unknown";
    } else {
        ordered_json live = ordered_json::object();
        const auto l = liveness(net, g);
        for (auto t : net.transition_ids()) {
            live[net.transition(t).name] = to_string(l[t.index()]);
        }
        report["liveness"] = std::move(live);
    }

    ordered_json preds = ordered_json::object();
    for (const auto& [name, p] : predicates) {
        const auto r = check_predicate(g, p);
        ordered_json jp{{"predicate", p.text()}};
        jp["status"] = r.holds == Verdict::yes ? "holds" : (r.holds == Verdict::no ? "violated" : "unknown");
        if (r.holds == Verdict::no) {
            jp["counterexample"] = path_json(net, r.counterexample);
            jp["marking"] = marking_json(r.violating->tokens());
        }
        preds[name] = std::move(jp);
    }
    report["predicates"] = std::move(preds);
    return report;
}

std::string reachability_dot(const Net& net, const ReachabilityGraph& g)
{
    std::ostringstream out;
    out << "digraph reachability {\n  node [shape=box];\n";
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        out << "  m" << i << " [label=\"" << to_string(g.nodes[i].tokens()) << "\"];\n";
    }
    for (const auto& e : g.edges) {
        out << "  m" << e.from << " -> m" << e.to << " [label=\"" << net.transition(e.transition).name << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

} // namespace foldbox
