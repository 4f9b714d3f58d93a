#pragma once

#include "foldbox/petri.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace foldbox {

struct Limits {
    std::size_t max_nodes = 100000;
    Count max_tokens = 64;
};

/// Reads FOLDBOX_LIMITS ("nodes=N,tokens=K", either part optional) on top of `base`.
Limits limits_from_env(Limits base = {});
Limits parse_limits(const std::string& text, Limits base = {});

struct Edge {
    std::size_t from;
    TransitionId transition;
    std::size_t to;
};

/// Breadth-first reachability graph. Nodes are numbered in discovery order;
/// every edge satisfies fire(nodes[from], transition) = nodes[to].
struct ReachabilityGraph {
    std::vector<Marking> nodes;
    std::vector<Edge> edges;
    /// BFS tree: parent[i] = (predecessor, transition); root has none.
    std::vector<std::optional<std::pair<std::size_t, TransitionId>>> parent;
    bool truncated = false;
    Limits limits;

    std::optional<std::size_t> find(const Marking& m) const;
    /// Shortest firing sequence from the root to node i.
    std::vector<TransitionId> path_to(std::size_t i) const;

    std::unordered_map<Multiset, std::size_t> index;
};

ReachabilityGraph explore(const Net& net, const Marking& m0, Limits limits = {});

enum class Verdict { yes, no, unknown };

struct PathResult {
    Verdict status = Verdict::unknown;
    std::vector<TransitionId> path;
    std::optional<Marking> marking;
};

/// yes with a shortest witness, no when the graph is complete, else unknown.
PathResult reachable(const Net& net, const Marking& m0, const Marking& target, Limits limits = {});
PathResult reachable(const ReachabilityGraph& g, const Marking& target);

/// yes with the deadlocked marking and a path to it.
PathResult find_deadlock(const Net& net, const Marking& m0, Limits limits = {});
PathResult find_deadlock(const Net& net, const ReachabilityGraph& g);

enum class Liveness { dead, live, neither };

/// Throws AnalysisIncomplete on a truncated graph.
std::vector<Liveness> liveness(const Net& net, const Marking& m0, Limits limits = {});
std::vector<Liveness> liveness(const Net& net, const ReachabilityGraph& g);

/// Token count ω stands for "unbounded".
inline constexpr Count omega = ~Count{0};

struct CoverabilityNode {
    std::vector<Count> marking;
    std::optional<std::size_t> parent;
    std::optional<TransitionId> via;
};

struct CoverabilityTree {
    std::vector<CoverabilityNode> nodes;
};

inline constexpr std::size_t karp_miller_max_nodes = 1000000;

/// Karp-Miller tree; throws AnalysisIncomplete past karp_miller_max_nodes.
CoverabilityTree karp_miller(const Net& net, const Marking& m0);

/// Per place: the bound, or nothing when unbounded.
std::vector<std::optional<Count>> boundedness(const Net& net, const Marking& m0);
std::vector<std::optional<Count>> boundedness(const CoverabilityTree& tree, std::size_t places);

/// Boolean expression over place token counts, e.g. "green1 + green2 <= 1".
class Predicate {
public:
    static Predicate parse(const std::string& text, const Universe& places);
    bool operator()(const Marking& m) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

struct PredicateResult {
    Verdict holds = Verdict::unknown;
    std::vector<TransitionId> counterexample;
    std::optional<Marking> violating;
};

PredicateResult check_predicate(const Net& net, const Marking& m0, const Predicate& p, Limits limits = {});
PredicateResult check_predicate(const ReachabilityGraph& g, const Predicate& p);

const char* to_string(Verdict v);
/// Nonzero counts keyed by place name, in place order.
nlohmann::ordered_json marking_json(const Multiset& m);
nlohmann::ordered_json path_json(const Net& net, const std::vector<TransitionId>& path);

const char* to_string(Liveness l);

/// Full report: graph size and completeness, bounds, deadlock, liveness and
/// the given named predicates.
nlohmann::ordered_json analysis_report(const Net& net, const Marking& m0,
                                       const std::map<std::string, Predicate>& predicates, Limits limits = {});

std::string reachability_dot(const Net& net, const ReachabilityGraph& g);

} // namespace foldbox
