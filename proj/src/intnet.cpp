#include "foldbox/intnet.hpp"

#include <algorithm>
#include <limits>

namespace foldbox {

namespace {

IntCount add(IntCount a, IntCount b)
{
    IntCount r = 0;
    if (__builtin_add_overflow(a, b, &r)) {
        throw Overflow();
    }
    return r;
}

IntCount sub(IntCount a, IntCount b)
{
    IntCount r = 0;
    if (__builtin_sub_overflow(a, b, &r)) {
        throw Overflow();
    }
    return r;
}

void check_weights(const Universe& places, const std::map<SymbolId, IntCount>& w, const std::string& what)
{
    for (const auto& [p, n] : w) {
        if (!places.contains(p)) {
            throw UnknownId(what + " refers to unknown place " + std::to_string(p.value));
        }
    }
}

} // namespace

IntNet::IntNet(UniverseRef places, std::vector<IntTransition> transitions)
    : places_(std::move(places)), transitions_(std::move(transitions))
{
    for (auto& t : transitions_) {
        check_weights(*places_, t.input, "transition " + t.name);
        check_weights(*places_, t.output, "transition " + t.name);
        std::erase_if(t.input, [](const auto& kv) { return kv.second == 0; });
        std::erase_if(t.output, [](const auto& kv) { return kv.second == 0; });
    }
}

IntNet IntNet::from_net(const Net& net)
{
    std::vector<IntTransition> ts;
    for (const auto& t : net.transitions()) {
        IntTransition it{t.name, {}, {}};
        for (const auto& [p, n] : t.input.counts()) {
            it.input[p] = static_cast<IntCount>(n);
        }
        for (const auto& [p, n] : t.output.counts()) {
            it.output[p] = static_cast<IntCount>(n);
        }
        ts.push_back(std::move(it));
    }
    return IntNet(net.places(), std::move(ts));
}

const IntTransition& IntNet::transition(TransitionId t) const
{
    if (!t.valid() || t.value > transitions_.size()) {
        throw UnknownId("unknown transition " + std::to_string(t.value));
    }
    return transitions_[t.index()];
}

std::optional<TransitionId> IntNet::find_transition(const std::string& name) const
{
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
        if (transitions_[i].name == name) {
            return TransitionId{static_cast<std::uint32_t>(i + 1)};
        }
    }
    return std::nullopt;
}

bool IntNet::operator==(const IntNet& other) const
{
    if (!(*places_ == *other.places_) || transitions_.size() != other.transitions_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
        const auto& a = transitions_[i];
        const auto& b = other.transitions_[i];
        if (a.name != b.name || a.input != b.input || a.output != b.output) {
            return false;
        }
    }
    return true;
}

IntMarking IntMarking::from_marking(const Marking& m)
{
    IntMarking out(m.tokens().universe()->size());
    for (const auto& [p, n] : m.tokens().counts()) {
        if (n > static_cast<Count>(std::numeric_limits<IntCount>::max())) {
            throw Overflow();
        }
        out.set(p, static_cast<IntCount>(n));
    }
    return out;
}

std::string to_string(const IntMarking& m, const Universe& names)
{
    std::string out = "{";
    bool first = true;
    for (auto p : names.symbols()) {
        if (m[p] == 0) {
            continue;
        }
        if (!first) {
            out += ",";
        }
        first = false;
        out += names.name(p) + ":" + std::to_string(m[p]);
    }
    return out + "}";
}

IntMarking int_fire(const IntNet& net, const IntMarking& m, TransitionId t)
{
    if (m.tokens().size() != net.place_count()) {
        throw ShapeMismatch("marking does not match the net's places");
    }
    const auto& tr = net.transition(t);
    IntMarking out = m;
    for (const auto& [p, n] : tr.input) {
        out.set(p, sub(out[p], n));
    }
    for (const auto& [p, n] : tr.output) {
        out.set(p, add(out[p], n));
    }
    return out;
}

IntMarking int_fire_all(const IntNet& net, const IntMarking& m, const std::vector<TransitionId>& seq)
{
    IntMarking cur = m;
    for (auto t : seq) {
        cur = int_fire(net, cur, t);
    }
    return cur;
}

bool is_legal(const IntMarking& m)
{
    return std::ranges::all_of(m.tokens(), [](IntCount n) { return n >= 0; });
}

bool prefix_legal(const IntNet& net, const IntMarking& m0, const std::vector<TransitionId>& seq)
{
    IntMarking cur = m0;
    if (!is_legal(cur)) {
        return false;
    }
    for (auto t : seq) {
        cur = int_fire(net, cur, t);
        if (!is_legal(cur)) {
            return false;
        }
    }
    return true;
}

namespace {

struct Search {
    const IntNet& net;
    const std::vector<TransitionId>& seq;
    std::vector<bool> used;
    std::vector<std::size_t> current;
    std::vector<std::size_t> best;
    std::size_t best_inversions = std::numeric_limits<std::size_t>::max();

    void run(const IntMarking& m, std::size_t inversions)
    {
        if (inversions >= best_inversions) {
            return;
        }
        if (current.size() == seq.size()) {
            best = current;
            best_inversions = inversions;
            return;
        }
        std::vector<TransitionId> tried;
        std::size_t skipped_before = 0;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            if (used[i]) {
                continue;
            }
            // Later copies of the same transition only add inversions.
            const bool duplicate = std::ranges::find(tried, seq[i]) != tried.end();
            if (!duplicate) {
                tried.push_back(seq[i]);
                const IntMarking next = int_fire(net, m, seq[i]);
                if (is_legal(next)) {
                    used[i] = true;
                    current.push_back(i);
                    run(next, inversions + skipped_before);
                    current.pop_back();
                    used[i] = false;
                }
            }
            ++skipped_before;
        }
    }
};

} // namespace

Legalization legalize(const IntNet& net, const IntMarking& m0, const std::vector<TransitionId>& seq)
{
    if (!is_legal(m0)) {
        throw UsageError("legalize needs a legal initial marking");
    }
    for (auto t : seq) {
        net.transition(t);
    }
    Legalization out;
    if (seq.size() > legalize_max_length) {
        out.status = Legalization::Status::unknown;
        return out;
    }
    Search s{net, seq, std::vector<bool>(seq.size(), false), {}, {}};
    s.run(m0, 0);
    if (s.best.size() != seq.size() || s.best_inversions == std::numeric_limits<std::size_t>::max()) {
        out.status = Legalization::Status::impossible;
        return out;
    }
    out.status = Legalization::Status::found;
    for (auto i : s.best) {
        out.order.push_back(seq[i]);
    }
    return out;
}

} // namespace foldbox
