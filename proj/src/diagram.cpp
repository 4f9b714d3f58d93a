#include "foldbox/diagram.hpp"

#include <algorithm>
#include <deque>

namespace foldbox {

namespace {

PortRef remap(const PortRef& r, const std::vector<PortRef>& boundary_sources, std::uint32_t box_offset)
{
    if (r.is_boundary()) {
        return boundary_sources[r.port];
    }
    return PortRef{r.box + box_offset, r.port};
}

void append_boxes(Diagram& into, const Diagram& from, const std::vector<PortRef>& boundary_sources)
{
    const auto offset = static_cast<std::uint32_t>(into.boxes.size());
    for (const auto& b : from.boxes) {
        Box copy = b;
        for (auto& s : copy.sources) {
            s = remap(s, boundary_sources, offset);
        }
        into.boxes.push_back(std::move(copy));
    }
}

std::vector<PortRef> boundary_refs(std::size_t n, std::size_t first = 0)
{
    std::vector<PortRef> refs(n);
    for (std::size_t i = 0; i < n; ++i) {
        refs[i] = PortRef{PortRef::boundary, static_cast<std::uint32_t>(first + i)};
    }
    return refs;
}

} // namespace

Diagram to_diagram(const Term& t)
{
    Diagram d;
    d.dom = t.dom();
    d.cod = t.cod();
    switch (t.kind()) {
    case Term::Kind::identity:
        d.outputs = boundary_refs(t.dom().size());
        break;
    case Term::Kind::symmetry: {
        const auto u = t.word().size();
        const auto v = t.right_word().size();
        d.outputs = boundary_refs(v, u);
        auto rest = boundary_refs(u);
        d.outputs.insert(d.outputs.end(), rest.begin(), rest.end());
        break;
    }
    case Term::Kind::generator: {
        Box b{t.label(), t.dom(), t.cod(), boundary_refs(t.dom().size())};
        d.boxes.push_back(std::move(b));
        for (std::uint32_t k = 0; k < t.cod().size(); ++k) {
            d.outputs.push_back(PortRef{0, k});
        }
        break;
    }
    case Term::Kind::seq: {
        const Diagram a = to_diagram(t.lhs());
        const Diagram b = to_diagram(t.rhs());
        d.boxes = a.boxes;
        append_boxes(d, b, a.outputs);
        const auto offset = static_cast<std::uint32_t>(a.boxes.size());
        for (const auto& o : b.outputs) {
            d.outputs.push_back(remap(o, a.outputs, offset));
        }
        break;
    }
    case Term::Kind::par: {
        const Diagram a = to_diagram(t.lhs());
        const Diagram b = to_diagram(t.rhs());
        d.boxes = a.boxes;
        const auto shifted = boundary_refs(b.dom.size(), a.dom.size());
        append_boxes(d, b, shifted);
        d.outputs = a.outputs;
        const auto offset = static_cast<std::uint32_t>(a.boxes.size());
        for (const auto& o : b.outputs) {
            d.outputs.push_back(remap(o, shifted, offset));
        }
        break;
    }
    }
    return d;
}

// Canonical form -------------------------------------------------------------
//
// Ports are ordered, so once one box of a connected component has a number,
// following its ports in order numbers the whole component deterministically.
// Boxes connected to the boundary are anchored by the ordered boundary; each
// closed component is tried from every start box and the smallest code kept.

namespace {

struct Consumer {
    std::uint32_t box = PortRef::boundary; // boundary means boundary output
    std::uint32_t port = 0;
};

struct Wiring {
    std::vector<Consumer> from_inputs;              // consumer of boundary input i
    std::vector<std::vector<Consumer>> from_boxes;  // consumer of box b output p
};

Wiring consumers_of(const Diagram& d)
{
    Wiring w;
    w.from_inputs.resize(d.dom.size());
    w.from_boxes.resize(d.boxes.size());
    for (std::size_t b = 0; b < d.boxes.size(); ++b) {
        w.from_boxes[b].resize(d.boxes[b].outputs.size());
    }
    auto record = [&](const PortRef& src, Consumer c) {
        if (src.is_boundary()) {
            w.from_inputs[src.port] = c;
        } else {
            w.from_boxes[src.box][src.port] = c;
        }
    };
    for (std::uint32_t b = 0; b < d.boxes.size(); ++b) {
        for (std::uint32_t k = 0; k < d.boxes[b].sources.size(); ++k) {
            record(d.boxes[b].sources[k], Consumer{b, k});
        }
    }
    for (std::uint32_t j = 0; j < d.outputs.size(); ++j) {
        record(d.outputs[j], Consumer{PortRef::boundary, j});
    }
    return w;
}

constexpr std::uint64_t unnumbered = ~std::uint64_t{0};

/// Breadth-first numbering following ports in order. `order` receives boxes
/// in numbering order; `number` maps box index to its number.
void number_from(const Diagram& d, const Wiring& w, std::deque<std::uint32_t> queue,
                 std::vector<std::uint64_t>& number, std::vector<std::uint32_t>& order)
{
    auto visit = [&](std::uint32_t b) {
        if (number[b] == unnumbered) {
            number[b] = order.size();
            order.push_back(b);
            queue.push_back(b);
        }
    };
    std::deque<std::uint32_t> seeds;
    std::swap(seeds, queue);
    for (auto b : seeds) {
        visit(b);
    }
    while (!queue.empty()) {
        const auto b = queue.front();
        queue.pop_front();
        for (const auto& src : d.boxes[b].sources) {
            if (!src.is_boundary()) {
                visit(src.box);
            }
        }
        for (const auto& c : w.from_boxes[b]) {
            if (c.box != PortRef::boundary) {
                visit(c.box);
            }
        }
    }
}

void emit_boxes(const Diagram& d, const std::vector<std::uint64_t>& number, const std::vector<std::uint32_t>& order,
                std::vector<std::uint64_t>& code)
{
    for (auto b : order) {
        const auto& box = d.boxes[b];
        code.push_back(box.label.value);
        code.push_back(box.inputs.size());
        for (auto s : box.inputs) {
            code.push_back(s.value);
        }
        code.push_back(box.outputs.size());
        for (auto s : box.outputs) {
            code.push_back(s.value);
        }
        for (const auto& src : box.sources) {
            if (src.is_boundary()) {
                code.push_back(0);
            } else {
                code.push_back(number[src.box] + 1);
            }
            code.push_back(src.port);
        }
    }
}

} // namespace

CanonicalForm canonical_form(const Diagram& d)
{
    const Wiring w = consumers_of(d);
    std::vector<std::uint64_t> number(d.boxes.size(), unnumbered);
    std::vector<std::uint32_t> order;

    // Seeds in boundary order: consumers of inputs, then producers of outputs.
    std::deque<std::uint32_t> seeds;
    for (const auto& c : w.from_inputs) {
        if (c.box != PortRef::boundary) {
            seeds.push_back(c.box);
        }
    }
    for (const auto& o : d.outputs) {
        if (!o.is_boundary()) {
            seeds.push_back(o.box);
        }
    }
    number_from(d, w, seeds, number, order);

    CanonicalForm out;
    auto& code = out.code;
    code.push_back(d.dom.size());
    for (auto s : d.dom) {
        code.push_back(s.value);
    }
    code.push_back(d.cod.size());
    for (auto s : d.cod) {
        code.push_back(s.value);
    }
    for (const auto& o : d.outputs) {
        code.push_back(o.is_boundary() ? 0 : number[o.box] + 1);
        code.push_back(o.port);
    }
    code.push_back(order.size());
    emit_boxes(d, number, order, code);

    // Closed components.
    std::vector<std::vector<std::uint64_t>> closed;
    std::vector<bool> done(d.boxes.size(), false);
    for (auto b : order) {
        done[b] = true;
    }
    for (std::uint32_t start = 0; start < d.boxes.size(); ++start) {
        if (done[start]) {
            continue;
        }
        std::vector<std::uint64_t> probe(d.boxes.size(), unnumbered);
        std::vector<std::uint32_t> members;
        number_from(d, w, {start}, probe, members);
        std::vector<std::uint64_t> best;
        for (auto s : members) {
            done[s] = true;
            std::vector<std::uint64_t> local(d.boxes.size(), unnumbered);
            std::vector<std::uint32_t> local_order;
            number_from(d, w, {s}, local, local_order);
            std::vector<std::uint64_t> candidate;
            emit_boxes(d, local, local_order, candidate);
            if (best.empty() || candidate < best) {
                best = std::move(candidate);
            }
        }
        closed.push_back(std::move(best));
    }
    std::sort(closed.begin(), closed.end());
    code.push_back(closed.size());
    for (const auto& c : closed) {
        code.push_back(c.size());
        code.insert(code.end(), c.begin(), c.end());
    }
    return out;
}

bool equal(const Term& a, const Term& b)
{
    if (a.dom() != b.dom() || a.cod() != b.cod()) {
        return false;
    }
    if (a == b) {
        return true;
    }
    return canonical_form(to_diagram(a)) == canonical_form(to_diagram(b));
}

std::optional<Permutation> is_symmetry(const Term& t)
{
    const Diagram d = to_diagram(t);
    if (!d.boxes.empty()) {
        return std::nullopt;
    }
    std::vector<std::size_t> image;
    image.reserve(d.outputs.size());
    for (const auto& o : d.outputs) {
        image.push_back(o.port);
    }
    return Permutation(std::move(image));
}

std::vector<std::size_t> causal_past(const Diagram& d, std::size_t position)
{
    if (position >= d.outputs.size()) {
        throw UsageError("output position " + std::to_string(position) + " out of range");
    }
    std::vector<bool> seen(d.boxes.size(), false);
    std::vector<std::uint32_t> stack;
    if (!d.outputs[position].is_boundary()) {
        stack.push_back(d.outputs[position].box);
    }
    while (!stack.empty()) {
        const auto b = stack.back();
        stack.pop_back();
        if (seen[b]) {
            continue;
        }
        seen[b] = true;
        for (const auto& src : d.boxes[b].sources) {
            if (!src.is_boundary()) {
                stack.push_back(src.box);
            }
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < seen.size(); ++b) {
        if (seen[b]) {
            out.push_back(b);
        }
    }
    return out;
}

namespace {

nlohmann::json word_json(const ObString& w, const Presentation* p)
{
    auto arr = nlohmann::json::array();
    for (auto s : w) {
        if (p != nullptr) {
            arr.push_back({{"id", s.value}, {"name", p->objects()->name(s)}});
        } else {
            arr.push_back({{"id", s.value}});
        }
    }
    return arr;
}

nlohmann::json endpoint(const PortRef& r, const char* boundary_side)
{
    if (r.is_boundary()) {
        return {{"boundary", boundary_side}, {"port", r.port}};
    }
    return {{"box", r.box}, {"port", r.port}};
}

} // namespace

nlohmann::json diagram_to_json(const Diagram& d, const Presentation* p)
{
    nlohmann::json j;
    j["dom"] = word_json(d.dom, p);
    j["cod"] = word_json(d.cod, p);
    auto boxes = nlohmann::json::array();
    auto wires = nlohmann::json::array();
    for (std::uint32_t b = 0; b < d.boxes.size(); ++b) {
        const auto& box = d.boxes[b];
        nlohmann::json jb{{"index", b}, {"label", box.label.value}, {"inputs", word_json(box.inputs, p)},
                          {"outputs", word_json(box.outputs, p)}};
        if (p != nullptr) {
            jb["name"] = p->generator(box.label).name;
        }
        boxes.push_back(std::move(jb));
        for (std::uint32_t k = 0; k < box.sources.size(); ++k) {
            wires.push_back({{"from", endpoint(box.sources[k], "in")}, {"to", {{"box", b}, {"port", k}}}});
        }
    }
    for (std::uint32_t jx = 0; jx < d.outputs.size(); ++jx) {
        wires.push_back({{"from", endpoint(d.outputs[jx], "in")}, {"to", {{"boundary", "out"}, {"port", jx}}}});
    }
    j["boxes"] = std::move(boxes);
    j["wires"] = std::move(wires);
    return j;
}

} // namespace foldbox
