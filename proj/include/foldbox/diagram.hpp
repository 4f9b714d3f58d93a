#pragma once

#include "foldbox/fssmc.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace foldbox {

/// Where a wire comes from: a boundary input, or an output port of a box.
struct PortRef {
    static constexpr std::uint32_t boundary = 0xffffffffU;

    std::uint32_t box = boundary;
    std::uint32_t port = 0;

    bool is_boundary() const { return box == boundary; }
    bool operator==(const PortRef&) const = default;
};

struct Box {
    GeneratorId label;
    ObString inputs;
    ObString outputs;
    /// sources[k] feeds input port k.
    std::vector<PortRef> sources;
};

/// Open string diagram: boxes wired by a linear map from producers to
/// consumers. Boxes are stored in a topological order.
struct Diagram {
    ObString dom;
    ObString cod;
    std::vector<Box> boxes;
    /// outputs[j] feeds boundary output j.
    std::vector<PortRef> outputs;
};

Diagram to_diagram(const Term& t);

/// Complete invariant of a diagram up to isomorphism fixing the boundary.
struct CanonicalForm {
    std::vector<std::uint64_t> code;
    bool operator==(const CanonicalForm&) const = default;
};

CanonicalForm canonical_form(const Diagram& d);

/// Equality in the free strict symmetric monoidal category.
bool equal(const Term& a, const Term& b);

/// The permutation a box-free term denotes, if it is box free.
std::optional<Permutation> is_symmetry(const Term& t);

/// Indices of the boxes in the causal past of boundary output `position`,
/// in topological order (earliest first).
std::vector<std::size_t> causal_past(const Diagram& d, std::size_t position);

nlohmann::json diagram_to_json(const Diagram& d, const Presentation* p = nullptr);

} // namespace foldbox
