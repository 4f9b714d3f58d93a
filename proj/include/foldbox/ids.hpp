#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace foldbox {

/// 1-based dense index; 0 is never a valid id.
template <class Tag>
struct Id {
    std::uint32_t value = 0;

    constexpr Id() = default;
    constexpr explicit Id(std::uint32_t v) : value(v) {}

    constexpr std::size_t index() const { return value - 1; }
    constexpr bool valid() const { return value != 0; }

    auto operator<=>(const Id&) const = default;
};

using SymbolId = Id<struct SymbolTag>;
using TransitionId = Id<struct TransitionTag>;
// Generator labels mirror transition indices, so fold/unfold never rename.
using GeneratorId = TransitionId;

} // namespace foldbox

template <class Tag>
struct std::hash<foldbox::Id<Tag>> {
    std::size_t operator()(const foldbox::Id<Tag>& id) const noexcept
    {
        return std::hash<std::uint32_t>{}(id.value);
    }
};
