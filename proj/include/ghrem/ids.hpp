#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace ghrem {

/// Dense index of an actor within a fixed registry.
struct ActorId {
    std::uint32_t v = 0;
    friend auto operator<=>(const ActorId&, const ActorId&) = default;
};

/// Dense index of a work, equal to its position in the event order.
struct WorkId {
    std::uint32_t v = 0;
    friend auto operator<=>(const WorkId&, const WorkId&) = default;
};

// 64-bit mix (splitmix64 finalizer); used for hashing and seed derivation.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Canonical key for an unordered pair of 32-bit ids.
constexpr std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace ghrem

template <>
struct std::hash<ghrem::ActorId> {
    std::size_t operator()(ghrem::ActorId a) const noexcept { return ghrem::mix64(a.v); }
};

template <>
struct std::hash<ghrem::WorkId> {
    std::size_t operator()(ghrem::WorkId w) const noexcept { return ghrem::mix64(w.v); }
};
