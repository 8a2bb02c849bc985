#pragma once

#include <cstdint>
#include <initializer_list>

namespace isopref {

// SplitMix64 finalizer; spreads nearby integers over the full 64-bit range.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a child seed from a parent seed and an ordered list of indices.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = mix64(parent);
  for (std::uint64_t part : path) state = mix64(state ^ mix64(part));
  return state;
}

}  // namespace isopref
