#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace myo {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Expands a root seed into an independent per-component seed.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char ch : tag) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return mix64(root ^ mix64(h));
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                                    std::uint64_t index) {
  return mix64(derive_seed(root, tag) + mix64(index));
}

}  // namespace myo
