#pragma once

#include <cstdint>
#include <initializer_list>

namespace sgmc {

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Child seed for the task addressed by `path` (e.g. {replicate, class}).
// Each path element is folded in with a golden-ratio increment and mixed, so
// distinct paths give unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t z = mix64(seed + 0x9e3779b97f4a7c15ULL);
  for (std::uint64_t p : path) z = mix64(z + 0x9e3779b97f4a7c15ULL * (p + 1));
  return z;
}

}  // namespace sgmc
