#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace minihes {

// Every consumer of randomness derives its own stream from the single
// top-level seed plus a purpose tag, so e.g. changing the thread count can
// never perturb sampling.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view purpose) {
  // FNV-1a over the tag, then a splitmix64 finalizer over (base + tag hash).
  std::uint64_t h = 14695981039346656037ull;
  for (char c : purpose) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull + h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::string_view purpose) {
  return std::mt19937_64(derive_seed(base, purpose));
}

}  // namespace minihes
