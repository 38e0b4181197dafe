#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace rforge {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Folds a root seed with a sequence of stream identifiers.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(seed);
  for (auto p : parts) h = splitmix64(h ^ p);
  return h;
}

inline std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
  return h;
}

/// Uniform draw in [0, bound) from a fully specified engine, so shuffles and
/// picks are identical across standard library implementations.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t bound) {
  const std::uint64_t limit = ~0ull - (~0ull % bound);
  std::uint64_t v;
  do v = rng();
  while (v >= limit);
  return static_cast<std::size_t>(v % bound);
}

template <class T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t k = v.size(); k > 1; --k) std::swap(v[k - 1], v[uniform_index(rng, k)]);
}

}  // namespace rforge
