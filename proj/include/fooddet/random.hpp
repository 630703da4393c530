#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace fooddet {

// std::mt19937_64 has a fully specified output sequence, but the standard
// distributions and std::shuffle do not, so bounded draws are done here.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  // Rejection sampling to avoid modulo bias; bound > 0.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

template <typename T>
void seeded_shuffle(std::span<T> items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded_draw(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace fooddet
