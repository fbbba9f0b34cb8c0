#pragma once

#include <cstddef>

#include "tcg/graph.hpp"

namespace tcg {

// Lexicographic (i<j) enumeration of the unordered pairs of n nodes.
// Pair-indexed arrays throughout the library use this order.
constexpr std::size_t pair_count(std::size_t n) noexcept { return n < 2 ? 0 : n * (n - 1) / 2; }

constexpr std::size_t pair_index(std::size_t n, std::size_t i, std::size_t j) noexcept {
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

inline std::size_t pair_index(std::size_t n, const Edge& e) noexcept { return pair_index(n, e.i, e.j); }

// Calls fn(pair_index, i, j) over all pairs in lexicographic order.
template <typename Fn>
void for_each_pair(std::size_t n, Fn&& fn) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) fn(k++, i, j);
  }
}

}  // namespace tcg
