#pragma once

#include <cstddef>

namespace nvscat::detail {

// Fixed-order pairwise reduction; blocks of 16 summed left to right.
template <class T, class F>
T pairwise_sum(std::size_t begin, std::size_t end, F&& term) {
  std::size_t n = end - begin;
  if (n <= 16) {
    T acc{};
    for (std::size_t i = begin; i < end; ++i) acc += term(i);
    return acc;
  }
  std::size_t mid = begin + n / 2;
  return pairwise_sum<T>(begin, mid, term) + pairwise_sum<T>(mid, end, term);
}

}  // namespace nvscat::detail
