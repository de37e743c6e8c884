#pragma once

#include <cstddef>
#include <span>

namespace metric_lab {

/// Pairwise (tree) summation in index order. Deterministic, and with error
/// growth O(log n) instead of O(n) for the naive left-to-right loop.
inline double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kLeaf = 16;
  if (v.size() <= kLeaf) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// |a - b| <= rel * max(|a|, |b|) + abs.
inline bool approx_equal(double a, double b, double rel, double abs = 0.0) {
  const double scale = (a < 0 ? -a : a) > (b < 0 ? -b : b) ? (a < 0 ? -a : a) : (b < 0 ? -b : b);
  const double diff = a > b ? a - b : b - a;
  return diff <= rel * scale + abs;
}

}  // namespace metric_lab
