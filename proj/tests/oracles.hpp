#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "metric_lab/field.hpp"
#include "metric_lab/kernel.hpp"
#include "metric_lab/random.hpp"
#include "metric_lab/space.hpp"

// Brute-force reference implementations used only by the tests. None of them
// touch the shell index.
namespace oracle {

using metric_lab::PointId;
using metric_lab::ScalarField;
using metric_lab::Space;

inline std::vector<PointId> ball_members(const Space& s, PointId c, double r) {
  std::vector<PointId> m;
  for (PointId y = 0; y < s.size(); ++y)
    if (s.dist(c, y) < r) m.push_back(y);
  return m;
}

inline double mass_of(const Space& s, const std::vector<PointId>& members) {
  double m = 0.0;
  for (PointId y : members) m += s.weight(y);
  return m;
}

/// Every distinct ball around c: radii just above each distinct distance.
inline std::vector<std::vector<PointId>> all_balls(const Space& s, PointId c) {
  std::vector<double> d;
  for (PointId y = 0; y < s.size(); ++y) d.push_back(s.dist(c, y));
  std::sort(d.begin(), d.end());
  std::vector<std::vector<PointId>> balls;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (k > 0 && d[k] <= d[k - 1] * (1 + 1e-9)) continue;
    auto m = ball_members(s, c, d[k] * (1 + 1e-7) + 1e-300);
    if (balls.empty() || balls.back().size() != m.size()) balls.push_back(std::move(m));
  }
  return balls;
}

inline std::vector<double> maximal(const Space& s, const ScalarField& f) {
  std::vector<double> M(s.size(), 0.0);
  for (PointId c = 0; c < s.size(); ++c)
    for (const auto& b : all_balls(s, c)) {
      double sum = 0.0;
      for (PointId y : b) sum += std::abs(f[y]) * s.weight(y);
      const double avg = sum / mass_of(s, b);
      for (PointId y : b) M[y] = std::max(M[y], avg);
    }
  return M;
}

inline double truncated(const Space& s, const metric_lab::RoughKernelMatrix& K, const ScalarField& f, PointId x,
                        double eps) {
  double t = 0.0;
  for (PointId y = 0; y < s.size(); ++y)
    if (y != x && s.dist(x, y) > eps) t += K.at(x, y) * f[y] * s.weight(y);
  return t;
}

/// max |T_eps f(x)| over `count` equispaced eps in (0, diameter].
inline double dense_maximal_singular(const Space& s, const metric_lab::RoughKernelMatrix& K, const ScalarField& f,
                                     PointId x, int count = 1000) {
  double best = 0.0;
  for (int k = 1; k <= count; ++k)
    best = std::max(best, std::abs(truncated(s, K, f, x, s.diameter() * k / count)));
  return std::max(best, std::abs(truncated(s, K, f, x, 0.5 * s.min_spacing())));
}

inline double naive_sum(const Space& s, const ScalarField& f) {
  double t = 0.0;
  for (PointId i = 0; i < s.size(); ++i) t += f[i] * s.weight(i);
  return t;
}

/// Midpoint quadrature of r^(1/m) (int a^(m-1) mu{|f|>a}^(m/r) da)^(1/m) with
/// `points` nodes shared among the steps of the distribution function.
inline double lorentz_quadrature(const Space& s, const ScalarField& f, double r, double m, long points) {
  std::vector<double> levels{0.0};
  for (PointId i = 0; i < s.size(); ++i) levels.push_back(std::abs(f[i]));
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const long per = std::max<long>(1, points / static_cast<long>(levels.size()));
  double integral = 0.0;
  for (std::size_t j = 0; j + 1 < levels.size(); ++j) {
    const double lo = levels[j], hi = levels[j + 1];
    double dist = 0.0;
    for (PointId i = 0; i < s.size(); ++i)
      if (std::abs(f[i]) > lo) dist += s.weight(i);
    const double h = (hi - lo) / static_cast<double>(per);
    double acc = 0.0;
    for (long k = 0; k < per; ++k) acc += std::pow(lo + (k + 0.5) * h, m - 1.0);
    integral += acc * h * std::pow(dist, m / r);
  }
  return std::pow(r, 1.0 / m) * std::pow(integral, 1.0 / m);
}

inline ScalarField uniform_field(const Space& s, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  metric_lab::Rng rng(seed);
  std::vector<double> v(s.size());
  for (auto& x : v) x = rng.uniform(lo, hi);
  return ScalarField(s, std::move(v));
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace oracle
