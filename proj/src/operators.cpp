#include "metric_lab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "metric_lab/errors.hpp"
#include "metric_lab/numeric.hpp"
#include "metric_lab/parallel.hpp"

namespace metric_lab {

double integrate(const Space& space, const ScalarField& f) {
  require_same_space(space, f);
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = f[i] * space.weight(static_cast<PointId>(i));
  return pairwise_sum(terms);
}

ScalarField maximal_function(const Space& space, const ScalarField& f) {
  require_same_space(space, f);
  const std::size_t n = space.size();
  const ShellIndex& shells = space.shells();
  std::vector<double> absw(n);
  for (std::size_t i = 0; i < n; ++i) absw[i] = std::abs(f[i]) * space.weight(static_cast<PointId>(i));

  // Per center: average over each shell prefix, then suffix maxima so that a
  // point in shell k sees the best ball among prefixes 0..j with j >= k.
  // Centers are split across workers; per-worker maxima are merged at the end.
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  std::vector<std::vector<double>> partial(workers, std::vector<double>(n, 0.0));
  parallel_for(workers, [&](std::size_t w) {
    auto& best = partial[w];
    std::vector<double> avg;
    for (std::size_t ci = w; ci < n; ci += workers) {
      const auto c = static_cast<PointId>(ci);
      const auto order = shells.order(c);
      const auto starts = shells.shell_starts(c);
      const std::size_t count = starts.size() - 1;
      avg.assign(count, 0.0);
      double sum = 0.0, mass = 0.0;
      for (std::size_t s = 0; s < count; ++s) {
        for (auto pos = starts[s]; pos < starts[s + 1]; ++pos) {
          sum += absw[order[pos]];
          mass += space.weight(order[pos]);
        }
        avg[s] = sum / mass;
      }
      for (std::size_t s = count - 1; s-- > 0;) avg[s] = std::max(avg[s], avg[s + 1]);
      for (std::size_t s = 0; s < count; ++s)
        for (auto pos = starts[s]; pos < starts[s + 1]; ++pos) {
          const PointId y = order[pos];
          best[y] = std::max(best[y], avg[s]);
        }
    }
  });
  std::vector<double> best(n);
  for (std::size_t i = 0; i < n; ++i) {
    best[i] = std::abs(f[i]);
    for (const auto& p : partial) best[i] = std::max(best[i], p[i]);
  }
  return ScalarField(space, std::move(best));
}

double unit_ball_volume(int n) {
  const double half = 0.5 * n;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

ScalarField riesz_potential(const Space& space, const ScalarField& f, double s, bool analytic_ball) {
  require_same_space(space, f);
  if (!(s > 0.0)) throw ArgumentError("Riesz order s must be positive");
  if (analytic_ball && !space.has_coordinates())
    throw ArgumentError("analytic-ball mode needs a coordinate space");
  const std::size_t n = space.size();
  const ShellIndex& shells = space.shells();
  const int dim = static_cast<int>(space.dim());
  const double vn = analytic_ball ? unit_ball_volume(dim) : 0.0;
  std::vector<double> out(n, 0.0);
  parallel_for(n, [&](std::size_t xi) {
    const auto x = static_cast<PointId>(xi);
    const auto order = shells.order(x);
    const auto starts = shells.shell_starts(x);
    const auto drow = space.distance_row(x);
    double inner_mass = space.weight(x);  // mass of the shells strictly inside
    double acc = 0.0;
    for (std::size_t sh = 1; sh + 1 < starts.size(); ++sh) {
      double shell_mass = 0.0;
      for (auto pos = starts[sh]; pos < starts[sh + 1]; ++pos) {
        const PointId y = order[pos];
        const double d = drow[y];
        const double ds = s == 1.0 ? d : std::pow(d, s);
        const double ball = analytic_ball ? vn * std::pow(d, dim) : inner_mass;
        acc += ds / ball * f[y] * space.weight(y);
        shell_mass += space.weight(y);
      }
      inner_mass += shell_mass;
    }
    out[xi] = acc;
  });
  return ScalarField(space, std::move(out));
}

RieszSplit riesz_split(const Space& space, const ScalarField& f, double s, double cutoff, PointId x) {
  require_same_space(space, f);
  if (!(s > 0.0)) throw ArgumentError("Riesz order s must be positive");
  const ShellIndex& shells = space.shells();
  const auto order = shells.order(x);
  const auto starts = shells.shell_starts(x);
  const auto drow = space.distance_row(x);
  RieszSplit split;
  double inner_mass = space.weight(x);
  for (std::size_t sh = 1; sh + 1 < starts.size(); ++sh) {
    double shell_mass = 0.0;
    for (auto pos = starts[sh]; pos < starts[sh + 1]; ++pos) {
      const PointId y = order[pos];
      const double d = drow[y];
      const double term = std::pow(d, s) / inner_mass * std::abs(f[y]) * space.weight(y);
      (d < cutoff ? split.near : split.far) += term;
      shell_mass += space.weight(y);
    }
    inner_mass += shell_mass;
  }
  return split;
}

ScalarField truncated_singular(const Space& space, const RoughKernelMatrix& kernel,
                               const ScalarField& f, double eps) {
  require_same_space(space, f);
  require_kernel_on(space, kernel);
  if (!(eps > 0.0)) throw ArgumentError("truncation radius must be positive");
  const std::size_t n = space.size();
  const ShellIndex& shells = space.shells();
  std::vector<double> out(n, 0.0);
  parallel_for(n, [&](std::size_t xi) {
    const auto x = static_cast<PointId>(xi);
    const auto order = shells.order(x);
    const auto row = kernel.row(x);
    const auto drow = space.distance_row(x);
    // Sum from the far end in shell order so that truncations share the
    // summation order used by maximal_singular.
    double acc = 0.0;
    for (std::size_t pos = n; pos-- > 1;) {
      const PointId y = order[pos];
      if (!(drow[y] > eps)) break;
      acc += row[y] * f[y] * space.weight(y);
    }
    out[xi] = acc;
  });
  return ScalarField(space, std::move(out));
}

ScalarField maximal_singular(const Space& space, const RoughKernelMatrix& kernel, const ScalarField& f) {
  require_same_space(space, f);
  require_kernel_on(space, kernel);
  const std::size_t n = space.size();
  const ShellIndex& shells = space.shells();
  std::vector<double> out(n, 0.0);
  parallel_for(n, [&](std::size_t xi) {
    const auto x = static_cast<PointId>(xi);
    const auto order = shells.order(x);
    const auto starts = shells.shell_starts(x);
    const auto row = kernel.row(x);
    double acc = 0.0, best = 0.0;
    for (std::size_t sh = starts.size() - 1; sh-- > 1;) {
      for (auto pos = starts[sh + 1]; pos-- > starts[sh];) {
        const PointId y = order[pos];
        acc += row[y] * f[y] * space.weight(y);
      }
      best = std::max(best, std::abs(acc));
    }
    out[xi] = best;
  });
  return ScalarField(space, std::move(out));
}

UpperGradient graph_upper_gradient(const Space& space, const ScalarField& f) {
  require_same_space(space, f);
  if (!space.has_adjacency()) throw ArgumentError("upper gradient needs an adjacency graph");
  const std::size_t n = space.size();
  std::vector<double> g(n, 0.0);
  std::vector<PointId> isolated;
  for (PointId x = 0; x < n; ++x) {
    const auto nbrs = space.neighbors(x);
    if (nbrs.empty()) isolated.push_back(x);
    for (PointId y : nbrs) g[x] = std::max(g[x], std::abs(f[x] - f[y]) / space.dist(x, y));
  }
  return {ScalarField(space, std::move(g)), std::move(isolated)};
}

bool verify_upper_gradient(const Space& space, const ScalarField& f, const ScalarField& g,
                           const std::vector<std::vector<PointId>>& paths) {
  require_same_space(space, f);
  require_same_space(space, g);
  constexpr double kSlack = 1e-12;
  auto adjacent = [&](PointId u, PointId v) {
    const auto nb = space.neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  };
  for (const auto& path : paths) {
    for (PointId p : path)
      if (p >= space.size()) throw ArgumentError("path point out of range");
    for (std::size_t i = 1; i < path.size(); ++i)
      if (!adjacent(path[i - 1], path[i])) throw ArgumentError("consecutive path points are not adjacent");
  }
  bool ok = true;
  for (const Edge& e : space.edges()) {
    const double bound = 0.5 * (g[e.u] + g[e.v]) * space.dist(e.u, e.v);
    if (std::abs(f[e.u] - f[e.v]) > bound + kSlack) ok = false;
  }
  for (const auto& path : paths) {
    if (path.size() < 2) continue;
    double integral = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i)
      integral += 0.5 * (g[path[i - 1]] + g[path[i]]) * space.dist(path[i - 1], path[i]);
    if (std::abs(f[path.front()] - f[path.back()]) > integral + kSlack) ok = false;
  }
  return ok;
}

}  // namespace metric_lab
