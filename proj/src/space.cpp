#include "metric_lab/space.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <queue>
#include <string>

#include "metric_lab/errors.hpp"
#include "metric_lab/numeric.hpp"
#include "metric_lab/parallel.hpp"
#include "metric_lab/random.hpp"

namespace metric_lab {

namespace {
std::atomic<std::uint64_t> g_next_space_id{1};
}

struct Space::Data {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> coords;
  std::vector<double> dist;
  std::vector<double> weights;
  std::vector<Edge> edges;
  std::vector<std::size_t> nbr_offsets;
  std::vector<PointId> nbrs;
  double total_mass = 0.0;
  double diameter = 0.0;
  double min_spacing = 0.0;
  MetricKind metric = MetricKind::euclidean;
  std::uint64_t id = 0;
  mutable std::once_flag shells_once;
  mutable std::unique_ptr<ShellIndex> shells;
};

ShellIndex::ShellIndex(std::size_t n, std::span<const double> distances) : n_(n) {
  order_.resize(n * n);
  std::vector<std::vector<std::uint32_t>> starts(n);
  std::vector<std::vector<double>> radii(n);
  parallel_for(n, [&](std::size_t c) {
    auto row = distances.subspan(c * n, n);
    PointId* ord = order_.data() + c * n;
    std::iota(ord, ord + n, PointId{0});
    std::sort(ord, ord + n, [&](PointId a, PointId b) {
      return row[a] < row[b] || (row[a] == row[b] && a < b);
    });
    auto& s = starts[c];
    auto& r = radii[c];
    s.push_back(0);
    r.push_back(0.0);
    for (std::size_t pos = 1; pos < n; ++pos) {
      const double d = row[ord[pos]];
      if (pos == 1 || d > r.back() * (1.0 + kShellRelativeTolerance)) {
        s.push_back(static_cast<std::uint32_t>(pos));
        r.push_back(d);
      }
    }
    s.push_back(static_cast<std::uint32_t>(n));
    r.push_back(std::numeric_limits<double>::infinity());
  });
  offsets_.resize(n + 1, 0);
  for (std::size_t c = 0; c < n; ++c) offsets_[c + 1] = offsets_[c] + starts[c].size();
  starts_.reserve(offsets_[n]);
  radii_.reserve(offsets_[n]);
  for (std::size_t c = 0; c < n; ++c) {
    starts_.insert(starts_.end(), starts[c].begin(), starts[c].end());
    radii_.insert(radii_.end(), radii[c].begin(), radii[c].end());
  }
}

std::vector<double> ShellIndex::ball_radii(PointId center) const {
  const std::size_t shells = shell_count(center);
  std::vector<double> out(shells);
  for (std::size_t k = 0; k + 1 < shells; ++k)
    out[k] = 0.5 * (shell_radius(center, k) + shell_radius(center, k + 1));
  const double last = shell_radius(center, shells - 1);
  out[shells - 1] = last > 0 ? 2.0 * last : 1.0;
  return out;
}

Space Space::finish(std::shared_ptr<Data> d) {
  const std::size_t n = d->n;
  if (n == 0) throw ArgumentError("space must contain at least one point");
  if (d->weights.size() != n) throw ArgumentError("weights length does not match point count");
  for (double w : d->weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw ArgumentError("weights must be finite and strictly positive");
  if (d->dist.size() != n * n) throw ArgumentError("distance matrix must be N x N");

  double diam = 0.0;
  double min_spacing = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (d->dist[i * n + i] != 0.0) throw ArgumentError("distance matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = d->dist[i * n + j];
      const double b = d->dist[j * n + i];
      if (!std::isfinite(a) || !(a > 0.0))
        throw ArgumentError("distinct points must be at finite positive distance (" +
                            std::to_string(i) + ", " + std::to_string(j) + ")");
      if (!approx_equal(a, b, 1e-12)) throw ArgumentError("distance matrix must be symmetric");
      d->dist[j * n + i] = a;
      diam = std::max(diam, a);
      min_spacing = std::min(min_spacing, a);
    }
  }
  d->diameter = diam;
  d->min_spacing = n > 1 ? min_spacing : 0.0;
  d->total_mass = pairwise_sum(d->weights);

  std::vector<std::vector<PointId>> adj(n);
  for (const Edge& e : d->edges) {
    if (e.u >= n || e.v >= n) throw ArgumentError("adjacency edge refers to a missing point");
    if (e.u == e.v) throw ArgumentError("adjacency edge must connect distinct points");
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  d->nbr_offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& a = adj[i];
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    d->nbr_offsets[i + 1] = d->nbr_offsets[i] + a.size();
  }
  d->nbrs.reserve(d->nbr_offsets[n]);
  for (auto& a : adj) d->nbrs.insert(d->nbrs.end(), a.begin(), a.end());
  d->id = g_next_space_id.fetch_add(1);
  return Space(std::move(d));
}

Space Space::from_coordinates(std::size_t dim, std::vector<double> coords,
                              std::vector<double> weights, std::vector<Edge> adjacency,
                              MetricKind metric) {
  if (dim == 0) throw ArgumentError("coordinate dimension must be positive");
  if (coords.size() % dim != 0) throw ArgumentError("coordinate array length is not a multiple of dim");
  for (double c : coords)
    if (!std::isfinite(c)) throw ArgumentError("coordinates must be finite");
  const std::size_t n = coords.size() / dim;
  std::vector<double> euclid(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double t = coords[i * dim + k] - coords[j * dim + k];
        s += t * t;
      }
      euclid[i * n + j] = euclid[j * n + i] = std::sqrt(s);
    }

  if (metric == MetricKind::graph) {
    std::vector<std::vector<std::pair<PointId, double>>> adj(n);
    for (const Edge& e : adjacency) {
      if (e.u >= n || e.v >= n || e.u == e.v) throw ArgumentError("invalid adjacency edge");
      const double len = euclid[static_cast<std::size_t>(e.u) * n + e.v];
      adj[e.u].push_back({e.v, len});
      adj[e.v].push_back({e.u, len});
    }
    std::vector<double> graph(n * n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, PointId>;
    for (std::size_t s = 0; s < n; ++s) {
      double* row = graph.data() + s * n;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      row[s] = 0.0;
      heap.push({0.0, static_cast<PointId>(s)});
      while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > row[u]) continue;
        for (auto [v, len] : adj[u])
          if (d + len < row[v]) {
            row[v] = d + len;
            heap.push({row[v], v});
          }
      }
      for (std::size_t j = 0; j < n; ++j)
        if (!std::isfinite(row[j])) throw ArgumentError("graph metric requires a connected adjacency");
    }
    euclid = std::move(graph);
  } else if (metric != MetricKind::euclidean) {
    throw ArgumentError("coordinate spaces support the euclidean and graph metrics only");
  }

  auto d = std::make_shared<Data>();
  d->n = n;
  d->dim = dim;
  d->coords = std::move(coords);
  d->dist = std::move(euclid);
  d->weights = std::move(weights);
  d->edges = std::move(adjacency);
  d->metric = metric;
  return finish(std::move(d));
}

Space Space::from_distances(std::vector<double> distances, std::vector<double> weights,
                            std::vector<Edge> adjacency, std::size_t dim,
                            std::vector<double> coords, MetricKind metric) {
  const std::size_t n = weights.size();
  if (dim > 0 && coords.size() != n * dim) throw ArgumentError("coordinate array does not match point count");
  auto d = std::make_shared<Data>();
  d->n = n;
  d->dim = dim;
  d->coords = std::move(coords);
  d->dist = std::move(distances);
  d->weights = std::move(weights);
  d->edges = std::move(adjacency);
  d->metric = metric;
  return finish(std::move(d));
}

std::size_t Space::size() const { return data_->n; }
std::size_t Space::dim() const { return data_->dim; }
std::span<const double> Space::coordinate(PointId i) const {
  return std::span<const double>(data_->coords).subspan(static_cast<std::size_t>(i) * data_->dim, data_->dim);
}
std::span<const double> Space::coordinates() const { return data_->coords; }
std::span<const double> Space::distance_row(PointId i) const {
  return std::span<const double>(data_->dist).subspan(static_cast<std::size_t>(i) * data_->n, data_->n);
}
std::span<const double> Space::distances() const { return data_->dist; }
std::span<const double> Space::weights() const { return data_->weights; }
double Space::total_mass() const { return data_->total_mass; }
std::span<const Edge> Space::edges() const { return data_->edges; }
std::span<const PointId> Space::neighbors(PointId i) const {
  const auto b = data_->nbr_offsets[i];
  return std::span<const PointId>(data_->nbrs).subspan(b, data_->nbr_offsets[i + 1] - b);
}
double Space::diameter() const { return data_->diameter; }
double Space::min_spacing() const { return data_->min_spacing; }
MetricKind Space::metric() const { return data_->metric; }
std::uint64_t Space::id() const { return data_->id; }

const ShellIndex& Space::shells() const {
  std::call_once(data_->shells_once, [this] {
    data_->shells = std::make_unique<ShellIndex>(data_->n, std::span<const double>(data_->dist));
  });
  return *data_->shells;
}

Ball ball(const Space& space, PointId center, double radius) {
  if (!(radius > 0.0)) throw ArgumentError("ball radius must be positive");
  if (center >= space.size()) throw ArgumentError("ball center out of range");
  Ball b{center, radius, {}, 0.0};
  const auto row = space.distance_row(center);
  std::vector<double> masses;
  for (PointId y = 0; y < space.size(); ++y)
    if (row[y] < radius) {
      b.members.push_back(y);
      masses.push_back(space.weight(y));
    }
  b.mass = pairwise_sum(masses);
  return b;
}

double ball_mass(const Space& space, PointId center, double radius) {
  if (!(radius > 0.0)) throw ArgumentError("ball radius must be positive");
  const auto row = space.distance_row(center);
  double m = 0.0;
  for (PointId y = 0; y < space.size(); ++y)
    if (row[y] < radius) m += space.weight(y);
  return m;
}

namespace {

std::vector<Edge> lattice_edges(int dim, std::size_t side) {
  std::vector<Edge> edges;
  const std::size_t n = static_cast<std::size_t>(std::pow(side, dim) + 0.5);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t stride = 1;
    for (int axis = 0; axis < dim; ++axis) {
      const std::size_t digit = (i / stride) % side;
      if (digit + 1 < side) edges.push_back({static_cast<PointId>(i), static_cast<PointId>(i + stride)});
      stride *= side;
    }
  }
  return edges;
}

std::size_t checked_count(std::size_t side, int dim, std::size_t budget) {
  double n = std::pow(static_cast<double>(side), dim);
  if (n > static_cast<double>(budget))
    throw SizeError("space would have " + std::to_string(static_cast<long long>(n)) +
                    " points, budget is " + std::to_string(budget));
  return static_cast<std::size_t>(n + 0.5);
}

}  // namespace

Space build_grid(int dim, int n_per_side, WeightMode weights, std::size_t point_budget) {
  if (dim < 1 || dim > 3) throw ArgumentError("grid dimension must be 1, 2 or 3");
  if (n_per_side < 2) throw ArgumentError("grid needs at least 2 points per side");
  const auto side = static_cast<std::size_t>(n_per_side);
  const std::size_t n = checked_count(side, dim, point_budget);
  const double h = 1.0 / static_cast<double>(side);
  std::vector<double> coords(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rest = i;
    for (int axis = 0; axis < dim; ++axis) {
      coords[i * dim + axis] = static_cast<double>(rest % side) * h;
      rest /= side;
    }
  }
  const double w = weights == WeightMode::cell_volume ? std::pow(h, dim) : 1.0 / static_cast<double>(n);
  return Space::from_coordinates(dim, std::move(coords), std::vector<double>(n, w), lattice_edges(dim, side));
}

Space build_cantor(int level, int dim, std::size_t point_budget) {
  if (level < 1) throw ArgumentError("cantor level must be at least 1");
  if (dim < 1 || dim > 2) throw ArgumentError("cantor dimension must be 1 or 2");
  const std::size_t side = std::size_t{1} << level;
  const std::size_t n = checked_count(side, dim, point_budget);
  // Left endpoint of the surviving interval with binary address b: sum of
  // 2 * 3^(level - k) over set bits, divided by 3^level.
  std::vector<double> line(side);
  const double scale = std::pow(3.0, level);
  for (std::size_t b = 0; b < side; ++b) {
    double num = 0.0;
    for (int k = 1; k <= level; ++k)
      if ((b >> (level - k)) & 1U) num += 2.0 * std::pow(3.0, level - k);
    line[b] = num / scale;
  }
  std::vector<double> coords(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rest = i;
    for (int axis = 0; axis < dim; ++axis) {
      coords[i * dim + axis] = line[rest % side];
      rest /= side;
    }
  }
  const double w = std::pow(2.0, -static_cast<double>(level * dim));
  return Space::from_coordinates(dim, std::move(coords), std::vector<double>(n, w), lattice_edges(dim, side));
}

MetricAudit audit_triangle_inequality(const Space& space, std::size_t triples, std::uint64_t seed) {
  MetricAudit audit;
  const std::size_t n = space.size();
  if (n < 3) return audit;
  Rng rng(seed);
  for (std::size_t t = 0; t < triples; ++t) {
    const auto i = static_cast<PointId>(rng.below(n));
    const auto j = static_cast<PointId>(rng.below(n));
    const auto k = static_cast<PointId>(rng.below(n));
    const double lhs = space.dist(i, k);
    const double rhs = space.dist(i, j) + space.dist(j, k);
    const double excess = lhs - rhs;
    ++audit.triples;
    if (excess > 1e-12 * std::max(lhs, rhs)) {
      ++audit.violations;
      audit.worst_excess = std::max(audit.worst_excess, excess);
    }
  }
  return audit;
}

}  // namespace metric_lab
