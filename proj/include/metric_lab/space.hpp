#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace metric_lab {

using PointId = std::uint32_t;

struct Edge {
  PointId u = 0;
  PointId v = 0;
};

enum class MetricKind { euclidean, graph, explicit_matrix };

enum class WeightMode { uniform_total_one, cell_volume };

inline constexpr std::size_t kDefaultPointBudget = 4096;

/// Distances within this relative tolerance of a shell's first distance
/// belong to that shell.
inline constexpr double kShellRelativeTolerance = 1e-9;

/// For every center, the points sorted by distance and grouped into shells
/// (sets of equal distance). Shell 0 is always {center}. Every realizable
/// open ball B(c, r) is a prefix of shells 0..k of c.
class ShellIndex {
 public:
  ShellIndex() = default;
  ShellIndex(std::size_t n, std::span<const double> distances);

  std::span<const PointId> order(PointId center) const {
    return {order_.data() + static_cast<std::size_t>(center) * n_, n_};
  }

  /// Offsets into order(center); shell k spans [starts[k], starts[k+1]).
  /// The last entry equals the number of points.
  std::span<const std::uint32_t> shell_starts(PointId center) const {
    const auto b = offsets_[center];
    return {starts_.data() + b, offsets_[center + 1] - b};
  }

  std::size_t shell_count(PointId center) const { return shell_starts(center).size() - 1; }

  /// Distance of shell k (its first member) from the center.
  double shell_radius(PointId center, std::size_t k) const {
    return radii_[offsets_[center] + k];
  }

  /// Radii that realize every distinct open ball around the center: the
  /// midpoints between consecutive shells, plus one radius past the last
  /// shell. Entry k yields the ball made of shells 0..k.
  std::vector<double> ball_radii(PointId center) const;

 private:
  std::size_t n_ = 0;
  std::vector<PointId> order_;
  std::vector<std::uint32_t> starts_;
  std::vector<double> radii_;  // parallel to starts_, last slot unused
  std::vector<std::size_t> offsets_;
};

/// A finite metric measure space. Immutable; copies share storage.
class Space {
 public:
  /// Points given by coordinates (row-major, `dim` values per point). The
  /// metric is Euclidean, or the shortest-path metric of the adjacency graph
  /// with Euclidean edge lengths.
  static Space from_coordinates(std::size_t dim, std::vector<double> coords,
                                std::vector<double> weights, std::vector<Edge> adjacency = {},
                                MetricKind metric = MetricKind::euclidean);

  /// Arbitrary metric via an explicit row-major N x N distance matrix.
  /// Coordinates are optional (dim = 0 when absent).
  static Space from_distances(std::vector<double> distances, std::vector<double> weights,
                              std::vector<Edge> adjacency = {}, std::size_t dim = 0,
                              std::vector<double> coords = {},
                              MetricKind metric = MetricKind::explicit_matrix);

  std::size_t size() const;
  std::size_t dim() const;
  bool has_coordinates() const { return dim() > 0; }
  std::span<const double> coordinate(PointId i) const;
  std::span<const double> coordinates() const;

  double dist(PointId i, PointId j) const { return distance_row(i)[j]; }
  std::span<const double> distance_row(PointId i) const;
  std::span<const double> distances() const;

  double weight(PointId i) const { return weights()[i]; }
  std::span<const double> weights() const;
  double total_mass() const;

  bool has_adjacency() const { return !edges().empty(); }
  std::span<const Edge> edges() const;
  std::span<const PointId> neighbors(PointId i) const;

  double diameter() const;
  /// Smallest positive distance between two points.
  double min_spacing() const;
  MetricKind metric() const;

  /// Lazily built on first use; thread-safe.
  const ShellIndex& shells() const;

  /// Identity shared by copies; used to check that fields live on this space.
  std::uint64_t id() const;

 private:
  struct Data;
  explicit Space(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  static Space finish(std::shared_ptr<Data> data);
  std::shared_ptr<const Data> data_;
};

struct Ball {
  PointId center = 0;
  double radius = 0.0;
  std::vector<PointId> members;  // ascending ids, {y : dist(center, y) < radius}
  double mass = 0.0;
};

Ball ball(const Space& space, PointId center, double radius);

/// Mass of B(center, radius) without materializing the member list.
double ball_mass(const Space& space, PointId center, double radius);

/// Regular grid on [0,1)^dim with spacing h = 1/n_per_side, points at i*h,
/// Euclidean metric and axis-neighbor adjacency.
Space build_grid(int dim, int n_per_side, WeightMode weights,
                 std::size_t point_budget = kDefaultPointBudget);

/// Middle-thirds Cantor set at depth `level` (product set for dim = 2). Points
/// are left endpoints of surviving intervals, each of weight 2^(-level*dim).
Space build_cantor(int level, int dim, std::size_t point_budget = kDefaultPointBudget);

struct MetricAudit {
  std::size_t triples = 0;
  std::size_t violations = 0;
  double worst_excess = 0.0;
};

/// Samples random triples and counts triangle-inequality violations beyond a
/// relative tolerance of 1e-12.
MetricAudit audit_triangle_inequality(const Space& space, std::size_t triples,
                                      std::uint64_t seed);

}  // namespace metric_lab
