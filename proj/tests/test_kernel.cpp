#include <doctest.h>

#include <cmath>

#include "metric_lab/errors.hpp"
#include "metric_lab/kernel.hpp"
#include "metric_lab/operators.hpp"
#include "oracles.hpp"

using namespace metric_lab;

namespace {

double max_weighted(const Space& s, const RoughKernelMatrix& k) {
  double m = 0.0;
  for (PointId x = 0; x < s.size(); ++x)
    for (PointId y = 0; y < s.size(); ++y)
      if (x != y) m = std::max(m, std::abs(k.at(x, y)) * s.weight(y));
  return m;
}

// Largest |sum K mu| over annuli a < d < b with a, b drawn from 0 and the
// shell midpoints, by direct scan.
double annulus_oracle(const Space& s, const RoughKernelMatrix& k) {
  double worst = 0.0;
  for (PointId x = 0; x < s.size(); ++x) {
    std::vector<double> d;
    for (PointId y = 0; y < s.size(); ++y)
      if (y != x) d.push_back(s.dist(x, y));
    std::sort(d.begin(), d.end());
    std::vector<double> cuts{0.0};
    for (std::size_t i = 0; i + 1 < d.size(); ++i)
      if (d[i + 1] > d[i] * (1 + 1e-9)) cuts.push_back(0.5 * (d[i] + d[i + 1]));
    cuts.push_back(2 * s.diameter());
    for (std::size_t a = 0; a < cuts.size(); ++a)
      for (std::size_t b = a + 1; b < cuts.size(); ++b) {
        double sum = 0.0;
        for (PointId y = 0; y < s.size(); ++y)
          if (y != x && s.dist(x, y) > cuts[a] && s.dist(x, y) < cuts[b]) sum += k.at(x, y) * s.weight(y);
        worst = std::max(worst, std::abs(sum));
      }
  }
  return worst;
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("two points project to zero") {
  const auto s = build_grid(1, 2, WeightMode::uniform_total_one);
  for (auto p : {AngularPattern::sign_first_coordinate, AngularPattern::random_pm1}) {
    const auto k = build_rough_kernel(s, 1.0, p, true, 3);
    CHECK(k.at(0, 1) == 0.0);
    CHECK(k.at(1, 0) == 0.0);
    CHECK(std::isnan(k.at(0, 0)));
  }
}

TEST_CASE("raw kernel values") {
  const auto s = build_grid(2, 4, WeightMode::cell_volume);
  const auto k = build_rough_kernel(s, 2.0, AngularPattern::sign_first_coordinate, false);
  for (PointId x = 0; x < s.size(); ++x)
    for (PointId y = 0; y < s.size(); ++y) {
      if (x == y) continue;
      const double dx = s.coordinate(y)[0] - s.coordinate(x)[0];
      const double omega = dx < 0 ? -1.0 : 1.0;
      CHECK(k.at(x, y) == doctest::Approx(omega / std::pow(s.dist(x, y), 2.0)).epsilon(1e-14));
    }
  CHECK(k.size_constant == doctest::Approx(1.0));
  CHECK_THROWS_AS(build_rough_kernel(s, 0.0, AngularPattern::random_pm1, true), ArgumentError);
}

TEST_CASE("projected sign kernel on the 8-grid") {
  const auto s = build_grid(2, 8, WeightMode::cell_volume);
  const auto k = build_rough_kernel(s, 2.0, AngularPattern::sign_first_coordinate, true);
  const auto audit = verify_kernel(s, k);
  CHECK(audit.null_residual <= 1e-12 * max_weighted(s, k));
  CHECK(std::isfinite(audit.size_constant));
  CHECK(k.shell_null_residual == doctest::Approx(audit.null_residual));
}

TEST_CASE("antisymmetric shells are already null") {
  const auto s = build_grid(1, 4, WeightMode::uniform_total_one);
  const auto raw = build_rough_kernel(s, 1.0, AngularPattern::sign_first_coordinate, false);
  const auto proj = build_rough_kernel(s, 1.0, AngularPattern::sign_first_coordinate, true);
  // Point 1 has one neighbour on each side at distance h.
  CHECK(proj.at(1, 0) == raw.at(1, 0));
  CHECK(proj.at(1, 2) == raw.at(1, 2));
  CHECK(proj.at(2, 1) == raw.at(2, 1));
  CHECK(proj.at(2, 3) == raw.at(2, 3));
}

TEST_CASE("annulus sums on small spaces") {
  for (const auto& s : {build_grid(1, 16, WeightMode::uniform_total_one), build_grid(2, 8, WeightMode::cell_volume),
                        build_cantor(3, 2), build_grid(3, 4, WeightMode::cell_volume)}) {
    REQUIRE(s.size() <= 64);
    for (auto p : {AngularPattern::sign_first_coordinate, AngularPattern::random_pm1}) {
      const auto k = build_rough_kernel(s, 1.5, p, true, 11);
      const auto a = verify_kernel(s, k);
      const double scale = max_weighted(s, k);
      CHECK(a.annulus_residual <= a.max_shell_count * a.null_residual + 1e-15 * scale);
      CHECK(a.annulus_residual <= 1e-9 * scale);
      CHECK(annulus_oracle(s, k) <= 1e-12 * scale * a.max_shell_count);
      CHECK(a.annulus_consistent);
    }
  }
}

TEST_CASE("zero kernel") {
  const auto s = build_grid(1, 6, WeightMode::uniform_total_one);
  const std::vector<double> table(s.size() * s.size(), 0.0);
  const auto k = build_rough_kernel(s, 1.0, AngularPattern::custom, false, 0, table);
  const auto a = verify_kernel(s, k);
  CHECK(a.null_residual == 0.0);
  CHECK(a.annulus_residual == 0.0);
  CHECK(a.size_constant == 0.0);
}

TEST_CASE("unprojected random kernel is not null") {
  const auto s = build_grid(1, 16, WeightMode::uniform_total_one);
  const auto k = build_rough_kernel(s, 1.0, AngularPattern::random_pm1, false, 5);
  CHECK(verify_kernel(s, k).null_residual > 0.0);
}

TEST_CASE("projection is idempotent") {
  const auto s = build_grid(2, 7, WeightMode::cell_volume);
  const auto k = build_rough_kernel(s, 2.0, AngularPattern::random_pm1, true, 2);
  const auto again = project_kernel(s, k);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < k.values.size(); ++i) {
    if (std::isnan(k.values[i])) continue;
    worst = std::max(worst, std::abs(k.values[i] - again.values[i]));
    scale = std::max(scale, std::abs(k.values[i]));
  }
  CHECK(worst <= 1e-14 * scale);
}

TEST_CASE("projection at most doubles the size constant") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = build_grid(2, 9, WeightMode::cell_volume);
    const auto raw = build_rough_kernel(s, 2.0, AngularPattern::random_pm1, false, seed);
    const auto proj = project_kernel(s, raw);
    CHECK(proj.size_constant <= 2 * raw.size_constant + 1e-12);
  }
}

TEST_CASE("kernels belong to their space") {
  const auto a = build_grid(1, 8, WeightMode::uniform_total_one);
  const auto b = build_grid(1, 8, WeightMode::uniform_total_one);
  const auto k = build_rough_kernel(a, 1.0, AngularPattern::random_pm1, true);
  CHECK_NOTHROW(require_kernel_on(a, k));
  CHECK_THROWS_AS(require_kernel_on(b, k), ArgumentError);
}

TEST_CASE("pattern names") {
  for (auto p : {AngularPattern::sign_first_coordinate, AngularPattern::random_pm1, AngularPattern::custom})
    CHECK(parse_angular_pattern(to_string(p)) == p);
  CHECK_THROWS_AS(parse_angular_pattern("zigzag"), ArgumentError);
}

}
