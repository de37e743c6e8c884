#include <doctest.h>

#include <cmath>
#include <numbers>

#include "metric_lab/errors.hpp"
#include "metric_lab/operators.hpp"
#include "metric_lab/verify.hpp"
#include "oracles.hpp"

using namespace metric_lab;

namespace {

ScalarField coordinate_field(const Space& s, std::size_t axis) {
  std::vector<double> v(s.size());
  for (PointId i = 0; i < s.size(); ++i) v[i] = s.coordinate(i)[axis];
  return ScalarField(s, v);
}

ScalarField add(const Space& s, const ScalarField& a, const ScalarField& b) {
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
  return ScalarField(s, v);
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("integrate") {
  const auto s = build_grid(1, 8, WeightMode::uniform_total_one);
  CHECK(integrate(s, ScalarField::constant(s, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(integrate(s, ScalarField::indicator(s, 3)) == s.weight(3));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = oracle::uniform_field(s, seed, -1, 1);
    CHECK(oracle::rel_diff(integrate(s, f), oracle::naive_sum(s, f)) <= 1e-14);
  }
  const auto other = build_grid(1, 8, WeightMode::uniform_total_one);
  CHECK_THROWS_AS(integrate(other, ScalarField::constant(s, 1.0)), ArgumentError);
}

TEST_CASE("maximal function basics") {
  const auto s = build_grid(2, 5, WeightMode::uniform_total_one);
  const auto M = maximal_function(s, ScalarField::constant(s, -2.5));
  for (PointId i = 0; i < s.size(); ++i) CHECK(M[i] == doctest::Approx(2.5).epsilon(1e-14));

  const auto f = oracle::uniform_field(s, 4, -1, 1);
  const auto Mf = maximal_function(s, f), Mabs = maximal_function(s, f.abs_pow(1.0));
  for (PointId i = 0; i < s.size(); ++i) {
    CHECK(Mf[i] == Mabs[i]);
    CHECK(Mf[i] >= std::abs(f[i]));
  }
}

TEST_CASE("maximal function of a point mass") {
  const auto s = build_grid(2, 5, WeightMode::uniform_total_one);
  const PointId j = 7;
  const auto M = maximal_function(s, ScalarField::indicator(s, j));
  CHECK(M[j] == doctest::Approx(1.0));
  const auto ref = oracle::maximal(s, ScalarField::indicator(s, j));
  for (PointId i = 0; i < s.size(); ++i) CHECK(M[i] == doctest::Approx(ref[i]).epsilon(1e-14));
}

TEST_CASE("maximal function matches exhaustive ball enumeration") {
  for (const auto& s : {build_grid(1, 32, WeightMode::uniform_total_one), build_grid(2, 5, WeightMode::cell_volume),
                        build_cantor(3, 1), build_cantor(2, 2)}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto f = oracle::uniform_field(s, seed, -1, 2);
      const auto M = maximal_function(s, f);
      const auto ref = oracle::maximal(s, f);
      for (PointId i = 0; i < s.size(); ++i) CHECK(M[i] == doctest::Approx(ref[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("maximal function is sublinear and homogeneous") {
  const auto s = build_grid(2, 6, WeightMode::cell_volume);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = oracle::uniform_field(s, seed, -1, 1), h = oracle::uniform_field(s, seed + 100, -1, 1);
    const auto Mf = maximal_function(s, f), Mh = maximal_function(s, h), Msum = maximal_function(s, add(s, f, h));
    const auto Mscaled = maximal_function(s, f.scaled(-3.0));
    for (PointId i = 0; i < s.size(); ++i) {
      CHECK(Msum[i] <= Mf[i] + Mh[i] + 1e-14);
      CHECK(Mscaled[i] == doctest::Approx(3.0 * Mf[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("Riesz potential") {
  const auto s = build_grid(2, 6, WeightMode::cell_volume);
  const auto R0 = riesz_potential(s, ScalarField::constant(s, 0.0), 1.0);
  for (PointId i = 0; i < s.size(); ++i) CHECK(R0[i] == 0.0);
  CHECK_THROWS_AS(riesz_potential(s, R0, 0.0), ArgumentError);

  const auto f = oracle::uniform_field(s, 1, -1, 1);
  const auto R = riesz_potential(s, f, 0.7);
  for (PointId x = 0; x < s.size(); ++x) {
    double ref = 0.0;
    for (PointId y = 0; y < s.size(); ++y) {
      if (y == x) continue;
      const double d = s.dist(x, y);
      // Points of y's own shell lie outside the open ball even when rounding
      // puts them a few ulps closer.
      ref += std::pow(d, 0.7) / oracle::mass_of(s, oracle::ball_members(s, x, d * (1 - 1e-9))) * f[y] * s.weight(y);
    }
    CHECK(R[x] == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("Riesz potential on two points") {
  const double d = 0.3, w = 0.2;
  const auto s = Space::from_distances({0, d, d, 0}, {w, w});
  const ScalarField f(s, {1.5, -2.0});
  const auto R = riesz_potential(s, f, 0.5);
  CHECK(R[0] == doctest::Approx(std::pow(d, 0.5) * -2.0).epsilon(1e-15));
  CHECK(R[1] == doctest::Approx(std::pow(d, 0.5) * 1.5).epsilon(1e-15));
}

TEST_CASE("Riesz potential reduces to the classical one with analytic balls") {
  const auto s = build_grid(2, 24, WeightMode::cell_volume);
  const double h = 1.0 / 24, sexp = 1.0;
  const auto f = oracle::uniform_field(s, 9);
  const auto R = riesz_potential(s, f, sexp, true);
  const double v2 = std::numbers::pi;
  CHECK(unit_ball_volume(2) == doctest::Approx(v2));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
  for (PointId x = 0; x < s.size(); x += 37) {
    double ref = 0.0;
    for (PointId y = 0; y < s.size(); ++y)
      if (y != x) ref += f[y] * h * h / std::pow(s.dist(x, y), 2.0 - sexp);
    CHECK(oracle::rel_diff(R[x], ref / v2) <= 1e-12);
  }
}

TEST_CASE("Riesz positivity and monotonicity") {
  const auto s = build_cantor(3, 2);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = oracle::uniform_field(s, seed);
    const auto bump = oracle::uniform_field(s, seed + 50);
    const auto h = add(s, f, bump);
    const auto Rf = riesz_potential(s, f, 0.4), Rh = riesz_potential(s, h, 0.4);
    for (PointId i = 0; i < s.size(); ++i) {
      CHECK(Rf[i] >= 0.0);
      CHECK(Rf[i] <= Rh[i]);
    }
  }
}

TEST_CASE("Riesz split adds up") {
  const auto s = build_grid(2, 8, WeightMode::cell_volume);
  const auto f = oracle::uniform_field(s, 2);
  const auto R = riesz_potential(s, f, 1.0);
  for (double cut : {0.05, 0.2, 0.6, 2.0}) {
    const auto sp = riesz_split(s, f, 1.0, cut, 10);
    CHECK(sp.near + sp.far == doctest::Approx(R[10]).epsilon(1e-13));
  }
}

TEST_CASE("truncated singular integral") {
  const auto s = build_grid(2, 6, WeightMode::cell_volume);
  const auto k = build_rough_kernel(s, 2.0, AngularPattern::random_pm1, true, 3);
  const auto f = oracle::uniform_field(s, 3, -1, 1);
  const auto none = truncated_singular(s, k, f, s.diameter() * 1.01);
  for (PointId i = 0; i < s.size(); ++i) CHECK(none[i] == 0.0);

  const auto full = truncated_singular(s, k, f, 0.5 * s.min_spacing());
  for (PointId x = 0; x < s.size(); ++x) CHECK(full[x] == doctest::Approx(oracle::truncated(s, k, f, x, 0.0)).epsilon(1e-12));

  // Strict inequality: eps at a shell radius drops that shell.
  const double eps = s.min_spacing();
  const auto at = truncated_singular(s, k, f, eps);
  for (PointId x = 0; x < s.size(); ++x) CHECK(at[x] == doctest::Approx(oracle::truncated(s, k, f, x, eps)).epsilon(1e-12));
}

TEST_CASE("projected kernels annihilate constants at every shell midpoint") {
  const auto s = build_grid(2, 8, WeightMode::cell_volume);
  const auto k = build_rough_kernel(s, 2.0, AngularPattern::random_pm1, true, 1);
  const auto one = ScalarField::constant(s, 1.0);
  for (PointId x = 0; x < s.size(); x += 5)
    for (double r : s.shells().ball_radii(x)) CHECK(std::abs(truncated_singular(s, k, one, r)[x]) <= 1e-10 * k.row_scale);
  const auto T = maximal_singular(s, k, one);
  for (PointId x = 0; x < s.size(); ++x) CHECK(T[x] <= 1e-10 * k.row_scale);
}

TEST_CASE("maximal singular matches a dense truncation scan") {
  for (const auto& s : {build_grid(1, 16, WeightMode::uniform_total_one), build_grid(2, 8, WeightMode::cell_volume),
                        build_cantor(3, 2)}) {
    REQUIRE(s.size() <= 64);
    for (auto p : {AngularPattern::random_pm1, AngularPattern::sign_first_coordinate})
      for (bool project : {true, false}) {
        const auto k = build_rough_kernel(s, 1.3, p, project, 17);
        const auto f = oracle::uniform_field(s, 21, -1, 1);
        const auto T = maximal_singular(s, k, f);
        for (PointId x = 0; x < s.size(); ++x)
          CHECK(T[x] == doctest::Approx(oracle::dense_maximal_singular(s, k, f, x)).epsilon(1e-12));
      }
  }
}

TEST_CASE("maximal singular dominates and is sublinear") {
  const auto s = build_grid(2, 7, WeightMode::cell_volume);
  const auto k = build_rough_kernel(s, 2.0, AngularPattern::random_pm1, true, 8);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto f = oracle::uniform_field(s, seed, -1, 1), h = oracle::uniform_field(s, seed + 9, -1, 1);
    const auto Tf = maximal_singular(s, k, f), Th = maximal_singular(s, k, h);
    const auto Tsum = maximal_singular(s, k, add(s, f, h));
    const auto Tscaled = maximal_singular(s, k, f.scaled(-2.5));
    const auto full = truncated_singular(s, k, f, 0.5 * s.min_spacing());
    for (PointId i = 0; i < s.size(); ++i) {
      CHECK(std::abs(full[i]) <= Tf[i] + 1e-14);
      CHECK(Tsum[i] <= Tf[i] + Th[i] + 1e-12);
      CHECK(Tscaled[i] == doctest::Approx(2.5 * Tf[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("maximal singular of the farthest point mass") {
  const auto s = build_grid(1, 9, WeightMode::uniform_total_one);
  const auto k = build_rough_kernel(s, 1.0, AngularPattern::random_pm1, false, 4);
  const PointId x = 0, far = 8;
  const auto T = maximal_singular(s, k, ScalarField::indicator(s, far));
  CHECK(T[x] == doctest::Approx(std::abs(k.at(x, far)) * s.weight(far)));
}

TEST_CASE("graph upper gradient") {
  const auto s = build_grid(1, 10, WeightMode::uniform_total_one);
  const auto flat = graph_upper_gradient(s, ScalarField::constant(s, 4.0));
  for (PointId i = 0; i < s.size(); ++i) CHECK(flat.g[i] == 0.0);
  const auto ramp = graph_upper_gradient(s, coordinate_field(s, 0));
  for (PointId i = 0; i < s.size(); ++i) CHECK(ramp.g[i] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ramp.isolated.empty());

  const auto iso = Space::from_coordinates(1, {0.0, 0.5, 2.0}, {0.25, 0.25, 0.5}, {{0, 1}});
  const auto gi = graph_upper_gradient(iso, ScalarField(iso, {0.0, 1.0, 5.0}));
  CHECK(gi.isolated == std::vector<PointId>{2});
  CHECK(gi.g[2] == 0.0);
}

TEST_CASE("upper gradient audit") {
  const auto s = build_grid(2, 8, WeightMode::cell_volume);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = oracle::uniform_field(s, seed, -3, 3);
    const auto g = graph_upper_gradient(s, f).g;
    CHECK(verify_upper_gradient(s, f, g, sample_paths(s, 20, 12, seed)));
    CHECK_FALSE(verify_upper_gradient(s, f, ScalarField::constant(s, 0.0)));
  }
  const auto line = build_grid(1, 12, WeightMode::uniform_total_one);
  const auto x = coordinate_field(line, 0);
  const auto half = graph_upper_gradient(line, x).g.scaled(0.5);
  for (const auto& e : line.edges()) {
    CHECK(std::abs(x[e.u] - x[e.v]) > 0.5 * (half[e.u] + half[e.v]) * line.dist(e.u, e.v));
  }
  CHECK_FALSE(verify_upper_gradient(line, x, half));
  CHECK_THROWS_AS(verify_upper_gradient(line, x, graph_upper_gradient(line, x).g, {{0, 2}}), ArgumentError);
}

}
