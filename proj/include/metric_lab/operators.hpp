#pragma once

#include <vector>

#include "metric_lab/field.hpp"
#include "metric_lab/kernel.hpp"
#include "metric_lab/space.hpp"

namespace metric_lab {

/// Sum of f(i) * weight(i), pairwise summation in index order.
double integrate(const Space& space, const ScalarField& f);

/// Centered-ball maximal function: for each point, the largest average of |f|
/// over realizable point-centered open balls containing it.
ScalarField maximal_function(const Space& space, const ScalarField& f);

/// Volume of the Euclidean unit ball in R^n.
double unit_ball_volume(int n);

/// R(x) = sum_{y != x} d(x,y)^s / mu(B(x, d(x,y))) f(y) mu(y). With
/// `analytic_ball`, mu(B(x,r)) is replaced by v_n r^n (n = coordinate dim).
ScalarField riesz_potential(const Space& space, const ScalarField& f, double s,
                            bool analytic_ball = false);

struct RieszSplit {
  double near = 0.0;  // d(x,y) < cutoff
  double far = 0.0;   // d(x,y) >= cutoff
};

/// The Riesz sum of |f| at x split at a cutoff radius.
RieszSplit riesz_split(const Space& space, const ScalarField& f, double s, double cutoff, PointId x);

/// T_eps(x) = sum over d(x,y) > eps of K(x,y) f(y) mu(y).
ScalarField truncated_singular(const Space& space, const RoughKernelMatrix& kernel,
                               const ScalarField& f, double eps);

/// sup over eps of |T_eps f(x)|, evaluated exactly on shell midpoints plus one
/// truncation below the nearest neighbour.
ScalarField maximal_singular(const Space& space, const RoughKernelMatrix& kernel,
                             const ScalarField& f);

struct UpperGradient {
  ScalarField g;
  std::vector<PointId> isolated;  // points without neighbours, given g = 0
};

/// g(x) = max over graph neighbours y of |f(x) - f(y)| / d(x, y).
UpperGradient graph_upper_gradient(const Space& space, const ScalarField& f);

/// Edge rule |f(u) - f(v)| <= (g(u) + g(v))/2 * d(u,v) + 1e-12 on every edge,
/// and the trapezoidal path bound on every sampled path.
bool verify_upper_gradient(const Space& space, const ScalarField& f, const ScalarField& g,
                           const std::vector<std::vector<PointId>>& paths = {});

}  // namespace metric_lab
