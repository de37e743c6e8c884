#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "metric_lab/field.hpp"
#include "metric_lab/space.hpp"

namespace metric_lab {

/// Radii per decade in the log-spaced certification grid.
inline constexpr int kRadiiPerDecade = 12;

struct RadiusWindow {
  double r_min = 0.0;
  double r_max = 0.0;
};

/// [3 * min spacing, diameter / 4]: below min spacing balls are singletons,
/// above the diameter they saturate. Spaces too small for that window get
/// [min spacing, diameter / 2].
RadiusWindow default_window(const Space& space);

/// Log-spaced radii from r_min to r_max inclusive, kRadiiPerDecade per decade
/// (at least two when r_min < r_max).
std::vector<double> radius_grid(double r_min, double r_max);

std::vector<PointId> all_centers(const Space& space);

/// Points whose coordinates stay at least `margin` away from the faces of the
/// bounding box. Falls back to all points for spaces without coordinates or
/// when no point qualifies.
std::vector<PointId> interior_centers(const Space& space, double margin);

struct AhlforsSample {
  PointId center = 0;
  double radius = 0.0;
  double mass = 0.0;
};

/// Fitted exponent and extremal constants of c1 r^nu <= mu(B(x,r)) <= c2 r^nu
/// over the sampled (x, r).
struct AhlforsCertificate {
  double nu_hat = 0.0;
  double c1_hat = 0.0;
  double c2_hat = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  std::size_t sample_count = 0;
  bool interior_only = false;
  std::vector<double> radii;
  std::vector<PointId> centers;
  std::vector<AhlforsSample> samples;

  double ratio() const { return c2_hat / c1_hat; }
};

/// mass / r^nu, evaluated the same way for fitting and for auditing.
double ahlfors_ratio(double mass, double radius, double nu);

/// Least-squares slope of log mass against log r over centers x radius grid.
/// r_max above the diameter is clamped to the diameter.
AhlforsCertificate certify_ahlfors(const Space& space, double r_min, double r_max,
                                   const std::vector<PointId>& centers);

/// Default window with interior centers (margin r_max) or all centers.
AhlforsCertificate certify_ahlfors(const Space& space, bool interior_only = true);

/// Re-evaluates every sample; true iff c1 <= mass/r^nu <= c2 for all of them.
bool certificate_sound(const Space& space, const AhlforsCertificate& cert);

struct DoublingReport {
  double d_theory = 0.0;  // c2 * 2^nu / c1
  double d_empirical = 0.0;
  std::size_t pairs = 0;
};

/// Largest mu(B(x,2r)) / mu(B(x,r)) over certificate centers and radii with
/// 2r inside the window. Throws ConsistencyError if it exceeds
/// d_theory * (1 + tolerance).
DoublingReport check_doubling(const Space& space, const AhlforsCertificate& cert,
                              double tolerance = 1e-12);

double doubling_ratio(const Space& space, PointId center, double radius);

struct Theorem1Condition {
  bool holds = false;
  double value = 0.0;  // 2^(1-nu) * c2/c1; must be < 1
};

Theorem1Condition theorem1_condition(double nu, double constant_ratio);
Theorem1Condition theorem1_condition(const AhlforsCertificate& cert);

struct PoincareParams {
  double s_exp = 1.0;
  double q_exp = 2.0;
  double sigma = 2.0;

  void validate() const;
};

struct PoincareEstimate {
  double constant = 0.0;  // +inf when some RHS vanishes with LHS > 0
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

using FieldPair = std::pair<ScalarField, ScalarField>;  // (f, g)

/// Largest ratio of q-oscillation of f on B(x,r) to r times the s-average of
/// g on B(x, sigma r). Each g must pass the upper-gradient audit for its f.
PoincareEstimate estimate_poincare_constant(const Space& space, const PoincareParams& params,
                                            const std::vector<FieldPair>& fields,
                                            const std::vector<std::pair<PointId, double>>& balls);

}  // namespace metric_lab
