#include "metric_lab/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "metric_lab/errors.hpp"
#include "metric_lab/operators.hpp"

namespace metric_lab {

RadiusWindow default_window(const Space& space) {
  const RadiusWindow w{3.0 * space.min_spacing(), space.diameter() / 4.0};
  if (w.r_max > w.r_min) return w;
  // Too few points for the usual window.
  return {space.min_spacing(), space.diameter() / 2.0};
}

std::vector<double> radius_grid(double r_min, double r_max) {
  if (!(r_min > 0.0) || !(r_max >= r_min)) throw ArgumentError("radius grid needs 0 < r_min <= r_max");
  if (r_max == r_min) return {r_min};
  const double decades = std::log10(r_max / r_min);
  const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(kRadiiPerDecade * decades - 1e-9)));
  std::vector<double> radii(steps + 1);
  const double lmin = std::log(r_min), lmax = std::log(r_max);
  for (std::size_t k = 0; k <= steps; ++k)
    radii[k] = std::exp(lmin + (lmax - lmin) * static_cast<double>(k) / static_cast<double>(steps));
  radii.front() = r_min;
  radii.back() = r_max;
  return radii;
}

std::vector<PointId> all_centers(const Space& space) {
  std::vector<PointId> c(space.size());
  std::iota(c.begin(), c.end(), PointId{0});
  return c;
}

std::vector<PointId> interior_centers(const Space& space, double margin) {
  if (!space.has_coordinates()) return all_centers(space);
  const std::size_t dim = space.dim();
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  for (PointId i = 0; i < space.size(); ++i)
    for (std::size_t k = 0; k < dim; ++k) {
      lo[k] = std::min(lo[k], space.coordinate(i)[k]);
      hi[k] = std::max(hi[k], space.coordinate(i)[k]);
    }
  std::vector<PointId> out;
  for (PointId i = 0; i < space.size(); ++i) {
    bool inside = true;
    for (std::size_t k = 0; k < dim && inside; ++k) {
      const double x = space.coordinate(i)[k];
      inside = x - lo[k] >= margin * (1 - 1e-12) && hi[k] - x >= margin * (1 - 1e-12);
    }
    if (inside) out.push_back(i);
  }
  return out.empty() ? all_centers(space) : out;
}

double ahlfors_ratio(double mass, double radius, double nu) { return mass / std::pow(radius, nu); }

AhlforsCertificate certify_ahlfors(const Space& space, double r_min, double r_max,
                                   const std::vector<PointId>& centers) {
  if (centers.empty()) throw ArgumentError("certification needs at least one center");
  for (PointId c : centers)
    if (c >= space.size()) throw ArgumentError("certification center out of range");
  if (!(r_min > 0.0)) throw ArgumentError("r_min must be positive");
  if (r_max < r_min) throw ArgumentError("r_max must not be below r_min");
  r_max = std::min(r_max, space.diameter());
  if (!(r_max > r_min)) throw InsufficientDataError("radius window holds fewer than two distinct radii");

  AhlforsCertificate cert;
  cert.r_min = r_min;
  cert.r_max = r_max;
  cert.radii = radius_grid(r_min, r_max);
  cert.centers = centers;
  cert.samples.reserve(centers.size() * cert.radii.size());
  for (PointId c : centers)
    for (double r : cert.radii) cert.samples.push_back({c, r, ball_mass(space, c, r)});
  cert.sample_count = cert.samples.size();

  double mx = 0.0, my = 0.0;
  for (const auto& s : cert.samples) {
    mx += std::log(s.radius);
    my += std::log(s.mass);
  }
  const double count = static_cast<double>(cert.samples.size());
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& s : cert.samples) {
    const double dx = std::log(s.radius) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(s.mass) - my);
  }
  cert.nu_hat = sxy / sxx;
  if (!(cert.nu_hat > 0.0))
    throw InsufficientDataError("ball masses do not grow over the radius window");

  cert.c1_hat = std::numeric_limits<double>::infinity();
  cert.c2_hat = 0.0;
  for (const auto& s : cert.samples) {
    const double ratio = ahlfors_ratio(s.mass, s.radius, cert.nu_hat);
    cert.c1_hat = std::min(cert.c1_hat, ratio);
    cert.c2_hat = std::max(cert.c2_hat, ratio);
  }
  return cert;
}

AhlforsCertificate certify_ahlfors(const Space& space, bool interior_only) {
  const RadiusWindow w = default_window(space);
  auto centers = interior_only ? interior_centers(space, w.r_max) : all_centers(space);
  auto cert = certify_ahlfors(space, w.r_min, w.r_max, centers);
  cert.interior_only = interior_only;
  return cert;
}

bool certificate_sound(const Space& space, const AhlforsCertificate& cert) {
  for (const auto& s : cert.samples) {
    const double ratio = ahlfors_ratio(ball_mass(space, s.center, s.radius), s.radius, cert.nu_hat);
    if (ratio < cert.c1_hat || ratio > cert.c2_hat) return false;
  }
  return !cert.samples.empty();
}

double doubling_ratio(const Space& space, PointId center, double radius) {
  return ball_mass(space, center, 2.0 * radius) / ball_mass(space, center, radius);
}

DoublingReport check_doubling(const Space& space, const AhlforsCertificate& cert, double tolerance) {
  if (!(cert.c1_hat > 0.0) || cert.c2_hat < cert.c1_hat || cert.samples.empty())
    throw ArgumentError("invalid Ahlfors certificate");
  DoublingReport rep;
  rep.d_theory = cert.c2_hat * std::pow(2.0, cert.nu_hat) / cert.c1_hat;
  for (const auto& s : cert.samples) {
    if (2.0 * s.radius > cert.r_max * (1 + 1e-12)) continue;
    const double ratio = ball_mass(space, s.center, 2.0 * s.radius) / s.mass;
    rep.d_empirical = std::max(rep.d_empirical, ratio);
    ++rep.pairs;
  }
  if (rep.d_empirical > rep.d_theory * (1.0 + tolerance))
    throw ConsistencyError("empirical doubling constant " + std::to_string(rep.d_empirical) +
                           " exceeds c2 2^nu / c1 = " + std::to_string(rep.d_theory));
  return rep;
}

Theorem1Condition theorem1_condition(double nu, double constant_ratio) {
  Theorem1Condition c;
  c.value = std::pow(2.0, 1.0 - nu) * constant_ratio;
  c.holds = c.value < 1.0;
  return c;
}

Theorem1Condition theorem1_condition(const AhlforsCertificate& cert) {
  return theorem1_condition(cert.nu_hat, cert.ratio());
}

void PoincareParams::validate() const {
  if (!(s_exp >= 1.0)) throw ArgumentError("Poincare exponent s must be >= 1");
  if (!(q_exp > s_exp)) throw ArgumentError("Poincare exponent q must exceed s");
  if (!(sigma >= 1.0)) throw ArgumentError("Poincare dilation sigma must be >= 1");
}

PoincareEstimate estimate_poincare_constant(const Space& space, const PoincareParams& params,
                                            const std::vector<FieldPair>& fields,
                                            const std::vector<std::pair<PointId, double>>& balls) {
  params.validate();
  if (balls.empty()) throw ArgumentError("Poincare estimate needs at least one ball");
  for (auto [c, r] : balls) {
    if (c >= space.size() || !(r > 0.0)) throw ArgumentError("invalid Poincare ball");
    if (params.sigma * r > space.diameter() * (1 + 1e-12))
      throw ArgumentError("dilated Poincare ball exceeds the diameter");
  }
  for (const auto& [f, g] : fields)
    if (!verify_upper_gradient(space, f, g))
      throw PreconditionError("g is not an upper gradient of f");

  PoincareEstimate est;
  for (const auto& [f, g] : fields) {
    for (auto [c, r] : balls) {
      const Ball b = ball(space, c, r);
      const Ball wide = ball(space, c, params.sigma * r);
      double mean = 0.0;
      for (PointId y : b.members) mean += f[y] * space.weight(y);
      mean /= b.mass;
      double osc = 0.0;
      for (PointId y : b.members) osc += std::pow(std::abs(f[y] - mean), params.q_exp) * space.weight(y);
      const auto [lo, hi] = std::minmax_element(b.members.begin(), b.members.end(),
                                                [&](PointId a, PointId z) { return f[a] < f[z]; });
      // A ball on which f is constant has zero oscillation; the mean may be
      // off by rounding, so decide this on the values themselves.
      const double lhs = f[*lo] == f[*hi] ? 0.0 : std::pow(osc / b.mass, 1.0 / params.q_exp);
      double grad = 0.0;
      for (PointId y : wide.members) grad += std::pow(g[y], params.s_exp) * space.weight(y);
      const double rhs = r * std::pow(grad / wide.mass, 1.0 / params.s_exp);
      if (rhs == 0.0) {
        if (lhs == 0.0) {
          ++est.skipped;
          continue;
        }
        est.constant = std::numeric_limits<double>::infinity();
        ++est.evaluated;
        continue;
      }
      est.constant = std::max(est.constant, lhs / rhs);
      ++est.evaluated;
    }
  }
  return est;
}

}  // namespace metric_lab
