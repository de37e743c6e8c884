#include "metric_lab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "metric_lab/errors.hpp"
#include "metric_lab/numeric.hpp"

namespace metric_lab {

namespace {

constexpr double kModularFloor = 1.0 - 1e-9;
constexpr int kBracketSteps = 2000;

std::vector<double> young_grid() {
  std::vector<double> t;
  for (int k = -120; k <= 120; ++k) t.push_back(std::pow(10.0, k / 20.0));
  return t;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

template <class Modular>
LuxemburgResult luxemburg(const Space& space, const ScalarField& f, Modular modular) {
  LuxemburgResult res;
  const double peak = max_abs(f);
  if (peak == 0.0) return res;
  double l1 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) l1 += std::abs(f[i]) * space.weight(static_cast<PointId>(i));

  auto eval = [&](double lambda) {
    ++res.evaluations;
    return modular(lambda);
  };
  auto accept = [&](double lambda, double value) {
    res.norm = lambda;
    res.modular = value;
    return res;
  };

  double lo = 0.0, hi = l1 + peak;
  double hi_value = eval(hi);
  if (hi_value <= 1.0) {
    if (hi_value >= kModularFloor) return accept(hi, hi_value);
    lo = hi;
    for (int i = 0;; ++i) {
      if (i == kBracketSteps) throw UnboundedNormError("Luxemburg bracket search did not terminate");
      lo *= 0.5;
      const double v = eval(lo);
      if (v > 1.0) break;
      hi = lo;
      hi_value = v;
      if (v >= kModularFloor) return accept(hi, hi_value);
    }
  } else {
    for (int i = 0;; ++i) {
      if (i == kBracketSteps) throw UnboundedNormError("modular exceeds 1 for every lambda");
      lo = hi;
      hi *= 2.0;
      hi_value = eval(hi);
      if (hi_value <= 1.0) break;
    }
    if (hi_value >= kModularFloor) return accept(hi, hi_value);
  }
  // Invariant: modular(lo) > 1 >= modular(hi).
  while (hi - lo >= 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    const double v = eval(mid);
    if (v <= 1.0) {
      hi = mid;
      hi_value = v;
      if (v >= kModularFloor) break;
    } else {
      lo = mid;
    }
  }
  return accept(hi, hi_value);
}

}  // namespace

double YoungFunction::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  const double u = rho == 1.0 ? t : std::pow(t, rho);
  switch (kind) {
    case Kind::power: return std::pow(u, p);
    case Kind::power_log: return std::pow(u, p) * std::log(std::numbers::e + u);
    case Kind::power_capped: return u <= cap ? std::pow(u, p) : kInfinity;
  }
  return kInfinity;
}

std::string YoungFunction::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::power: os << "t^" << p; break;
    case Kind::power_log: os << "t^" << p << " log(e+t)"; break;
    case Kind::power_capped: os << "t^" << p << " capped at " << cap; break;
  }
  if (rho != 1.0) os << " rescaled by rho=" << rho;
  return os.str();
}

void validate_young_function(const YoungFunction& phi) {
  if (!(phi.p * phi.rho >= 1.0)) throw ArgumentError("Young function growth exponent must be >= 1");
  if (!(phi.cap > 0.0)) throw ArgumentError("Young function cap must be positive");
  if (phi(0.0) != 0.0) throw ArgumentError("Young function must vanish at 0");
  const auto t = young_grid();
  double prev = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = phi(t[i]);
    if (v < prev) throw ArgumentError("Young function must be increasing");
    prev = v;
    if (i + 1 < t.size()) {
      const double a = phi(t[i]), b = phi(t[i + 1]);
      const double mid = phi(0.5 * (t[i] + t[i + 1]));
      if (std::isfinite(b) && mid > 0.5 * (a + b) * (1 + 1e-12))
        throw ArgumentError("Young function must be convex");
    }
  }
  if (!(phi(t.back()) > 1e3)) throw ArgumentError("Young function must grow to infinity");
}

double delta2_constant(const YoungFunction& phi) {
  double worst = 0.0;
  for (double t : young_grid()) {
    const double a = phi(t), b = phi(2.0 * t);
    if (a > 0.0 && std::isfinite(b)) worst = std::max(worst, b / a);
    if (std::isfinite(a) && !std::isfinite(b)) return kInfinity;
  }
  return worst;
}

Nabla2Diagnostic nabla2_diagnostic(const YoungFunction& phi) {
  Nabla2Diagnostic best{0.0, kInfinity, false};
  for (double c = 2.0; c <= 1024.0; c *= 2.0) {
    double worst = 0.0;
    for (double t : young_grid()) {
      const double a = phi(t), b = phi(c * t);
      if (a == 0.0) continue;
      worst = std::max(worst, std::isfinite(b) ? 2.0 * c * a / b : 0.0);
    }
    if (worst < best.value) best = {c, worst, worst <= 1.0};
  }
  return best;
}

NormSpec NormSpec::lebesgue(double p) {
  NormSpec s;
  s.kind = Kind::lebesgue;
  s.p = p;
  return s;
}
NormSpec NormSpec::lorentz(double r, double m) {
  NormSpec s;
  s.kind = Kind::lorentz;
  s.r = r;
  s.m = m;
  return s;
}
NormSpec NormSpec::morrey(double p, double q) {
  NormSpec s;
  s.kind = Kind::morrey;
  s.p = p;
  s.q = q;
  return s;
}
NormSpec NormSpec::orlicz(YoungFunction phi) {
  NormSpec s;
  s.kind = Kind::orlicz;
  s.phi = phi;
  return s;
}
NormSpec NormSpec::varexp(std::vector<double> exponent) {
  NormSpec s;
  s.kind = Kind::varexp;
  s.exponent = std::move(exponent);
  return s;
}

void NormSpec::validate() const {
  switch (kind) {
    case Kind::lebesgue:
      if (!(p >= 1.0) || !std::isfinite(p)) throw ArgumentError("Lebesgue exponent must lie in [1, inf)");
      break;
    case Kind::lorentz:
      if (!(r >= 1.0) || !std::isfinite(r)) throw ArgumentError("Lorentz index r must lie in [1, inf)");
      if (!(m >= 1.0)) throw ArgumentError("Lorentz index m must lie in [1, inf]");
      break;
    case Kind::morrey:
      if (!(p >= 1.0) || !std::isfinite(q)) throw ArgumentError("Morrey exponents need 1 <= p <= q < inf");
      if (p > q) throw ArgumentError("Morrey exponents need p <= q");
      break;
    case Kind::orlicz:
      validate_young_function(phi);
      break;
    case Kind::varexp: {
      if (exponent.empty()) throw ArgumentError("variable exponent is empty");
      const auto [lo, hi] = std::minmax_element(exponent.begin(), exponent.end());
      if (!(*lo > 1.0)) throw ArgumentError("variable exponent needs p- > 1");
      if (!std::isfinite(*hi)) throw ArgumentError("variable exponent needs p+ < inf");
      break;
    }
  }
}

std::string NormSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::lebesgue: os << "L^" << p; break;
    case Kind::lorentz:
      os << "L^{" << r << ",";
      if (std::isinf(m)) os << "inf"; else os << m;
      os << "}";
      break;
    case Kind::morrey: os << "M^{" << p << "," << q << "}"; break;
    case Kind::orlicz: os << "L^Phi, Phi(t) = " << phi.name(); break;
    case Kind::varexp: os << "L^{p(.)}"; break;
  }
  return os.str();
}

double lebesgue_norm(const Space& space, const ScalarField& f, double p) {
  require_same_space(space, f);
  if (!(p >= 1.0) || !std::isfinite(p)) throw ArgumentError("Lebesgue exponent must lie in [1, inf)");
  const double peak = max_abs(f);
  if (peak == 0.0) return 0.0;
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    terms[i] = std::pow(std::abs(f[i]) / peak, p) * space.weight(static_cast<PointId>(i));
  return peak * std::pow(pairwise_sum(terms), 1.0 / p);
}

double lorentz_norm(const Space& space, const ScalarField& f, double r, double m) {
  require_same_space(space, f);
  NormSpec::lorentz(r, m).validate();
  const double peak = max_abs(f);
  if (peak == 0.0) return 0.0;
  std::vector<std::pair<double, double>> levels;  // (|f|, weight)
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] != 0.0) levels.push_back({std::abs(f[i]), space.weight(static_cast<PointId>(i))});
  std::sort(levels.begin(), levels.end());
  // Distinct values a_1 < ... < a_k with D_j = mu{|f| >= a_j}; on
  // [a_{j-1}, a_j) the distribution function mu{|f| > alpha} equals D_j.
  std::vector<double> values, tail;
  for (const auto& [a, w] : levels) {
    if (values.empty() || a != values.back()) {
      values.push_back(a);
      tail.push_back(0.0);
    }
    tail.back() += w;
  }
  for (std::size_t j = tail.size() - 1; j-- > 0;) tail[j] += tail[j + 1];

  if (std::isinf(m)) {
    double best = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) best = std::max(best, values[j] * std::pow(tail[j], 1.0 / r));
    return best;
  }
  std::vector<double> terms(values.size());
  double prev = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double cur = std::pow(values[j] / peak, m);
    terms[j] = std::pow(tail[j], m / r) * (cur - prev) / m;
    prev = cur;
  }
  return peak * std::pow(r, 1.0 / m) * std::pow(pairwise_sum(terms), 1.0 / m);
}

double morrey_norm(const Space& space, const ScalarField& f, double p, double q) {
  require_same_space(space, f);
  NormSpec::morrey(p, q).validate();
  const double peak = max_abs(f);
  if (peak == 0.0) return 0.0;
  const std::size_t n = space.size();
  std::vector<double> powered(n);
  for (std::size_t i = 0; i < n; ++i)
    powered[i] = std::pow(std::abs(f[i]) / peak, p) * space.weight(static_cast<PointId>(i));
  const ShellIndex& shells = space.shells();
  const double exponent = p / q - 1.0;
  double best = 0.0;
  for (PointId c = 0; c < n; ++c) {
    const auto order = shells.order(c);
    const auto starts = shells.shell_starts(c);
    double sum = 0.0, mass = 0.0;
    for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
      for (auto pos = starts[s]; pos < starts[s + 1]; ++pos) {
        sum += powered[order[pos]];
        mass += space.weight(order[pos]);
      }
      best = std::max(best, (exponent == 0.0 ? 1.0 : std::pow(mass, exponent)) * sum);
    }
  }
  return peak * std::pow(best, 1.0 / p);
}

double orlicz_modular(const Space& space, const ScalarField& f, const YoungFunction& phi, double lambda) {
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = phi(std::abs(f[i]) / lambda);
    if (!std::isfinite(v)) return kInfinity;
    sum += v * space.weight(static_cast<PointId>(i));
  }
  return sum;
}

LuxemburgResult orlicz_luxemburg(const Space& space, const ScalarField& f, const YoungFunction& phi) {
  require_same_space(space, f);
  return luxemburg(space, f, [&](double lambda) { return orlicz_modular(space, f, phi, lambda); });
}

double orlicz_luxemburg_norm(const Space& space, const ScalarField& f, const YoungFunction& phi) {
  validate_young_function(phi);
  return orlicz_luxemburg(space, f, phi).norm;
}

double varexp_modular(const Space& space, const ScalarField& f, const std::vector<double>& exponent,
                      double lambda) {
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    sum += std::pow(std::abs(f[i]) / lambda, exponent[i]) * space.weight(static_cast<PointId>(i));
  return sum;
}

LuxemburgResult varexp_luxemburg(const Space& space, const ScalarField& f,
                                 const std::vector<double>& exponent) {
  require_same_space(space, f);
  if (exponent.size() != space.size()) throw ArgumentError("exponent field length does not match the space");
  NormSpec::varexp(exponent).validate();
  return luxemburg(space, f, [&](double lambda) { return varexp_modular(space, f, exponent, lambda); });
}

double varexp_luxemburg_norm(const Space& space, const ScalarField& f, const std::vector<double>& exponent) {
  return varexp_luxemburg(space, f, exponent).norm;
}

LogHolderDiagnostic log_holder_diagnostic(const Space& space, const std::vector<double>& exponent,
                                          PointId base) {
  if (exponent.size() != space.size()) throw ArgumentError("exponent field length does not match the space");
  if (base >= space.size()) throw ArgumentError("base point out of range");
  LogHolderDiagnostic diag;
  diag.base = base;
  for (double v : exponent) diag.r_inf += v;
  diag.r_inf /= static_cast<double>(exponent.size());
  const std::size_t n = space.size();
  for (PointId x = 0; x < n; ++x) {
    for (PointId y = x + 1; y < n; ++y) {
      const double d = space.dist(x, y);
      if (d < 0.5) diag.lh0 = std::max(diag.lh0, std::abs(exponent[x] - exponent[y]) * -std::log(d));
    }
    diag.lh_inf = std::max(diag.lh_inf, std::abs(exponent[x] - diag.r_inf) *
                                            std::log(std::numbers::e + space.dist(x, base)));
  }
  return diag;
}

double norm(const Space& space, const ScalarField& f, const NormSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case NormSpec::Kind::lebesgue: return lebesgue_norm(space, f, spec.p);
    case NormSpec::Kind::lorentz: return lorentz_norm(space, f, spec.r, spec.m);
    case NormSpec::Kind::morrey: return morrey_norm(space, f, spec.p, spec.q);
    case NormSpec::Kind::orlicz: return orlicz_luxemburg(space, f, spec.phi).norm;
    case NormSpec::Kind::varexp: return varexp_luxemburg_norm(space, f, spec.exponent);
  }
  return 0.0;
}

}  // namespace metric_lab
