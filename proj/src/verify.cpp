#include "metric_lab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "metric_lab/errors.hpp"
#include "metric_lab/operators.hpp"
#include "metric_lab/random.hpp"

namespace metric_lab {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kAtomicNote = "discrete atomic measure: every check is a discretization of the nonatomic setting";
constexpr const char* kBallNote = "maximal function and Morrey norms use point-centered balls only";
constexpr const char* kGradientNote =
    "upper gradients are audited on graph edges and sampled edge paths, not on all rectifiable curves";
constexpr const char* kKernelNote = "kernel angular pattern is a synthetic construction";
constexpr const char* kExploratoryNote = "exploratory (condition 2^{1-ν}c2/c1 ≥ 1)";

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void require_upper_gradient(const Space& space, const ScalarField& f, const ScalarField& g,
                            const CheckOptions& options) {
  require_same_space(space, g);
  const auto paths = sample_paths(space, options.path_samples, 8, options.seed);
  if (!verify_upper_gradient(space, f, g, paths))
    throw PreconditionError("g is not an upper gradient of f (edge or path rule fails)");
}

void require_morrey_pair(double p, double q) {
  if (!(p > 1.0)) throw ArgumentError("Morrey exponent p must exceed 1 (maximal function bounded on L^p)");
  if (!(p <= q) || !std::isfinite(q)) throw ArgumentError("Morrey exponents need p <= q < inf");
}

json kernel_json(const RoughKernelMatrix& kernel) {
  json k;
  k["pattern"] = to_string(kernel.pattern);
  k["nu"] = kernel.nu_used;
  k["projected"] = kernel.projected;
  k["seed"] = kernel.seed;
  k["size_constant"] = kernel.size_constant;
  k["shell_null_residual"] = kernel.shell_null_residual;
  return k;
}

InequalityReport base_report(InequalityId id, const AhlforsCertificate& cert, const CheckOptions& options) {
  InequalityReport r;
  r.id = id;
  r.seed = options.seed;
  r.params["certificate"] = certificate_json(cert);
  r.params["tolerance_scale"] = options.tolerance_scale;
  if (options.poincare_constant) r.params["poincare_constant"] = *options.poincare_constant;
  r.notes.push_back(kAtomicNote);
  return r;
}

void mark_condition(InequalityReport& r, const AhlforsCertificate& cert) {
  const auto cond = theorem1_condition(cert);
  r.exploratory = !cond.holds;
  if (r.exploratory) r.notes.push_back(kExploratoryNote);
}

double pow_or_one(double base, double exponent) { return exponent == 0.0 ? 1.0 : std::pow(base, exponent); }

std::vector<double> power_rhs(const ScalarField& maximal, double morrey, double theta) {
  std::vector<double> rhs(maximal.size());
  for (std::size_t i = 0; i < rhs.size(); ++i)
    rhs[i] = pow_or_one(maximal[i], 1.0 - theta) * pow_or_one(morrey, theta);
  return rhs;
}

std::vector<double> bump_values(const Space& space, std::uint64_t seed, int bumps, bool signed_bumps) {
  const std::size_t n = space.size();
  Rng rng(seed);
  if (!space.has_coordinates()) {
    std::vector<double> v(n);
    for (auto& x : v) x = signed_bumps ? rng.uniform(-1.0, 1.0) : rng.uniform();
    return v;
  }
  const std::size_t dim = space.dim();
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity()), hi(dim, -lo[0]);
  for (PointId i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dim; ++k) {
      lo[k] = std::min(lo[k], space.coordinate(i)[k]);
      hi[k] = std::max(hi[k], space.coordinate(i)[k]);
    }
  struct Bump {
    double amplitude, width;
    std::vector<double> center;
  };
  std::vector<Bump> list;
  for (int b = 0; b < bumps; ++b) {
    Bump bump;
    bump.amplitude = rng.uniform(0.2, 1.0);
    if (signed_bumps && rng.coin()) bump.amplitude = -bump.amplitude;
    bump.width = rng.uniform(0.05, 0.3);
    for (std::size_t k = 0; k < dim; ++k) bump.center.push_back(rng.uniform(0.0, 1.0));
    list.push_back(std::move(bump));
  }
  std::vector<double> v(n, 0.0);
  for (PointId i = 0; i < n; ++i) {
    const auto x = space.coordinate(i);
    for (const auto& b : list) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        // Coordinates are mapped to the unit cube so the same continuum
        // function is sampled by every refinement.
        const double span = hi[k] > lo[k] ? hi[k] - lo[k] : 1.0;
        const double t = (x[k] - lo[k]) / span - b.center[k];
        d2 += t * t;
      }
      v[i] += b.amplitude * std::exp(-0.5 * d2 / (b.width * b.width));
    }
  }
  return v;
}

}  // namespace

std::string to_string(InequalityId id) {
  switch (id) {
    case InequalityId::thm1: return "thm1";
    case InequalityId::thm2: return "thm2";
    case InequalityId::thm3: return "thm3";
    case InequalityId::hedberg_split: return "hedberg_split";
    case InequalityId::sobolev_like: return "sobolev_like";
    case InequalityId::lorentz_endpoint: return "lorentz_endpoint";
    case InequalityId::morrey_functional: return "morrey_functional";
    case InequalityId::generic_functional: return "generic_functional";
    case InequalityId::maximal_bound: return "maximal_bound";
    case InequalityId::poincare: return "poincare";
  }
  return "unknown";
}

InequalityId parse_inequality_id(const std::string& name) {
  for (auto id : {InequalityId::thm1, InequalityId::thm2, InequalityId::thm3, InequalityId::hedberg_split,
                  InequalityId::sobolev_like, InequalityId::lorentz_endpoint, InequalityId::morrey_functional,
                  InequalityId::generic_functional, InequalityId::maximal_bound, InequalityId::poincare})
    if (to_string(id) == name) return id;
  throw ArgumentError("unknown inequality id: " + name);
}

std::vector<double> InequalityReport::ratios() const {
  std::vector<double> out(lhs.size());
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (rhs[i] > 0.0) out[i] = lhs[i] / rhs[i];
    else if (lhs[i] <= zero_tolerance) out[i] = std::numeric_limits<double>::quiet_NaN();
    else out[i] = std::numeric_limits<double>::infinity();
  }
  return out;
}

void finalize_report(InequalityReport& report, double zero_tolerance) {
  if (report.lhs.size() != report.rhs.size()) throw ArgumentError("lhs and rhs lengths differ");
  report.zero_tolerance = zero_tolerance;
  report.empirical_constant = 0.0;
  report.skipped = report.violations = 0;
  report.violating_points.clear();
  for (std::size_t i = 0; i < report.lhs.size(); ++i) {
    if (report.rhs[i] > 0.0) {
      report.empirical_constant = std::max(report.empirical_constant, report.lhs[i] / report.rhs[i]);
    } else if (report.lhs[i] <= zero_tolerance) {
      ++report.skipped;
    } else {
      ++report.violations;
      report.violating_points.push_back(i);
    }
  }
}

json certificate_json(const AhlforsCertificate& cert) {
  json c;
  c["nu_hat"] = cert.nu_hat;
  c["c1_hat"] = cert.c1_hat;
  c["c2_hat"] = cert.c2_hat;
  c["r_min"] = cert.r_min;
  c["r_max"] = cert.r_max;
  c["sample_count"] = cert.sample_count;
  c["interior_only"] = cert.interior_only;
  const auto cond = theorem1_condition(cert);
  c["condition_value"] = cond.value;
  c["condition_holds"] = cond.holds;
  return c;
}

std::vector<std::vector<PointId>> sample_paths(const Space& space, std::size_t count, std::size_t length,
                                               std::uint64_t seed) {
  std::vector<std::vector<PointId>> paths;
  if (!space.has_adjacency() || space.size() == 0) return paths;
  Rng rng(mix_hash(seed, 0x9a7c, count));
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<PointId> path{static_cast<PointId>(rng.below(space.size()))};
    for (std::size_t step = 0; step < length; ++step) {
      const auto nbrs = space.neighbors(path.back());
      if (nbrs.empty()) break;
      path.push_back(nbrs[rng.below(nbrs.size())]);
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

InequalityReport check_thm1(const Space& space, const RoughKernelMatrix& kernel, const ScalarField& f,
                            const ScalarField& g, const AhlforsCertificate& cert, const CheckOptions& options) {
  require_same_space(space, f);
  require_kernel_on(space, kernel);
  require_upper_gradient(space, f, g, options);
  InequalityReport r = base_report(InequalityId::thm1, cert, options);
  r.params["kernel"] = kernel_json(kernel);
  r.params["s"] = 1.0;
  mark_condition(r, cert);
  r.notes.push_back(kGradientNote);
  r.notes.push_back(kKernelNote);
  const auto lhs = maximal_singular(space, kernel, f);
  const auto rhs = riesz_potential(space, g, 1.0);
  r.lhs.assign(lhs.values().begin(), lhs.values().end());
  r.rhs.assign(rhs.values().begin(), rhs.values().end());
  finalize_report(r, kZeroTolerance * options.tolerance_scale * kernel.row_scale * max_abs(f.values()));
  return r;
}

InequalityReport check_thm2(const Space& space, const ScalarField& f, const PointwiseParams& params,
                            const AhlforsCertificate& cert, const CheckOptions& options) {
  require_same_space(space, f);
  if (!(params.s > 0.0)) throw ArgumentError("Riesz order s must be positive");
  require_morrey_pair(params.p, params.q);
  const double nu = cert.nu_hat;
  if (!(params.s < nu / params.q)) throw ArgumentError("thm2 requires s < nu/q");
  InequalityReport r = base_report(InequalityId::thm2, cert, options);
  r.params["s"] = params.s;
  r.params["p"] = params.p;
  r.params["q"] = params.q;
  r.notes.push_back(kBallNote);
  const double theta = params.q * params.s / nu;
  const auto potential = riesz_potential(space, f, params.s);
  const auto maximal = maximal_function(space, f);
  const double morrey = morrey_norm(space, f, params.p, params.q);
  r.params["morrey_norm"] = morrey;
  r.lhs.resize(space.size());
  for (std::size_t i = 0; i < r.lhs.size(); ++i) r.lhs[i] = std::abs(potential[i]);
  r.rhs = power_rhs(maximal, morrey, theta);
  finalize_report(r, kZeroTolerance * options.tolerance_scale * max_abs(r.lhs));
  return r;
}

InequalityReport check_thm3(const Space& space, const RoughKernelMatrix& kernel, const ScalarField& f,
                            const ScalarField& g, const PointwiseParams& params, const AhlforsCertificate& cert,
                            const CheckOptions& options) {
  require_same_space(space, f);
  require_kernel_on(space, kernel);
  require_morrey_pair(params.p, params.q);
  const double nu = cert.nu_hat;
  if (!(params.q / nu < 1.0)) throw ArgumentError("thm3 requires q/nu < 1");
  require_upper_gradient(space, f, g, options);
  InequalityReport r = base_report(InequalityId::thm3, cert, options);
  r.params["kernel"] = kernel_json(kernel);
  r.params["p"] = params.p;
  r.params["q"] = params.q;
  mark_condition(r, cert);
  r.notes.push_back(kGradientNote);
  r.notes.push_back(kKernelNote);
  r.notes.push_back(kBallNote);
  const auto lhs = maximal_singular(space, kernel, f);
  const auto maximal = maximal_function(space, g);
  const double morrey = morrey_norm(space, g, params.p, params.q);
  r.params["morrey_norm"] = morrey;
  r.lhs.assign(lhs.values().begin(), lhs.values().end());
  r.rhs = power_rhs(maximal, morrey, params.q / nu);
  finalize_report(r, kZeroTolerance * options.tolerance_scale * kernel.row_scale * max_abs(f.values()));
  return r;
}

InequalityReport check_pointwise_theorem(const Space& space, const RoughKernelMatrix* kernel, const ScalarField& f,
                                         const ScalarField* g, InequalityId which, const PointwiseParams& params,
                                         const AhlforsCertificate& cert, const CheckOptions& options) {
  if (which == InequalityId::thm2) return check_thm2(space, f, params, cert, options);
  if (which != InequalityId::thm1 && which != InequalityId::thm3)
    throw ArgumentError("pointwise checks are thm1, thm2 or thm3");
  if (!kernel) throw ArgumentError(to_string(which) + " needs a kernel");
  if (!g) throw ArgumentError(to_string(which) + " needs an upper gradient g");
  if (which == InequalityId::thm1) return check_thm1(space, *kernel, f, *g, cert, options);
  return check_thm3(space, *kernel, f, *g, params, cert, options);
}

std::vector<double> default_k_grid(const Space& space, std::size_t count) {
  const double lo = space.min_spacing() / 2.0, hi = 2.0 * space.diameter();
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k)
    grid[k] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(k) /
                                          static_cast<double>(count - 1));
  return grid;
}

std::vector<PointId> sample_points(const Space& space, std::size_t count, std::uint64_t seed) {
  std::vector<PointId> ids(space.size());
  std::iota(ids.begin(), ids.end(), PointId{0});
  count = std::min(count, ids.size());
  Rng rng(mix_hash(seed, 0x5eed, count));
  for (std::size_t k = 0; k < count; ++k) std::swap(ids[k], ids[k + rng.below(ids.size() - k)]);
  ids.resize(count);
  return ids;
}

HedbergReport check_hedberg_split(const Space& space, const ScalarField& f, const PointwiseParams& params,
                                  const AhlforsCertificate& cert, const std::vector<double>& k_grid,
                                  const std::vector<PointId>& points, const CheckOptions& options) {
  require_same_space(space, f);
  require_morrey_pair(params.p, params.q);
  const double nu = cert.nu_hat, s = params.s;
  if (!(s > 0.0) || !(s < nu / params.q)) throw ArgumentError("Hedberg split requires 0 < s < nu/q");
  if (std::any_of(f.values().begin(), f.values().end(), [](double v) { return v < 0.0; }))
    throw ArgumentError("Hedberg split requires f >= 0");
  if (max_abs(f.values()) == 0.0) throw ArgumentError("Hedberg split is degenerate for f = 0");
  if (k_grid.empty() || points.empty()) throw ArgumentError("Hedberg split needs cutoffs and sample points");

  HedbergReport out;
  out.k_grid = k_grid;
  const auto maximal = maximal_function(space, f);
  out.morrey = morrey_norm(space, f, params.p, params.q);
  const double far_exp = s - nu / params.q;
  out.near_monotone = true;
  for (PointId x : points) {
    HedbergPoint hp;
    hp.x = x;
    hp.maximal = maximal[x];
    hp.k_star = std::pow(hp.maximal / out.morrey, -params.q / nu);
    double prev = 0.0;
    for (double k : k_grid) {
      const auto split = riesz_split(space, f, s, k, x);
      hp.near.push_back(split.near);
      hp.far.push_back(split.far);
      out.c1 = std::max(out.c1, split.near / (std::pow(k, s) * hp.maximal));
      out.c2 = std::max(out.c2, split.far / (std::pow(k, far_exp) * out.morrey));
      if (split.near < prev) out.near_monotone = false;
      prev = split.near;
    }
    out.points.push_back(std::move(hp));
  }
  InequalityReport r = base_report(InequalityId::hedberg_split, cert, options);
  r.params["s"] = s;
  r.params["p"] = params.p;
  r.params["q"] = params.q;
  r.params["morrey_norm"] = out.morrey;
  r.params["c1"] = out.c1;
  r.params["c2"] = out.c2;
  r.params["factor_limit"] = kHedbergFactor;
  r.params["k_grid_size"] = k_grid.size();
  r.notes.push_back(kBallNote);
  for (auto& hp : out.points) {
    auto bound = [&](double k) {
      return out.c1 * std::pow(k, s) * hp.maximal + out.c2 * std::pow(k, far_exp) * out.morrey;
    };
    hp.bound_at_k_star = bound(hp.k_star);
    hp.grid_min_bound = std::numeric_limits<double>::infinity();
    for (double k : k_grid) {
      if (bound(k) < hp.grid_min_bound) {
        hp.grid_min_bound = bound(k);
        hp.k_grid_argmin = k;
      }
    }
    r.lhs.push_back(hp.bound_at_k_star);
    r.rhs.push_back(hp.grid_min_bound);
  }
  finalize_report(r, 0.0);
  for (std::size_t i = 0; i < r.lhs.size(); ++i) {
    if (r.rhs[i] > 0.0 && r.lhs[i] > kHedbergFactor * r.rhs[i]) {
      ++r.violations;
      r.violating_points.push_back(i);
    }
  }
  out.worst_factor = r.empirical_constant;
  out.within_factor = out.worst_factor <= kHedbergFactor;
  r.params["worst_factor"] = out.worst_factor;
  r.params["within_factor"] = out.within_factor;
  out.report = std::move(r);
  return out;
}

FunctionalCase FunctionalCase::lebesgue(double r) {
  FunctionalCase c;
  c.kind = Kind::lebesgue;
  c.r = r;
  return c;
}
FunctionalCase FunctionalCase::sobolev_like() {
  FunctionalCase c;
  c.kind = Kind::sobolev_like;
  return c;
}
FunctionalCase FunctionalCase::lorentz(double r, double m) {
  FunctionalCase c;
  c.kind = Kind::lorentz;
  c.r = r;
  c.m = m;
  return c;
}
FunctionalCase FunctionalCase::lorentz_endpoint() {
  FunctionalCase c;
  c.kind = Kind::lorentz_endpoint;
  c.m = kInfinity;
  return c;
}
FunctionalCase FunctionalCase::morrey(double p1, double q1) {
  FunctionalCase c;
  c.kind = Kind::morrey;
  c.p1 = p1;
  c.q1 = q1;
  return c;
}
FunctionalCase FunctionalCase::orlicz(YoungFunction phi) {
  FunctionalCase c;
  c.kind = Kind::orlicz;
  c.phi = phi;
  return c;
}
FunctionalCase FunctionalCase::varexp(std::vector<double> exponent) {
  FunctionalCase c;
  c.kind = Kind::varexp;
  c.exponent = std::move(exponent);
  return c;
}

std::string FunctionalCase::name() const {
  switch (kind) {
    case Kind::lebesgue: return "lebesgue";
    case Kind::sobolev_like: return "sobolev_like";
    case Kind::lorentz: return "lorentz";
    case Kind::lorentz_endpoint: return "lorentz_endpoint";
    case Kind::morrey: return "morrey";
    case Kind::orlicz: return "orlicz";
    case Kind::varexp: return "varexp";
  }
  return "unknown";
}

InequalityReport check_functional(const Space& space, const RoughKernelMatrix& kernel, const ScalarField& f,
                                  const ScalarField& g, const FunctionalCase& which, const PointwiseParams& params,
                                  const AhlforsCertificate& cert, const CheckOptions& options) {
  using Kind = FunctionalCase::Kind;
  require_same_space(space, f);
  require_kernel_on(space, kernel);
  const double nu = cert.nu_hat;
  PointwiseParams pq = params;
  if (which.kind == Kind::sobolev_like) pq.p = pq.q;
  require_morrey_pair(pq.p, pq.q);
  const double theta = pq.q / nu;
  if (!(theta < 1.0)) throw ArgumentError("functional inequalities require q/nu < 1");
  const double rho = 1.0 - theta;

  // Parameter constraints first, so no work is done on invalid input.
  NormSpec lhs_spec, g_spec;
  switch (which.kind) {
    case Kind::lebesgue:
      if (!(rho * which.r > 1.0)) throw ArgumentError("Lebesgue case requires (1 - q/nu) r > 1");
      lhs_spec = NormSpec::lebesgue(which.r);
      g_spec = NormSpec::lebesgue(rho * which.r);
      break;
    case Kind::sobolev_like: {
      const double r = pq.q / rho;
      lhs_spec = NormSpec::lebesgue(r);
      g_spec = NormSpec::lebesgue(pq.q);
      break;
    }
    case Kind::lorentz:
      if (!(rho * which.r > 1.0)) throw ArgumentError("Lorentz case requires (1 - q/nu) r > 1");
      if (!(rho * which.m >= 1.0)) throw ArgumentError("Lorentz case requires (1 - q/nu) m >= 1");
      lhs_spec = NormSpec::lorentz(which.r, which.m);
      g_spec = NormSpec::lorentz(rho * which.r, rho * which.m);
      break;
    case Kind::lorentz_endpoint:
      lhs_spec = NormSpec::lorentz(1.0 / rho, kInfinity);
      g_spec = NormSpec::lebesgue(1.0);
      break;
    case Kind::morrey:
      if (!(rho * which.p1 > 1.0)) throw ArgumentError("Morrey case requires (1 - q/nu) p1 > 1");
      if (!(which.q1 >= which.p1)) throw ArgumentError("Morrey case requires (1 - q/nu) q1 >= (1 - q/nu) p1");
      lhs_spec = NormSpec::morrey(which.p1, which.q1);
      g_spec = NormSpec::morrey(rho * which.p1, rho * which.q1);
      break;
    case Kind::orlicz: {
      validate_young_function(which.phi);
      const YoungFunction rescaled = which.phi.rescaled(rho);
      try {
        validate_young_function(rescaled);
      } catch (const ArgumentError& e) {
        throw ArgumentError(std::string("Orlicz case requires the rescaled function Phi(t^(1 - q/nu)) to be a "
                                        "Young function: ") + e.what());
      }
      lhs_spec = NormSpec::orlicz(which.phi);
      g_spec = NormSpec::orlicz(rescaled);
      break;
    }
    case Kind::varexp: {
      if (which.exponent.size() != space.size()) throw ArgumentError("exponent field length does not match the space");
      std::vector<double> scaled(which.exponent);
      for (auto& v : scaled) v *= rho;
      if (!(*std::min_element(scaled.begin(), scaled.end()) > 1.0))
        throw ArgumentError("variable exponent case requires (1 - q/nu) r- > 1");
      lhs_spec = NormSpec::varexp(which.exponent);
      g_spec = NormSpec::varexp(std::move(scaled));
      break;
    }
  }
  lhs_spec.validate();
  g_spec.validate();
  require_upper_gradient(space, f, g, options);

  const InequalityId id = which.kind == Kind::sobolev_like       ? InequalityId::sobolev_like
                          : which.kind == Kind::lorentz_endpoint ? InequalityId::lorentz_endpoint
                          : which.kind == Kind::morrey           ? InequalityId::morrey_functional
                                                                 : InequalityId::generic_functional;
  InequalityReport r = base_report(id, cert, options);
  r.params["case"] = which.name();
  r.params["p"] = pq.p;
  r.params["q"] = pq.q;
  r.params["rho"] = rho;
  r.params["lhs_norm"] = lhs_spec.describe();
  r.params["g_norm"] = g_spec.describe();
  r.params["kernel"] = kernel_json(kernel);
  mark_condition(r, cert);
  r.notes.push_back(kGradientNote);
  r.notes.push_back(kKernelNote);
  r.notes.push_back(kBallNote);
  if (which.kind == Kind::orlicz) {
    r.params["delta2_constant"] = delta2_constant(g_spec.phi);
    const auto n2 = nabla2_diagnostic(g_spec.phi);
    r.params["nabla2"] = json{{"c", n2.c}, {"value", n2.value}, {"holds", n2.holds}};
  }
  if (which.kind == Kind::varexp) {
    const auto lh = log_holder_diagnostic(space, g_spec.exponent);
    r.params["log_holder"] = json{{"lh0", lh.lh0}, {"lh_inf", lh.lh_inf}, {"r_inf", lh.r_inf}};
  }

  const auto tstar = maximal_singular(space, kernel, f);
  const double lhs = norm(space, tstar, lhs_spec);
  double rhs;
  if (which.kind == Kind::sobolev_like) {
    rhs = lebesgue_norm(space, g, pq.q);
    r.params["rhs_product_form"] = pow_or_one(rhs, rho) * pow_or_one(morrey_norm(space, g, pq.q, pq.q), theta);
  } else {
    const double morrey = morrey_norm(space, g, pq.p, pq.q);
    r.params["morrey_norm"] = morrey;
    rhs = pow_or_one(norm(space, g, g_spec), rho) * pow_or_one(morrey, theta);
  }
  r.lhs = {lhs};
  r.rhs = {rhs};
  // Pointwise noise below tol makes a norm below the norm of the constant tol.
  const double pointwise_tol = kZeroTolerance * options.tolerance_scale * kernel.row_scale * max_abs(f.values());
  const double tol = pointwise_tol > 0.0 ? norm(space, ScalarField::constant(space, pointwise_tol), lhs_spec) : 0.0;
  finalize_report(r, tol);
  return r;
}

double weak_type_ratio(const Space& space, const ScalarField& f) {
  const double l1 = lebesgue_norm(space, f, 1.0);
  if (l1 == 0.0) return 0.0;
  return lorentz_norm(space, maximal_function(space, f), 1.0, kInfinity) / l1;
}

InequalityReport maximal_boundedness(const Space& space, const NormSpec& spec, const std::vector<ScalarField>& fields) {
  spec.validate();
  InequalityReport r;
  r.id = InequalityId::maximal_bound;
  r.params["norm"] = spec.describe();
  r.params["trials"] = fields.size();
  r.notes.push_back(kAtomicNote);
  r.notes.push_back(kBallNote);
  const bool weak = spec.kind == NormSpec::Kind::lebesgue && spec.p == 1.0;
  double weak_max = 0.0;
  for (const auto& f : fields) {
    require_same_space(space, f);
    const auto mf = maximal_function(space, f);
    r.lhs.push_back(norm(space, mf, spec));
    r.rhs.push_back(norm(space, f, spec));
    if (weak) weak_max = std::max(weak_max, weak_type_ratio(space, f));
  }
  if (weak) r.params["weak_type_constant"] = weak_max;
  finalize_report(r, 0.0);
  return r;
}

InequalityReport maximal_boundedness(const Space& space, const NormSpec& spec, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw ArgumentError("maximal_boundedness needs at least one trial");
  std::vector<ScalarField> fields;
  for (std::size_t t = 0; t < trials; ++t) fields.push_back(random_bump_field(space, mix_hash(seed, t, 0x4d)));
  auto r = maximal_boundedness(space, spec, fields);
  r.seed = seed;
  return r;
}

ScalarField random_bump_field(const Space& space, std::uint64_t seed, int bumps) {
  return ScalarField(space, bump_values(space, seed, bumps, false));
}

ScalarField random_signed_bump_field(const Space& space, std::uint64_t seed, int bumps) {
  return ScalarField(space, bump_values(space, seed, bumps, true));
}

ScalarField random_uniform_field(const Space& space, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  std::vector<double> v(space.size());
  for (auto& x : v) x = rng.uniform(lo, hi);
  return ScalarField(space, std::move(v));
}

double inequality_ratio(const Space& space, const SharpnessConfig& config, const AhlforsCertificate& cert,
                        const ScalarField& f) {
  InequalityReport r;
  switch (config.which) {
    case InequalityId::thm2: r = check_thm2(space, f, config.params, cert); break;
    case InequalityId::thm1:
    case InequalityId::thm3: {
      if (!config.kernel) throw ArgumentError("sharpness search for " + to_string(config.which) + " needs a kernel");
      const auto g = graph_upper_gradient(space, f).g;
      r = config.which == InequalityId::thm1 ? check_thm1(space, *config.kernel, f, g, cert)
                                             : check_thm3(space, *config.kernel, f, g, config.params, cert);
      break;
    }
    default: throw ArgumentError("sharpness search supports thm1, thm2 and thm3");
  }
  return r.violations > 0 ? std::numeric_limits<double>::infinity() : r.empirical_constant;
}

SharpnessResult sharpness_search(const Space& space, const SharpnessConfig& config, const AhlforsCertificate& cert,
                                 std::size_t iterations, std::uint64_t seed) {
  const std::size_t n = space.size();
  if (n < 2) throw ArgumentError("sharpness search needs at least two points");
  Rng rng(seed);
  std::vector<double> values(n);
  for (auto& v : values) v = rng.uniform();
  SharpnessResult res{ScalarField(space, values), 0.0, 0.0, {}};
  res.initial_ratio = res.best_ratio = inequality_ratio(space, config, cert, res.best_field);
  const bool signed_moves = config.which != InequalityId::thm2;
  const std::size_t move_kinds = signed_moves ? 4 : 3;
  for (std::size_t it = 0; it < iterations; ++it) {
    std::vector<double> trial = values;
    const auto move = rng.below(move_kinds);
    const auto i = static_cast<PointId>(rng.below(n));
    std::string name;
    switch (move) {
      case 0: trial[i] *= 2.0; name = "double"; break;
      case 1: trial[i] *= 0.5; name = "halve"; break;
      case 2: {
        auto j = static_cast<PointId>(rng.below(n - 1));
        if (j >= i) ++j;
        std::swap(trial[i], trial[j]);
        name = "swap";
        break;
      }
      default: trial[i] = -trial[i]; name = "flip"; break;
    }
    ScalarField candidate(space, trial);
    const double ratio = inequality_ratio(space, config, cert, candidate);
    if (ratio > res.best_ratio) {
      res.best_ratio = ratio;
      res.best_field = std::move(candidate);
      values = std::move(trial);
      res.trace.push_back({it, name, i, ratio});
    }
  }
  return res;
}

double random_sweep(const Space& space, const SharpnessConfig& config, const AhlforsCertificate& cert,
                    std::size_t samples, std::uint64_t seed) {
  double best = 0.0;
  for (std::size_t k = 0; k < samples; ++k)
    best = std::max(best, inequality_ratio(space, config, cert, random_uniform_field(space, mix_hash(seed, k, 0x5a))));
  return best;
}

InequalityReport poincare_report(const Space& space, const PoincareParams& params, const std::vector<FieldPair>& fields,
                                 const std::vector<std::pair<PointId, double>>& balls) {
  const auto est = estimate_poincare_constant(space, params, fields, balls);
  InequalityReport r;
  r.id = InequalityId::poincare;
  r.params["s_exp"] = params.s_exp;
  r.params["q_exp"] = params.q_exp;
  r.params["sigma"] = params.sigma;
  r.params["balls"] = balls.size();
  r.params["pairs_evaluated"] = est.evaluated;
  r.params["pairs_skipped"] = est.skipped;
  r.notes.push_back(kAtomicNote);
  r.notes.push_back(kGradientNote);
  r.lhs = {est.constant};
  r.rhs = {1.0};
  finalize_report(r, 0.0);
  r.skipped = est.skipped;
  return r;
}

}  // namespace metric_lab
