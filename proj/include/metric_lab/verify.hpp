#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metric_lab/certify.hpp"
#include "metric_lab/field.hpp"
#include "metric_lab/kernel.hpp"
#include "metric_lab/norms.hpp"
#include "metric_lab/space.hpp"

namespace metric_lab {

enum class InequalityId {
  thm1,
  thm2,
  thm3,
  hedberg_split,
  sobolev_like,
  lorentz_endpoint,
  morrey_functional,
  generic_functional,
  maximal_bound,
  poincare,
};

std::string to_string(InequalityId id);
InequalityId parse_inequality_id(const std::string& name);

/// Relative level below which a left-hand side counts as zero; scaled by the
/// natural magnitude of the quantity and by the caller's tolerance scale.
inline constexpr double kZeroTolerance = 1e-10;

struct InequalityReport {
  InequalityId id = InequalityId::thm1;
  std::vector<double> lhs;
  std::vector<double> rhs;
  double empirical_constant = 0.0;
  std::size_t skipped = 0;     // lhs = rhs = 0
  std::size_t violations = 0;  // rhs = 0 < lhs
  std::vector<std::size_t> violating_points;
  bool exploratory = false;
  double zero_tolerance = 0.0;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> notes;

  bool passed() const { return violations == 0; }
  /// lhs/rhs per entry; NaN where skipped, +inf where violated.
  std::vector<double> ratios() const;
};

/// Fills empirical_constant, skipped and violations from lhs/rhs.
void finalize_report(InequalityReport& report, double zero_tolerance);

struct CheckOptions {
  double tolerance_scale = 1.0;
  std::uint64_t seed = 0;
  std::optional<double> poincare_constant;
  std::size_t path_samples = 16;
};

/// Certificate window, fit and constant-condition status as JSON.
nlohmann::ordered_json certificate_json(const AhlforsCertificate& cert);

/// Seeded random walks along the adjacency graph, used as upper-gradient
/// path samples.
std::vector<std::vector<PointId>> sample_paths(const Space& space, std::size_t count, std::size_t length,
                                               std::uint64_t seed);

struct PointwiseParams {
  double s = 1.0;
  double p = 1.5;
  double q = 1.5;
};

/// thm1: T*f <= C R_1(g); needs kernel and upper gradient g of f.
InequalityReport check_thm1(const Space& space, const RoughKernelMatrix& kernel, const ScalarField& f,
                            const ScalarField& g, const AhlforsCertificate& cert,
                            const CheckOptions& options = {});

/// thm2: |R_s f| <= C Mf^(1 - qs/nu) ||f||_{M^{p,q}}^(qs/nu).
InequalityReport check_thm2(const Space& space, const ScalarField& f, const PointwiseParams& params,
                            const AhlforsCertificate& cert, const CheckOptions& options = {});

/// thm3: T*f <= C Mg^(1 - q/nu) ||g||_{M^{p,q}}^(q/nu).
InequalityReport check_thm3(const Space& space, const RoughKernelMatrix& kernel, const ScalarField& f,
                            const ScalarField& g, const PointwiseParams& params,
                            const AhlforsCertificate& cert, const CheckOptions& options = {});

/// Dispatch for thm1/thm2/thm3; kernel and g may be null where unused.
InequalityReport check_pointwise_theorem(const Space& space, const RoughKernelMatrix* kernel,
                                         const ScalarField& f, const ScalarField* g, InequalityId which,
                                         const PointwiseParams& params, const AhlforsCertificate& cert,
                                         const CheckOptions& options = {});

struct HedbergPoint {
  PointId x = 0;
  double maximal = 0.0;        // Mf(x)
  double k_star = 0.0;         // (Mf(x)/||f||)^(-q/nu)
  double bound_at_k_star = 0.0;
  double grid_min_bound = 0.0;
  double k_grid_argmin = 0.0;
  std::vector<double> near;  // R_1 over the grid
  std::vector<double> far;   // R_2 over the grid
};

struct HedbergReport {
  double c1 = 0.0;  // max R_1 / (K^s Mf)
  double c2 = 0.0;  // max R_2 / (K^(s - nu/q) ||f||)
  double morrey = 0.0;
  double worst_factor = 0.0;  // max bound(K*) / min over grid
  bool within_factor = false;
  bool near_monotone = false;  // R_1 nondecreasing in K at every point
  std::vector<double> k_grid;
  std::vector<HedbergPoint> points;
  /// Per sample point: lhs = bound(K*), rhs = grid minimum; points beyond
  /// kHedbergFactor count as violations.
  InequalityReport report;
};

inline constexpr double kHedbergFactor = 4.0;

/// 25 log-spaced cutoffs from min_spacing/2 to 2 * diameter.
std::vector<double> default_k_grid(const Space& space, std::size_t count = 25);

/// Seeded choice of `count` distinct points.
std::vector<PointId> sample_points(const Space& space, std::size_t count, std::uint64_t seed);

HedbergReport check_hedberg_split(const Space& space, const ScalarField& f, const PointwiseParams& params,
                                  const AhlforsCertificate& cert, const std::vector<double>& k_grid,
                                  const std::vector<PointId>& points, const CheckOptions& options = {});

struct FunctionalCase {
  enum class Kind { lebesgue, sobolev_like, lorentz, lorentz_endpoint, morrey, orlicz, varexp };

  Kind kind = Kind::lebesgue;
  double r = 2.0;
  double m = 2.0;
  double p1 = 2.0;
  double q1 = 2.0;
  YoungFunction phi;
  std::vector<double> exponent;  // r(.)

  static FunctionalCase lebesgue(double r);
  static FunctionalCase sobolev_like();
  static FunctionalCase lorentz(double r, double m);
  static FunctionalCase lorentz_endpoint();
  static FunctionalCase morrey(double p1, double q1);
  static FunctionalCase orlicz(YoungFunction phi);
  static FunctionalCase varexp(std::vector<double> exponent);

  std::string name() const;
};

/// ||T*f||_E <= C ||(Mg)^rho||_E ||g||_{M^{p,q}}^(q/nu) with rho = 1 - q/nu,
/// where the middle factor is expressed through the rescaled space of g.
/// The report holds one scalar entry.
InequalityReport check_functional(const Space& space, const RoughKernelMatrix& kernel, const ScalarField& f,
                                  const ScalarField& g, const FunctionalCase& which,
                                  const PointwiseParams& params, const AhlforsCertificate& cert,
                                  const CheckOptions& options = {});

/// Per trial: lhs = ||Mf||, rhs = ||f|| for seeded random fields. For L^1 the
/// params also carry the weak-type ratio ||Mf||_{L^{1,inf}} / ||f||_1.
InequalityReport maximal_boundedness(const Space& space, const NormSpec& spec, std::size_t trials,
                                     std::uint64_t seed);
InequalityReport maximal_boundedness(const Space& space, const NormSpec& spec,
                                     const std::vector<ScalarField>& fields);
double weak_type_ratio(const Space& space, const ScalarField& f);

/// Nonnegative sum of seeded Gaussian bumps evaluated at the coordinates, so
/// the same continuum function can be sampled on different grids. Spaces
/// without coordinates get i.i.d. uniform values.
ScalarField random_bump_field(const Space& space, std::uint64_t seed, int bumps = 4);

/// Same bumps with seeded random signs.
ScalarField random_signed_bump_field(const Space& space, std::uint64_t seed, int bumps = 4);

/// i.i.d. uniform values in [lo, hi).
ScalarField random_uniform_field(const Space& space, std::uint64_t seed, double lo = 0.0, double hi = 1.0);

struct SharpnessConfig {
  InequalityId which = InequalityId::thm2;
  PointwiseParams params;
  const RoughKernelMatrix* kernel = nullptr;  // thm1 / thm3
};

struct SharpnessStep {
  std::size_t iteration = 0;
  std::string move;
  PointId point = 0;
  double ratio = 0.0;
};

struct SharpnessResult {
  ScalarField best_field;
  double initial_ratio = 0.0;
  double best_ratio = 0.0;
  std::vector<SharpnessStep> trace;  // accepted moves only
};

/// Empirical constant of the configured inequality for one field f (for
/// thm1/thm3 the upper gradient is derived from f).
double inequality_ratio(const Space& space, const SharpnessConfig& config, const AhlforsCertificate& cert,
                        const ScalarField& f);

/// Hill climb from a seeded random nonnegative field: single-point doubling or
/// halving, swapping the values of two points, and (kernel checks only) a
/// sign flip. A move is accepted iff the ratio strictly increases.
SharpnessResult sharpness_search(const Space& space, const SharpnessConfig& config,
                                 const AhlforsCertificate& cert, std::size_t iterations, std::uint64_t seed);

/// Max ratio over `samples` seeded i.i.d. uniform fields.
double random_sweep(const Space& space, const SharpnessConfig& config, const AhlforsCertificate& cert,
                    std::size_t samples, std::uint64_t seed);

/// Poincare constant as a report (scalar entry), with the parameters echoed.
InequalityReport poincare_report(const Space& space, const PoincareParams& params,
                                 const std::vector<FieldPair>& fields,
                                 const std::vector<std::pair<PointId, double>>& balls);

}  // namespace metric_lab
