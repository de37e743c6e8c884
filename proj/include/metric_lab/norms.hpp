#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "metric_lab/field.hpp"
#include "metric_lab/space.hpp"

namespace metric_lab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Young function Phi, optionally rescaled as Phi_rho(t) = Phi(t^rho).
///  - power:        t^p
///  - power_log:    t^p log(e + t)
///  - power_capped: t^p for t <= cap, +inf beyond (a Young function that
///                  jumps to infinity)
struct YoungFunction {
  enum class Kind { power, power_log, power_capped };

  Kind kind = Kind::power;
  double p = 2.0;
  double cap = kInfinity;
  double rho = 1.0;

  static YoungFunction power(double p) { return {Kind::power, p, kInfinity, 1.0}; }
  static YoungFunction power_log(double p) { return {Kind::power_log, p, kInfinity, 1.0}; }
  static YoungFunction power_capped(double p, double cap) { return {Kind::power_capped, p, cap, 1.0}; }

  double operator()(double t) const;
  YoungFunction rescaled(double factor) const {
    YoungFunction y = *this;
    y.rho *= factor;
    return y;
  }
  std::string name() const;
};

/// Checks Phi(0) = 0, monotonicity, midpoint convexity and growth on a log
/// grid of t in [1e-6, 1e6]. Throws ArgumentError on failure.
void validate_young_function(const YoungFunction& phi);

/// max Phi(2t)/Phi(t) over the log grid (finite values only).
double delta2_constant(const YoungFunction& phi);

struct Nabla2Diagnostic {
  double c = 0.0;      // best dilation found
  double value = 0.0;  // max over the grid of 2c Phi(t) / Phi(ct)
  bool holds = false;  // value <= 1
};

/// Searches c in {2, 4, ..., 1024} for Phi(t) <= Phi(ct) / (2c) on the grid.
Nabla2Diagnostic nabla2_diagnostic(const YoungFunction& phi);

struct NormSpec {
  enum class Kind { lebesgue, lorentz, morrey, orlicz, varexp };

  Kind kind = Kind::lebesgue;
  double p = 2.0;  // lebesgue exponent, or first Morrey exponent
  double q = 2.0;  // second Morrey exponent
  double r = 2.0;  // Lorentz
  double m = 2.0;  // Lorentz second index, kInfinity for the weak space
  YoungFunction phi;
  std::vector<double> exponent;  // variable exponent, one value per point

  static NormSpec lebesgue(double p);
  static NormSpec lorentz(double r, double m);
  static NormSpec morrey(double p, double q);
  static NormSpec orlicz(YoungFunction phi);
  static NormSpec varexp(std::vector<double> exponent);

  void validate() const;
  std::string describe() const;
};

double lebesgue_norm(const Space& space, const ScalarField& f, double p);

/// Layer-cake evaluation, exact on the step distribution function:
/// r^(1/m) (int_0^inf (a mu{|f|>a}^(1/r))^m da/a)^(1/m), or the weak
/// sup_a a mu{|f|>a}^(1/r) when m is infinite.
double lorentz_norm(const Space& space, const ScalarField& f, double r, double m);

/// sup over realizable point-centered balls of
/// (mu(B)^(p/q - 1) sum_B |f|^p mu)^(1/p).
double morrey_norm(const Space& space, const ScalarField& f, double p, double q);

struct LuxemburgResult {
  double norm = 0.0;
  double modular = 0.0;  // modular at the returned lambda
  std::size_t evaluations = 0;
};

double orlicz_modular(const Space& space, const ScalarField& f, const YoungFunction& phi, double lambda);
LuxemburgResult orlicz_luxemburg(const Space& space, const ScalarField& f, const YoungFunction& phi);
double orlicz_luxemburg_norm(const Space& space, const ScalarField& f, const YoungFunction& phi);

double varexp_modular(const Space& space, const ScalarField& f, const std::vector<double>& exponent,
                      double lambda);
LuxemburgResult varexp_luxemburg(const Space& space, const ScalarField& f,
                                 const std::vector<double>& exponent);
double varexp_luxemburg_norm(const Space& space, const ScalarField& f,
                             const std::vector<double>& exponent);

struct LogHolderDiagnostic {
  double lh0 = 0.0;     // max |r(x)-r(y)| (-log d(x,y)) over d < 1/2
  double lh_inf = 0.0;  // max |r(x)-r_inf| log(e + d(x, x0))
  double r_inf = 0.0;   // mean of r
  PointId base = 0;
};

LogHolderDiagnostic log_holder_diagnostic(const Space& space, const std::vector<double>& exponent,
                                          PointId base = 0);

/// Dispatch on spec.kind.
double norm(const Space& space, const ScalarField& f, const NormSpec& spec);

}  // namespace metric_lab
