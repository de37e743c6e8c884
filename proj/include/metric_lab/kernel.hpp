#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metric_lab/space.hpp"

namespace metric_lab {

enum class AngularPattern { sign_first_coordinate, random_pm1, custom };

std::string to_string(AngularPattern pattern);
AngularPattern parse_angular_pattern(const std::string& name);

/// Off-diagonal kernel K(x, y) on a space, with its size-bound and
/// shell-nullity audit values. Diagonal entries are NaN.
struct RoughKernelMatrix {
  std::size_t n = 0;
  std::vector<double> values;  // row-major N x N
  double nu_used = 0.0;
  double size_constant = 0.0;        // max |K(x,y)| d(x,y)^nu
  double shell_null_residual = 0.0;  // max over (x, shell) |sum K mu|
  double max_weighted = 0.0;         // max |K(x,y)| mu(y)
  double row_scale = 0.0;            // max_x sum_y |K(x,y)| mu(y)
  AngularPattern pattern = AngularPattern::sign_first_coordinate;
  std::uint64_t seed = 0;
  bool projected = false;
  std::uint64_t space_id = 0;

  double at(PointId x, PointId y) const { return values[static_cast<std::size_t>(x) * n + y]; }
  std::span<const double> row(PointId x) const {
    return std::span<const double>(values).subspan(static_cast<std::size_t>(x) * n, n);
  }
};

/// K0(x,y) = omega(x,y) / d(x,y)^nu with omega in {-1, +1}:
///  - sign_first_coordinate: sign of (y - x)[0], ties -> +1;
///  - random_pm1: seeded per ordered pair;
///  - custom: omega taken from `custom_table` (row-major N x N, any reals).
/// With `project`, each shell's weighted mean is subtracted per row so that
/// every annulus sum vanishes.
RoughKernelMatrix build_rough_kernel(const Space& space, double nu, AngularPattern pattern,
                                     bool project, std::uint64_t seed = 0,
                                     std::span<const double> custom_table = {});

/// Weighted mean subtraction on every (row, shell); recomputes the audit values.
RoughKernelMatrix project_kernel(const Space& space, const RoughKernelMatrix& kernel);

struct KernelAudit {
  double null_residual = 0.0;
  double size_constant = 0.0;
  double annulus_residual = 0.0;  // max over x and shell-midpoint pairs a < b
  std::size_t max_shell_count = 0;
  bool annulus_consistent = false;  // annulus_residual <= shells * null_residual
};

KernelAudit verify_kernel(const Space& space, const RoughKernelMatrix& kernel);

void require_kernel_on(const Space& space, const RoughKernelMatrix& kernel);

}  // namespace metric_lab
