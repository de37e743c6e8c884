#include "metric_lab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metric_lab/errors.hpp"
#include "metric_lab/parallel.hpp"
#include "metric_lab/random.hpp"

namespace metric_lab {

std::string to_string(AngularPattern pattern) {
  switch (pattern) {
    case AngularPattern::sign_first_coordinate: return "sign-first-coordinate";
    case AngularPattern::random_pm1: return "random-pm1";
    case AngularPattern::custom: return "custom";
  }
  return "unknown";
}

AngularPattern parse_angular_pattern(const std::string& name) {
  if (name == "sign-first-coordinate") return AngularPattern::sign_first_coordinate;
  if (name == "random-pm1") return AngularPattern::random_pm1;
  if (name == "custom") return AngularPattern::custom;
  throw ArgumentError("unknown angular pattern '" + name + "'");
}

void require_kernel_on(const Space& space, const RoughKernelMatrix& kernel) {
  if (kernel.space_id != space.id() || kernel.n != space.size())
    throw ArgumentError("kernel was built on a different space");
}

namespace {

void refresh_audit(const Space& space, RoughKernelMatrix& k) {
  const std::size_t n = k.n;
  const ShellIndex& shells = space.shells();
  std::vector<double> size_c(n, 0.0), resid(n, 0.0), maxw(n, 0.0), rows(n, 0.0);
  parallel_for(n, [&](std::size_t xi) {
    const auto x = static_cast<PointId>(xi);
    const auto row = k.row(x);
    const auto drow = space.distance_row(x);
    const auto order = shells.order(x);
    const auto starts = shells.shell_starts(x);
    for (std::size_t s = 1; s + 1 < starts.size(); ++s) {
      double sum = 0.0;
      for (auto pos = starts[s]; pos < starts[s + 1]; ++pos) {
        const PointId y = order[pos];
        const double kv = row[y];
        const double kw = kv * space.weight(y);
        sum += kw;
        size_c[xi] = std::max(size_c[xi], std::abs(kv) * std::pow(drow[y], k.nu_used));
        maxw[xi] = std::max(maxw[xi], std::abs(kw));
        rows[xi] += std::abs(kw);
      }
      resid[xi] = std::max(resid[xi], std::abs(sum));
    }
  });
  k.size_constant = *std::max_element(size_c.begin(), size_c.end());
  k.shell_null_residual = *std::max_element(resid.begin(), resid.end());
  k.max_weighted = *std::max_element(maxw.begin(), maxw.end());
  k.row_scale = *std::max_element(rows.begin(), rows.end());
}

}  // namespace

RoughKernelMatrix project_kernel(const Space& space, const RoughKernelMatrix& kernel) {
  require_kernel_on(space, kernel);
  RoughKernelMatrix out = kernel;
  const ShellIndex& shells = space.shells();
  parallel_for(out.n, [&](std::size_t xi) {
    const auto x = static_cast<PointId>(xi);
    double* row = out.values.data() + xi * out.n;
    const auto order = shells.order(x);
    const auto starts = shells.shell_starts(x);
    for (std::size_t s = 1; s + 1 < starts.size(); ++s) {
      double num = 0.0, den = 0.0;
      for (auto pos = starts[s]; pos < starts[s + 1]; ++pos) {
        const PointId y = order[pos];
        num += row[y] * space.weight(y);
        den += space.weight(y);
      }
      const double mean = num / den;
      for (auto pos = starts[s]; pos < starts[s + 1]; ++pos) row[order[pos]] -= mean;
    }
  });
  out.projected = true;
  refresh_audit(space, out);
  return out;
}

RoughKernelMatrix build_rough_kernel(const Space& space, double nu, AngularPattern pattern,
                                     bool project, std::uint64_t seed,
                                     std::span<const double> custom_table) {
  if (!(nu > 0.0)) throw ArgumentError("kernel exponent nu must be positive");
  const std::size_t n = space.size();
  if (n < 2) throw ArgumentError("kernel needs at least two points");
  if (pattern == AngularPattern::sign_first_coordinate && !space.has_coordinates())
    throw ArgumentError("sign-first-coordinate pattern needs coordinates");
  if (pattern == AngularPattern::custom && custom_table.size() != n * n)
    throw ArgumentError("custom angular table must be N x N");

  RoughKernelMatrix k;
  k.n = n;
  k.nu_used = nu;
  k.pattern = pattern;
  k.seed = seed;
  k.space_id = space.id();
  k.values.assign(n * n, 0.0);
  parallel_for(n, [&](std::size_t xi) {
    const auto x = static_cast<PointId>(xi);
    const auto drow = space.distance_row(x);
    for (PointId y = 0; y < n; ++y) {
      double omega = 1.0;
      if (y == x) {
        k.values[xi * n + y] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      switch (pattern) {
        case AngularPattern::sign_first_coordinate:
          omega = space.coordinate(y)[0] - space.coordinate(x)[0] < 0.0 ? -1.0 : 1.0;
          break;
        case AngularPattern::random_pm1:
          omega = (mix_hash(seed, x, y) >> 63) ? 1.0 : -1.0;
          break;
        case AngularPattern::custom:
          omega = custom_table[xi * n + y];
          break;
      }
      k.values[xi * n + y] = omega / std::pow(drow[y], nu);
    }
  });
  refresh_audit(space, k);
  return project ? project_kernel(space, k) : k;
}

KernelAudit verify_kernel(const Space& space, const RoughKernelMatrix& kernel) {
  require_kernel_on(space, kernel);
  const std::size_t n = kernel.n;
  const ShellIndex& shells = space.shells();
  std::vector<double> null_r(n, 0.0), annulus(n, 0.0), size_c(n, 0.0);
  std::vector<std::size_t> counts(n, 0);
  std::vector<char> consistent(n, 1);
  parallel_for(n, [&](std::size_t xi) {
    const auto x = static_cast<PointId>(xi);
    const auto row = kernel.row(x);
    const auto drow = space.distance_row(x);
    const auto order = shells.order(x);
    const auto starts = shells.shell_starts(x);
    // Annulus sums between shell midpoints are differences of prefix sums
    // over shells, so the largest one is max(prefix) - min(prefix).
    double prefix = 0.0, lo = 0.0, hi = 0.0, abs_total = 0.0, shell_abs_sum = 0.0;
    for (std::size_t s = 1; s + 1 < starts.size(); ++s) {
      double sum = 0.0;
      for (auto pos = starts[s]; pos < starts[s + 1]; ++pos) {
        const PointId y = order[pos];
        sum += row[y] * space.weight(y);
        abs_total += std::abs(row[y] * space.weight(y));
        size_c[xi] = std::max(size_c[xi], std::abs(row[y]) * std::pow(drow[y], kernel.nu_used));
      }
      null_r[xi] = std::max(null_r[xi], std::abs(sum));
      shell_abs_sum += std::abs(sum);
      prefix += sum;
      lo = std::min(lo, prefix);
      hi = std::max(hi, prefix);
    }
    counts[xi] = starts.size() - 2;
    annulus[xi] = hi - lo;
    const double rounding = 4.0 * std::numeric_limits<double>::epsilon() *
                            static_cast<double>(counts[xi] + 1) * abs_total;
    consistent[xi] = annulus[xi] <= shell_abs_sum + rounding;
  });
  KernelAudit audit;
  audit.null_residual = *std::max_element(null_r.begin(), null_r.end());
  audit.annulus_residual = *std::max_element(annulus.begin(), annulus.end());
  audit.size_constant = *std::max_element(size_c.begin(), size_c.end());
  audit.max_shell_count = *std::max_element(counts.begin(), counts.end());
  audit.annulus_consistent =
      std::all_of(consistent.begin(), consistent.end(), [](char c) { return c != 0; }) &&
      audit.annulus_residual <=
          static_cast<double>(audit.max_shell_count) * audit.null_residual +
              4.0 * std::numeric_limits<double>::epsilon() * kernel.row_scale *
                  static_cast<double>(audit.max_shell_count + 1);
  return audit;
}

}  // namespace metric_lab
