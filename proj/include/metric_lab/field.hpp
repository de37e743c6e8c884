#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "metric_lab/space.hpp"

namespace metric_lab {

/// Real values indexed by the points of one Space.
class ScalarField {
 public:
  ScalarField(const Space& space, std::vector<double> values);

  static ScalarField constant(const Space& space, double value);
  static ScalarField indicator(const Space& space, PointId point);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::uint64_t space_id() const { return space_id_; }

  /// Pointwise |f|^rho (rho = 1 gives |f|).
  ScalarField abs_pow(double rho) const;
  ScalarField scaled(double factor) const;

 private:
  ScalarField(std::uint64_t space_id, std::vector<double> values)
      : values_(std::move(values)), space_id_(space_id) {}
  std::vector<double> values_;
  std::uint64_t space_id_;
};

/// Throws ArgumentError unless `field` was created on `space`.
void require_same_space(const Space& space, const ScalarField& field);

}  // namespace metric_lab
