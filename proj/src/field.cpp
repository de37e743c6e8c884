#include "metric_lab/field.hpp"

#include <cmath>

#include "metric_lab/errors.hpp"

namespace metric_lab {

ScalarField::ScalarField(const Space& space, std::vector<double> values)
    : values_(std::move(values)), space_id_(space.id()) {
  if (values_.size() != space.size()) throw ArgumentError("field length does not match the space");
  for (double v : values_)
    if (!std::isfinite(v)) throw ArgumentError("field values must be finite");
}

ScalarField ScalarField::constant(const Space& space, double value) {
  return ScalarField(space, std::vector<double>(space.size(), value));
}

ScalarField ScalarField::indicator(const Space& space, PointId point) {
  if (point >= space.size()) throw ArgumentError("indicator point out of range");
  std::vector<double> v(space.size(), 0.0);
  v[point] = 1.0;
  return ScalarField(space, std::move(v));
}

ScalarField ScalarField::abs_pow(double rho) const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = rho == 1.0 ? std::abs(values_[i]) : std::pow(std::abs(values_[i]), rho);
  return ScalarField(space_id_, std::move(out));
}

ScalarField ScalarField::scaled(double factor) const {
  std::vector<double> out(values_);
  for (double& v : out) v *= factor;
  return ScalarField(space_id_, std::move(out));
}

void require_same_space(const Space& space, const ScalarField& field) {
  if (field.space_id() != space.id() || field.size() != space.size())
    throw ArgumentError("field does not live on this space");
}

}  // namespace metric_lab
