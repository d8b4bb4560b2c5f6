#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fbsde/model.hpp"

namespace fbsde {

/// Not-a-knot cubic spline of a GridField, 1-D or tensor-product 2-D.
///
/// Stored in Hermite form: per node the value and the spline's partial
/// derivatives (f, f_x) in 1-D, (f, f_x, f_y, f_xy) in 2-D, so evaluation is
/// a fixed 4- or 16-term sum. Outside the box each axis is either extended
/// linearly from the boundary value and slope or clamped to the boundary.
class SplineInterpolant {
 public:
  const SpatialGrid& grid() const { return *grid_; }
  std::size_t components() const { return components_; }
  Extrapolation policy() const { return policy_; }

  /// All components at x, written to out (size components()).
  void eval(const Vec& x, std::span<double> out) const;
  double eval(const Vec& x, std::size_t component = 0) const;

 private:
  friend SplineInterpolant fit(const GridField& field, Extrapolation policy);

  SplineInterpolant(std::shared_ptr<const SpatialGrid> grid, std::size_t components, Extrapolation policy);

  struct AxisWeights {
    std::size_t cell;
    // value and derivative weights for nodes cell and cell + 1
    double value[2];
    double slope[2];
  };
  AxisWeights axis_weights(int axis, double x) const;

  std::shared_ptr<const SpatialGrid> grid_;
  std::size_t components_;
  Extrapolation policy_;
  std::size_t stride_;  // doubles per node
  std::vector<double> data_;
};

/// Throws TooFewNodes if an axis has fewer than 4 nodes.
SplineInterpolant fit(const GridField& field, Extrapolation policy = Extrapolation::LinearBoundary);

double eval(const SplineInterpolant& s, const Vec& x, std::size_t component = 0);

}  // namespace fbsde
