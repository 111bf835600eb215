#pragma once

#include <vector>

#include "bifurc/transition.hpp"

namespace bifurc {

/// Natural cubic spline through (x_i, y_i); exact at the nodes and exact on
/// affine data.
class CubicSpline1D {
 public:
  CubicSpline1D() = default;
  CubicSpline1D(std::vector<double> xs, std::vector<double> ys);

  double operator()(double x) const;
  double min_x() const { return xs_.front(); }
  double max_x() const { return xs_.back(); }

 private:
  std::vector<double> xs_, ys_, m_;  // m_ = second derivatives
};

/// Bicubic interpolation of a tabulated surface: natural cubic splines along
/// y per grid row, then a natural cubic spline across x of the row values.
/// Queries outside the grid hull throw std::domain_error.
class CubicGridInterpolator {
 public:
  explicit CubicGridInterpolator(const TransitionGrid& grid);
  CubicGridInterpolator(std::vector<double> xs, std::vector<double> ys,
                        std::vector<double> values /* row-major in x */);

  double operator()(double x, double y) const;

 private:
  std::vector<double> xs_, ys_;
  std::vector<double> values_;  // row-major in x
  std::vector<double> row_m2_;  // second derivatives along y, per row
};

/// One-off query helper matching the grid interpolation contract.
double interpolate_grid(const TransitionGrid& grid, double x, double y);

}  // namespace bifurc
