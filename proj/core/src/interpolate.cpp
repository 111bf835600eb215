#include "bifurc/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bifurc {

CubicSpline1D::CubicSpline1D(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  const std::size_t n = xs_.size();
  if (n < 2 || ys_.size() != n) throw std::invalid_argument("CubicSpline1D: need >= 2 nodes");
  if (!std::is_sorted(xs_.begin(), xs_.end()))
    throw std::invalid_argument("CubicSpline1D: nodes must be sorted");

  m_.assign(n, 0.0);
  if (n == 2) return;
  // Tridiagonal solve for natural boundary conditions.
  std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = xs_[i] - xs_[i - 1];
    const double hr = xs_[i + 1] - xs_[i];
    diag[i] = 2.0 * (hl + hr);
    upper[i] = hr;
    rhs[i] = 6.0 * ((ys_[i + 1] - ys_[i]) / hr - (ys_[i] - ys_[i - 1]) / hl);
  }
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double hl = xs_[i] - xs_[i - 1];
    const double w = hl / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    if (i == 1) break;
  }
}

double CubicSpline1D::operator()(double x) const {
  if (x < xs_.front() || x > xs_.back())
    throw std::domain_error("CubicSpline1D: query outside the grid hull");
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  std::size_t i = it == xs_.begin() ? 0 : static_cast<std::size_t>(it - xs_.begin()) - 1;
  if (i + 1 >= xs_.size()) i = xs_.size() - 2;
  const double h = xs_[i + 1] - xs_[i];
  const double a = (xs_[i + 1] - x) / h;
  const double b = (x - xs_[i]) / h;
  return a * ys_[i] + b * ys_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

namespace {

/// Natural-spline second derivatives for (xs, ys) strided data, into m2.
void natural_m2(const std::vector<double>& xs, const double* ys, std::size_t stride, double* m2,
                std::vector<double>& diag, std::vector<double>& rhs, std::vector<double>& upper) {
  const std::size_t n = xs.size();
  std::fill(m2, m2 + n, 0.0);
  if (n < 3) return;
  diag.assign(n, 0.0);
  rhs.assign(n, 0.0);
  upper.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = xs[i] - xs[i - 1];
    const double hr = xs[i + 1] - xs[i];
    diag[i] = 2.0 * (hl + hr);
    upper[i] = hr;
    rhs[i] = 6.0 * ((ys[(i + 1) * stride] - ys[i * stride]) / hr -
                    (ys[i * stride] - ys[(i - 1) * stride]) / hl);
  }
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double w = (xs[i] - xs[i - 1]) / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m2[i] = (rhs[i] - upper[i] * m2[i + 1]) / diag[i];
    if (i == 1) break;
  }
}

std::size_t bracket(const std::vector<double>& xs, double x) {
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  if (i + 1 >= xs.size()) i = xs.size() - 2;
  return i;
}

double spline_piece(double xl, double xr, double yl, double yr, double ml, double mr, double x) {
  const double h = xr - xl;
  const double a = (xr - x) / h;
  const double b = (x - xl) / h;
  return a * yl + b * yr + ((a * a * a - a) * ml + (b * b * b - b) * mr) * h * h / 6.0;
}

}  // namespace

CubicGridInterpolator::CubicGridInterpolator(const TransitionGrid& grid)
    : CubicGridInterpolator(grid.xs, grid.ys, grid.values) {}

CubicGridInterpolator::CubicGridInterpolator(std::vector<double> xs, std::vector<double> ys,
                                             std::vector<double> values)
    : xs_(std::move(xs)), ys_(std::move(ys)), values_(std::move(values)) {
  const std::size_t nx = xs_.size(), ny = ys_.size();
  if (nx < 2 || ny < 2 || values_.size() != nx * ny)
    throw std::invalid_argument("CubicGridInterpolator: inconsistent grid");
  if (!std::is_sorted(xs_.begin(), xs_.end()) || !std::is_sorted(ys_.begin(), ys_.end()))
    throw std::invalid_argument("CubicGridInterpolator: grids must be sorted");
  row_m2_.resize(nx * ny);
  std::vector<double> diag, rhs, upper;
  for (std::size_t i = 0; i < nx; ++i)
    natural_m2(ys_, values_.data() + i * ny, 1, row_m2_.data() + i * ny, diag, rhs, upper);
}

double CubicGridInterpolator::operator()(double x, double y) const {
  if (x < xs_.front() || x > xs_.back() || y < ys_.front() || y > ys_.back())
    throw std::domain_error("CubicGridInterpolator: query outside the grid hull");

  const std::size_t nx = xs_.size(), ny = ys_.size();
  const std::size_t j = bracket(ys_, y);

  // One row evaluation per x node, then one natural-spline solve across x;
  // scratch is reused as this is the hot path of the likelihood evaluation.
  thread_local std::vector<double> col, m2, diag, rhs, upper;
  col.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    const double* row = values_.data() + i * ny;
    const double* m = row_m2_.data() + i * ny;
    col[i] = spline_piece(ys_[j], ys_[j + 1], row[j], row[j + 1], m[j], m[j + 1], y);
  }
  m2.resize(nx);
  natural_m2(xs_, col.data(), 1, m2.data(), diag, rhs, upper);
  const std::size_t i = bracket(xs_, x);
  return spline_piece(xs_[i], xs_[i + 1], col[i], col[i + 1], m2[i], m2[i + 1], x);
}

double interpolate_grid(const TransitionGrid& grid, double x, double y) {
  return CubicGridInterpolator(grid)(x, y);
}

}  // namespace bifurc
