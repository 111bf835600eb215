#include "bifurc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bifurc/quadrature.hpp"

namespace bifurc {

namespace {

double legendre(int m, double x) {
  if (m == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= m; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return m == 0 ? p0 : p1;
}

// Cutoff (in units of h) past which Gaussian kernel mass is negligible.
constexpr double kGaussianCut = 8.0;

}  // namespace

KernelSpec make_kernel(KernelKind kind, int order) {
  if (order < 0) throw std::invalid_argument("make_kernel: order must be >= 0");
  KernelSpec spec;
  if (kind == KernelKind::Gaussian) {
    if (order > 1)
      throw std::invalid_argument("make_kernel: the Gaussian kernel has order 1 at most");
    spec.order = 1;
    spec.compact = false;
    spec.non_compact_flagged = true;
    spec.radius = kGaussianCut;
    spec.fn = [](double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI); };
  } else {
    spec.order = order;
    spec.compact = true;
    spec.radius = 1.0;
    // G(u) = sum_m phi_m(0) phi_m(u) over orthonormal Legendre polynomials;
    // integrates any polynomial of degree <= order to its value at zero.
    std::vector<double> coeff(order + 1, 0.0);
    for (int m = 0; m <= order; ++m)
      coeff[m] = (2.0 * m + 1.0) / 2.0 * legendre(m, 0.0);
    spec.fn = [coeff](double u) {
      if (u < -1.0 || u > 1.0) return 0.0;
      double v = 0.0;
      for (int m = 0; m < static_cast<int>(coeff.size()); ++m)
        if (coeff[m] != 0.0) v += coeff[m] * legendre(m, u);
      return v;
    };
  }
  spec.moments.resize(spec.order + 1);
  for (int l = 0; l <= spec.order; ++l) {
    const auto f = [&](double u) { return std::pow(u, l) * spec.fn(u); };
    const double lim = spec.compact ? spec.radius : kGaussianCut;
    spec.moments[l] = integrate(f, -lim, lim, 1e-10);
  }
  return spec;
}

DensityEstimate estimate_nu(const std::vector<double>& samples, const std::vector<double>& grid,
                            double h, const KernelSpec& kernel) {
  if (samples.empty()) throw DataError("estimate_nu: empty sample");
  if (h <= 0.0) throw std::invalid_argument("estimate_nu: bandwidth must be > 0");
  DensityEstimate est;
  est.grid = grid;
  est.h = h;
  est.sample_size = samples.size();
  est.values.resize(grid.size());

  std::vector<double> sorted(samples);
  std::sort(sorted.begin(), sorted.end());
  const double cut = kernel.radius * h;
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double x0 = grid[g];
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), x0 - cut);
    const auto hi = std::upper_bound(lo, sorted.end(), x0 + cut);
    double acc = 0.0;
    for (auto it = lo; it != hi; ++it) acc += kernel.scaled(h, x0 - *it);
    est.values[g] = acc * inv_n;
  }
  return est;
}

double estimate_nu_at(const std::vector<double>& samples, double x0, double h,
                      const KernelSpec& kernel) {
  return estimate_nu(samples, {x0}, h, kernel).values[0];
}

TransitionGrid TransitionEstimate::as_grid() const {
  TransitionGrid grid;
  grid.xs = xs;
  grid.ys = ys;
  grid.values = values;
  grid.provenance = TransitionGrid::Provenance::Nonparam;
  grid.params = {{"h", h}, {"h1", h1}, {"h2", h2}, {"varpi", varpi},
                 {"pairs", static_cast<double>(pair_count)}};
  return grid;
}

TransitionEstimate estimate_q(const std::vector<std::pair<double, double>>& pairs,
                              const std::vector<double>& xs, const std::vector<double>& ys,
                              double h1, double h2, double h, double varpi,
                              const KernelSpec& kernel) {
  if (pairs.empty()) throw DataError("estimate_q: empty pair list");
  if (h1 <= 0.0 || h2 <= 0.0 || h <= 0.0 || varpi <= 0.0)
    throw std::invalid_argument("estimate_q: bandwidths and threshold must be > 0");
  if (xs.size() < 2 || ys.size() < 2) throw std::invalid_argument("estimate_q: degenerate grid");

  TransitionEstimate est;
  est.xs = xs;
  est.ys = ys;
  est.h1 = h1;
  est.h2 = h2;
  est.h = h;
  est.varpi = varpi;
  est.pair_count = pairs.size();

  const std::size_t nx = xs.size(), ny = ys.size();
  std::vector<double> numerator(nx * ny, 0.0);
  std::vector<double> denominator(nx, 0.0);
  const double inv_n = 1.0 / static_cast<double>(pairs.size());

  // Windowed rank-one updates; the kernels vanish (or are negligible, for the
  // Gaussian) past radius * bandwidth.
  const double cx = kernel.radius * h1, cy = kernel.radius * h2, cd = kernel.radius * h;
  std::vector<double> wx, wy;
  for (const auto& [px, py] : pairs) {
    const auto ix_lo = std::lower_bound(xs.begin(), xs.end(), px - cx) - xs.begin();
    const auto ix_hi = std::upper_bound(xs.begin(), xs.end(), px + cx) - xs.begin();
    const auto iy_lo = std::lower_bound(ys.begin(), ys.end(), py - cy) - ys.begin();
    const auto iy_hi = std::upper_bound(ys.begin(), ys.end(), py + cy) - ys.begin();
    wx.assign(ix_hi - ix_lo, 0.0);
    wy.assign(iy_hi - iy_lo, 0.0);
    for (auto i = ix_lo; i < ix_hi; ++i) wx[i - ix_lo] = kernel.scaled(h1, xs[i] - px);
    for (auto j = iy_lo; j < iy_hi; ++j) wy[j - iy_lo] = kernel.scaled(h2, ys[j] - py);
    for (auto i = ix_lo; i < ix_hi; ++i) {
      double* row = numerator.data() + i * ny;
      const double wxi = wx[i - ix_lo];
      for (auto j = iy_lo; j < iy_hi; ++j) row[j] += wxi * wy[j - iy_lo];
    }
    const auto id_lo = std::lower_bound(xs.begin(), xs.end(), px - cd) - xs.begin();
    const auto id_hi = std::upper_bound(xs.begin(), xs.end(), px + cd) - xs.begin();
    for (auto i = id_lo; i < id_hi; ++i) denominator[i] += kernel.scaled(h, xs[i] - px);
  }

  est.values.resize(nx * ny);
  est.clamped.assign(nx, 0);
  for (std::size_t i = 0; i < nx; ++i) {
    const double den = denominator[i] * inv_n;
    const double d = std::max(den, varpi);
    if (den < varpi) est.clamped[i] = 1;
    for (std::size_t j = 0; j < ny; ++j) est.values[i * ny + j] = numerator[i * ny + j] * inv_n / d;
  }
  return est;
}

Bandwidths bandwidth_rule(std::size_t sample_size, double alpha, double beta, BandwidthMode mode) {
  if (sample_size < 1) throw std::invalid_argument("bandwidth_rule: empty sample");
  const double n = static_cast<double>(sample_size);
  Bandwidths b;
  if (mode == BandwidthMode::Practical) {
    b.h = 2.0 * std::pow(n, -1.0 / 3.0);
    b.h1 = b.h2 = 0.1 * std::sqrt(b.h);
    return b;
  }
  if (alpha <= 0.0 || beta <= 0.0)
    throw std::invalid_argument("bandwidth_rule: smoothness must be positive");
  const double ab = std::min(alpha, beta);
  const double s = 1.0 / (1.0 / ab + 1.0 / beta);
  b.h = std::pow(n, -1.0 / (2.0 * beta + 1.0));
  b.h1 = std::pow(n, -s / (ab * (2.0 * s + 1.0)));
  b.h2 = std::pow(n, -s / (beta * (2.0 * s + 1.0)));
  return b;
}

}  // namespace bifurc
