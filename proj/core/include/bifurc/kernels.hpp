#pragma once

#include <cstdint>
#include <vector>

#include "bifurc/transition.hpp"

namespace bifurc {

enum class KernelKind { Gaussian, Polynomial };

struct KernelSpec {
  int order = 0;
  bool compact = true;
  double radius = 1.0;  // support radius; meaningless when !compact
  ScalarFn fn;
  std::vector<double> moments;  // int x^l G(x) dx, l = 0..order

  /// The Gaussian kernel violates the compact-support requirement of the
  /// kernel definition; it is admitted anyway (the numerical study uses it)
  /// and flagged here.
  bool non_compact_flagged = false;

  double scaled(double h, double u) const { return fn(u / h) / h; }
};

/// Gaussian (order 1) or compactly supported polynomial kernel of the
/// requested order, built by Legendre moment matching on [-1, 1].
KernelSpec make_kernel(KernelKind kind, int order);

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> values;
  double h = 0.0;
  std::size_t sample_size = 0;
};

/// nu_hat(x0) = |U_n|^{-1} sum_u G_h(x0 - X_u).
DensityEstimate estimate_nu(const std::vector<double>& samples, const std::vector<double>& grid,
                            double h, const KernelSpec& kernel);

/// Same estimator at a single point.
double estimate_nu_at(const std::vector<double>& samples, double x0, double h,
                      const KernelSpec& kernel);

struct TransitionEstimate {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> values;  // row-major in x
  double h1 = 0.0, h2 = 0.0, h = 0.0;
  double varpi = 0.0;
  std::vector<std::uint8_t> clamped;  // per x: denominator hit the threshold
  std::size_t pair_count = 0;

  double at(std::size_t i, std::size_t j) const { return values[i * ys.size() + j]; }
  TransitionGrid as_grid() const;
};

/// Quotient estimator of q(x0, y0) over the grid. Numerator and denominator
/// are both normalized by the pair count, the denominator being evaluated on
/// the parent-trait multiset; values clamp the denominator at varpi.
TransitionEstimate estimate_q(const std::vector<std::pair<double, double>>& pairs,
                              const std::vector<double>& xs, const std::vector<double>& ys,
                              double h1, double h2, double h, double varpi,
                              const KernelSpec& kernel);

enum class BandwidthMode { Theoretical, Practical };

struct Bandwidths {
  double h = 0.0, h1 = 0.0, h2 = 0.0;
};

/// Theoretical mode: h = n^{-1/(2 beta + 1)} and the anisotropic pair driven
/// by the effective smoothness 1/s = 1/(alpha ^ beta) + 1/beta. Practical
/// mode: h = 2 n^{-1/3}, h1 = h2 = 0.1 sqrt(h).
Bandwidths bandwidth_rule(std::size_t sample_size, double alpha, double beta, BandwidthMode mode);

}  // namespace bifurc
