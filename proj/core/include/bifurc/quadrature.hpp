#pragma once

#include <functional>
#include <vector>

namespace bifurc {

/// Adaptive Simpson on [a,b]. The relative tolerance is taken against a
/// coarse magnitude scan of the integrand; abs_tol is a fixed per-interval
/// error floor (set it no smaller than the accuracy of the integrand itself,
/// which matters when integrands are themselves quadratures).
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-8, double abs_tol = 1e-14, int max_depth = 28);

struct GaussLegendre {
  std::vector<double> nodes;    // on (-1,1)
  std::vector<double> weights;  // summing to 2

  explicit GaussLegendre(int n);

  /// Apply to f on [a,b].
  template <class F>
  double apply(const F& f, double a, double b) const {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(c + h * nodes[i]);
    return s * h;
  }
};

/// Shared fixed-node rules used by the Monte Carlo transition evaluators.
const GaussLegendre& gauss_legendre_32();
const GaussLegendre& gauss_legendre_8();

/// Composite trapezoid on a uniform grid, mostly for oracle cross-checks.
double trapezoid(const std::function<double(double)>& f, double a, double b, int n);

}  // namespace bifurc
