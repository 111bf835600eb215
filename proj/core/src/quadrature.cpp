#include "bifurc/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace bifurc {

namespace {

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

// The relative tolerance is halved per split; the absolute floor is not, so
// recursion cannot chase the noise of an inner (nested) quadrature.
double adapt(const std::function<double(double)>& f, double a, double b, double fa, double fm,
             double fb, double whole, double tol, double abs_tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (depth <= 0 || !(std::abs(delta) > 15.0 * std::max(tol, abs_tol))) {
    return left + right + delta / 15.0;
  }
  return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, abs_tol, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, abs_tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  // Sixteen seed panels: gives the relative tolerance a magnitude to hold on
  // to and keeps narrow spikes from slipping between the first Simpson nodes.
  constexpr int kPanels = 16;
  double fs[2 * kPanels + 1];
  double scale = 0.0;
  for (int i = 0; i <= 2 * kPanels; ++i) {
    fs[i] = f(a + (b - a) * i / (2.0 * kPanels));
    scale = std::max(scale, std::abs(fs[i]) * (b - a));
  }
  const double tol = rel_tol * std::max(scale, 1e-300) / kPanels;
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double lo = a + (b - a) * p / kPanels;
    const double hi = a + (b - a) * (p + 1) / kPanels;
    const double whole = simpson(fs[2 * p], fs[2 * p + 1], fs[2 * p + 2], hi - lo);
    total += adapt(f, lo, hi, fs[2 * p], fs[2 * p + 1], fs[2 * p + 2], whole, tol, abs_tol,
                   max_depth);
  }
  return sign * total;
}

GaussLegendre::GaussLegendre(int n) {
  if (n < 1) throw std::invalid_argument("GaussLegendre: order must be >= 1");
  nodes.resize(n);
  weights.resize(n);
  // Newton iteration on P_n, cosine initial guesses.
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[n - 1 - i] = x;
    weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
}

const GaussLegendre& gauss_legendre_32() {
  static const GaussLegendre rule(32);
  return rule;
}

const GaussLegendre& gauss_legendre_8() {
  static const GaussLegendre rule(8);
  return rule;
}

double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
  if (n < 1) throw std::invalid_argument("trapezoid: need n >= 1");
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) s += f(a + i * h);
  return s * h;
}

}  // namespace bifurc
