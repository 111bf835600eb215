#include "bifurc/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include "bifurc/quadrature.hpp"

namespace bifurc {

namespace {

double a_coeff(double mu, double lam, int n) {
  const double k = M_PI * n / lam;
  return mu * mu + k * k;
}

double g_basis(double mu, double lam, int n, double x) {
  const double k = M_PI * n / lam;
  return k * std::cos(k * x) + mu * std::sin(k * x);
}

double stationary_density(double mu, double lam, double u) {
  return 2.0 * mu * std::exp(2.0 * mu * u) / (std::exp(2.0 * mu * lam) - 1.0);
}

/// Integral of f over [a, b] with panels no wider than `width`, 8-point
/// Gauss-Legendre per panel. Used for the oscillatory basis integrals.
template <class F>
double panel_integral(const F& f, double a, double b, double width) {
  if (!(b > a)) return 0.0;
  const int panels = std::max(2, static_cast<int>(std::ceil((b - a) / width)));
  const GaussLegendre& gl = gauss_legendre_8();
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + (b - a) * p / panels;
    const double hi = a + (b - a) * (p + 1) / panels;
    total += gl.apply(f, lo, hi);
  }
  return total;
}

/// int_{z1}^{z2} e^{mu u} g(n, u) / u du, splitting dyadically from z1 so the
/// 1/u spike and the mode-n oscillation are both resolved.
double osc_integral(double mu, double lam, int n, double z1, double z2) {
  if (!(z2 > z1)) return 0.0;
  const auto f = [&](double u) { return std::exp(mu * u) * g_basis(mu, lam, n, u) / u; };
  const double wavelength = lam / std::max(1, n);  // half period of mode n
  double total = 0.0;
  double lo = z1;
  while (lo < z2) {
    const double hi = std::min(z2, std::max(2.0 * lo, lo + wavelength));
    total += panel_integral(f, lo, hi, wavelength);
    lo = hi;
  }
  return total;
}

double stationary_integral(double mu, double lam, double z1, double z2) {
  if (!(z2 > z1)) return 0.0;
  const auto f = [&](double u) { return stationary_density(mu, lam, u) / u; };
  double total = 0.0;
  double lo = z1;
  while (lo < z2) {
    const double hi = std::min(z2, 2.0 * lo);
    total += integrate(f, lo, hi, 1e-10);
    lo = hi;
  }
  return total;
}

struct Interval {
  double lo = 0.0, hi = 0.0;
  bool empty() const { return !(hi > lo); }
};

/// Fragmentation-scale window [y/(1-eps), min(y/eps, L)] in reduced units.
Interval reduced_window(const SpectralParams& p, double y) {
  Interval w;
  if (y <= 0.0) return w;
  w.lo = y / (1.0 - p.eps) / p.sigma0;
  w.hi = std::min(y / p.eps, p.length) / p.sigma0;
  return w;
}

}  // namespace

void SpectralParams::validate() const {
  if (!(r1 < 0.0)) throw std::invalid_argument("SpectralParams: r1 must be negative");
  if (sigma0 <= 0.0) throw std::invalid_argument("SpectralParams: sigma0 must be positive");
  if (length <= 0.0) throw std::invalid_argument("SpectralParams: length must be positive");
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("SpectralParams: eps outside (0,1/2)");
  if (terms < 1) throw std::invalid_argument("SpectralParams: need at least one term");
}

double spectral_density_reflected(const SpectralParams& params, double t, double x, double z,
                                  SpectralDiagnostics* diag) {
  params.validate();
  if (t <= 0.0) throw std::invalid_argument("spectral_density_reflected: t must be > 0");
  if (x < 0.0 || x > params.length || z < 0.0 || z > params.length)
    throw std::domain_error("spectral_density_reflected: x, z must lie in [0, L]");

  const double mu = params.mu(), lam = params.lam();
  const double xt = x / params.sigma0, zt = z / params.sigma0;
  const double sarg = params.stationary == StationaryVariant::SpatialZ ? zt : xt;

  double sum = 0.0;
  double term = 0.0;
  for (int n = 1; n <= params.terms; ++n) {
    const double a = a_coeff(mu, lam, n);
    term = std::exp(-0.5 * a * t) / a * g_basis(mu, lam, n, xt) * g_basis(mu, lam, n, zt);
    sum += term;
  }
  if (diag && std::abs(term) > 1e-10) ++diag->truncation_warnings;

  const double val =
      stationary_density(mu, lam, sarg) + 2.0 / lam * std::exp(mu * (zt - xt)) * sum;
  const double scaled = val / params.sigma0;
  if (scaled < 0.0) {
    if (diag && scaled < -1e-8) ++diag->negative_clamps;
    return 0.0;
  }
  return scaled;
}

QGrad spectral_q_and_grad(const SpectralParams& params, double theta, double x, double y,
                          SpectralDiagnostics* diag) {
  params.validate();
  if (theta <= 0.0) throw std::invalid_argument("spectral_q_and_grad: theta must be > 0");
  if (x < 0.0 || x > params.length)
    throw std::domain_error("spectral_q_and_grad: x must lie in [0, L]");

  const double mu = params.mu(), lam = params.lam();
  const double eps = params.eps;
  const double xt = x / params.sigma0;
  if (y < 0.0 || y > (1.0 - eps) * params.length) return {0.0, 0.0};

  const double norm = 1.0 / (1.0 - 2.0 * eps);
  QGrad out;

  if (y == 0.0) {
    // Degenerate window: the substitution u = y/z collapses, but the level
    // stays at 0 with weight int dz/z = log((1-eps)/eps).
    const double logw = std::log((1.0 - eps) / eps);
    double qs = 0.0, ds = 0.0, term = 0.0;
    for (int n = 1; n <= params.terms; ++n) {
      const double a = a_coeff(mu, lam, n);
      const double gg = g_basis(mu, lam, n, xt) * g_basis(mu, lam, n, 0.0);
      term = theta / ((theta + 0.5 * a) * a) * gg;
      qs += term;
      ds += gg / ((theta + 0.5 * a) * (theta + 0.5 * a));
    }
    if (diag && std::abs(term) > 1e-10) ++diag->truncation_warnings;
    const double e = std::exp(-mu * xt);
    const double q =
        norm * logw / params.sigma0 * (stationary_density(mu, lam, 0.0) + 2.0 / lam * e * qs);
    out.q = std::max(q, 0.0);
    if (diag && q < -1e-8) ++diag->negative_clamps;
    out.dq_dtheta = norm * logw / params.sigma0 / lam * e * ds;
    return out;
  }

  const Interval w = reduced_window(params, y);
  if (w.empty()) return {0.0, 0.0};

  const double pibar = stationary_integral(mu, lam, w.lo, w.hi);
  double qs = 0.0, ds = 0.0, term = 0.0;
  for (int n = 1; n <= params.terms; ++n) {
    const double a = a_coeff(mu, lam, n);
    const double gi = g_basis(mu, lam, n, xt) * osc_integral(mu, lam, n, w.lo, w.hi);
    term = theta / ((theta + 0.5 * a) * a) * gi;
    qs += term;
    ds += gi / ((theta + 0.5 * a) * (theta + 0.5 * a));
  }
  if (diag && std::abs(term) > 1e-10) ++diag->truncation_warnings;

  const double e = std::exp(-mu * xt);
  const double q = norm * (pibar + 2.0 / lam * e * qs);
  out.q = std::max(q, 0.0);
  if (diag && q < -1e-8) ++diag->negative_clamps;
  out.dq_dtheta = norm / lam * e * ds;
  return out;
}

std::vector<double> spectral_grad_series_terms(const SpectralParams& params, double theta,
                                               double x, double y, int terms) {
  params.validate();
  const double mu = params.mu(), lam = params.lam();
  const double xt = x / params.sigma0;
  const Interval w = reduced_window(params, y);
  std::vector<double> out;
  out.reserve(terms);
  const double norm = 1.0 / ((1.0 - 2.0 * params.eps) * lam);
  for (int n = 1; n <= terms; ++n) {
    const double a = a_coeff(mu, lam, n);
    const double gi = g_basis(mu, lam, n, xt) * osc_integral(mu, lam, n, w.lo, w.hi);
    out.push_back(norm * std::exp(-mu * xt) * gi / ((theta + 0.5 * a) * (theta + 0.5 * a)));
  }
  return out;
}

SpectralQEvaluator::SpectralQEvaluator(const SpectralParams& params, std::vector<double> ys)
    : params_(params), ys_(std::move(ys)) {
  params_.validate();
  const double mu = params_.mu(), lam = params_.lam();
  const int N = params_.terms;
  a_.resize(N);
  for (int n = 1; n <= N; ++n) a_[n - 1] = a_coeff(mu, lam, n);

  stationary_part_.assign(ys_.size(), 0.0);
  osc_table_.assign(static_cast<std::size_t>(N) * ys_.size(), 0.0);
  for (std::size_t j = 0; j < ys_.size(); ++j) {
    const double y = ys_[j];
    if (y <= 0.0 || y > (1.0 - params_.eps) * params_.length) continue;
    const Interval w = reduced_window(params_, y);
    if (w.empty()) continue;
    stationary_part_[j] = stationary_integral(mu, lam, w.lo, w.hi);
    for (int n = 1; n <= N; ++n)
      osc_table_[static_cast<std::size_t>(n - 1) * ys_.size() + j] =
          osc_integral(mu, lam, n, w.lo, w.hi);
  }
}

QGrad SpectralQEvaluator::at(double theta, double x, std::size_t y_index) const {
  if (theta <= 0.0) throw std::invalid_argument("SpectralQEvaluator: theta must be > 0");
  if (y_index >= ys_.size()) throw std::out_of_range("SpectralQEvaluator: y index");
  const double y = ys_[y_index];
  if (y <= 0.0 || y > (1.0 - params_.eps) * params_.length) {
    if (y == 0.0) return spectral_q_and_grad(params_, theta, x, 0.0);
    return {0.0, 0.0};
  }
  const double mu = params_.mu(), lam = params_.lam();
  const double xt = x / params_.sigma0;
  double qs = 0.0, ds = 0.0;
  const int N = params_.terms;
  for (int n = 1; n <= N; ++n) {
    const double a = a_[n - 1];
    const double gi = g_basis(mu, lam, n, xt) *
                      osc_table_[static_cast<std::size_t>(n - 1) * ys_.size() + y_index];
    qs += theta / ((theta + 0.5 * a) * a) * gi;
    ds += gi / ((theta + 0.5 * a) * (theta + 0.5 * a));
  }
  const double norm = 1.0 / (1.0 - 2.0 * params_.eps);
  const double e = std::exp(-mu * xt);
  QGrad out;
  out.q = std::max(norm * (stationary_part_[y_index] + 2.0 / lam * e * qs), 0.0);
  out.dq_dtheta = norm / lam * e * ds;
  return out;
}

TransitionGrid SpectralQEvaluator::fill(double theta, const std::vector<double>& xs,
                                        SpectralDiagnostics* diag) const {
  TransitionGrid grid;
  grid.xs = xs;
  grid.ys = ys_;
  grid.values.assign(xs.size() * ys_.size(), 0.0);
  grid.provenance = TransitionGrid::Provenance::Spectral;
  grid.params = {{"theta", theta},       {"r1", params_.r1},   {"sigma0", params_.sigma0},
                 {"L", params_.length},  {"eps", params_.eps}, {"terms", double(params_.terms)}};

  const double mu = params_.mu(), lam = params_.lam();
  const int N = params_.terms;
  const double norm = 1.0 / (1.0 - 2.0 * params_.eps);

  std::vector<double> weight_q(N), weight_d(N);
  for (int n = 1; n <= N; ++n) {
    const double a = a_[n - 1];
    weight_q[n - 1] = theta / ((theta + 0.5 * a) * a);
    weight_d[n - 1] = 1.0 / ((theta + 0.5 * a) * (theta + 0.5 * a));
  }
  (void)weight_d;

  std::vector<double> gx(N);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double xt = xs[i] / params_.sigma0;
    for (int n = 1; n <= N; ++n) gx[n - 1] = g_basis(mu, lam, n, xt);
    const double e = std::exp(-mu * xt);
    for (std::size_t j = 0; j < ys_.size(); ++j) {
      const double y = ys_[j];
      if (y < 0.0 || y > (1.0 - params_.eps) * params_.length) continue;
      if (y == 0.0) {
        grid.at(i, j) = spectral_q_and_grad(params_, theta, xs[i], 0.0).q;
        continue;
      }
      double qs = 0.0;
      const double* col = osc_table_.data() + j;
      for (int n = 0; n < N; ++n) qs += weight_q[n] * gx[n] * col[static_cast<std::size_t>(n) * ys_.size()];
      const double v = norm * (stationary_part_[j] + 2.0 / lam * e * qs);
      if (diag && v < -1e-8) ++diag->negative_clamps;
      grid.at(i, j) = std::max(v, 0.0);
    }
  }
  return grid;
}

}  // namespace bifurc
