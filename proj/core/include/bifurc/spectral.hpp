#pragma once

#include <cstdint>
#include <vector>

#include "bifurc/transition.hpp"

namespace bifurc {

/// Which spatial variable enters the stationary term of the series density.
/// The two variants differ only there; SpatialZ is the one that integrates to
/// one in z and matches simulated histograms, see the validation tests.
enum class StationaryVariant { SpatialZ, SpatialX };

/// Reflected diffusion on [0, L] with constant drift r1 < 0 and volatility
/// sigma0, uniform fragmentation on [eps, 1-eps]; the transition density has
/// a cosine-sine eigenfunction expansion with N retained terms.
struct SpectralParams {
  double r1 = -0.5;
  double sigma0 = 1.0;
  double length = 1.0;
  double eps = 0.1;
  int terms = 500;
  StationaryVariant stationary = StationaryVariant::SpatialZ;

  void validate() const;

  // Reduced coordinates (volatility scaled out).
  double mu() const { return r1 / sigma0; }
  double lam() const { return length / sigma0; }
};

struct SpectralDiagnostics {
  std::uint64_t negative_clamps = 0;
  std::uint64_t truncation_warnings = 0;
};

/// Transition density rho_t(x, z) of the reflected flow itself (no branching).
double spectral_density_reflected(const SpectralParams& params, double t, double x, double z,
                                  SpectralDiagnostics* diag = nullptr);

struct QGrad {
  double q = 0.0;
  double dq_dtheta = 0.0;
};

/// q_theta(x, y) and its theta-derivative for the constant division rate
/// B = theta, assembled from the same eigenfunction basis by integrating the
/// series against theta e^{-theta t}.
QGrad spectral_q_and_grad(const SpectralParams& params, double theta, double x, double y,
                          SpectralDiagnostics* diag = nullptr);

/// Terms of the dq/dtheta series at one point, for convergence diagnostics.
std::vector<double> spectral_grad_series_terms(const SpectralParams& params, double theta,
                                               double x, double y, int terms);

/// Caches the y-dependent quadratures once so that grids over many theta
/// values cost only the series resummation.
class SpectralQEvaluator {
 public:
  SpectralQEvaluator(const SpectralParams& params, std::vector<double> ys);

  QGrad at(double theta, double x, std::size_t y_index) const;
  TransitionGrid fill(double theta, const std::vector<double>& xs,
                      SpectralDiagnostics* diag = nullptr) const;
  const SpectralParams& params() const { return params_; }
  const std::vector<double>& ys() const { return ys_; }

 private:
  SpectralParams params_;
  std::vector<double> ys_;
  std::vector<double> stationary_part_;  // per y
  std::vector<double> osc_table_;        // terms x ys, I(n, y)
  std::vector<double> a_;                // a(n)
};

}  // namespace bifurc
