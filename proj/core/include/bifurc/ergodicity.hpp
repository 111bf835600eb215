#pragma once

#include <string>
#include <vector>

#include "bifurc/tree.hpp"

namespace bifurc {

struct DriftConstants {
  double v1 = 0.0;  // contraction factor m(kappa)
  double v2 = 0.0;  // additive constant
};

/// v1 = int z^2 kappa_tilde(z) dz and the explicit v2 built from the declared
/// envelope constants (r1, r2, sigma1, sigma2, b1).
DriftConstants drift_constants(const ModelSpec& spec);

struct DriftProbe {
  double x = 0.0;
  double qv_estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  // v1 x^2 + v2
  bool violation = false;
};

struct DriftReport {
  DriftConstants constants;
  std::vector<DriftProbe> probes;
  std::size_t replications = 0;

  bool any_violation() const;
  std::string to_json() const;
};

/// Monte Carlo check of QV(x) <= v1 V(x) + v2 on a probe grid; a probe is a
/// violation when the estimate exceeds the bound by more than three standard
/// errors.
DriftReport verify_drift_mc(const ModelSpec& spec, const std::vector<double>& x_grid,
                            std::size_t replications, double dt, const Rng& rng);

/// Minorisation mass of the tagged chain in the Ornstein-Uhlenbeck example:
/// lambda = (2/sqrt(pi)) int_0^{w/sqrt(2)} e^{-y^2} (y sqrt(2)/w)^{b/beta} dy.
double ou_minorisation_lambda(double beta, double sigma, double b, double eps, double w);

struct RhoBound {
  double rho = 1.0;
  double contraction_branch = 1.0;  // 1 - (lambda - lambda0)
  double small_set_branch = 1.0;    // (2 + w gamma v0) / (2 + w gamma)
  double v0 = 0.0;
  double gamma = 0.0;
  bool below_half = false;
};

/// Geometric rate from the drift/minorisation pair, for tuning constants
/// (lambda0, eta) and small-set radius w.
RhoBound ou_rho_bound(double lambda, double v1, double v2, double w, double lambda0, double eta);

struct ErgodicityCertificate {
  double beta = 0.0, sigma = 0.0, b = 0.0, eps = 0.0;
  double v1 = 0.0, v2 = 0.0;
  double w = 0.0, lambda = 0.0, lambda0 = 0.0, eta = 0.0;
  RhoBound bound;

  std::string to_json() const;
};

/// Coarse grid search over (w, lambda0, eta) minimizing the rho bound for the
/// OU example constants.
ErgodicityCertificate certificate_search(double beta, double sigma, double b, double eps,
                                         const DriftConstants& drift);

/// Tagged-branch samples after burn-in.
std::vector<double> empirical_invariant(const ModelSpec& spec, double x0, int burn_in, int count,
                                        double dt, Rng& rng);

}  // namespace bifurc
