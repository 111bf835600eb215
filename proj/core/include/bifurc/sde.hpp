#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "bifurc/errors.hpp"
#include "bifurc/rng.hpp"

namespace bifurc {

enum class DomainKind { FullLine, ReflectedInterval };

using ScalarFn = std::function<double(double)>;

/// Scalar trait diffusion dX = r(X)dt + sigma(X)dW, either on the real line
/// (mean-reverting outside |x| >= return_radius) or reflected on [0, L].
struct DiffusionSpec {
  ScalarFn drift;
  ScalarFn volatility;
  DomainKind domain = DomainKind::FullLine;
  double length = 0.0;  // L, reflected case only

  // Declared envelope constants. sigma_min/sigma_max bracket the volatility;
  // drift_growth and return_radius are the linear-growth constant and the
  // radius past which sign(x) r(x) < 0 must hold on the full line.
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double drift_growth = 0.0;
  double return_radius = 0.0;

  // Set by the constant-coefficient factories; lets the Monte Carlo loops
  // skip the indirect coefficient calls.
  bool constant_coefficients = false;
  double drift_value = 0.0;

  bool volatility_constant() const { return sigma_min == sigma_max && sigma_min > 0.0; }

  bool reflected() const { return domain == DomainKind::ReflectedInterval; }
  bool contains(double x) const { return !reflected() || (x >= 0.0 && x <= length); }

  /// Probe-grid validation of the declared bounds. Throws ConfigError.
  void validate(int probe_points = 257) const;

  static DiffusionSpec ornstein_uhlenbeck(double beta, double sigma);
  static DiffusionSpec reflected_constant_drift(double r1, double sigma, double L);
  static DiffusionSpec frozen(double domain_length = 0.0);
};

struct PathSample {
  double dt = 0.0;
  std::vector<double> values;
  std::vector<std::uint8_t> reflected;  // one flag per step taken

  double horizon() const { return dt * static_cast<double>(values.size() - 1); }
};

/// Cumulative band estimate of the semimartingale local time at one level,
/// normalized so that  int g(phi_s) sigma(phi_s)^2 ds = int g(y) L_t^y dy.
struct LocalTimeCurve {
  double level = 0.0;
  double band = 0.0;
  double dt = 0.0;
  std::vector<double> values;  // values[k] = estimate at time k*dt, values[0] = 0

  double total() const { return values.empty() ? 0.0 : values.back(); }
};

/// Euler-Maruyama path; reflected intervals use the symmetrized reflection
/// step (fold the overshoot back, then clamp).
PathSample simulate_path(const DiffusionSpec& spec, double x0, double horizon, double dt, Rng& rng);

/// Default band width for the local-time discretization: the band has to
/// dominate a one-step displacement of the diffusion.
double default_local_time_band(const DiffusionSpec& spec, double dt);

LocalTimeCurve estimate_local_time(const DiffusionSpec& spec, const PathSample& path, double level,
                                   double band);

/// E[L_t^y] for an Ornstein-Uhlenbeck flow started at x, by quadrature of the
/// closed-form representation.
double ou_expected_local_time(double beta, double sigma, double x, double y, double t);

/// Transition density of the OU flow: Gaussian with mean x e^{-beta t} and
/// variance sigma^2 (1 - e^{-2 beta t}) / (2 beta).
double ou_transition_density(double beta, double sigma, double x, double z, double t);

}  // namespace bifurc
