#include "bifurc/sde.hpp"

#include <cmath>
#include <string>

#include "bifurc/quadrature.hpp"

namespace bifurc {

void DiffusionSpec::validate(int probe_points) const {
  if (!drift || !volatility) throw ConfigError("DiffusionSpec: drift/volatility not set");
  if (sigma_min <= 0.0 || sigma_max < sigma_min)
    throw ConfigError("DiffusionSpec: need 0 < sigma_min <= sigma_max");
  if (reflected() && length <= 0.0) throw ConfigError("DiffusionSpec: reflected length must be > 0");

  const double lo = reflected() ? 0.0 : -2.0 * std::max(return_radius, 1.0) - 5.0;
  const double hi = reflected() ? length : -lo;
  for (int i = 0; i < probe_points; ++i) {
    const double x = lo + (hi - lo) * i / (probe_points - 1);
    const double s = volatility(x);
    if (!std::isfinite(s) || s < sigma_min * (1.0 - 1e-12) || s > sigma_max * (1.0 + 1e-12))
      throw ConfigError("DiffusionSpec: volatility outside [sigma_min, sigma_max] at x=" +
                        std::to_string(x));
    const double r = drift(x);
    if (!std::isfinite(r)) throw ConfigError("DiffusionSpec: non-finite drift on probe grid");
    if (!reflected()) {
      if (return_radius <= 0.0) throw ConfigError("DiffusionSpec: return_radius must be > 0");
      if (std::abs(x) >= return_radius) {
        const double sgn = x > 0.0 ? 1.0 : -1.0;
        if (sgn * r >= 0.0)
          throw ConfigError("DiffusionSpec: sign(x) drift(x) >= 0 at |x| >= return_radius");
      }
      if (std::abs(r) > drift_growth * (1.0 + std::abs(x)) * (1.0 + 1e-12))
        throw ConfigError("DiffusionSpec: drift exceeds declared linear growth");
    }
  }
}

DiffusionSpec DiffusionSpec::ornstein_uhlenbeck(double beta, double sigma) {
  DiffusionSpec s;
  s.drift = [beta](double x) { return -beta * x; };
  s.volatility = [sigma](double) { return sigma; };
  s.domain = DomainKind::FullLine;
  s.sigma_min = sigma;
  s.sigma_max = sigma;
  s.drift_growth = beta;
  s.return_radius = 1e-3;
  return s;
}

DiffusionSpec DiffusionSpec::reflected_constant_drift(double r1, double sigma, double L) {
  DiffusionSpec s;
  s.drift = [r1](double) { return r1; };
  s.volatility = [sigma](double) { return sigma; };
  s.domain = DomainKind::ReflectedInterval;
  s.length = L;
  s.sigma_min = sigma;
  s.sigma_max = sigma;
  s.constant_coefficients = true;
  s.drift_value = r1;
  return s;
}

DiffusionSpec DiffusionSpec::frozen(double domain_length) {
  DiffusionSpec s;
  s.drift = [](double) { return 0.0; };
  s.volatility = [](double) { return 0.0; };
  if (domain_length > 0.0) {
    s.domain = DomainKind::ReflectedInterval;
    s.length = domain_length;
  }
  // Degenerate by construction; bypasses validate().
  s.sigma_min = 0.0;
  s.sigma_max = 0.0;
  return s;
}

PathSample simulate_path(const DiffusionSpec& spec, double x0, double horizon, double dt,
                         Rng& rng) {
  if (dt <= 0.0 || horizon < dt) throw std::invalid_argument("simulate_path: need 0 < dt <= T");
  if (!spec.contains(x0)) throw std::domain_error("simulate_path: x0 outside the state domain");

  const std::size_t steps = static_cast<std::size_t>(std::floor(horizon / dt));
  PathSample path;
  path.dt = dt;
  path.values.resize(steps + 1);
  path.reflected.assign(steps, 0);
  path.values[0] = x0;

  const double sq = std::sqrt(dt);
  double x = x0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double r = spec.drift(x);
    const double s = spec.volatility(x);
    if (!std::isfinite(r) || !std::isfinite(s))
      throw NumericError("simulate_path: non-finite coefficient at x=" + std::to_string(x));
    double y = x + r * dt + s * sq * rng.normal();
    if (spec.reflected()) {
      bool hit = false;
      if (y < 0.0) {
        y = -y;
        hit = true;
      }
      if (y > spec.length) {
        y = 2.0 * spec.length - y;
        hit = true;
      }
      if (y < 0.0 || y > spec.length) {  // overshoot beyond one fold
        y = std::min(std::max(y, 0.0), spec.length);
        hit = true;
      }
      path.reflected[k] = hit ? 1 : 0;
    }
    if (!std::isfinite(y)) throw NumericError("simulate_path: path diverged");
    x = y;
    path.values[k + 1] = x;
  }
  return path;
}

double default_local_time_band(const DiffusionSpec& spec, double dt) {
  const double s2 = spec.sigma_max > 0.0 ? spec.sigma_max : 1.0;
  return 4.0 * s2 * std::sqrt(dt);
}

LocalTimeCurve estimate_local_time(const DiffusionSpec& spec, const PathSample& path, double level,
                                   double band) {
  if (band <= 0.0) throw std::invalid_argument("estimate_local_time: band must be > 0");
  if (path.values.empty()) throw std::invalid_argument("estimate_local_time: empty path");

  LocalTimeCurve curve;
  curve.level = level;
  curve.band = band;
  curve.dt = path.dt;
  curve.values.resize(path.values.size());
  curve.values[0] = 0.0;

  const double half = 0.5 * band;
  // At a reflected boundary only part of the band lies inside the domain;
  // normalizing by the overlap keeps the occupation identity unbiased there.
  double effective = band;
  if (spec.reflected())
    effective = std::min(level + half, spec.length) - std::max(level - half, 0.0);
  if (effective <= 0.0) effective = band;

  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < path.values.size(); ++k) {
    const double x = path.values[k];
    if (std::abs(x - level) <= half) {
      const double s = spec.volatility(x);
      acc += s * s * path.dt / effective;
    }
    curve.values[k + 1] = acc;
  }
  return curve;
}

double ou_expected_local_time(double beta, double sigma, double x, double y, double t) {
  if (beta <= 0.0 || sigma <= 0.0 || t < 0.0)
    throw std::invalid_argument("ou_expected_local_time: need beta, sigma > 0 and t >= 0");
  if (t == 0.0) return 0.0;
  // Occupation-density identity: E[L_t^y] = sigma^2 int_0^t rho_s(x, y) ds.
  // The substitution s = u^2 keeps the integrand bounded through the
  // short-time singularity at y == x.
  const auto integrand = [&](double u) {
    const double s = u * u;
    if (s == 0.0) return y == x ? 2.0 / (sigma * std::sqrt(2.0 * M_PI)) : 0.0;
    return 2.0 * u * ou_transition_density(beta, sigma, x, y, s);
  };
  const double integral = integrate(integrand, 0.0, std::sqrt(t), 1e-8);
  return sigma * sigma * integral;
}

double ou_transition_density(double beta, double sigma, double x, double z, double t) {
  if (t <= 0.0) throw std::invalid_argument("ou_transition_density: t must be > 0");
  if (beta <= 0.0 || sigma <= 0.0)
    throw std::invalid_argument("ou_transition_density: need beta, sigma > 0");
  const double m = x * std::exp(-beta * t);
  // -expm1 keeps the variance positive for t down to the underflow threshold
  const double var = sigma * sigma * (-std::expm1(-2.0 * beta * t)) / (2.0 * beta);
  const double d = z - m;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * M_PI * var);
}

}  // namespace bifurc
