#include "bifurc/ergodicity.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "bifurc/quadrature.hpp"
#include "bifurc/stats.hpp"

namespace bifurc {

DriftConstants drift_constants(const ModelSpec& spec) {
  const auto& d = spec.diffusion;
  if (d.sigma_min <= 0.0 || d.sigma_max <= 0.0 || d.drift_growth <= 0.0 ||
      d.return_radius <= 0.0 || spec.rate.lower <= 0.0)
    throw ConfigError("drift_constants: declared bounds (r1, r2, sigma1, sigma2, b1) missing");
  const double eps = spec.frag.eps;
  const auto f = [&](double z) { return z * z * spec.frag.kappa_tilde(z); };
  DriftConstants c;
  c.v1 = integrate(f, eps, 1.0 - eps, 1e-12);
  if (!(c.v1 > 0.0 && c.v1 < 1.0))
    throw NumericError("drift_constants: contraction factor not in (0,1)");
  const double r1 = d.drift_growth, r2 = d.return_radius;
  c.v2 = c.v1 * (2.0 * r1 * r2 * (1.0 + r1) / (d.sigma_min * d.sigma_min) +
                 d.sigma_max * d.sigma_max) /
         spec.rate.lower;
  return c;
}

bool DriftReport::any_violation() const {
  return std::any_of(probes.begin(), probes.end(), [](const DriftProbe& p) { return p.violation; });
}

std::string DriftReport::to_json() const {
  nlohmann::json j;
  j["v1"] = constants.v1;
  j["v2"] = constants.v2;
  j["replications"] = replications;
  j["probes"] = nlohmann::json::array();
  for (const auto& p : probes) {
    j["probes"].push_back({{"x", p.x},
                           {"qv_estimate", p.qv_estimate},
                           {"std_error", p.std_error},
                           {"bound", p.bound},
                           {"violation", p.violation}});
  }
  return j.dump(2);
}

DriftReport verify_drift_mc(const ModelSpec& spec, const std::vector<double>& x_grid,
                            std::size_t replications, double dt, const Rng& rng) {
  if (replications < 1000)
    throw std::invalid_argument("verify_drift_mc: need at least 1000 replications");
  DriftReport report;
  report.constants = drift_constants(spec);
  report.replications = replications;
  report.probes.reserve(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double x = x_grid[i];
    RunningStats stats;
    Rng probe_rng = rng.derive(i + 1);
    for (std::size_t m = 0; m < replications; ++m) {
      const double y = tagged_step(spec, x, dt, probe_rng);
      stats.add(y * y);
    }
    DriftProbe probe;
    probe.x = x;
    probe.qv_estimate = stats.mean();
    probe.std_error = stats.std_error();
    probe.bound = report.constants.v1 * x * x + report.constants.v2;
    probe.violation = probe.qv_estimate - probe.bound > 3.0 * probe.std_error;
    report.probes.push_back(probe);
  }
  return report;
}

double ou_minorisation_lambda(double beta, double sigma, double b, double eps, double w) {
  if (beta <= 0.0 || sigma <= 0.0 || b <= 0.0 || w <= 0.0)
    throw std::invalid_argument("ou_minorisation_lambda: parameters must be positive");
  if (!(eps > 0.0 && eps < 0.5))
    throw std::invalid_argument("ou_minorisation_lambda: eps outside (0, 1/2)");
  const double upper = w / std::sqrt(2.0);
  const double p = b / beta;
  const auto f = [&](double y) {
    if (y <= 0.0) return 0.0;
    // e^{-(b/beta) ln(w/(y sqrt 2))} = (y sqrt 2 / w)^{b/beta}
    return std::exp(-y * y) * std::pow(y / upper, p);
  };
  return 2.0 / std::sqrt(M_PI) * integrate(f, 0.0, upper, 1e-10);
}

RhoBound ou_rho_bound(double lambda, double v1, double v2, double w, double lambda0, double eta) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("ou_rho_bound: lambda not in (0,1)");
  if (!(lambda0 > 0.0 && lambda0 < lambda))
    throw std::invalid_argument("ou_rho_bound: need lambda0 in (0, lambda)");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("ou_rho_bound: eta not in (0,1)");
  if (!(v1 > 0.0 && v1 < 1.0) || v2 <= 0.0)
    throw std::invalid_argument("ou_rho_bound: drift constants out of range");
  if (!(w > 2.0 * v2 / (1.0 - v1)))
    throw std::invalid_argument("ou_rho_bound: w must exceed 2 v2 / (1 - v1)");

  RhoBound out;
  out.gamma = lambda0 / v2;
  out.v0 = eta + (1.0 - eta) * (v1 + 2.0 * v2 / w);
  out.contraction_branch = 1.0 - (lambda - lambda0);
  out.small_set_branch = (2.0 + w * out.gamma * out.v0) / (2.0 + w * out.gamma);
  out.rho = std::max(out.contraction_branch, out.small_set_branch);
  out.below_half = out.rho < 0.5;
  return out;
}

std::string ErgodicityCertificate::to_json() const {
  nlohmann::json j;
  j["beta"] = beta;
  j["sigma"] = sigma;
  j["b"] = b;
  j["eps"] = eps;
  j["v1"] = v1;
  j["v2"] = v2;
  j["w"] = w;
  j["lambda"] = lambda;
  j["lambda0"] = lambda0;
  j["eta"] = eta;
  j["rho"] = bound.rho;
  j["rho_below_half"] = bound.below_half;
  j["contraction_branch"] = bound.contraction_branch;
  j["small_set_branch"] = bound.small_set_branch;
  j["v0"] = bound.v0;
  j["gamma"] = bound.gamma;
  return j.dump(2);
}

ErgodicityCertificate certificate_search(double beta, double sigma, double b, double eps,
                                         const DriftConstants& drift) {
  ErgodicityCertificate best;
  best.beta = beta;
  best.sigma = sigma;
  best.b = b;
  best.eps = eps;
  best.v1 = drift.v1;
  best.v2 = drift.v2;
  best.bound.rho = 1.0;

  const double w_min = 2.0 * drift.v2 / (1.0 - drift.v1);
  for (double w_mult : {1.5, 3.0, 6.0, 12.0, 25.0, 50.0, 100.0, 400.0}) {
    const double w = w_min * w_mult;
    const double lambda = ou_minorisation_lambda(beta, sigma, b, eps, w);
    if (!(lambda > 0.0 && lambda < 1.0)) continue;
    for (double lf : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.75, 0.9}) {
      const double lambda0 = lf * lambda;
      for (double eta : {0.01, 0.03, 0.05, 0.1, 0.2, 0.35, 0.5}) {
        const RhoBound rb = ou_rho_bound(lambda, drift.v1, drift.v2, w, lambda0, eta);
        if (rb.rho < best.bound.rho) {
          best.bound = rb;
          best.w = w;
          best.lambda = lambda;
          best.lambda0 = lambda0;
          best.eta = eta;
        }
      }
    }
  }
  if (best.w == 0.0) throw NumericError("certificate_search: no admissible tuning found");
  return best;
}

std::vector<double> empirical_invariant(const ModelSpec& spec, double x0, int burn_in, int count,
                                        double dt, Rng& rng) {
  if (count < 1) throw std::invalid_argument("empirical_invariant: need count >= 1");
  if (burn_in < 0) throw std::invalid_argument("empirical_invariant: burn_in must be >= 0");
  std::vector<double> out;
  out.reserve(count);
  double x = x0;
  for (int i = 0; i < burn_in + count; ++i) {
    x = tagged_step(spec, x, dt, rng);
    if (i >= burn_in) out.push_back(x);
  }
  return out;
}

}  // namespace bifurc
