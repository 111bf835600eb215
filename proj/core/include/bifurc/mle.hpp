#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bifurc/tree.hpp"

namespace bifurc {

/// One-parameter orderly family of division rates on a bounded trait range.
struct RateFamily {
  std::function<double(double theta, double x)> rate;  // B0(theta, x)
  double theta_min = 0.0;
  double theta_max = 0.0;
  double b3 = 0.0;  // uniform lower bound over Theta x X
  double b4 = 0.0;  // uniform upper bound

  /// Instantiates the division rate at a fixed parameter, with its bounds.
  std::function<DivisionRate(double theta)> instantiate;

  /// Probe-grid check of the bounds and of pointwise orderliness over [0, L].
  void validate(double x_max) const;

  static RateFamily constant(double theta_min, double theta_max);
  static RateFamily affine(double theta_min, double theta_max, double x_max);
};

using QFn = std::function<double(double x, double y)>;

/// A q-evaluator factory: the MLE machinery asks for an evaluator per theta.
/// Builders backed by Monte Carlo or auxiliary simulation use noise_seed to
/// produce independent re-evaluations; deterministic builders ignore it.
using QBuilder = std::function<QFn(double theta, std::uint64_t noise_seed)>;

struct LogLik {
  double value = 0.0;
  std::size_t floored = 0;  // evaluations clipped at the positivity floor
  std::size_t total = 0;
  bool unreliable() const { return floored * 100 > total; }
};

/// Sum of log q over the observed pairs, flooring q at 1e-12.
LogLik log_likelihood(const std::vector<std::pair<double, double>>& pairs, const QFn& q);

/// Full-tree alternative contrast: sum over internal nodes of
/// log B_theta(X_u0 + X_u1) + log E[int e^{-int B_theta} dL^{X_u0+X_u1}],
/// the expectation estimated by Monte Carlo with common random numbers
/// across theta (same rng argument => same paths).
double full_tree_contrast(const ScalarFn& rate_theta, const ModelSpec& base_model,
                          const TreeDataset& tree, std::size_t mc_budget, double dt,
                          const Rng& rng);

struct GridPlan {
  double theta_min = 0.0;
  double theta_max = 0.0;
  double dtheta = 0.0;
  double dtheta_floor = 0.0;
  int max_levels = 10;
  int noise_probes = 5;
};

struct TracePoint {
  int level = 0;
  double theta = 0.0;
  double loglik = 0.0;
};

struct MleResult {
  double theta_hat = 0.0;
  double loglik_at_hat = 0.0;
  std::vector<TracePoint> trace;
  std::vector<double> level_dtheta;
  bool boundary_warning = false;
  bool unreliable_warning = false;
  bool noise_stopped = false;
  std::size_t floored_total = 0;
  std::optional<double> fisher;
  std::optional<std::pair<double, double>> ci;

  std::string to_json() const;
  void write_trace_csv(const std::string& path) const;
};

/// Grid search with progressive refinement: evaluate the contrast on the
/// grid, halve the step, re-center at the argmax (ties to the smaller theta),
/// stop at the step floor or when the contrast range across the window falls
/// under three times the evaluator's own noise.
MleResult grid_mle(const std::vector<std::pair<double, double>>& pairs, const RateFamily& family,
                   const QBuilder& q_builder, const GridPlan& plan);

struct FisherEstimate {
  double psi = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
};

/// Empirical Fisher information (d = 1): mean of the squared score over the
/// pairs, and the 95% interval theta_hat +- 1.96 / sqrt(psi |pairs|).
FisherEstimate fisher_info_estimate(double theta_hat,
                                    const std::vector<std::pair<double, double>>& pairs,
                                    const std::function<double(double, double, double)>& grad_log_q);

}  // namespace bifurc
