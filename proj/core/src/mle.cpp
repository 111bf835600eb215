#include "bifurc/mle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "bifurc/format.hpp"
#include "bifurc/stats.hpp"
#include "bifurc/transition.hpp"

namespace bifurc {

namespace {
constexpr double kQFloor = 1e-12;
}

void RateFamily::validate(double x_max) const {
  if (!rate) throw ConfigError("RateFamily: rate not set");
  if (!(theta_min < theta_max)) throw ConfigError("RateFamily: empty parameter box");
  if (!(b3 > 0.0 && b3 <= b4)) throw ConfigError("RateFamily: need 0 < b3 <= b4");
  const int nt = 17, nx = 33;
  std::vector<double> prev;
  for (int i = 0; i < nt; ++i) {
    const double theta = theta_min + (theta_max - theta_min) * i / (nt - 1);
    std::vector<double> cur(nx);
    for (int k = 0; k < nx; ++k) {
      const double x = x_max * k / (nx - 1);
      const double b = rate(theta, x);
      if (!(b >= b3 * (1.0 - 1e-12) && b <= b4 * (1.0 + 1e-12)))
        throw ConfigError("RateFamily: B0 outside [b3, b4] on the probe grid");
      cur[k] = b;
    }
    if (!prev.empty()) {
      bool le = true, ge = true;
      for (int k = 0; k < nx; ++k) {
        if (cur[k] > prev[k] + 1e-12) ge = false;
        if (cur[k] < prev[k] - 1e-12) le = false;
      }
      if (!le && !ge) throw ConfigError("RateFamily: family is not orderly on the probe grid");
    }
    prev = std::move(cur);
  }
}

RateFamily RateFamily::constant(double theta_min, double theta_max) {
  RateFamily f;
  f.rate = [](double theta, double) { return theta; };
  f.theta_min = theta_min;
  f.theta_max = theta_max;
  f.b3 = theta_min;
  f.b4 = theta_max;
  f.instantiate = [](double theta) { return DivisionRate::constant(theta); };
  return f;
}

RateFamily RateFamily::affine(double theta_min, double theta_max, double x_max) {
  RateFamily f;
  f.rate = [](double theta, double x) { return 1.0 + theta * x; };
  f.theta_min = theta_min;
  f.theta_max = theta_max;
  f.b3 = 1.0;
  f.b4 = 1.0 + theta_max * x_max;
  f.instantiate = [x_max](double theta) { return DivisionRate::affine(theta, x_max); };
  return f;
}

LogLik log_likelihood(const std::vector<std::pair<double, double>>& pairs, const QFn& q) {
  if (pairs.empty()) throw DataError("log_likelihood: no pairs");
  LogLik out;
  out.total = pairs.size();
  for (const auto& [x, y] : pairs) {
    double v = q(x, y);
    if (!(v > kQFloor)) {
      v = kQFloor;
      ++out.floored;
    }
    out.value += std::log(v);
  }
  return out;
}

double full_tree_contrast(const ScalarFn& rate_theta, const ModelSpec& base_model,
                          const TreeDataset& tree, std::size_t mc_budget, double dt,
                          const Rng& rng) {
  if (mc_budget == 0) throw std::invalid_argument("full_tree_contrast: need mc_budget >= 1");
  if (tree.depth < 1) return 0.0;
  for (double t : tree.trait)
    if (!std::isfinite(t)) throw DataError("full_tree_contrast: incomplete tree");

  // Model with the candidate rate spliced in; kappa never enters.
  ModelSpec model = base_model;
  model.rate.rate = rate_theta;

  double contrast = 0.0;
  const std::uint64_t internal = (std::uint64_t{1} << tree.depth) - 1;
  for (std::uint64_t h = 1; h <= internal; ++h) {
    const NodeId u{h};
    const double s = tree.division_trait(u);
    const double x = tree.trait[tree.index(u)];
    RunningStats stats;
    const double band = default_local_time_band(model.diffusion, dt);
    mc_discounted_local_time(model, x, {s}, mc_budget, dt, band, rng.derive(h),
                             [&](const std::vector<double>& acc) { stats.add(acc[0]); });
    const double expectation = std::max(stats.mean(), kQFloor);
    contrast += std::log(rate_theta(s)) + std::log(expectation);
  }
  return contrast;
}

std::string MleResult::to_json() const {
  nlohmann::json j;
  j["theta_hat"] = theta_hat;
  j["loglik"] = loglik_at_hat;
  j["boundary_warning"] = boundary_warning;
  j["unreliable_warning"] = unreliable_warning;
  j["noise_stopped"] = noise_stopped;
  j["floored_total"] = floored_total;
  j["level_dtheta"] = level_dtheta;
  if (fisher) j["fisher"] = *fisher;
  if (ci) j["ci"] = {ci->first, ci->second};
  j["trace"] = nlohmann::json::array();
  for (const auto& t : trace)
    j["trace"].push_back({{"level", t.level}, {"theta", t.theta}, {"loglik", t.loglik}});
  return j.dump(2);
}

void MleResult::write_trace_csv(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("write_trace_csv: cannot open " + path);
  os << "level,theta,loglik\n";
  for (const auto& t : trace)
    os << t.level << ',' << format_double(t.theta) << ',' << format_double(t.loglik) << '\n';
}

MleResult grid_mle(const std::vector<std::pair<double, double>>& pairs, const RateFamily& family,
                   const QBuilder& q_builder, const GridPlan& plan) {
  if (!(plan.dtheta > 0.0) || !(plan.dtheta_floor > 0.0) || plan.dtheta < plan.dtheta_floor * (1.0 - 1e-9))
    throw std::invalid_argument("grid_mle: need dtheta >= dtheta_floor > 0");
  if (!(plan.theta_min < plan.theta_max)) throw std::invalid_argument("grid_mle: empty window");

  MleResult result;
  double lo = std::max(plan.theta_min, family.theta_min);
  double hi = std::min(plan.theta_max, family.theta_max);
  double step = plan.dtheta;
  double best_theta = lo, best_ll = -HUGE_VAL;
  bool best_on_edge = false;

  for (int level = 0; level < plan.max_levels; ++level) {
    result.level_dtheta.push_back(step);
    const int npts = std::max(1, static_cast<int>(std::llround((hi - lo) / step))) + 1;
    best_ll = -HUGE_VAL;
    for (int i = 0; i < npts; ++i) {
      const double theta = std::min(lo + i * step, hi);
      const LogLik ll = log_likelihood(pairs, q_builder(theta, 0));
      result.floored_total += ll.floored;
      if (ll.unreliable()) result.unreliable_warning = true;
      result.trace.push_back({level, theta, ll.value});
      if (ll.value > best_ll) {  // strict: ties keep the smaller theta
        best_ll = ll.value;
        best_theta = theta;
        best_on_edge = (i == 0 || i == npts - 1);
      }
    }

    if (step <= plan.dtheta_floor * (1.0 + 1e-9)) break;

    // Noise criterion: the contrast range across the current window against
    // the spread of repeated evaluations at the argmax.
    double window_lo = best_ll, window_hi = best_ll;
    for (auto it = result.trace.rbegin(); it != result.trace.rend() && it->level == level; ++it) {
      window_lo = std::min(window_lo, it->loglik);
      window_hi = std::max(window_hi, it->loglik);
    }
    RunningStats noise;
    for (int s = 1; s <= plan.noise_probes; ++s)
      noise.add(log_likelihood(pairs, q_builder(best_theta, static_cast<std::uint64_t>(s))).value);
    if (noise.stddev() > 0.0 && window_hi - window_lo < 3.0 * noise.stddev()) {
      result.noise_stopped = true;
      break;
    }

    step *= 0.5;
    lo = std::max(best_theta - 2.0 * step, family.theta_min);
    hi = std::min(best_theta + 2.0 * step, family.theta_max);
  }

  result.theta_hat = best_theta;
  result.loglik_at_hat = best_ll;
  result.boundary_warning = best_on_edge && result.level_dtheta.size() > 1;
  return result;
}

FisherEstimate fisher_info_estimate(double theta_hat,
                                    const std::vector<std::pair<double, double>>& pairs,
                                    const std::function<double(double, double, double)>& grad_log_q) {
  if (pairs.empty()) throw DataError("fisher_info_estimate: no pairs");
  RunningStats stats;
  for (const auto& [x, y] : pairs) {
    const double s = grad_log_q(theta_hat, x, y);
    stats.add(s * s);
  }
  FisherEstimate est;
  est.psi = stats.mean();
  if (!(est.psi > 1e-12))
    throw NumericError("fisher_info_estimate: information is numerically singular");
  const double half = 1.96 / std::sqrt(est.psi * static_cast<double>(pairs.size()));
  est.ci_lo = theta_hat - half;
  est.ci_hi = theta_hat + half;
  return est;
}

}  // namespace bifurc
