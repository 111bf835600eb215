#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bifurc/tree.hpp"

namespace bifurc {

/// Tabulated q(x, y) values on a rectangular grid, row-major in x.
struct TransitionGrid {
  enum class Provenance { MonteCarlo, Spectral, Nonparam };

  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> values;
  Provenance provenance = Provenance::MonteCarlo;
  std::map<std::string, double> params;

  double& at(std::size_t i, std::size_t j) { return values[i * ys.size() + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * ys.size() + j]; }
};

/// Grid CSV: header row carries the y-grid, first column the x-grid. A JSON
/// sidecar (same path + ".json") records provenance and parameters.
void write_grid_csv(const TransitionGrid& grid, const std::string& path);
TransitionGrid read_grid_csv(const std::string& path);

struct McDensity {
  double value = 0.0;
  double std_error = 0.0;
};

/// Discounted local-time accumulation shared by the Monte Carlo transition
/// evaluators: for each path from x, fills per-level values of
/// int_0^inf e^{-int_0^t B} dLhat_t^level and hands them to `sink`. Paths stop
/// once the survival discount drops below 1e-8.
void mc_discounted_local_time(const ModelSpec& spec, double x, const std::vector<double>& levels,
                              std::size_t paths, double dt, double band, const Rng& rng,
                              const std::function<void(const std::vector<double>&)>& sink);

/// q(x, y) through the local-time representation, Monte Carlo in the inner
/// expectation and fixed Gauss-Legendre nodes in the fragmentation integral.
McDensity mc_transition_density(const ModelSpec& spec, double x, double y, std::size_t paths,
                                double dt, const Rng& rng);

/// Same estimator for a batch of y values, sharing the simulated paths.
std::vector<McDensity> mc_q_profile(const ModelSpec& spec, double x,
                                    const std::vector<double>& ys, std::size_t paths, double dt,
                                    const Rng& rng);

/// Full transition p(x, y1, y2); exactly zero outside the support region.
McDensity mc_full_transition(const ModelSpec& spec, double x, double y1, double y2,
                             std::size_t paths, double dt, const Rng& rng);

/// Support region of (y1, y2) for the reflected model: the fragmentation
/// fraction must lie in [eps, 1-eps] and the parent trait at division in
/// (0, L]. Continuous two-piece region; the ratio bound binds below eps L and
/// the sum bound above.
bool check_support_domain(double eps, double L, double y1, double y2);

/// Quadrature oracle for q(x, y) in the Ornstein-Uhlenbeck / constant-rate /
/// uniform-fragmentation model.
double ou_q_oracle(double beta, double sigma, double b, double eps, double x, double y);

}  // namespace bifurc
