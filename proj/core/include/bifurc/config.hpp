#pragma once

#include <cstdint>
#include <string>

#include "bifurc/kernels.hpp"
#include "bifurc/mle.hpp"
#include "bifurc/spectral.hpp"
#include "bifurc/tree.hpp"

namespace bifurc {

enum class DriftKind { Constant, OrnsteinUhlenbeck };
enum class RateFamilyKind { Constant, Affine };
enum class QEvaluatorKind { Spectral, Nonparam, MonteCarlo };

/// One experiment file, one block per module. Defaults follow the numerical
/// study: eps = 1e-4, x0 = 0.5, dt = 5e-4, 200 x 200 grid, varpi = 1e-6.
struct ExperimentConfig {
  // [model]
  DomainKind domain = DomainKind::ReflectedInterval;
  DriftKind drift = DriftKind::Constant;
  double drift_r1 = -0.5;   // constant drift value
  double drift_beta = 1.0;  // OU reversion
  double sigma = 1.0;
  double length = 1.0;
  RateFamilyKind rate_family = RateFamilyKind::Constant;
  double theta_true = 2.0;
  double eps = 1e-4;

  // [simulation]
  int depth = 14;
  double dt = 5e-4;
  double x0 = 0.5;
  std::uint64_t seed = 1;

  // [observation]
  double rho = 1.0;

  // [estimator]
  int grid_nx = 200;
  int grid_ny = 200;
  double varpi = 1e-6;
  BandwidthMode bandwidth_mode = BandwidthMode::Practical;
  double alpha_smoothness = 1.0;
  double beta_smoothness = 1.0;
  QEvaluatorKind q_evaluator = QEvaluatorKind::Spectral;
  double theta_min = 1.8;
  double theta_max = 2.2;
  double dtheta = 0.05;
  double dtheta_floor = 0.05;
  int spectral_terms = 500;
  int aux_depth = 14;
  bool aux_per_replication = true;
  int mc_paths = 2000;

  // [study]
  int replications = 50;
  int jobs = 1;

  // [output]
  std::string output_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;

  static ExperimentConfig from_toml_text(const std::string& text);
  static ExperimentConfig from_toml_file(const std::string& path);
  std::string to_toml() const;

  /// FNV-1a of the serialized form; stamped into output manifests.
  std::uint64_t hash() const;

  void validate() const;
};

/// Model at a given division-rate parameter.
ModelSpec build_model(const ExperimentConfig& config, double theta);

RateFamily build_rate_family(const ExperimentConfig& config);

/// Spectral parameters for the configured model; throws ConfigError when the
/// model is outside the constant-drift reflected class.
SpectralParams build_spectral_params(const ExperimentConfig& config);

}  // namespace bifurc
