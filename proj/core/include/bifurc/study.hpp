#pragma once

#include <string>
#include <vector>

#include "bifurc/config.hpp"
#include "bifurc/ergodicity.hpp"
#include "bifurc/mle.hpp"

namespace bifurc {

/// q-evaluator factory per replication index. Spectral grids are shared
/// across replications; auxiliary-simulation builders re-simulate per
/// replication when the config says so.
using QBuilderFactory = std::function<QBuilder(int replication)>;

QBuilderFactory make_qbuilder_factory(const ExperimentConfig& config);

struct SimulateOutput {
  std::string csv_path;
  std::string manifest_path;
  std::size_t node_count = 0;
};

SimulateOutput run_simulate(const ExperimentConfig& config, const std::string& out_dir);

enum class EstimateTarget { Nu, Q, Mle };

struct EstimateOutput {
  std::vector<std::string> files;
};

EstimateOutput run_estimate(const ExperimentConfig& config, const std::string& dataset_path,
                            EstimateTarget which, const std::string& out_dir);

struct ReplicationOutcome {
  int index = 0;
  bool failed = false;
  std::string error;
  double theta_hat = 0.0;
  double loglik = 0.0;
  double seconds = 0.0;
};

struct StudyReport {
  double theta_true = 0.0;
  GridPlan plan;
  std::vector<ReplicationOutcome> outcomes;

  std::size_t failure_count() const;
  bool study_failed() const;  // more than 10% failed replications
  double mean_theta() const;
  double stddev_theta() const;
  std::string to_json() const;
  void write_csv(const std::string& path) const;
};

/// Generate -> estimate per replication with derived seeds, in a bounded
/// worker pool. Replication failures are recorded, not fatal.
StudyReport run_study(const ExperimentConfig& config);

/// Study + JSON/CSV emission into out_dir.
StudyReport run_study_files(const ExperimentConfig& config, const std::string& out_dir);

struct DiagnoseOutput {
  std::vector<std::string> files;
  bool drift_ok = false;
};

/// Drift report on a probe grid plus, for the OU model, the minorisation /
/// rho certificate found by grid search.
DiagnoseOutput run_diagnose(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace bifurc
