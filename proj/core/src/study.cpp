#include "bifurc/study.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "bifurc/format.hpp"
#include "bifurc/interpolate.hpp"
#include "bifurc/kernels.hpp"
#include "bifurc/stats.hpp"
#include "bifurc/transition.hpp"

namespace bifurc {

namespace {

constexpr std::uint64_t kTagTree = 0x545245;   // per-replication dataset
constexpr std::uint64_t kTagAux = 0x415558;    // auxiliary q-hat simulations
constexpr std::uint64_t kTagProbe = 0x505242;  // diagnostics

std::uint64_t theta_key(double theta) { return std::bit_cast<std::uint64_t>(theta); }

QFn wrap_interpolator(std::shared_ptr<const CubicGridInterpolator> interp) {
  return [interp = std::move(interp)](double x, double y) {
    return std::max((*interp)(x, y), 0.0);
  };
}

/// Shared get-or-build cache for theta-indexed interpolators.
class GridCache {
 public:
  QFn get(std::uint64_t key, const std::function<CubicGridInterpolator()>& build) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_.emplace(key, std::make_shared<const CubicGridInterpolator>(build())).first;
    return wrap_interpolator(it->second);
  }

 private:
  std::mutex mu_;
  std::map<std::uint64_t, std::shared_ptr<const CubicGridInterpolator>> cache_;
};

TransitionEstimate nonparam_qhat(const ExperimentConfig& config, double theta,
                                 std::uint64_t aux_seed) {
  ModelSpec model = build_model(config, theta);
  const TreeDataset aux =
      generate_tree(model, config.x0, config.aux_depth, config.dt, Rng(aux_seed));
  const ObservationScheme full = subsample_incomplete_tree(config.aux_depth, 1.0);
  const auto pairs = extract_pairs(aux, full);
  const Bandwidths bw = bandwidth_rule(aux.node_count(), config.alpha_smoothness,
                                       config.beta_smoothness, config.bandwidth_mode);
  const KernelSpec kernel = make_kernel(KernelKind::Gaussian, 1);
  const auto xs = linspace(0.0, config.length, config.grid_nx);
  const auto ys = linspace(0.0, config.length, config.grid_ny);
  return estimate_q(pairs, xs, ys, bw.h1, bw.h2, bw.h, config.varpi, kernel);
}

TransitionGrid mc_qgrid(const ExperimentConfig& config, double theta, std::uint64_t seed) {
  ModelSpec model = build_model(config, theta);
  const auto xs = linspace(0.0, config.length, config.grid_nx);
  const auto ys = linspace(0.0, config.length, config.grid_ny);
  TransitionGrid grid;
  grid.xs = xs;
  grid.ys = ys;
  grid.values.assign(xs.size() * ys.size(), 0.0);
  grid.provenance = TransitionGrid::Provenance::MonteCarlo;
  grid.params = {{"theta", theta}, {"paths", double(config.mc_paths)}};
  const Rng base(seed);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto row =
        mc_q_profile(model, xs[i], ys, static_cast<std::size_t>(config.mc_paths), config.dt,
                     base.derive(i + 1));
    for (std::size_t j = 0; j < ys.size(); ++j) grid.at(i, j) = row[j].value;
  }
  return grid;
}

}  // namespace

QBuilderFactory make_qbuilder_factory(const ExperimentConfig& config) {
  const auto cache = std::make_shared<GridCache>();

  switch (config.q_evaluator) {
    case QEvaluatorKind::Spectral: {
      const SpectralParams params = build_spectral_params(config);
      const auto ys = linspace(0.0, config.length, config.grid_ny);
      const auto xs = linspace(0.0, config.length, config.grid_nx);
      const auto evaluator = std::make_shared<const SpectralQEvaluator>(params, ys);
      return [cache, evaluator, xs](int) -> QBuilder {
        return [cache, evaluator, xs](double theta, std::uint64_t) -> QFn {
          return cache->get(theta_key(theta), [&] {
            return CubicGridInterpolator(evaluator->fill(theta, xs));
          });
        };
      };
    }
    case QEvaluatorKind::Nonparam: {
      const ExperimentConfig cfg = config;
      if (cfg.aux_per_replication) {
        return [cfg](int replication) -> QBuilder {
          // Per-replication cache: the auxiliary data are re-simulated for
          // each replication, mirroring a full re-run of the procedure.
          auto local = std::make_shared<GridCache>();
          const std::uint64_t rep_tag = derive_seed(cfg.seed, kTagAux, replication + 1);
          return [cfg, local, rep_tag](double theta, std::uint64_t noise) -> QFn {
            const std::uint64_t key = theta_key(theta) ^ (noise * 0x9E3779B97F4A7C15ULL);
            return local->get(key, [&] {
              const std::uint64_t seed = derive_seed(rep_tag, theta_key(theta), noise);
              return CubicGridInterpolator(nonparam_qhat(cfg, theta, seed).as_grid());
            });
          };
        };
      }
      return [cfg, cache](int) -> QBuilder {
        return [cfg, cache](double theta, std::uint64_t noise) -> QFn {
          const std::uint64_t key = theta_key(theta) ^ (noise * 0x9E3779B97F4A7C15ULL);
          return cache->get(key, [&] {
            const std::uint64_t seed = derive_seed(cfg.seed, kTagAux ^ theta_key(theta), noise);
            return CubicGridInterpolator(nonparam_qhat(cfg, theta, seed).as_grid());
          });
        };
      };
    }
    case QEvaluatorKind::MonteCarlo: {
      const ExperimentConfig cfg = config;
      return [cfg, cache](int) -> QBuilder {
        return [cfg, cache](double theta, std::uint64_t noise) -> QFn {
          const std::uint64_t key = theta_key(theta) ^ (noise * 0x9E3779B97F4A7C15ULL);
          return cache->get(key, [&] {
            const std::uint64_t seed = derive_seed(cfg.seed, kTagAux ^ theta_key(theta), noise + 7);
            return CubicGridInterpolator(mc_qgrid(cfg, theta, seed));
          });
        };
      };
    }
  }
  throw ConfigError("make_qbuilder_factory: unknown evaluator kind");
}

SimulateOutput run_simulate(const ExperimentConfig& config, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  ModelSpec model = build_model(config, config.theta_true);
  model.validate();
  const std::uint64_t tree_seed = derive_seed(config.seed, kTagTree, 0);
  const TreeDataset tree = generate_tree(model, config.x0, config.depth, config.dt, Rng(tree_seed));

  SimulateOutput out;
  out.node_count = tree.node_count();
  out.csv_path = (std::filesystem::path(out_dir) / "tree.csv").string();
  write_tree_csv(tree, out.csv_path);

  nlohmann::json manifest;
  manifest["config_hash"] = config.hash();
  manifest["seed"] = config.seed;
  manifest["node_count"] = tree.node_count();
  manifest["depth"] = tree.depth;
  manifest["csv"] = "tree.csv";
  out.manifest_path = (std::filesystem::path(out_dir) / "manifest.json").string();
  std::ofstream os(out.manifest_path, std::ios::binary);
  if (!os) throw DataError("run_simulate: cannot open " + out.manifest_path);
  os << manifest.dump(2) << '\n';
  return out;
}

EstimateOutput run_estimate(const ExperimentConfig& config, const std::string& dataset_path,
                            EstimateTarget which, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const TreeDataset tree = read_tree_csv(dataset_path);
  const ObservationScheme scheme = subsample_incomplete_tree(tree.depth, config.rho);
  EstimateOutput out;

  if (which == EstimateTarget::Nu) {
    std::vector<double> samples;
    for (const auto& layer : scheme.members)
      for (std::uint64_t h : layer) samples.push_back(tree.trait[h - 1]);
    const Bandwidths bw = bandwidth_rule(samples.size(), config.alpha_smoothness,
                                         config.beta_smoothness, config.bandwidth_mode);
    double lo = 0.0, hi = config.length;
    if (config.domain == DomainKind::FullLine) {
      const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
      lo = *mn - 3.0 * bw.h;
      hi = *mx + 3.0 * bw.h;
    }
    const KernelSpec kernel = make_kernel(KernelKind::Gaussian, 1);
    const DensityEstimate est =
        estimate_nu(samples, linspace(lo, hi, config.grid_nx), bw.h, kernel);
    const std::string path = (std::filesystem::path(out_dir) / "nu_curve.csv").string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("run_estimate: cannot open " + path);
    os << "x,value\n";
    for (std::size_t i = 0; i < est.grid.size(); ++i)
      os << format_double(est.grid[i]) << ',' << format_double(est.values[i]) << '\n';
    out.files.push_back(path);
    return out;
  }

  const auto pairs = extract_pairs(tree, scheme);

  if (which == EstimateTarget::Q) {
    const Bandwidths bw = bandwidth_rule(tree.node_count(), config.alpha_smoothness,
                                         config.beta_smoothness, config.bandwidth_mode);
    const KernelSpec kernel = make_kernel(KernelKind::Gaussian, 1);
    const auto xs = linspace(0.0, config.length, config.grid_nx);
    const auto ys = linspace(0.0, config.length, config.grid_ny);
    const TransitionEstimate est =
        estimate_q(pairs, xs, ys, bw.h1, bw.h2, bw.h, config.varpi, kernel);
    const std::string path = (std::filesystem::path(out_dir) / "q_grid.csv").string();
    write_grid_csv(est.as_grid(), path);
    out.files.push_back(path);
    out.files.push_back(path + ".json");
    return out;
  }

  const RateFamily family = build_rate_family(config);
  const QBuilder builder = make_qbuilder_factory(config)(0);
  GridPlan plan;
  plan.theta_min = config.theta_min;
  plan.theta_max = config.theta_max;
  plan.dtheta = config.dtheta;
  plan.dtheta_floor = config.dtheta_floor;
  MleResult result = grid_mle(pairs, family, builder, plan);

  // Fisher information by the relative central difference of log q.
  try {
    const double h = 1e-4 * std::max(std::abs(result.theta_hat), 1.0);
    const QFn lo = builder(result.theta_hat - h, 0), hi = builder(result.theta_hat + h, 0);
    const auto grad = [&](double, double x, double y) {
      const double a = std::max(lo(x, y), 1e-12), b = std::max(hi(x, y), 1e-12);
      return (std::log(b) - std::log(a)) / (2.0 * h);
    };
    const FisherEstimate fisher = fisher_info_estimate(result.theta_hat, pairs, grad);
    result.fisher = fisher.psi;
    result.ci = {fisher.ci_lo, fisher.ci_hi};
  } catch (const NumericError&) {
    // Singular information stays unreported; the result JSON simply omits it.
  }

  const std::string jpath = (std::filesystem::path(out_dir) / "mle_result.json").string();
  std::ofstream os(jpath, std::ios::binary);
  if (!os) throw DataError("run_estimate: cannot open " + jpath);
  os << result.to_json() << '\n';
  const std::string tpath = (std::filesystem::path(out_dir) / "mle_trace.csv").string();
  result.write_trace_csv(tpath);
  out.files.push_back(jpath);
  out.files.push_back(tpath);
  return out;
}

std::size_t StudyReport::failure_count() const {
  std::size_t n = 0;
  for (const auto& o : outcomes) n += o.failed ? 1 : 0;
  return n;
}

bool StudyReport::study_failed() const {
  return failure_count() * 10 > outcomes.size();
}

double StudyReport::mean_theta() const {
  RunningStats s;
  for (const auto& o : outcomes)
    if (!o.failed) s.add(o.theta_hat);
  return s.mean();
}

double StudyReport::stddev_theta() const {
  RunningStats s;
  for (const auto& o : outcomes)
    if (!o.failed) s.add(o.theta_hat);
  return s.stddev();
}

std::string StudyReport::to_json() const {
  nlohmann::json j;
  j["theta_true"] = theta_true;
  j["grid"] = {{"theta_min", plan.theta_min},
               {"theta_max", plan.theta_max},
               {"dtheta", plan.dtheta},
               {"dtheta_floor", plan.dtheta_floor}};
  j["replications"] = outcomes.size();
  j["failures"] = failure_count();
  j["mean"] = mean_theta();
  j["stddev"] = stddev_theta();
  j["per_replication"] = nlohmann::json::array();
  for (const auto& o : outcomes) {
    nlohmann::json r = {{"index", o.index}, {"failed", o.failed}, {"seconds", o.seconds}};
    if (o.failed)
      r["error"] = o.error;
    else {
      r["theta_hat"] = o.theta_hat;
      r["loglik"] = o.loglik;
    }
    j["per_replication"].push_back(r);
  }
  return j.dump(2);
}

void StudyReport::write_csv(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("StudyReport: cannot open " + path);
  os << "replication,theta_hat,loglik,seconds,failed\n";
  for (const auto& o : outcomes) {
    os << o.index << ',';
    if (!o.failed) os << format_double(o.theta_hat) << ',' << format_double(o.loglik);
    else os << ',';
    os << ',' << format_double(o.seconds) << ',' << (o.failed ? 1 : 0) << '\n';
  }
}

StudyReport run_study(const ExperimentConfig& config) {
  config.validate();
  const RateFamily family = build_rate_family(config);
  const double x_max = config.domain == DomainKind::ReflectedInterval ? config.length : 3.0;
  family.validate(x_max);
  {
    ModelSpec model = build_model(config, config.theta_true);
    model.validate();
  }
  const QBuilderFactory factory = make_qbuilder_factory(config);

  StudyReport report;
  report.theta_true = config.theta_true;
  report.plan.theta_min = config.theta_min;
  report.plan.theta_max = config.theta_max;
  report.plan.dtheta = config.dtheta;
  report.plan.dtheta_floor = config.dtheta_floor;
  report.outcomes.resize(config.replications);

  std::atomic<int> next{0};
  const auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= config.replications) return;
      ReplicationOutcome& out = report.outcomes[i];
      out.index = i;
      const auto tic = std::chrono::steady_clock::now();
      try {
        ModelSpec model = build_model(config, config.theta_true);
        const std::uint64_t tree_seed = derive_seed(config.seed, kTagTree, i);
        const TreeDataset tree =
            generate_tree(model, config.x0, config.depth, config.dt, Rng(tree_seed));
        const ObservationScheme scheme = subsample_incomplete_tree(config.depth, config.rho);
        const auto pairs = extract_pairs(tree, scheme);
        const MleResult res = grid_mle(pairs, family, factory(i), report.plan);
        out.theta_hat = res.theta_hat;
        out.loglik = res.loglik_at_hat;
      } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
      }
      out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    }
  };

  const int jobs = std::max(1, std::min(config.jobs, config.replications));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return report;
}

StudyReport run_study_files(const ExperimentConfig& config, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const StudyReport report = run_study(config);
  {
    const std::string path = (std::filesystem::path(out_dir) / "study_report.json").string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("run_study_files: cannot open " + path);
    os << report.to_json() << '\n';
  }
  report.write_csv((std::filesystem::path(out_dir) / "study_replications.csv").string());
  return report;
}

DiagnoseOutput run_diagnose(const ExperimentConfig& config, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  ModelSpec model = build_model(config, config.theta_true);
  model.validate();

  DiagnoseOutput out;
  std::vector<double> grid;
  if (config.domain == DomainKind::ReflectedInterval)
    grid = linspace(0.05 * config.length, 0.95 * config.length, 7);
  else
    grid = linspace(-3.0, 3.0, 7);

  const DriftReport drift =
      verify_drift_mc(model, grid, 10000, config.dt, Rng(derive_seed(config.seed, kTagProbe, 1)));
  out.drift_ok = !drift.any_violation();
  const std::string dpath = (std::filesystem::path(out_dir) / "drift_report.json").string();
  {
    std::ofstream os(dpath, std::ios::binary);
    if (!os) throw DataError("run_diagnose: cannot open " + dpath);
    os << drift.to_json() << '\n';
  }
  out.files.push_back(dpath);

  if (config.drift == DriftKind::OrnsteinUhlenbeck &&
      config.rate_family == RateFamilyKind::Constant) {
    const ErgodicityCertificate cert = certificate_search(
        config.drift_beta, config.sigma, config.theta_true, config.eps, drift.constants);
    const std::string cpath = (std::filesystem::path(out_dir) / "ergodicity_certificate.json").string();
    std::ofstream os(cpath, std::ios::binary);
    if (!os) throw DataError("run_diagnose: cannot open " + cpath);
    os << cert.to_json() << '\n';
    out.files.push_back(cpath);
  }
  return out;
}

}  // namespace bifurc
