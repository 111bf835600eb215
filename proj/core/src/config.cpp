#include "bifurc/config.hpp"

#include <fstream>
#include <sstream>

#include "bifurc/format.hpp"
#include "bifurc/toml.hpp"

namespace bifurc {

namespace {

std::string domain_name(DomainKind d) {
  return d == DomainKind::ReflectedInterval ? "reflected" : "line";
}
std::string drift_name(DriftKind d) { return d == DriftKind::Constant ? "constant" : "ou"; }
std::string family_name(RateFamilyKind f) {
  return f == RateFamilyKind::Constant ? "constant" : "affine";
}
std::string evaluator_name(QEvaluatorKind q) {
  switch (q) {
    case QEvaluatorKind::Spectral: return "spectral";
    case QEvaluatorKind::Nonparam: return "nonparam";
    case QEvaluatorKind::MonteCarlo: return "mc";
  }
  return "spectral";
}
std::string bandwidth_name(BandwidthMode m) {
  return m == BandwidthMode::Practical ? "practical" : "theoretical";
}

template <class T>
T parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, T>> table,
             const std::string& what) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  throw ConfigError("config: unknown " + what + " '" + s + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_toml_text(const std::string& text) {
  const TomlDoc doc = parse_toml(text);
  ExperimentConfig c;
  c.domain = parse_enum<DomainKind>(
      doc.string_or("model", "domain", domain_name(c.domain)),
      {{"reflected", DomainKind::ReflectedInterval}, {"line", DomainKind::FullLine}}, "domain");
  c.drift = parse_enum<DriftKind>(
      doc.string_or("model", "drift", drift_name(c.drift)),
      {{"constant", DriftKind::Constant}, {"ou", DriftKind::OrnsteinUhlenbeck}}, "drift");
  c.drift_r1 = doc.number_or("model", "drift_r1", c.drift_r1);
  c.drift_beta = doc.number_or("model", "drift_beta", c.drift_beta);
  c.sigma = doc.number_or("model", "sigma", c.sigma);
  c.length = doc.number_or("model", "length", c.length);
  c.rate_family = parse_enum<RateFamilyKind>(
      doc.string_or("model", "rate_family", family_name(c.rate_family)),
      {{"constant", RateFamilyKind::Constant}, {"affine", RateFamilyKind::Affine}}, "rate family");
  c.theta_true = doc.number_or("model", "theta_true", c.theta_true);
  c.eps = doc.number_or("model", "eps", c.eps);

  c.depth = static_cast<int>(doc.int_or("simulation", "depth", c.depth));
  c.dt = doc.number_or("simulation", "dt", c.dt);
  c.x0 = doc.number_or("simulation", "x0", c.x0);
  if (const TomlValue* v = doc.find("simulation", "seed"))
    c.seed = static_cast<std::uint64_t>(v->as_int());
  else
    throw ConfigError("config: [simulation] seed is mandatory");

  c.rho = doc.number_or("observation", "rho", c.rho);

  c.grid_nx = static_cast<int>(doc.int_or("estimator", "grid_nx", c.grid_nx));
  c.grid_ny = static_cast<int>(doc.int_or("estimator", "grid_ny", c.grid_ny));
  c.varpi = doc.number_or("estimator", "varpi", c.varpi);
  c.bandwidth_mode = parse_enum<BandwidthMode>(
      doc.string_or("estimator", "bandwidth_mode", bandwidth_name(c.bandwidth_mode)),
      {{"practical", BandwidthMode::Practical}, {"theoretical", BandwidthMode::Theoretical}},
      "bandwidth mode");
  c.alpha_smoothness = doc.number_or("estimator", "alpha", c.alpha_smoothness);
  c.beta_smoothness = doc.number_or("estimator", "beta", c.beta_smoothness);
  c.q_evaluator = parse_enum<QEvaluatorKind>(
      doc.string_or("estimator", "q_evaluator", evaluator_name(c.q_evaluator)),
      {{"spectral", QEvaluatorKind::Spectral},
       {"nonparam", QEvaluatorKind::Nonparam},
       {"mc", QEvaluatorKind::MonteCarlo}},
      "q evaluator");
  c.theta_min = doc.number_or("estimator", "theta_min", c.theta_min);
  c.theta_max = doc.number_or("estimator", "theta_max", c.theta_max);
  c.dtheta = doc.number_or("estimator", "dtheta", c.dtheta);
  c.dtheta_floor = doc.number_or("estimator", "dtheta_floor", c.dtheta);
  c.spectral_terms = static_cast<int>(doc.int_or("estimator", "spectral_terms", c.spectral_terms));
  c.aux_depth = static_cast<int>(doc.int_or("estimator", "aux_depth", c.aux_depth));
  c.aux_per_replication = doc.bool_or("estimator", "aux_per_replication", c.aux_per_replication);
  c.mc_paths = static_cast<int>(doc.int_or("estimator", "mc_paths", c.mc_paths));

  c.replications = static_cast<int>(doc.int_or("study", "replications", c.replications));
  c.jobs = static_cast<int>(doc.int_or("study", "jobs", c.jobs));

  c.output_dir = doc.string_or("output", "dir", c.output_dir);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_toml_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_toml_text(ss.str());
}

std::string ExperimentConfig::to_toml() const {
  std::ostringstream os;
  os << "[model]\n";
  os << "domain = \"" << domain_name(domain) << "\"\n";
  os << "drift = \"" << drift_name(drift) << "\"\n";
  os << "drift_r1 = " << format_double(drift_r1) << '\n';
  os << "drift_beta = " << format_double(drift_beta) << '\n';
  os << "sigma = " << format_double(sigma) << '\n';
  os << "length = " << format_double(length) << '\n';
  os << "rate_family = \"" << family_name(rate_family) << "\"\n";
  os << "theta_true = " << format_double(theta_true) << '\n';
  os << "eps = " << format_double(eps) << '\n';
  os << "\n[simulation]\n";
  os << "depth = " << depth << '\n';
  os << "dt = " << format_double(dt) << '\n';
  os << "x0 = " << format_double(x0) << '\n';
  os << "seed = " << seed << '\n';
  os << "\n[observation]\n";
  os << "rho = " << format_double(rho) << '\n';
  os << "\n[estimator]\n";
  os << "grid_nx = " << grid_nx << '\n';
  os << "grid_ny = " << grid_ny << '\n';
  os << "varpi = " << format_double(varpi) << '\n';
  os << "bandwidth_mode = \"" << bandwidth_name(bandwidth_mode) << "\"\n";
  os << "alpha = " << format_double(alpha_smoothness) << '\n';
  os << "beta = " << format_double(beta_smoothness) << '\n';
  os << "q_evaluator = \"" << evaluator_name(q_evaluator) << "\"\n";
  os << "theta_min = " << format_double(theta_min) << '\n';
  os << "theta_max = " << format_double(theta_max) << '\n';
  os << "dtheta = " << format_double(dtheta) << '\n';
  os << "dtheta_floor = " << format_double(dtheta_floor) << '\n';
  os << "spectral_terms = " << spectral_terms << '\n';
  os << "aux_depth = " << aux_depth << '\n';
  os << "aux_per_replication = " << (aux_per_replication ? "true" : "false") << '\n';
  os << "mc_paths = " << mc_paths << '\n';
  os << "\n[study]\n";
  os << "replications = " << replications << '\n';
  os << "jobs = " << jobs << '\n';
  os << "\n[output]\n";
  os << "dir = \"" << output_dir << "\"\n";
  return os.str();
}

std::uint64_t ExperimentConfig::hash() const {
  const std::string s = to_toml();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void ExperimentConfig::validate() const {
  if (sigma <= 0.0) throw ConfigError("config: sigma must be > 0");
  if (domain == DomainKind::ReflectedInterval && length <= 0.0)
    throw ConfigError("config: length must be > 0");
  if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("config: eps must lie in (0, 1/2)");
  if (depth < 0 || depth > 26) throw ConfigError("config: depth out of range");
  if (dt <= 0.0) throw ConfigError("config: dt must be > 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("config: rho must lie in [0, 1]");
  if (theta_true <= 0.0) throw ConfigError("config: theta_true must be > 0");
  if (!(theta_min < theta_max)) throw ConfigError("config: empty theta window");
  if (dtheta <= 0.0 || dtheta_floor <= 0.0) throw ConfigError("config: theta steps must be > 0");
  if (grid_nx < 2 || grid_ny < 2) throw ConfigError("config: grid too small");
  if (varpi <= 0.0) throw ConfigError("config: varpi must be > 0");
  if (replications < 1) throw ConfigError("config: need at least one replication");
  if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
  if (aux_depth < 1 || aux_depth > 26) throw ConfigError("config: aux_depth out of range");
  if (mc_paths < 1) throw ConfigError("config: mc_paths must be >= 1");
  if (drift == DriftKind::OrnsteinUhlenbeck && domain == DomainKind::ReflectedInterval)
    throw ConfigError("config: the OU drift is a full-line model here");
}

ModelSpec build_model(const ExperimentConfig& config, double theta) {
  ModelSpec spec;
  if (config.drift == DriftKind::Constant) {
    if (config.domain != DomainKind::ReflectedInterval)
      throw ConfigError("build_model: constant drift requires the reflected domain");
    spec.diffusion =
        DiffusionSpec::reflected_constant_drift(config.drift_r1, config.sigma, config.length);
    // Envelope constants for the drift diagnostics.
    spec.diffusion.drift_growth = std::abs(config.drift_r1) > 0 ? std::abs(config.drift_r1) : 1.0;
    spec.diffusion.return_radius = config.length;
  } else {
    spec.diffusion = DiffusionSpec::ornstein_uhlenbeck(config.drift_beta, config.sigma);
  }
  if (config.rate_family == RateFamilyKind::Constant) {
    spec.rate = DivisionRate::constant(theta);
  } else {
    const double xm =
        config.domain == DomainKind::ReflectedInterval ? config.length : 1e6;
    spec.rate = DivisionRate::affine(theta, xm);
  }
  spec.frag = Fragmentation::uniform(config.eps);
  return spec;
}

RateFamily build_rate_family(const ExperimentConfig& config) {
  if (config.rate_family == RateFamilyKind::Constant)
    return RateFamily::constant(config.theta_min, config.theta_max);
  const double xm = config.domain == DomainKind::ReflectedInterval ? config.length : 1e6;
  return RateFamily::affine(config.theta_min, config.theta_max, xm);
}

SpectralParams build_spectral_params(const ExperimentConfig& config) {
  if (config.domain != DomainKind::ReflectedInterval || config.drift != DriftKind::Constant)
    throw ConfigError("spectral evaluator: needs the reflected constant-drift model");
  if (!(config.drift_r1 < 0.0))
    throw ConfigError("spectral evaluator: needs a strictly negative drift");
  if (config.rate_family != RateFamilyKind::Constant)
    throw ConfigError("spectral evaluator: only the constant rate family has a series form");
  SpectralParams p;
  p.r1 = config.drift_r1;
  p.sigma0 = config.sigma;
  p.length = config.length;
  p.eps = config.eps;
  p.terms = config.spectral_terms;
  p.validate();
  return p;
}

}  // namespace bifurc
