#include "bifurc/tree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bifurc/format.hpp"

namespace bifurc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLifetimeWindow = 1.0;  // lazy-extension chunk, in time units
constexpr int kMaxDepth = 26;
}  // namespace

std::string NodeId::label() const {
  if (h == 0) throw std::invalid_argument("NodeId: invalid index 0");
  std::string s;
  const int g = generation();
  s.reserve(g);
  for (int k = g - 1; k >= 0; --k) s.push_back((h >> k) & 1 ? '1' : '0');
  return s;
}

NodeId NodeId::from_label(const std::string& s) {
  NodeId u = root();
  for (char c : s) {
    if (c != '0' && c != '1') throw std::invalid_argument("NodeId: label must be over {0,1}");
    u.h = 2 * u.h + (c == '1' ? 1 : 0);
  }
  return u;
}

DivisionRate DivisionRate::constant(double b) {
  if (b <= 0.0) throw std::invalid_argument("DivisionRate::constant: rate must be > 0");
  DivisionRate r;
  r.rate = [b](double) { return b; };
  r.lower = b;
  r.has_upper = true;
  r.upper = b;
  return r;
}

DivisionRate DivisionRate::affine(double theta, double x_max) {
  if (theta < 0.0 || x_max <= 0.0)
    throw std::invalid_argument("DivisionRate::affine: need theta >= 0 and x_max > 0");
  DivisionRate r;
  r.rate = [theta](double x) { return 1.0 + theta * x; };
  r.lower = 1.0;
  r.has_envelope = true;
  r.env_coeff = std::max(theta, 1e-12);
  r.env_power = 1.0;
  r.has_upper = true;
  r.upper = 1.0 + theta * x_max;
  return r;
}

Fragmentation Fragmentation::uniform(double eps) {
  if (!(eps > 0.0 && eps < 0.5))
    throw std::invalid_argument("Fragmentation::uniform: eps must lie in (0, 1/2)");
  Fragmentation f;
  f.eps = eps;
  const double h = 1.0 / (1.0 - 2.0 * eps);
  f.floor_delta = h;
  f.density = [eps, h](double z) { return (z >= eps && z <= 1.0 - eps) ? h : 0.0; };
  f.sample = [eps](Rng& rng) { return eps + (1.0 - 2.0 * eps) * rng.uniform(); };
  return f;
}

void ModelSpec::validate() {
  diffusion.validate();
  if (!rate.rate) throw ConfigError("ModelSpec: division rate not set");
  if (rate.lower <= 0.0) throw ConfigError("ModelSpec: rate floor b1 must be > 0");
  if (!frag.density || !frag.sample) throw ConfigError("ModelSpec: fragmentation not set");
  if (!(frag.eps > 0.0 && frag.eps < 0.5)) throw ConfigError("ModelSpec: eps must lie in (0,1/2)");

  const int probes = 257;
  const double lo = diffusion.reflected() ? 0.0 : -3.0 * std::max(1.0, diffusion.return_radius);
  const double hi = diffusion.reflected() ? diffusion.length : -lo;
  double max_rate = 0.0;
  for (int i = 0; i < probes; ++i) {
    const double x = lo + (hi - lo) * i / (probes - 1);
    const double b = rate.rate(x);
    if (!std::isfinite(b) || b < rate.lower * (1.0 - 1e-12))
      throw ConfigError("ModelSpec: division rate below declared floor on probe grid");
    if (rate.has_upper && b > rate.upper * (1.0 + 1e-12))
      throw ConfigError("ModelSpec: division rate above declared upper bound");
    if (rate.has_envelope &&
        b > rate.env_coeff * std::pow(std::abs(x), rate.env_power) + rate.lower + 1e-9)
      throw ConfigError("ModelSpec: division rate above declared growth envelope");
    max_rate = std::max(max_rate, b);
  }
  for (int i = 0; i <= 64; ++i) {
    const double z = frag.eps + (1.0 - 2.0 * frag.eps) * i / 64.0;
    if (frag.density(z) < frag.floor_delta * (1.0 - 1e-12))
      throw ConfigError("ModelSpec: fragmentation density below its floor on the support");
  }
  if (frag.density(frag.eps / 2.0) != 0.0 || frag.density(1.0 - frag.eps / 2.0) != 0.0)
    throw ConfigError("ModelSpec: fragmentation density positive outside [eps, 1-eps]");
  if (diffusion.reflected() && !rate.has_upper && !rate.has_envelope) rate_bound_cache_ = max_rate;
}

double ModelSpec::reflected_rate_bound() const {
  if (rate.has_upper) return rate.upper;
  if (rate.has_envelope)
    return rate.env_coeff * std::pow(diffusion.length, rate.env_power) + rate.lower;
  if (rate_bound_cache_ > 0.0) return rate_bound_cache_;
  throw ConfigError("ModelSpec: no usable division-rate bound; declare b4 or call validate()");
}

double TreeDataset::division_trait(NodeId u) const {
  if (!is_internal(u)) throw std::invalid_argument("division_trait: leaf node");
  return trait[index(u.child(0))] + trait[index(u.child(1))];
}

Division sample_lifetime(const ModelSpec& spec, double x0, double dt, Rng& rng) {
  if (!spec.diffusion.contains(x0)) throw std::domain_error("sample_lifetime: x0 outside domain");
  if (dt <= 0.0) throw std::invalid_argument("sample_lifetime: dt must be > 0");

  const std::size_t steps = std::max<std::size_t>(1, std::llround(kLifetimeWindow / dt));
  const double window = static_cast<double>(steps) * dt;
  const std::size_t max_windows = 1u << 22;

  double t0 = 0.0;
  double x = x0;
  for (std::size_t w = 0; w < max_windows; ++w) {
    const PathSample path = simulate_path(spec.diffusion, x, window, dt, rng);

    double bound;
    if (spec.diffusion.reflected()) {
      bound = spec.reflected_rate_bound();
    } else if (spec.rate.has_upper) {
      bound = spec.rate.upper;
    } else if (spec.rate.has_envelope) {
      double m = 0.0;
      for (double v : path.values) m = std::max(m, std::abs(v));
      bound = spec.rate.env_coeff * std::pow(m, spec.rate.env_power) + spec.rate.lower;
    } else {
      throw ConfigError("sample_lifetime: unbounded rate without (b2, gamma) envelope");
    }

    double t = 0.0;
    while (true) {
      t += rng.exponential(bound);
      if (t >= window) break;
      const std::size_t k = static_cast<std::size_t>(t / dt);
      const double trait_here = path.values[k];
      if (rng.uniform() * bound <= spec.rate.rate(trait_here)) {
        return {t0 + t, trait_here};
      }
    }
    t0 += window;
    x = path.values.back();
  }
  throw NumericError("sample_lifetime: no division event after maximum path extension");
}

TreeDataset generate_tree(const ModelSpec& spec, double x0, int depth, double dt, const Rng& rng) {
  if (depth < 0) throw std::invalid_argument("generate_tree: depth must be >= 0");
  if (depth > kMaxDepth) throw ConfigError("generate_tree: depth too large");
  if (!spec.diffusion.contains(x0)) throw std::domain_error("generate_tree: x0 outside domain");

  const std::size_t n = (std::size_t{2} << depth) - 1;  // 2^(depth+1) - 1
  TreeDataset tree;
  tree.depth = depth;
  tree.birth_time.assign(n, kNaN);
  tree.trait.assign(n, kNaN);
  tree.lifetime.assign(n, kNaN);
  tree.theta.assign(n, kNaN);

  tree.birth_time[0] = 0.0;
  tree.trait[0] = x0;

  // Heap order is breadth-first order, so a flat scan is exactly the queue
  // algorithm: parents are always processed before their children.
  for (std::uint64_t h = 1; h <= n; ++h) {
    const NodeId u{h};
    if (u.generation() > depth - 1) continue;
    const std::size_t i = h - 1;
    Rng node_rng = rng.derive(h);
    const Division d = sample_lifetime(spec, tree.trait[i], dt, node_rng);
    const double frac = spec.frag.sample(node_rng);
    tree.lifetime[i] = d.lifetime;
    tree.theta[i] = frac;
    const std::size_t c0 = tree.index(u.child(0)), c1 = tree.index(u.child(1));
    tree.birth_time[c0] = tree.birth_time[i] + d.lifetime;
    tree.birth_time[c1] = tree.birth_time[i] + d.lifetime;
    tree.trait[c0] = frac * d.death_trait;
    tree.trait[c1] = (1.0 - frac) * d.death_trait;
  }
  return tree;
}

std::vector<std::pair<NodeId, double>> recover_fragmentation_fractions(const TreeDataset& tree) {
  if (tree.depth < 1) throw std::invalid_argument("recover_fragmentation_fractions: no internal nodes");
  std::vector<std::pair<NodeId, double>> out;
  const std::uint64_t internal = (std::uint64_t{1} << tree.depth) - 1;
  out.reserve(internal);
  for (std::uint64_t h = 1; h <= internal; ++h) {
    const NodeId u{h};
    const double a = tree.trait[tree.index(u.child(0))];
    const double b = tree.trait[tree.index(u.child(1))];
    const double s = a + b;
    if (s == 0.0) throw DataError("recover_fragmentation_fractions: degenerate node " + u.label());
    out.emplace_back(u, a / s);
  }
  return out;
}

std::size_t ObservationScheme::size() const {
  std::size_t s = 0;
  for (const auto& g : members) s += g.size();
  return s;
}

bool ObservationScheme::is_member(NodeId u) const {
  const int g = u.generation();
  if (g < 0 || g >= static_cast<int>(members.size())) return false;
  const auto& layer = members[g];
  return std::binary_search(layer.begin(), layer.end(), u.h);
}

ObservationScheme subsample_incomplete_tree(int depth, double rho) {
  if (depth < 0) throw std::invalid_argument("subsample_incomplete_tree: depth must be >= 0");
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("subsample_incomplete_tree: rho must lie in [0,1]");

  ObservationScheme scheme;
  scheme.depth = depth;
  scheme.rho = rho;
  scheme.members.resize(depth + 1);
  scheme.members[0] = {1};

  for (int m = 1; m <= depth; ++m) {
    const auto& parents = scheme.members[m - 1];
    const std::uint64_t full = std::uint64_t{1} << m;
    std::uint64_t target =
        static_cast<std::uint64_t>(std::llround(std::pow(2.0, rho * static_cast<double>(m))));
    target = std::min(target, full);
    target = std::max<std::uint64_t>(target, 1);
    target = std::max<std::uint64_t>(target, parents.size());
    target = std::min<std::uint64_t>(target, 2 * parents.size());
    const std::uint64_t extra = target - parents.size();

    auto& layer = scheme.members[m];
    layer.reserve(target);
    for (std::uint64_t p : parents) layer.push_back(2 * p);
    for (std::uint64_t i = 0; i < extra; ++i) layer.push_back(2 * parents[i] + 1);
    std::sort(layer.begin(), layer.end());
  }
  return scheme;
}

std::vector<std::pair<double, double>> extract_pairs(const TreeDataset& tree,
                                                     const ObservationScheme& scheme) {
  if (scheme.depth > tree.depth)
    throw DataError("extract_pairs: scheme deeper than the dataset");
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(scheme.size() - 1);
  for (int m = 1; m < static_cast<int>(scheme.members.size()); ++m) {
    for (std::uint64_t h : scheme.members[m]) {
      const NodeId u{h};
      if (tree.index(u) >= tree.node_count())
        throw DataError("extract_pairs: scheme references missing node " + u.label());
      pairs.emplace_back(tree.trait[tree.index(u.parent())], tree.trait[tree.index(u)]);
    }
  }
  return pairs;
}

double tagged_step(const ModelSpec& spec, double x, double dt, Rng& rng) {
  const Division d = sample_lifetime(spec, x, dt, rng);
  const double frac = spec.frag.sample(rng);
  const bool keep_first = rng.bernoulli();
  return (keep_first ? frac : 1.0 - frac) * d.death_trait;
}

std::vector<double> tagged_branch_chain(const ModelSpec& spec, double x0, int steps, double dt,
                                        Rng& rng) {
  if (steps < 0) throw std::invalid_argument("tagged_branch_chain: steps must be >= 0");
  std::vector<double> chain;
  chain.reserve(steps + 1);
  chain.push_back(x0);
  double x = x0;
  for (int i = 0; i < steps; ++i) {
    x = tagged_step(spec, x, dt, rng);
    chain.push_back(x);
  }
  return chain;
}

void write_tree_csv(const TreeDataset& tree, std::ostream& os) {
  os << "id,birth_time,trait_at_birth,lifetime,theta\n";
  for (std::uint64_t h = 1; h <= tree.node_count(); ++h) {
    const NodeId u{h};
    const std::size_t i = h - 1;
    os << u.label() << ',' << format_double(tree.birth_time[i]) << ','
       << format_double(tree.trait[i]) << ',';
    if (!std::isnan(tree.lifetime[i])) os << format_double(tree.lifetime[i]);
    os << ',';
    if (!std::isnan(tree.theta[i])) os << format_double(tree.theta[i]);
    os << '\n';
  }
}

void write_tree_csv(const TreeDataset& tree, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("write_tree_csv: cannot open " + path);
  write_tree_csv(tree, os);
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TreeDataset read_tree_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("read_tree_csv: empty file");
  if (split_csv_row(line) !=
      std::vector<std::string>{"id", "birth_time", "trait_at_birth", "lifetime", "theta"})
    throw DataError("read_tree_csv: row 1: unexpected header");

  struct Row {
    NodeId id;
    double birth, trait, life, theta;
  };
  std::vector<Row> rows;
  int depth = 0;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_row(line);
    if (f.size() != 5)
      throw DataError("read_tree_csv: row " + std::to_string(lineno) + ": expected 5 fields");
    Row r;
    try {
      r.id = NodeId::from_label(f[0]);
    } catch (const std::exception&) {
      throw DataError("read_tree_csv: row " + std::to_string(lineno) + ": bad node id");
    }
    const auto birth = parse_double(f[1]);
    const auto trait = parse_double(f[2]);
    if (!birth || !trait)
      throw DataError("read_tree_csv: row " + std::to_string(lineno) + ": bad numeric field");
    r.birth = *birth;
    r.trait = *trait;
    if (f[3].empty()) {
      r.life = kNaN;
    } else if (auto v = parse_double(f[3])) {
      r.life = *v;
    } else {
      throw DataError("read_tree_csv: row " + std::to_string(lineno) + ": bad lifetime");
    }
    if (f[4].empty()) {
      r.theta = kNaN;
    } else if (auto v = parse_double(f[4])) {
      r.theta = *v;
    } else {
      throw DataError("read_tree_csv: row " + std::to_string(lineno) + ": bad theta");
    }
    depth = std::max(depth, r.id.generation());
    rows.push_back(r);
  }

  const std::size_t expect = (std::size_t{2} << depth) - 1;
  if (rows.size() != expect)
    throw DataError("read_tree_csv: expected " + std::to_string(expect) + " nodes for depth " +
                    std::to_string(depth) + ", found " + std::to_string(rows.size()));

  TreeDataset tree;
  tree.depth = depth;
  tree.birth_time.assign(expect, kNaN);
  tree.trait.assign(expect, kNaN);
  tree.lifetime.assign(expect, kNaN);
  tree.theta.assign(expect, kNaN);
  std::vector<bool> seen(expect, false);
  for (const auto& r : rows) {
    const std::size_t i = tree.index(r.id);
    if (i >= expect || seen[i]) throw DataError("read_tree_csv: duplicate or out-of-range node");
    seen[i] = true;
    tree.birth_time[i] = r.birth;
    tree.trait[i] = r.trait;
    tree.lifetime[i] = r.life;
    tree.theta[i] = r.theta;
  }
  return tree;
}

TreeDataset read_tree_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("read_tree_csv: cannot open " + path);
  return read_tree_csv(is);
}

}  // namespace bifurc
