#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bifurc/sde.hpp"

namespace bifurc {

/// Ulam-Harris label stored as a heap index: root = 1, children of u are
/// 2u and 2u+1. The bit string below the leading one, most significant bit
/// first, is the usual {0,1}* label.
struct NodeId {
  std::uint64_t h = 1;

  static NodeId root() { return {1}; }
  NodeId parent() const { return {h >> 1}; }
  NodeId child(int i) const { return {2 * h + static_cast<std::uint64_t>(i)}; }
  bool is_root() const { return h == 1; }
  int generation() const {
    int g = -1;
    for (std::uint64_t v = h; v != 0; v >>= 1) ++g;
    return g;
  }
  std::string label() const;
  static NodeId from_label(const std::string& s);

  friend bool operator==(NodeId a, NodeId b) { return a.h == b.h; }
  friend auto operator<=>(NodeId a, NodeId b) { return a.h <=> b.h; }
};

/// Division rate B with its declared envelope: a positive floor b1 and,
/// optionally, a growth envelope B(x) <= b2 |x|^gamma + b1 and/or a uniform
/// upper bound b4. The thinning sampler needs one of the two bounds on an
/// unbounded domain.
struct DivisionRate {
  ScalarFn rate;
  double lower = 0.0;  // b1
  bool has_envelope = false;
  double env_coeff = 0.0;  // b2
  double env_power = 0.0;  // gamma
  bool has_upper = false;
  double upper = 0.0;  // b4

  bool is_constant() const { return has_upper && upper == lower; }

  static DivisionRate constant(double b);
  static DivisionRate affine(double theta, double x_max);  // B(x) = 1 + theta x on [0, x_max]
};

/// Fragmentation law of the fraction handed to child 0, supported in
/// [eps, 1-eps] and bounded below by floor_delta there.
struct Fragmentation {
  double eps = 0.0;
  double floor_delta = 0.0;
  ScalarFn density;
  std::function<double(Rng&)> sample;

  double kappa_tilde(double z) const { return 0.5 * (density(z) + density(1.0 - z)); }

  static Fragmentation uniform(double eps);
};

/// Everything the branching law needs: trait flow, division rate, fragmentation.
struct ModelSpec {
  DiffusionSpec diffusion;
  DivisionRate rate;
  Fragmentation frag;

  /// Probe-grid validation; also caches the reflected-domain rate bound used
  /// by the thinning sampler. Call once before heavy simulation.
  void validate();

  double reflected_rate_bound() const;

 private:
  double rate_bound_cache_ = -1.0;
};

/// Complete binary tree of depth `depth`, nodes indexed by heap order.
/// Leaves at the last generation carry no lifetime/fraction (they were never
/// divided); internal nodes carry both plus their trait at division.
struct TreeDataset {
  int depth = 0;
  std::vector<double> birth_time;
  std::vector<double> trait;     // trait at birth
  std::vector<double> lifetime;  // NaN for non-divided leaves
  std::vector<double> theta;     // NaN for leaves

  std::size_t node_count() const { return trait.size(); }
  std::size_t index(NodeId u) const { return static_cast<std::size_t>(u.h - 1); }
  bool is_internal(NodeId u) const { return u.generation() < depth; }
  double division_trait(NodeId u) const;  // X_{u0} + X_{u1}
};

struct Division {
  double lifetime = 0.0;
  double death_trait = 0.0;
};

/// Lifetime by thinning: exponential proposals under a dominating rate,
/// accepted with probability B(phi(t)) / bound. The trait path is simulated
/// lazily, one horizon chunk at a time, so no truncation bias is introduced.
Division sample_lifetime(const ModelSpec& spec, double x0, double dt, Rng& rng);

/// Queue-driven generation of the full tree of depth n; every node draws from
/// a stream derived from (rng seed, node id), so subtree order cannot matter.
TreeDataset generate_tree(const ModelSpec& spec, double x0, int depth, double dt, const Rng& rng);

/// theta_u = X_{u0} / (X_{u0} + X_{u1}) for every internal node.
std::vector<std::pair<NodeId, double>> recover_fragmentation_fractions(const TreeDataset& tree);

/// Ancestor-closed observation scheme with per-generation counts of order
/// 2^(rho m), grown deterministically (child 0 of every kept node, child 1 of
/// the lexicographically smallest kept parents).
struct ObservationScheme {
  int depth = 0;
  double rho = 1.0;
  double count_lo = 0.5;  // c1
  double count_hi = 2.0;  // c2
  std::vector<std::vector<std::uint64_t>> members;  // per generation, sorted heap ids

  std::size_t size() const;
  bool is_member(NodeId u) const;
};

ObservationScheme subsample_incomplete_tree(int depth, double rho);

/// One (parent trait, child trait) pair per observed non-root node, in
/// breadth-first lexicographic order.
std::vector<std::pair<double, double>> extract_pairs(const TreeDataset& tree,
                                                     const ObservationScheme& scheme);

/// One step of the tagged-branch chain: one branching event, keep a uniformly
/// random child.
double tagged_step(const ModelSpec& spec, double x, double dt, Rng& rng);

/// Y_0 = x0 and m further tagged-branch steps.
std::vector<double> tagged_branch_chain(const ModelSpec& spec, double x0, int steps, double dt,
                                        Rng& rng);

void write_tree_csv(const TreeDataset& tree, std::ostream& os);
void write_tree_csv(const TreeDataset& tree, const std::string& path);
TreeDataset read_tree_csv(std::istream& is);
TreeDataset read_tree_csv(const std::string& path);

}  // namespace bifurc
