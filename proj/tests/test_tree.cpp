#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bifurc/stats.hpp"
#include "bifurc/tree.hpp"

using namespace bifurc;

namespace {

ModelSpec reflected_model(double b = 2.0, double eps = 0.1) {
  ModelSpec spec;
  spec.diffusion = DiffusionSpec::reflected_constant_drift(0.0, 1.0, 1.0);
  spec.rate = DivisionRate::constant(b);
  spec.frag = Fragmentation::uniform(eps);
  return spec;
}

ModelSpec frozen_model(const ScalarFn& rate, double b1, double b2, double gamma) {
  ModelSpec spec;
  spec.diffusion = DiffusionSpec::frozen();
  spec.rate.rate = rate;
  spec.rate.lower = b1;
  spec.rate.has_envelope = true;
  spec.rate.env_coeff = b2;
  spec.rate.env_power = gamma;
  spec.frag = Fragmentation::uniform(0.1);
  return spec;
}

}  // namespace

TEST_CASE("Ulam-Harris labels round-trip") {
  CHECK(NodeId::root().label() == "");
  CHECK(NodeId::root().generation() == 0);
  const NodeId u = NodeId::from_label("010");
  CHECK(u.generation() == 3);
  CHECK(u.label() == "010");
  CHECK(u.parent().label() == "01");
  CHECK(u.child(0).label() == "0100");
  CHECK(u.child(1).label() == "0101");
  CHECK_THROWS_AS(NodeId::from_label("012"), std::invalid_argument);
}

TEST_CASE("constant-rate lifetimes are exponential in the mean") {
  ModelSpec spec = reflected_model(2.0);
  Rng base(123);
  RunningStats stats;
  for (int i = 0; i < 100000; ++i) {
    Rng rng = base.derive(i);
    stats.add(sample_lifetime(spec, 0.5, 1e-2, rng).lifetime);
  }
  CHECK(std::abs(stats.mean() - 0.5) < 3.0 * stats.std_error() + 1e-2);
}

TEST_CASE("frozen-trait lifetimes pass a KS test against the exponential") {
  const double x0 = 0.4, theta = 1.5;
  ModelSpec spec = frozen_model([theta](double x) { return 1.0 + theta * x; }, 1.0, theta, 1.0);
  const double rate = 1.0 + theta * x0;
  Rng base(321);
  std::vector<double> sample(20000);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    Rng rng = base.derive(i);
    const Division d = sample_lifetime(spec, x0, 1e-3, rng);
    sample[i] = d.lifetime;
    CHECK(d.lifetime > 0.0);
    CHECK(d.death_trait == x0);
  }
  const double ks =
      ks_statistic(sample, [rate](double t) { return t <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * t); });
  CHECK(ks < ks_critical_one_sample(sample.size(), 0.01));
}

TEST_CASE("unbounded rate without an envelope is a configuration error") {
  ModelSpec spec;
  spec.diffusion = DiffusionSpec::ornstein_uhlenbeck(1.0, 1.0);
  spec.rate.rate = [](double x) { return 1.0 + x * x; };
  spec.rate.lower = 1.0;
  spec.frag = Fragmentation::uniform(0.1);
  Rng rng(1);
  CHECK_THROWS_AS(sample_lifetime(spec, 0.0, 1e-3, rng), ConfigError);
}

TEST_CASE("generate_tree: base case, counts, conservation") {
  ModelSpec spec = reflected_model();
  const TreeDataset root_only = generate_tree(spec, 0.5, 0, 1e-3, Rng(7));
  CHECK(root_only.node_count() == 1);
  CHECK(std::isnan(root_only.lifetime[0]));

  const TreeDataset tree = generate_tree(spec, 0.5, 6, 1e-3, Rng(7));
  CHECK(tree.node_count() == 127);

  // conservation: children sum to the parent's trait at division, and the
  // recovered fraction is the stored one
  const auto fractions = recover_fragmentation_fractions(tree);
  CHECK(fractions.size() == 63);
  for (const auto& [u, frac] : fractions) {
    CHECK(frac == doctest::Approx(tree.theta[tree.index(u)]).epsilon(1e-14));
    CHECK(frac >= 0.1);
    CHECK(frac <= 0.9);
  }
}

TEST_CASE("node count at the published depth") {
  // depth 19 gives 2^20 - 1 nodes; a coarse step keeps this quick
  ModelSpec spec = reflected_model(2.0, 1e-4);
  const TreeDataset tree = generate_tree(spec, 0.5, 19, 2e-2, Rng(99));
  CHECK(tree.node_count() == 1048575);
}

TEST_CASE("tree generation is deterministic") {
  ModelSpec spec = reflected_model();
  const TreeDataset a = generate_tree(spec, 0.5, 8, 1e-3, Rng(42));
  const TreeDataset b = generate_tree(spec, 0.5, 8, 1e-3, Rng(42));
  CHECK(a.trait == b.trait);
  CHECK(a.birth_time == b.birth_time);
  std::ostringstream csv_a, csv_b;  // NaN-tolerant comparison
  write_tree_csv(a, csv_a);
  write_tree_csv(b, csv_b);
  CHECK(csv_a.str() == csv_b.str());
}

TEST_CASE("fragmentation fractions: direct ratio and distribution") {
  TreeDataset toy;
  toy.depth = 1;
  toy.birth_time = {0.0, 1.0, 1.0};
  toy.trait = {1.0, 0.3, 0.7};
  toy.lifetime = {1.0, std::nan(""), std::nan("")};
  toy.theta = {0.3, std::nan(""), std::nan("")};
  const auto fr = recover_fragmentation_fractions(toy);
  REQUIRE(fr.size() == 1);
  CHECK(fr[0].second == doctest::Approx(0.3));

  // degenerate node
  toy.trait = {1.0, 0.0, 0.0};
  CHECK_THROWS_AS(recover_fragmentation_fractions(toy), DataError);

  // uniform fragmentation on a deeper tree passes a KS test
  ModelSpec spec = reflected_model(2.0, 0.1);
  const TreeDataset tree = generate_tree(spec, 0.5, 12, 5e-3, Rng(2024));
  const auto fractions = recover_fragmentation_fractions(tree);
  std::vector<double> sample;
  sample.reserve(fractions.size());
  for (const auto& [u, f] : fractions) sample.push_back(f);
  const auto uniform_cdf = [](double z) {
    return std::min(1.0, std::max(0.0, (z - 0.1) / 0.8));
  };
  CHECK(ks_statistic(sample, uniform_cdf) < ks_critical_one_sample(sample.size(), 0.01));
}

TEST_CASE("incomplete trees: full, single-lineage and intermediate regimes") {
  const ObservationScheme full = subsample_incomplete_tree(6, 1.0);
  for (int m = 0; m <= 6; ++m) CHECK(full.members[m].size() == (std::size_t{1} << m));

  const ObservationScheme lineage = subsample_incomplete_tree(10, 0.0);
  for (int m = 0; m <= 10; ++m) CHECK(lineage.members[m].size() == 1);

  const ObservationScheme half = subsample_incomplete_tree(10, 0.5);
  for (int m = 1; m <= 10; ++m) {
    const double target = std::pow(2.0, 0.5 * m);
    CHECK(half.members[m].size() >= std::size_t(target / 2.0));
    CHECK(half.members[m].size() <= std::size_t(2.0 * target) + 1);
  }

  // ancestor-closed
  for (int m = 1; m <= 10; ++m)
    for (std::uint64_t h : half.members[m]) CHECK(half.is_member(NodeId{h}.parent()));

  CHECK_THROWS_AS(subsample_incomplete_tree(5, 1.5), std::invalid_argument);
}

TEST_CASE("extract_pairs: order, count and lineage structure") {
  ModelSpec spec = reflected_model();
  const TreeDataset tree = generate_tree(spec, 0.5, 10, 5e-3, Rng(5));

  const ObservationScheme depth1 = subsample_incomplete_tree(1, 1.0);
  const auto two = extract_pairs(tree, depth1);
  REQUIRE(two.size() == 2);
  CHECK(two[0].first == tree.trait[0]);
  CHECK(two[1].first == tree.trait[0]);

  const ObservationScheme scheme = subsample_incomplete_tree(10, 0.5);
  const auto pairs = extract_pairs(tree, scheme);
  CHECK(pairs.size() == scheme.size() - 1);

  // single lineage: consecutive pairs chain together
  const ObservationScheme lineage = subsample_incomplete_tree(10, 0.0);
  const auto chain = extract_pairs(tree, lineage);
  REQUIRE(chain.size() == 10);
  for (std::size_t i = 1; i < chain.size(); ++i) CHECK(chain[i].first == chain[i - 1].second);

  const ObservationScheme deeper = subsample_incomplete_tree(12, 0.0);
  CHECK_THROWS_AS(extract_pairs(tree, deeper), DataError);
}

TEST_CASE("tagged chain: base case and symmetric-child law") {
  ModelSpec spec = reflected_model();
  Rng rng(17);
  const auto trivial = tagged_branch_chain(spec, 0.4, 0, 1e-3, rng);
  REQUIRE(trivial.size() == 1);
  CHECK(trivial[0] == 0.4);

  // symmetric kappa: forcing child 0 or child 1 gives the same law
  const int n = 30000;
  std::vector<double> child0(n), child1(n);
  Rng base(5150);
  for (int i = 0; i < n; ++i) {
    Rng r0 = base.derive(i, 0);
    const Division d = sample_lifetime(spec, 0.5, 5e-3, r0);
    const double frac = spec.frag.sample(r0);
    child0[i] = frac * d.death_trait;
    child1[i] = (1.0 - frac) * d.death_trait;
  }
  CHECK(ks_statistic_two_sample(child0, child1) < ks_critical_two_sample(n, n, 0.01));
}

TEST_CASE("tagged chain second moment settles under the drift fixed point") {
  // OU model with constant rate: QV(x) <= v1 V(x) + v2 has fixed point
  // v2 / (1 - v1)
  ModelSpec spec;
  spec.diffusion = DiffusionSpec::ornstein_uhlenbeck(1.0, 1.0);
  spec.diffusion.return_radius = 0.1;
  spec.rate = DivisionRate::constant(1.0);
  spec.frag = Fragmentation::uniform(0.1);

  const double v1 = (0.1 * 0.1 - 0.1 + 1.0) / 3.0;
  const double v2 = v1 * (2.0 * 1.0 * 0.1 * 2.0 / 1.0 + 1.0) / 1.0;
  const double fixed_point = v2 / (1.0 - v1);

  Rng rng(860);
  const auto chain = tagged_branch_chain(spec, 0.0, 4000, 1e-3, rng);
  RunningStats m2;
  for (std::size_t i = 100; i < chain.size(); ++i) m2.add(chain[i] * chain[i]);
  CHECK(m2.mean() <= fixed_point + 3.0 * m2.std_error());
}

TEST_CASE("tree CSV round-trips byte-identically") {
  ModelSpec spec = reflected_model();
  const TreeDataset tree = generate_tree(spec, 0.5, 7, 5e-3, Rng(31));

  std::ostringstream first;
  write_tree_csv(tree, first);
  std::istringstream input(first.str());
  const TreeDataset back = read_tree_csv(input);
  std::ostringstream second;
  write_tree_csv(back, second);
  CHECK(first.str() == second.str());
  CHECK(back.depth == tree.depth);
  CHECK(back.trait == tree.trait);

  std::istringstream bad("id,birth_time,trait_at_birth,lifetime,theta\nxx,0,0.5,,\n");
  CHECK_THROWS_WITH_AS(read_tree_csv(bad), "read_tree_csv: row 2: bad node id", DataError);
}
