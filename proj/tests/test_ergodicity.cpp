#include <doctest.h>

#include <cmath>

#include "bifurc/ergodicity.hpp"
#include "bifurc/quadrature.hpp"
#include "bifurc/stats.hpp"

using namespace bifurc;

namespace {

ModelSpec ou_model(double beta, double sigma, double b, double eps) {
  ModelSpec spec;
  spec.diffusion = DiffusionSpec::ornstein_uhlenbeck(beta, sigma);
  spec.rate = DivisionRate::constant(b);
  spec.frag = Fragmentation::uniform(eps);
  return spec;
}

}  // namespace

TEST_CASE("drift constants for the uniform fragmentation") {
  ModelSpec spec = ou_model(1.0, 1.0, 1.0, 0.1);
  const DriftConstants c = drift_constants(spec);
  CHECK(c.v1 == doctest::Approx((0.01 - 0.1 + 1.0) / 3.0).epsilon(1e-10));
  CHECK(c.v1 < 1.0);
  CHECK(c.v2 > 0.0);

  // near eps = 1/2 the fragmentation degenerates to a point mass at 1/2
  ModelSpec tight = ou_model(1.0, 1.0, 1.0, 0.4999);
  CHECK(drift_constants(tight).v1 == doctest::Approx(0.25).epsilon(1e-3));

  // uniform kappa is symmetric, so kappa_tilde integrates like kappa itself
  const double direct = integrate(
      [&](double z) { return z * z * spec.frag.density(z); }, 0.1, 0.9, 1e-12);
  CHECK(c.v1 == doctest::Approx(direct).epsilon(1e-10));

  ModelSpec incomplete = spec;
  incomplete.diffusion.return_radius = 0.0;  // undeclared bound
  CHECK_THROWS_AS(drift_constants(incomplete), ConfigError);
}

TEST_CASE("Monte Carlo drift check on the OU model") {
  ModelSpec spec = ou_model(1.0, 1.0, 1.0, 0.1);
  const DriftReport report =
      verify_drift_mc(spec, linspace(-3.0, 3.0, 7), 3000, 1e-3, Rng(5150));
  REQUIRE(report.probes.size() == 7);
  CHECK_FALSE(report.any_violation());
  for (const auto& p : report.probes) {
    CHECK(p.bound == doctest::Approx(report.constants.v1 * p.x * p.x + report.constants.v2));
    CHECK(p.std_error > 0.0);
  }
  CHECK(report.to_json().find("violation") != std::string::npos);
  CHECK_THROWS_AS(verify_drift_mc(spec, {0.0}, 10, 1e-3, Rng(1)), std::invalid_argument);
}

TEST_CASE("frozen traits give the exact one-step second moment") {
  // sigma = r = 0 and constant B: QV(x) = m(kappa) x^2 exactly
  ModelSpec spec;
  spec.diffusion = DiffusionSpec::frozen();
  spec.rate = DivisionRate::constant(1.0);
  spec.frag = Fragmentation::uniform(0.1);
  const double m_kappa = (0.01 - 0.1 + 1.0) / 3.0;

  for (double x : {0.5, 2.0}) {
    RunningStats stats;
    Rng rng(42);
    for (int i = 0; i < 20000; ++i) {
      const double y = tagged_step(spec, x, 1e-2, rng);
      stats.add(y * y);
    }
    CHECK(std::abs(stats.mean() - m_kappa * x * x) < 3.0 * stats.std_error());
  }
}

TEST_CASE("minorisation mass: limits, monotonicity, witness") {
  // b -> 0 limit is erf(w / sqrt 2)
  CHECK(ou_minorisation_lambda(1.0, 1.0, 1e-12, 0.1, 3.0) ==
        doctest::Approx(std::erf(3.0 / std::sqrt(2.0))).epsilon(1e-9));
  CHECK(std::erf(3.0 / std::sqrt(2.0)) == doctest::Approx(0.9973).epsilon(1e-4));

  const double l1 = ou_minorisation_lambda(1.0, 1.0, 0.05, 0.1, 1.0);
  const double l2 = ou_minorisation_lambda(1.0, 1.0, 0.05, 0.1, 2.0);
  const double l3 = ou_minorisation_lambda(1.0, 1.0, 0.05, 0.1, 3.0);
  CHECK(l1 < l2);
  CHECK(l2 < l3);
  CHECK(l3 > 0.5);

  CHECK_THROWS_AS(ou_minorisation_lambda(1.0, 1.0, -0.1, 0.1, 3.0), std::invalid_argument);
}

TEST_CASE("rho bound arithmetic") {
  // lambda = 0.9, lambda0 = 0.3: the contraction branch is 1 - 0.6 = 0.4
  const RhoBound rb = ou_rho_bound(0.9, 0.3, 1.0, 100.0, 0.3, 0.5);
  CHECK(rb.contraction_branch == doctest::Approx(0.4));
  CHECK(rb.rho == doctest::Approx(std::max(rb.contraction_branch, rb.small_set_branch)));

  // as w grows, the small-set branch approaches eta + (1 - eta) v1
  const RhoBound far = ou_rho_bound(0.9, 0.3, 1.0, 1e8, 0.3, 0.25);
  CHECK(far.small_set_branch == doctest::Approx(0.25 + 0.75 * 0.3).epsilon(1e-4));

  CHECK_THROWS_AS(ou_rho_bound(0.9, 0.3, 1.0, 2.0, 0.3, 0.5), std::invalid_argument);  // small w
  CHECK_THROWS_AS(ou_rho_bound(0.9, 0.3, 1.0, 100.0, 0.95, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(ou_rho_bound(1.2, 0.3, 1.0, 100.0, 0.3, 0.5), std::invalid_argument);
}

TEST_CASE("certificate search finds rho below one half for small b") {
  ModelSpec spec = ou_model(1.0, 1.0, 0.05, 0.1);
  const DriftConstants drift = drift_constants(spec);
  CHECK(drift.v1 <= 1.0 / 3.0 + 1e-12);
  const ErgodicityCertificate cert = certificate_search(1.0, 1.0, 0.05, 0.1, drift);
  CHECK(cert.lambda > 0.5);
  CHECK(cert.bound.rho < 0.5);
  CHECK(cert.bound.below_half);
  CHECK(cert.to_json().find("rho") != std::string::npos);
}

TEST_CASE("empirical invariant samples") {
  ModelSpec spec = ou_model(1.0, 1.0, 1.0, 0.1);
  Rng r1(101), r2(202);
  const auto a = empirical_invariant(spec, 0.0, 50, 4000, 2e-3, r1);
  const auto b = empirical_invariant(spec, 0.0, 50, 4000, 2e-3, r2);
  REQUIRE(a.size() == 4000);
  REQUIRE(b.size() == 4000);
  CHECK(ks_statistic_two_sample(a, b) < ks_critical_two_sample(a.size(), b.size(), 0.01));

  const DriftConstants c = drift_constants(spec);
  RunningStats m2;
  for (double x : a) m2.add(x * x);
  CHECK(m2.mean() <= c.v2 / (1.0 - c.v1) + 3.0 * m2.std_error());
}

TEST_CASE("tagged-chain decay stays under the certificate rate") {
  ModelSpec spec = ou_model(1.0, 1.0, 0.05, 0.1);
  const DriftConstants drift = drift_constants(spec);
  const ErgodicityCertificate cert = certificate_search(1.0, 1.0, 0.05, 0.1, drift);
  const auto test_fn = [](double x) { return std::min(x * x, 4.0); };

  // stationary reference from one long chain
  Rng chain_rng(33);
  const auto stat = empirical_invariant(spec, 0.0, 100, 3000, 2e-3, chain_rng);
  RunningStats stat_mean;
  for (double x : stat) stat_mean.add(test_fn(x));

  // replicated short chains from a displaced start
  const int reps = 3000;
  const double x0 = 3.0;
  std::vector<RunningStats> at_m(9);
  Rng base(77);
  for (int r = 0; r < reps; ++r) {
    Rng rng = base.derive(r);
    const auto chain = tagged_branch_chain(spec, x0, 8, 2e-3, rng);
    for (int m = 2; m <= 8; m *= 2) at_m[m].add(test_fn(chain[m]));
  }
  const auto distance = [&](int m) { return std::abs(at_m[m].mean() - stat_mean.mean()); };
  const auto noise = [&](int m) {
    return 3.0 * (at_m[m].std_error() + stat_mean.std_error());
  };
  const double rho2 = cert.bound.rho * cert.bound.rho;
  CHECK(distance(4) <= rho2 * distance(2) + noise(4) + rho2 * noise(2));
  CHECK(distance(8) <= rho2 * distance(4) + noise(8) + rho2 * noise(4));
}
