#include <doctest.h>

#include <cmath>

#include "bifurc/quadrature.hpp"
#include "bifurc/rng.hpp"
#include "bifurc/stats.hpp"

using namespace bifurc;

TEST_CASE("adaptive Simpson hits smooth integrals") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(integrate([](double x) { return std::exp(-x * x); }, -8.0, 8.0, 1e-11) ==
        doctest::Approx(std::sqrt(M_PI)).epsilon(1e-9));
  CHECK(integrate([](double x) { return x * x * x; }, -1.0, 1.0) == doctest::Approx(0.0));
  CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
  const GaussLegendre& gl = gauss_legendre_32();
  double s = 0.0;
  for (double w : gl.weights) s += w;
  CHECK(s == doctest::Approx(2.0).epsilon(1e-13));
  // degree-15 polynomial, well inside the exactness range of 32 nodes
  const auto f = [](double x) { return std::pow(x, 15) + 3.0 * std::pow(x, 8) + x; };
  CHECK(gl.apply(f, -1.0, 1.0) == doctest::Approx(2.0 * 3.0 / 9.0).epsilon(1e-12));
  CHECK(gl.apply([](double x) { return x * x; }, 0.0, 2.0) ==
        doctest::Approx(8.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("rng streams are deterministic and derivable") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(42);
  Rng d1 = c.derive(7), d2 = c.derive(7), d3 = c.derive(8);
  CHECK(d1.next_u64() == d2.next_u64());
  CHECK(d1.next_u64() != d3.next_u64());

  // derivation depends on the construction seed, not on consumption
  Rng e(42);
  e.normal();
  e.normal();
  CHECK(e.derive(7).next_u64() == Rng(42).derive(7).next_u64());
}

TEST_CASE("normal draws have the right first moments") {
  Rng rng(2024);
  RunningStats stats;
  for (int i = 0; i < 200000; ++i) stats.add(rng.normal());
  CHECK(std::abs(stats.mean()) < 4.0 * stats.std_error());
  CHECK(stats.variance() == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("exponential draws match their rate") {
  Rng rng(7);
  RunningStats stats;
  for (int i = 0; i < 100000; ++i) stats.add(rng.exponential(2.5));
  CHECK(stats.mean() == doctest::Approx(1.0 / 2.5).epsilon(0.02));
}

TEST_CASE("KS statistic behaves on uniform samples") {
  Rng rng(999);
  std::vector<double> sample(2000);
  for (auto& x : sample) x = rng.uniform();
  const double d = ks_statistic(sample, [](double x) { return std::min(std::max(x, 0.0), 1.0); });
  CHECK(d < ks_critical_one_sample(sample.size(), 0.01));

  std::vector<double> shifted(2000);
  for (auto& x : shifted) x = 0.5 * rng.uniform();
  CHECK(ks_statistic_two_sample(sample, shifted) >
        ks_critical_two_sample(sample.size(), shifted.size(), 0.01));
}

TEST_CASE("linspace endpoints and spacing") {
  const auto g = linspace(0.0, 1.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[2] == doctest::Approx(0.5));
}
