#include <doctest.h>

#include <cmath>

#include "bifurc/interpolate.hpp"
#include "bifurc/kernels.hpp"
#include "bifurc/quadrature.hpp"
#include "bifurc/spectral.hpp"
#include "bifurc/stats.hpp"

using namespace bifurc;

namespace {

ModelSpec reflected_model(double r1, double b, double eps) {
  ModelSpec spec;
  spec.diffusion = DiffusionSpec::reflected_constant_drift(r1, 1.0, 1.0);
  spec.rate = DivisionRate::constant(b);
  spec.frag = Fragmentation::uniform(eps);
  return spec;
}

}  // namespace

TEST_CASE("kernel construction and moments") {
  const KernelSpec gauss = make_kernel(KernelKind::Gaussian, 1);
  CHECK(gauss.order == 1);
  CHECK(gauss.non_compact_flagged);
  CHECK(gauss.moments[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(gauss.moments[1]) < 1e-10);
  CHECK_THROWS_AS(make_kernel(KernelKind::Gaussian, 2), std::invalid_argument);

  const KernelSpec poly = make_kernel(KernelKind::Polynomial, 3);
  CHECK_FALSE(poly.non_compact_flagged);
  REQUIRE(poly.moments.size() == 4);
  CHECK(poly.moments[0] == doctest::Approx(1.0).epsilon(1e-8));
  for (int l = 1; l <= 3; ++l) CHECK(std::abs(poly.moments[l]) < 1e-8);
  CHECK(poly.fn(1.2) == 0.0);
  CHECK(poly.fn(-1.01) == 0.0);
  // moments recomputed independently
  for (int l = 0; l <= 3; ++l) {
    const double m = integrate([&](double u) { return std::pow(u, l) * poly.fn(u); }, -1.0, 1.0,
                               1e-12);
    CHECK(m == doctest::Approx(l == 0 ? 1.0 : 0.0).epsilon(1e-8));
  }
}

TEST_CASE("density estimator basics") {
  const KernelSpec gauss = make_kernel(KernelKind::Gaussian, 1);
  const double h = 0.2;
  // a single observation evaluated at itself
  const double at_self = estimate_nu_at({0.7}, 0.7, h, gauss);
  CHECK(at_self == doctest::Approx(1.0 / (std::sqrt(2.0 * M_PI) * h)));

  CHECK_THROWS_AS(estimate_nu({}, {0.0, 1.0}, h, gauss), DataError);
  CHECK_THROWS_AS(estimate_nu({0.5}, {0.0, 1.0}, 0.0, gauss), std::invalid_argument);

  // mass on a covering grid
  Rng rng(9);
  std::vector<double> sample(5000);
  for (auto& x : sample) x = 0.5 + 0.1 * rng.normal();
  const auto grid = linspace(-0.5, 1.5, 801);
  const DensityEstimate est = estimate_nu(sample, grid, 0.05, gauss);
  double mass = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = (i == 0 || i + 1 == grid.size()) ? 0.5 : 1.0;
    mass += w * est.values[i];
  }
  mass *= grid[1] - grid[0];
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("estimator is linear in the data") {
  const KernelSpec gauss = make_kernel(KernelKind::Gaussian, 1);
  Rng rng(11);
  std::vector<double> a(300), b(700);
  for (auto& x : a) x = rng.uniform();
  for (auto& x : b) x = rng.uniform();
  std::vector<double> both = a;
  both.insert(both.end(), b.begin(), b.end());

  const auto grid = linspace(0.0, 1.0, 21);
  const DensityEstimate ea = estimate_nu(a, grid, 0.1, gauss);
  const DensityEstimate eb = estimate_nu(b, grid, 0.1, gauss);
  const DensityEstimate eboth = estimate_nu(both, grid, 0.1, gauss);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double mix = (300.0 * ea.values[i] + 700.0 * eb.values[i]) / 1000.0;
    CHECK(eboth.values[i] == doctest::Approx(mix).epsilon(1e-12));
  }
}

TEST_CASE("invariant density estimate matches a long tagged chain") {
  ModelSpec spec = reflected_model(0.0, 2.0, 0.1);
  const TreeDataset tree = generate_tree(spec, 0.5, 14, 1e-3, Rng(321));
  const ObservationScheme full = subsample_incomplete_tree(14, 1.0);
  std::vector<double> samples;
  samples.reserve(full.size());
  for (const auto& layer : full.members)
    for (std::uint64_t h : layer) samples.push_back(tree.trait[h - 1]);

  const Bandwidths bw = bandwidth_rule(samples.size(), 1.0, 1.0, BandwidthMode::Theoretical);
  const KernelSpec gauss = make_kernel(KernelKind::Gaussian, 1);
  const int bins = 25;
  const auto centers = linspace(0.5 / bins, 1.0 - 0.5 / bins, bins);
  const DensityEstimate est = estimate_nu(samples, centers, bw.h, gauss);

  Rng chain_rng(17);
  const auto chain = tagged_branch_chain(spec, 0.5, 100000, 1e-3, chain_rng);
  std::vector<double> counts(bins, 0.0);
  std::size_t used = 0;
  for (std::size_t i = 200; i < chain.size(); ++i) {
    const int k = std::min(bins - 1, static_cast<int>(chain[i] * bins));
    counts[k] += 1.0;
    ++used;
  }
  double l1 = 0.0;
  for (int k = 0; k < bins; ++k)
    l1 += std::abs(est.values[k] - counts[k] * bins / double(used)) / bins;
  CHECK(l1 < 0.1);
}

TEST_CASE("quotient transition estimator against the exact kernel") {
  ModelSpec spec = reflected_model(-0.5, 2.0, 0.1);
  const TreeDataset tree = generate_tree(spec, 0.5, 14, 1e-3, Rng(777));
  const ObservationScheme full = subsample_incomplete_tree(14, 1.0);
  const auto pairs = extract_pairs(tree, full);

  const Bandwidths bw = bandwidth_rule(tree.node_count(), 1.0, 1.0, BandwidthMode::Practical);
  const KernelSpec gauss = make_kernel(KernelKind::Gaussian, 1);
  const auto xs = linspace(0.0, 1.0, 200);
  const auto ys = linspace(0.0, 1.0, 200);
  const TransitionEstimate est = estimate_q(pairs, xs, ys, bw.h1, bw.h2, bw.h, 1e-6, gauss);

  SpectralParams params;
  params.r1 = -0.5;
  params.sigma0 = 1.0;
  params.length = 1.0;
  params.eps = 0.1;
  const SpectralQEvaluator exact(params, ys);

  // interior of the support, away from the smoothing boundary layers
  double mae = 0.0, qlo = 1e300, qhi = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < 0.1 || xs[i] > 0.55) continue;
    for (std::size_t j = 0; j < ys.size(); ++j) {
      if (ys[j] < 0.05 || ys[j] > 0.8) continue;
      const double exact_q = exact.at(2.0, xs[i], j).q;
      mae += std::abs(est.at(i, j) - exact_q);
      qlo = std::min(qlo, exact_q);
      qhi = std::max(qhi, exact_q);
      ++n;
    }
  }
  mae /= double(n);
  CHECK(mae <= 0.15 * (qhi - qlo));

  // row sums of the smoothed estimate stay near one in the data-rich band
  for (double x : {0.15, 0.3, 0.45}) {
    const std::size_t i = std::llround(x * 199.0);
    double row = 0.0;
    for (std::size_t j = 0; j < ys.size(); ++j) row += est.at(i, j);
    row /= 199.0;
    CHECK(row >= 0.8);
    CHECK(row <= 1.2);
  }
}

TEST_CASE("denominator clamping is observable") {
  const KernelSpec gauss = make_kernel(KernelKind::Gaussian, 1);
  const std::vector<std::pair<double, double>> pairs = {{0.5, 0.5}, {0.52, 0.48}};
  const auto xs = linspace(0.0, 1.0, 11);
  const auto ys = linspace(0.0, 1.0, 11);
  const TransitionEstimate est = estimate_q(pairs, xs, ys, 0.05, 0.05, 0.05, 1e-6, gauss);
  // far from the data the denominator is below varpi
  CHECK(est.clamped[0] == 1);
  CHECK(est.clamped[5] == 0);
  CHECK_THROWS_AS(estimate_q({}, xs, ys, 0.1, 0.1, 0.1, 1e-6, gauss), DataError);
}

TEST_CASE("bandwidth rules") {
  const Bandwidths t = bandwidth_rule(1000, 1.0, 1.0, BandwidthMode::Theoretical);
  CHECK(t.h == doctest::Approx(0.1).epsilon(1e-12));
  // alpha = beta = 1: s = 1/2 and both exponents collapse to n^{-1/4}
  CHECK(t.h1 == doctest::Approx(std::pow(1000.0, -0.25)).epsilon(1e-12));
  CHECK(t.h2 == doctest::Approx(std::pow(1000.0, -0.25)).epsilon(1e-12));

  const Bandwidths p = bandwidth_rule(32767, 1.0, 1.0, BandwidthMode::Practical);
  CHECK(p.h == doctest::Approx(2.0 * std::pow(32767.0, -1.0 / 3.0)).epsilon(1e-12));
  CHECK(p.h == doctest::Approx(0.0625).epsilon(1e-4));
  CHECK(p.h1 == doctest::Approx(0.1 * std::sqrt(p.h)).epsilon(1e-12));
  CHECK(p.h1 == doctest::Approx(0.025).epsilon(1e-3));

  CHECK_THROWS_AS(bandwidth_rule(1000, -1.0, 1.0, BandwidthMode::Theoretical),
                  std::invalid_argument);
  CHECK_THROWS_AS(bandwidth_rule(0, 1.0, 1.0, BandwidthMode::Practical), std::invalid_argument);
}

TEST_CASE("bicubic interpolation contract") {
  // exact at nodes
  TransitionGrid grid;
  grid.xs = linspace(0.0, 1.0, 9);
  grid.ys = linspace(0.0, 2.0, 11);
  grid.values.resize(grid.xs.size() * grid.ys.size());
  Rng rng(3);
  for (auto& v : grid.values) v = rng.uniform();
  const CubicGridInterpolator interp(grid);
  for (std::size_t i : {0ul, 3ul, 8ul})
    for (std::size_t j : {0ul, 5ul, 10ul})
      CHECK(interp(grid.xs[i], grid.ys[j]) == doctest::Approx(grid.at(i, j)).epsilon(1e-13));

  // affine surfaces are reproduced exactly
  TransitionGrid plane = grid;
  for (std::size_t i = 0; i < plane.xs.size(); ++i)
    for (std::size_t j = 0; j < plane.ys.size(); ++j)
      plane.at(i, j) = 2.0 * plane.xs[i] + 3.0 * plane.ys[j];
  const CubicGridInterpolator flat(plane);
  for (double x : {0.17, 0.6, 0.93}) {
    for (double y : {0.21, 1.0, 1.87}) {
      CHECK(flat(x, y) == doctest::Approx(2.0 * x + 3.0 * y).epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS(flat(-0.1, 1.0), std::domain_error);
  CHECK_THROWS_AS(flat(0.5, 2.5), std::domain_error);
  CHECK(interpolate_grid(plane, 0.25, 0.5) == doctest::Approx(2.0 * 0.25 + 3.0 * 0.5));
}

TEST_CASE("variance of the density estimator scales like 1/(n h)") {
  ModelSpec spec = reflected_model(0.0, 2.0, 0.1);
  const KernelSpec gauss = make_kernel(KernelKind::Gaussian, 1);
  const double x0 = 0.3;
  const int reps = 50;

  std::vector<double> scaled;
  for (int depth : {8, 10, 12}) {
    std::vector<double> values(reps);
    const ObservationScheme full = subsample_incomplete_tree(depth, 1.0);
    for (int r = 0; r < reps; ++r) {
      const TreeDataset tree = generate_tree(spec, 0.5, depth, 2e-3, Rng(9000 + 131 * r + depth));
      std::vector<double> samples;
      samples.reserve(full.size());
      for (const auto& layer : full.members)
        for (std::uint64_t h : layer) samples.push_back(tree.trait[h - 1]);
      const double n = double(samples.size());
      const double h = std::pow(n, -1.0 / 3.0);
      values[r] = estimate_nu_at(samples, x0, h, gauss);
    }
    const double n = double((std::size_t{2} << depth) - 1);
    scaled.push_back(sample_variance(values) * n * std::pow(n, -1.0 / 3.0));
  }
  CHECK(scaled[1] / scaled[0] < 2.5);
  CHECK(scaled[0] / scaled[1] < 2.5);
  CHECK(scaled[2] / scaled[1] < 2.5);
  CHECK(scaled[1] / scaled[2] < 2.5);
}
