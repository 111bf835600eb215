#include "bifurc/transition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bifurc/format.hpp"
#include "bifurc/quadrature.hpp"
#include "bifurc/stats.hpp"

namespace bifurc {

namespace {

constexpr double kDiscountCut = 18.420680743952367;  // -ln(1e-8)

const char* provenance_name(TransitionGrid::Provenance p) {
  switch (p) {
    case TransitionGrid::Provenance::MonteCarlo: return "mc";
    case TransitionGrid::Provenance::Spectral: return "spectral";
    case TransitionGrid::Provenance::Nonparam: return "nonparam";
  }
  return "mc";
}

TransitionGrid::Provenance provenance_from(const std::string& s) {
  if (s == "spectral") return TransitionGrid::Provenance::Spectral;
  if (s == "nonparam") return TransitionGrid::Provenance::Nonparam;
  return TransitionGrid::Provenance::MonteCarlo;
}

}  // namespace

void write_grid_csv(const TransitionGrid& grid, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("write_grid_csv: cannot open " + path);
  os << "x\\y";
  for (double y : grid.ys) os << ',' << format_double(y);
  os << '\n';
  for (std::size_t i = 0; i < grid.xs.size(); ++i) {
    os << format_double(grid.xs[i]);
    for (std::size_t j = 0; j < grid.ys.size(); ++j) os << ',' << format_double(grid.at(i, j));
    os << '\n';
  }
  nlohmann::json side;
  side["provenance"] = provenance_name(grid.provenance);
  side["params"] = grid.params;
  side["nx"] = grid.xs.size();
  side["ny"] = grid.ys.size();
  std::ofstream js(path + ".json", std::ios::binary);
  if (!js) throw DataError("write_grid_csv: cannot open " + path + ".json");
  js << side.dump(2) << '\n';
}

TransitionGrid read_grid_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("read_grid_csv: cannot open " + path);
  TransitionGrid grid;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (lineno == 1) {
      for (std::size_t j = 1; j < cells.size(); ++j) {
        const auto v = parse_double(cells[j]);
        if (!v) throw DataError("read_grid_csv: row 1: bad y value");
        grid.ys.push_back(*v);
      }
      continue;
    }
    if (cells.size() != grid.ys.size() + 1)
      throw DataError("read_grid_csv: row " + std::to_string(lineno) + ": wrong field count");
    const auto x = parse_double(cells[0]);
    if (!x) throw DataError("read_grid_csv: row " + std::to_string(lineno) + ": bad x value");
    grid.xs.push_back(*x);
    for (std::size_t j = 1; j < cells.size(); ++j) {
      const auto v = parse_double(cells[j]);
      if (!v) throw DataError("read_grid_csv: row " + std::to_string(lineno) + ": bad value");
      grid.values.push_back(*v);
    }
  }
  std::ifstream js(path + ".json", std::ios::binary);
  if (js) {
    nlohmann::json side = nlohmann::json::parse(js, nullptr, false);
    if (!side.is_discarded()) {
      grid.provenance = provenance_from(side.value("provenance", "mc"));
      if (side.contains("params"))
        for (auto& [k, v] : side["params"].items()) grid.params[k] = v.get<double>();
    }
  }
  return grid;
}

void mc_discounted_local_time(const ModelSpec& spec, double x, const std::vector<double>& levels,
                              std::size_t paths, double dt, double band, const Rng& rng,
                              const std::function<void(const std::vector<double>&)>& sink) {
  if (paths == 0) throw std::invalid_argument("mc_discounted_local_time: need paths >= 1");
  if (dt <= 0.0 || band <= 0.0)
    throw std::invalid_argument("mc_discounted_local_time: need dt, band > 0");
  if (!std::is_sorted(levels.begin(), levels.end()))
    throw std::invalid_argument("mc_discounted_local_time: levels must be sorted");

  const bool reflected = spec.diffusion.reflected();
  const double L = spec.diffusion.length;
  const double sq = std::sqrt(dt);
  const double half = 0.5 * band;
  const std::size_t step_cap = 1u << 30;

  // Per-level band overlap with the domain (boundary renormalization).
  std::vector<double> inv_band(levels.size(), 1.0 / band);
  if (reflected) {
    for (std::size_t j = 0; j < levels.size(); ++j) {
      const double eff =
          std::min(levels[j] + half, L) - std::max(levels[j] - half, 0.0);
      if (eff > 0.0) inv_band[j] = 1.0 / eff;
    }
  }

  // Fast path for constant coefficients and a constant division rate: no
  // indirect coefficient calls and a multiplicative discount update.
  if (spec.diffusion.constant_coefficients && spec.diffusion.volatility_constant() &&
      spec.rate.is_constant() && reflected) {
    const double r = spec.diffusion.drift_value;
    const double s = spec.diffusion.sigma_min;
    const double w0 = s * s * dt;
    const double decay = std::exp(-spec.rate.lower * dt);
    const std::size_t max_steps =
        static_cast<std::size_t>(kDiscountCut / (spec.rate.lower * dt)) + 1;
    const double* lev = levels.data();
    const std::size_t nl = levels.size();
    std::vector<double> acc(nl);
    for (std::size_t p = 0; p < paths; ++p) {
      Rng path_rng = rng.derive(p + 1);
      std::fill(acc.begin(), acc.end(), 0.0);
      double cur = x;
      double disc = 1.0;
      for (std::size_t k = 0; k < max_steps; ++k) {
        std::size_t j = static_cast<std::size_t>(
            std::lower_bound(lev, lev + nl, cur - half) - lev);
        const double w = disc * w0;
        const double hi = cur + half;
        for (; j < nl && lev[j] <= hi; ++j) acc[j] += w * inv_band[j];
        disc *= decay;
        double next = cur + r * dt + s * sq * path_rng.normal();
        if (next < 0.0) next = -next;
        if (next > L) next = 2.0 * L - next;
        if (next < 0.0 || next > L) next = std::min(std::max(next, 0.0), L);
        cur = next;
      }
      sink(acc);
    }
    return;
  }

  std::vector<double> acc(levels.size());
  for (std::size_t p = 0; p < paths; ++p) {
    Rng path_rng = rng.derive(p + 1);
    std::fill(acc.begin(), acc.end(), 0.0);
    double cur = x;
    double hazard_int = 0.0;
    for (std::size_t k = 0; k < step_cap && hazard_int < kDiscountCut; ++k) {
      const double disc = std::exp(-hazard_int);
      const auto lo = std::lower_bound(levels.begin(), levels.end(), cur - half);
      const double s = spec.diffusion.volatility(cur);
      const double w = disc * s * s * dt;
      for (auto it = lo; it != levels.end() && *it <= cur + half; ++it) {
        const auto j = static_cast<std::size_t>(it - levels.begin());
        acc[j] += w * inv_band[j];
      }

      hazard_int += spec.rate.rate(cur) * dt;
      const double r = spec.diffusion.drift(cur);
      if (!std::isfinite(r) || !std::isfinite(s))
        throw NumericError("mc_discounted_local_time: non-finite coefficient");
      double next = cur + r * dt + s * sq * path_rng.normal();
      if (reflected) {
        if (next < 0.0) next = -next;
        if (next > L) next = 2.0 * L - next;
        next = std::min(std::max(next, 0.0), L);
      }
      if (!std::isfinite(next)) throw NumericError("mc_discounted_local_time: path diverged");
      cur = next;
    }
    sink(acc);
  }
}

namespace {

struct ZQuadrature {
  std::vector<double> levels;      // sorted y/z values
  std::vector<double> prefactors;  // matching quadrature weight * integrand prefactor
};

/// Nodes, levels and prefactors of the fragmentation integral for one (y).
/// Returns an empty rule when y is outside the support.
ZQuadrature make_z_rule(const ModelSpec& spec, double y) {
  ZQuadrature rule;
  const double eps = spec.frag.eps;
  double z_lo = eps, z_hi = 1.0 - eps;
  if (spec.diffusion.reflected()) {
    const double L = spec.diffusion.length;
    if (y < 0.0 || y > (1.0 - eps) * L) return rule;
    z_lo = std::max(z_lo, y / L);
  }
  if (!(z_lo < z_hi)) return rule;

  const GaussLegendre& gl = gauss_legendre_32();
  const double c = 0.5 * (z_lo + z_hi), h = 0.5 * (z_hi - z_lo);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(gl.nodes.size());
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double z = c + h * gl.nodes[i];
    const double level = y / z;
    const double sig = spec.diffusion.volatility(level);
    const double pref =
        gl.weights[i] * h * spec.frag.kappa_tilde(z) / z * spec.rate.rate(level) / (sig * sig);
    pts.emplace_back(level, pref);
  }
  std::sort(pts.begin(), pts.end());
  for (auto& [level, pref] : pts) {
    rule.levels.push_back(level);
    rule.prefactors.push_back(pref);
  }
  return rule;
}

}  // namespace

McDensity mc_transition_density(const ModelSpec& spec, double x, double y, std::size_t paths,
                                double dt, const Rng& rng) {
  if (paths == 0) throw std::invalid_argument("mc_transition_density: need paths >= 1");
  const ZQuadrature rule = make_z_rule(spec, y);
  if (rule.levels.empty()) return {0.0, 0.0};

  RunningStats stats;
  const double band = default_local_time_band(spec.diffusion, dt);
  mc_discounted_local_time(spec, x, rule.levels, paths, dt, band, rng,
                           [&](const std::vector<double>& acc) {
                             double v = 0.0;
                             for (std::size_t j = 0; j < acc.size(); ++j)
                               v += rule.prefactors[j] * acc[j];
                             stats.add(v);
                           });
  return {stats.mean(), stats.std_error()};
}

std::vector<McDensity> mc_q_profile(const ModelSpec& spec, double x, const std::vector<double>& ys,
                                    std::size_t paths, double dt, const Rng& rng) {
  if (paths == 0) throw std::invalid_argument("mc_q_profile: need paths >= 1");

  // Merge the per-y rules into one sorted level set so one path sweep serves
  // every target density value.
  struct Ref {
    double level;
    std::size_t y_index;
    double prefactor;
  };
  std::vector<Ref> refs;
  for (std::size_t t = 0; t < ys.size(); ++t) {
    const ZQuadrature rule = make_z_rule(spec, ys[t]);
    for (std::size_t j = 0; j < rule.levels.size(); ++j)
      refs.push_back({rule.levels[j], t, rule.prefactors[j]});
  }
  std::sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) { return a.level < b.level; });
  std::vector<double> levels;
  levels.reserve(refs.size());
  for (const auto& r : refs) levels.push_back(r.level);

  std::vector<RunningStats> stats(ys.size());
  std::vector<double> per_y(ys.size());
  const double band = default_local_time_band(spec.diffusion, dt);
  if (!levels.empty()) {
    mc_discounted_local_time(spec, x, levels, paths, dt, band, rng,
                             [&](const std::vector<double>& acc) {
                               std::fill(per_y.begin(), per_y.end(), 0.0);
                               for (std::size_t j = 0; j < acc.size(); ++j)
                                 per_y[refs[j].y_index] += refs[j].prefactor * acc[j];
                               for (std::size_t t = 0; t < per_y.size(); ++t)
                                 stats[t].add(per_y[t]);
                             });
  }
  std::vector<McDensity> out(ys.size());
  for (std::size_t t = 0; t < ys.size(); ++t) {
    if (stats[t].count() > 0) out[t] = {stats[t].mean(), stats[t].std_error()};
  }
  return out;
}

McDensity mc_full_transition(const ModelSpec& spec, double x, double y1, double y2,
                             std::size_t paths, double dt, const Rng& rng) {
  if (paths == 0) throw std::invalid_argument("mc_full_transition: need paths >= 1");
  const double eps = spec.frag.eps;
  if (spec.diffusion.reflected()) {
    if (!check_support_domain(eps, spec.diffusion.length, y1, y2)) return {0.0, 0.0};
  } else {
    if (!(y1 > 0.0) || y2 < y1 * eps / (1.0 - eps) || y2 > y1 * (1.0 - eps) / eps)
      return {0.0, 0.0};
  }
  const double s = y1 + y2;
  const double sig = spec.diffusion.volatility(s);
  const double pref = spec.frag.density(y1 / s) / s * spec.rate.rate(s) / (sig * sig);

  RunningStats stats;
  const double band = default_local_time_band(spec.diffusion, dt);
  mc_discounted_local_time(spec, x, {s}, paths, dt, band, rng,
                           [&](const std::vector<double>& acc) { stats.add(pref * acc[0]); });
  return {stats.mean(), stats.std_error()};
}

bool check_support_domain(double eps, double L, double y1, double y2) {
  if (!(eps > 0.0 && eps < 0.5) || L <= 0.0)
    throw std::invalid_argument("check_support_domain: bad eps or L");
  if (!(y1 > 0.0) || y2 < 0.0) return false;
  if (y2 < y1 * eps / (1.0 - eps)) return false;
  if (y2 > y1 * (1.0 - eps) / eps) return false;
  return y1 + y2 <= L;
}

double ou_q_oracle(double beta, double sigma, double b, double eps, double x, double y) {
  if (beta <= 0.0 || sigma <= 0.0 || b <= 0.0)
    throw std::invalid_argument("ou_q_oracle: need beta, sigma, b > 0");
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("ou_q_oracle: eps outside (0, 1/2)");

  const double t_max = std::log(1e10) / b;
  const double u_max = std::sqrt(t_max);

  // Resolvent of the OU density in the time variable, with t = u^2 so the
  // sqrt(t) short-time singularity at y/z == x integrates smoothly.
  const auto resolvent = [&](double level) {
    const auto f = [&](double u) {
      const double t = u * u;
      if (t == 0.0) {
        return level == x ? 2.0 / (sigma * std::sqrt(2.0 * M_PI)) : 0.0;
      }
      return 2.0 * u * std::exp(-b * t) * ou_transition_density(beta, sigma, x, level, t);
    };
    return integrate(f, 0.0, u_max, 1e-9, 1e-13);
  };

  // The outer floor sits above the resolvent's own accuracy so the adaptive
  // refinement does not chase quadrature noise.
  const auto outer = [&](double z) { return resolvent(y / z) / z; };
  const double integral = integrate(outer, eps, 1.0 - eps, 1e-6, 1e-8);
  return b / (1.0 - 2.0 * eps) * integral;
}

}  // namespace bifurc
