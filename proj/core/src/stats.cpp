#include "bifurc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bifurc {

double RunningStats::stddev() const { return std::sqrt(variance()); }

double RunningStats::std_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw std::invalid_argument("linspace: need n >= 2");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double sample_stddev(const std::vector<double>& xs) { return std::sqrt(sample_variance(xs)); }

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks two-sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

namespace {
// c(alpha) = sqrt(-ln(alpha/2)/2), the asymptotic Kolmogorov quantile.
double ks_c(double alpha) { return std::sqrt(-0.5 * std::log(alpha / 2.0)); }
}  // namespace

double ks_critical_one_sample(std::size_t n, double alpha) {
  return ks_c(alpha) / std::sqrt(static_cast<double>(n));
}

double ks_critical_two_sample(std::size_t n, std::size_t m, double alpha) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return ks_c(alpha) * std::sqrt((nn + mm) / (nn * mm));
}

double histogram_l1_distance(const std::vector<double>& sample, double lo, double hi, int bins,
                             const std::function<double(double)>& density) {
  if (sample.empty() || bins < 1 || !(hi > lo))
    throw std::invalid_argument("histogram_l1_distance: bad arguments");
  std::vector<double> counts(bins, 0.0);
  const double w = (hi - lo) / bins;
  double inside = 0.0;
  for (double x : sample) {
    if (x < lo || x > hi) continue;
    int k = static_cast<int>((x - lo) / w);
    if (k == bins) k = bins - 1;
    counts[k] += 1.0;
    inside += 1.0;
  }
  if (inside == 0.0) throw std::invalid_argument("histogram_l1_distance: no mass in range");
  double l1 = 0.0;
  for (int k = 0; k < bins; ++k) {
    const double emp = counts[k] / (inside * w);
    const double mid = lo + (k + 0.5) * w;
    l1 += std::abs(emp - density(mid)) * w;
  }
  return l1;
}

}  // namespace bifurc
