#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace bifurc {

/// Welford accumulator.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stddev() const;
  double std_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// n evenly spaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int n);

double mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);
double sample_stddev(const std::vector<double>& xs);

/// One-sample Kolmogorov-Smirnov statistic against a cdf.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);

/// Critical value c(alpha)*sqrt(...) for the one- and two-sample tests.
double ks_critical_one_sample(std::size_t n, double alpha);
double ks_critical_two_sample(std::size_t n, std::size_t m, double alpha);

/// L1 distance between a sample histogram and a density on [lo,hi].
double histogram_l1_distance(const std::vector<double>& sample, double lo, double hi, int bins,
                             const std::function<double(double)>& density);

}  // namespace bifurc
