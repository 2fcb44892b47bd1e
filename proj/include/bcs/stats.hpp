#pragma once

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bcs {

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty");
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid),
                   v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                   v.end());
  return 0.5 * (v[mid - 1] + hi);
}

/// Two-sided paired t-test on matched samples a_i, b_i with d_i = a_i - b_i.
struct PairedTest {
  int pairs = 0;
  double mean_diff = 0.0;
  double t_stat = 0.0;
  double p_two_sided = 1.0;
  double ci_low = 0.0;   // 95% confidence interval for the mean difference
  double ci_high = 0.0;

  /// One-sided p for H1: mean(a) > mean(b).
  double p_greater() const {
    return t_stat > 0 ? p_two_sided / 2 : 1.0 - p_two_sided / 2;
  }
  /// One-sided p for H1: mean(a) < mean(b).
  double p_less() const {
    return t_stat < 0 ? p_two_sided / 2 : 1.0 - p_two_sided / 2;
  }
};

inline PairedTest paired_t_test(const std::vector<double>& a,
                                const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("paired_t_test: length mismatch");
  }
  const int n = static_cast<int>(a.size());
  if (n < 2) throw std::invalid_argument("paired_t_test: need >= 2 pairs");

  PairedTest res;
  res.pairs = n;
  double s = 0;
  for (int i = 0; i < n; ++i) s += a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)];
  res.mean_diff = s / n;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    const double d = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)] - res.mean_diff;
    ss += d * d;
  }
  const double var = ss / (n - 1);
  const double se = std::sqrt(var / n);

  boost::math::students_t dist(n - 1);
  const double t975 = boost::math::quantile(dist, 0.975);
  res.ci_low = res.mean_diff - t975 * se;
  res.ci_high = res.mean_diff + t975 * se;

  if (se == 0) {
    // All differences identical: degenerate distribution.
    res.t_stat = res.mean_diff == 0 ? 0.0
                 : res.mean_diff > 0
                     ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
    res.p_two_sided = res.mean_diff == 0 ? 1.0 : 0.0;
    return res;
  }
  res.t_stat = res.mean_diff / se;
  res.p_two_sided =
      2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(res.t_stat)));
  return res;
}

}  // namespace bcs
