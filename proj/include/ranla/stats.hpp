#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ranla {

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean_of: empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_std: need at least two samples");
  double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

/**
 * Student-t critical values (two-sided 95% / one-sided 95%) from the
 * standard table for 1..30 degrees of freedom; the normal quantile is a
 * close upper-df approximation beyond that.
 */
inline double t_critical_975(int df) {
  static const double table[] = {
      12.7062, 4.30265, 3.18245, 2.77645, 2.57058, 2.44691, 2.36462, 2.30600,
      2.26216, 2.22814, 2.20099, 2.17881, 2.16037, 2.14479, 2.13145, 2.11991,
      2.10982, 2.10092, 2.09302, 2.08596, 2.07961, 2.07387, 2.06866, 2.06390,
      2.05954, 2.05553, 2.05183, 2.04841, 2.04523, 2.04227};
  if (df < 1) throw std::invalid_argument("t_critical_975: df must be positive");
  if (df <= 30) return table[df - 1];
  return 1.95996;
}

inline double t_critical_95(int df) {
  static const double table[] = {
      6.31375, 2.91999, 2.35336, 2.13185, 2.01505, 1.94318, 1.89458, 1.85955,
      1.83311, 1.81246, 1.79588, 1.78229, 1.77093, 1.76131, 1.75305, 1.74588,
      1.73961, 1.73406, 1.72913, 1.72472, 1.72074, 1.71714, 1.71387, 1.71088,
      1.70814, 1.70562, 1.70329, 1.70113, 1.69913, 1.69726};
  if (df < 1) throw std::invalid_argument("t_critical_95: df must be positive");
  if (df <= 30) return table[df - 1];
  return 1.64485;
}

// Half width of the two-sided 95% confidence interval for the mean.
inline double ci95_halfwidth(const std::vector<double>& xs) {
  return t_critical_975(static_cast<int>(xs.size()) - 1) * sample_std(xs) /
         std::sqrt(static_cast<double>(xs.size()));
}

// Paired t statistic for H0: mean(x - y) == 0.
inline double paired_t_stat(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("paired_t_stat: need matched samples of size >= 2");
  std::vector<double> d(x.size());
  for (size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  double sd = sample_std(d);
  if (sd == 0.0) {
    double m = mean_of(d);
    return m == 0.0 ? 0.0 : (m > 0.0 ? 1e18 : -1e18);
  }
  return mean_of(d) / (sd / std::sqrt(static_cast<double>(d.size())));
}

// Fractional ranks with ties averaged.
inline std::vector<double> fractional_ranks(const std::vector<double>& xs) {
  const size_t n = xs.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

// Spearman rank correlation (Pearson on fractional ranks).
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("spearman: need matched samples of size >= 2");
  std::vector<double> rx = fractional_ranks(x);
  std::vector<double> ry = fractional_ranks(y);
  double mx = mean_of(rx), my = mean_of(ry);
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0.0 || dy == 0.0) return 0.0;
  return num / std::sqrt(dx * dy);
}

// Pearson chi-squared statistic against given expected counts.
inline double chi2_stat(const std::vector<int64_t>& observed, const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi2_stat: size mismatch");
  double stat = 0.0;
  for (size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) throw std::invalid_argument("chi2_stat: expected count must be positive");
    double d = static_cast<double>(observed[i]) - expected[i];
    stat += d * d / expected[i];
  }
  return stat;
}

}  // namespace ranla
