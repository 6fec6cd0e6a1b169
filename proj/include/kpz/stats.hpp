#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "kpz/error.hpp"

namespace kpz::stats {

// sup over sample points of |ECDF(-) - F| and |ECDF(+) - F|. `sorted` must be
// ascending.
inline double ks_distance(std::span<const double> sorted, const std::function<double(double)>& F) {
  detail::require(!sorted.empty(), "KS distance needs at least one sample");
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;  // ties form one jump
    const double f = F(sorted[i]);
    d = std::max({d, std::abs(static_cast<double>(i) / n - f), std::abs(static_cast<double>(j) / n - f)});
    i = j;
  }
  return d;
}

inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  detail::require(!a.empty() && !b.empty(), "KS distance needs at least one sample per side");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (j == b.size()) x = a[i];
    else if (i == a.size()) x = b[j];
    else x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

inline double mean(std::span<const double> x) {
  detail::require(!x.empty(), "mean of an empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Unbiased sample variance.
inline double variance(std::span<const double> x) {
  detail::require(x.size() >= 2, "variance needs two samples");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

// Least-squares slope of log y against log x.
inline double log_log_slope(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "need two or more matching points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    detail::require(x[i] > 0.0 && y[i] > 0.0, "log-log slope needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double mx = mean(lx), my = mean(ly);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

inline double median(std::vector<double> x) {
  detail::require(!x.empty(), "median of an empty sample");
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

// ECDF of `sorted` at each grid point.
inline std::vector<double> ecdf_on_grid(std::span<const double> sorted, std::span<const double> grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double g : grid)
    out.push_back(static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), g) - sorted.begin()) /
                  static_cast<double>(sorted.size()));
  return out;
}

// A CDF tabulated on an increasing grid, linearly interpolated, 0 / 1 outside.
struct CdfTable {
  std::vector<double> s;
  std::vector<double> F;

  static CdfTable build(double lo, double hi, double step, const std::function<double(double)>& f) {
    detail::require(hi > lo && step > 0.0, "invalid table grid");
    CdfTable t;
    const auto n = static_cast<long>(std::ceil((hi - lo) / step - 1e-9));
    for (long i = 0; i <= n; ++i) {
      const double x = std::min(hi, lo + static_cast<double>(i) * step);
      t.s.push_back(x);
      t.F.push_back(f(x));
    }
    return t;
  }

  bool monotone() const {
    for (std::size_t i = 1; i < F.size(); ++i)
      if (F[i] < F[i - 1]) return false;
    return true;
  }

  double operator()(double x) const {
    if (s.empty()) throw DomainError("empty CDF table");
    if (x <= s.front()) return x < s.front() ? 0.0 : F.front();
    if (x >= s.back()) return x > s.back() ? 1.0 : F.back();
    const auto it = std::upper_bound(s.begin(), s.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - s.begin());
    const double w = (x - s[k - 1]) / (s[k] - s[k - 1]);
    return F[k - 1] + w * (F[k] - F[k - 1]);
  }
};

}  // namespace kpz::stats
