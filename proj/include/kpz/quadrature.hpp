#pragma once

#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "kpz/error.hpp"

namespace kpz::quad {

struct Rule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// n-point Gauss-Legendre rule, cached per n.
inline const Rule& gauss_legendre(int n) {
  detail::require(n >= 1, "Gauss-Legendre order must be >= 1");
  static std::mutex mu;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Rule r;
  for (double z : boost::math::legendre_p_zeros<double>(n)) {
    const double dp = boost::math::legendre_p_prime(n, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x.push_back(z);
    r.w.push_back(w);
    if (z != 0.0) {
      r.x.push_back(-z);
      r.w.push_back(w);
    }
  }
  return cache.emplace(n, std::move(r)).first->second;
}

// Composite rule on [a, b] with `panels` equal panels of order n.
inline Rule panels(double a, double b, int n_panels, int order) {
  detail::require(n_panels >= 1 && b > a, "invalid panel layout");
  const Rule& g = gauss_legendre(order);
  Rule out;
  out.x.reserve(static_cast<std::size_t>(n_panels) * g.x.size());
  out.w.reserve(out.x.capacity());
  const double h = (b - a) / n_panels;
  for (int p = 0; p < n_panels; ++p) {
    const double lo = a + p * h;
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      out.x.push_back(lo + 0.5 * h * (g.x[k] + 1.0));
      out.w.push_back(0.5 * h * g.w[k]);
    }
  }
  return out;
}

}  // namespace kpz::quad
