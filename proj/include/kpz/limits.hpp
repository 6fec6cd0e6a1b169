#pragma once

// Fredholm determinants on piecewise linear contours and the three limit
// laws built from them: F_TW, F_BBP;c and G_m (largest eigenvalue of an m x m
// GUE matrix). Each law has a second, independent evaluation route.

#include <Eigen/Dense>
#include <boost/math/special_functions/airy.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "kpz/error.hpp"
#include "kpz/quadrature.hpp"
#include "kpz/rng.hpp"

namespace kpz::limits {

using cplx = std::complex<double>;
inline constexpr cplx kTwoPiI{0.0, 2.0 * std::numbers::pi};

enum class RayKind {
  W,  // rays at angles +-pi/3 from the apex
  V,  // rays at angles +-2pi/3
  U,  // rays at angles +-pi/8
  X,  // vertical line through the apex
};

struct RayContour {
  RayKind kind = RayKind::W;
  double apex = 0.0;
  double length = 8.0;
  int panels = 4;  // per ray
  int order = 24;
  std::vector<cplx> nodes;
  std::vector<cplx> weights;  // Gauss-Legendre weight times dz/d(arclength)

  std::size_t size() const { return nodes.size(); }
};

inline double ray_angle(RayKind k) {
  switch (k) {
    case RayKind::W: return std::numbers::pi / 3.0;
    case RayKind::V: return 2.0 * std::numbers::pi / 3.0;
    case RayKind::U: return std::numbers::pi / 8.0;
    case RayKind::X: return std::numbers::pi / 2.0;
  }
  return 0.0;
}

// Panel breakpoints on [0, length]: `panels` equal panels, or, when
// near_width > 0, panels of that width up to near_until and then widths
// growing by 1.5x. `refine` splits every panel into that many pieces.
inline std::vector<double> panel_edges(double length, int panels, double near_width,
                                       double near_until, int refine = 1) {
  std::vector<double> e{0.0};
  if (near_width <= 0.0) {
    for (int p = 1; p <= panels; ++p) e.push_back(length * p / panels);
  } else {
    double h = near_width;
    while (e.back() < length) {
      const double nxt = e.back() + h;
      e.push_back(nxt >= length - 0.25 * h ? length : nxt);
      if (e.back() >= near_until) h *= 1.5;
    }
  }
  std::vector<double> out{0.0};
  for (std::size_t i = 1; i < e.size(); ++i)
    for (int r = 1; r <= refine; ++r) out.push_back(e[i - 1] + (e[i] - e[i - 1]) * r / refine);
  return out;
}

// Oriented from apex + L e^{-i phi} through the apex to apex + L e^{i phi}.
inline RayContour make_ray(RayKind kind, double apex, const std::vector<double>& edges, int order) {
  detail::require(edges.size() >= 2 && order >= 1, "invalid ray discretization");
  RayContour c{kind, apex, edges.back(), static_cast<int>(edges.size()) - 1, order, {}, {}};
  const double phi = ray_angle(kind);
  const cplx up = std::polar(1.0, phi);
  const cplx down = std::conj(up);
  quad::Rule r;
  for (std::size_t p = 1; p < edges.size(); ++p) {
    const quad::Rule piece = quad::panels(edges[p - 1], edges[p], 1, order);
    r.x.insert(r.x.end(), piece.x.begin(), piece.x.end());
    r.w.insert(r.w.end(), piece.w.begin(), piece.w.end());
  }
  for (std::size_t k = r.x.size(); k-- > 0;) {
    c.nodes.push_back(apex + r.x[k] * down);
    c.weights.push_back(-down * r.w[k]);
  }
  for (std::size_t k = 0; k < r.x.size(); ++k) {
    c.nodes.push_back(apex + r.x[k] * up);
    c.weights.push_back(up * r.w[k]);
  }
  return c;
}

inline RayContour make_ray(RayKind kind, double apex, double length, int panels, int order) {
  detail::require(length > 0.0 && panels >= 1, "invalid ray discretization");
  return make_ray(kind, apex, panel_edges(length, panels, 0.0, 0.0), order);
}

// Smallest ray length, at least `min_length`, beyond which Re log f stays 40
// below its maximum over the ray.
inline double decay_length(const std::function<double(cplx)>& log_abs, double apex, RayKind kind,
                           double min_length) {
  const cplx dir = std::polar(1.0, ray_angle(kind));
  constexpr double kStep = 0.25, kMax = 200.0;
  double peak = -1e300;
  for (double r = 0.0; r <= kMax; r += kStep) {
    peak = std::max(peak, log_abs(apex + r * dir));
    peak = std::max(peak, log_abs(apex + r * std::conj(dir)));
  }
  double last = 0.0;
  for (double r = 0.0; r <= kMax; r += kStep) {
    if (log_abs(apex + r * dir) > peak - 40.0 || log_abs(apex + r * std::conj(dir)) > peak - 40.0)
      last = r;
  }
  if (last >= kMax - kStep) throw NotConverged("integrand does not decay along the ray");
  return std::max(min_length, last + 1.0);
}

struct FredholmResult {
  double value = 0.0;
  double imag_residual = 0.0;
  int nodes = 0;
  double node_doubling_delta = 0.0;
};

inline cplx det_identity_plus(const Eigen::MatrixXcd& M) {
  if (M.rows() == 0) return 1.0;
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(M.rows(), M.cols());
  return (I + M).partialPivLu().determinant();
}

// det(I + K) on a contour: Nystrom matrix M_ij = K(z_i, z_j) w_j / (2 pi i).
inline cplx nystrom_det(const std::function<cplx(cplx, cplx)>& K, const RayContour& c) {
  const auto n = static_cast<Eigen::Index>(c.size());
  Eigen::MatrixXcd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) M(i, j) = K(c.nodes[i], c.nodes[j]) * c.weights[j] / kTwoPiI;
  return det_identity_plus(M);
}

// Node-doubling wrapper: evaluates with `panels` and 2 * `panels` per ray.
inline FredholmResult fredholm_det(const std::function<cplx(cplx, cplx)>& K, RayKind kind,
                                   double apex, double length, int panels = 4, int order = 24,
                                   double tol = 1e-8) {
  const cplx a = nystrom_det(K, make_ray(kind, apex, length, panels, order));
  const RayContour fine = make_ray(kind, apex, length, 2 * panels, order);
  const cplx b = nystrom_det(K, fine);
  FredholmResult r{b.real(), std::abs(b.imag()), static_cast<int>(fine.size()), std::abs(b - a)};
  if (!std::isfinite(r.value) || !std::isfinite(r.node_doubling_delta))
    throw NotConverged("Fredholm determinant is not finite");
  if (r.node_doubling_delta > tol) throw NotConverged("Fredholm determinant did not converge");
  return r;
}

// Kernels of the form
//   L(w, w') = (1 / 2 pi i) int A(w) B(v) / ((v - w)(w' - v)) dv
// with w on one contour and v on another.
struct ContourKernel {
  std::function<cplx(cplx)> log_A;
  std::function<cplx(cplx)> log_B;
  RayKind w_kind = RayKind::W;
  double w_apex = 0.0;
  RayKind v_kind = RayKind::V;
  double v_apex = -1.0;
  double min_length = 8.0;
  double near_width = 0.0;  // > 0 selects graded panels
  double near_until = 0.0;
  int panels = 4;
  int order = 24;
};

inline cplx contour_kernel_det(const ContourKernel& k, const RayContour& wc, const RayContour& vc) {
  const auto nw = static_cast<Eigen::Index>(wc.size());
  const auto nv = static_cast<Eigen::Index>(vc.size());
  Eigen::MatrixXcd P(nw, nv), Q(nv, nw);
  std::vector<cplx> Bv(static_cast<std::size_t>(nv));
  for (Eigen::Index j = 0; j < nv; ++j) Bv[j] = std::exp(k.log_B(vc.nodes[j])) * vc.weights[j] / kTwoPiI;
  for (Eigen::Index i = 0; i < nw; ++i) {
    const cplx a = std::exp(k.log_A(wc.nodes[i]));
    for (Eigen::Index j = 0; j < nv; ++j) P(i, j) = a * Bv[j] / (vc.nodes[j] - wc.nodes[i]);
  }
  for (Eigen::Index j = 0; j < nv; ++j)
    for (Eigen::Index i = 0; i < nw; ++i) Q(j, i) = wc.weights[i] / (kTwoPiI * (wc.nodes[i] - vc.nodes[j]));
  return det_identity_plus(P * Q);
}

// With `doubling` the value is recomputed with every panel split in two and
// the difference is reported; without it the coarse value is returned.
inline FredholmResult contour_kernel_fredholm(const ContourKernel& k, double tol = 1e-8,
                                              bool doubling = true) {
  const int panels = k.panels, order = k.order;
  auto re = [](const std::function<cplx(cplx)>& f) {
    return [&f](cplx z) { return f(z).real(); };
  };
  const double lw = decay_length(re(k.log_A), k.w_apex, k.w_kind, k.min_length);
  const double lv = decay_length(re(k.log_B), k.v_apex, k.v_kind, k.min_length);
  const int pw = std::max(panels, static_cast<int>(std::ceil(panels * lw / k.min_length)));
  const int pv = std::max(panels, static_cast<int>(std::ceil(panels * lv / k.min_length)));
  auto eval = [&](int refine) {
    return contour_kernel_det(
        k, make_ray(k.w_kind, k.w_apex, panel_edges(lw, pw, k.near_width, k.near_until, refine), order),
        make_ray(k.v_kind, k.v_apex, panel_edges(lv, pv, k.near_width, k.near_until, refine), order));
  };
  const int refine = doubling ? 2 : 1;
  const cplx b = eval(refine);
  const auto n = static_cast<int>(
      2 * order * (panel_edges(lw, pw, k.near_width, k.near_until, refine).size() - 1));
  FredholmResult r{b.real(), std::abs(b.imag()), n, 0.0};
  if (doubling) r.node_doubling_delta = std::abs(b - eval(1));
  if (!std::isfinite(r.value) || !std::isfinite(r.node_doubling_delta))
    throw NotConverged("Fredholm determinant is not finite");
  if (r.node_doubling_delta > tol) throw NotConverged("Fredholm determinant did not converge");
  return r;
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// ---- Tracy-Widom -------------------------------------------------------

inline ContourKernel airy_contour_kernel(double s) {
  return {[s](cplx w) { return w * w * w / 3.0 - s * w; },
          [s](cplx v) { return -v * v * v / 3.0 + s * v; },
          RayKind::W, 0.0, RayKind::V, -1.0, 8.0};
}

inline FredholmResult F_TW_detail(double s, double tol = 1e-8, bool doubling = true) {
  return contour_kernel_fredholm(airy_contour_kernel(s), tol, doubling);
}

inline double F_TW(double s) { return clamp01(F_TW_detail(s, 1e-8, false).value); }

// det(I - K_Ai) on (s, inf) with Gauss-Legendre after x = s + 10 tan(pi u / 2).
inline double F_TW_airy(double s, int n = 80) {
  const quad::Rule& g = quad::gauss_legendre(n);
  std::vector<double> x(n), sw(n), ai(n), aip(n);
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (g.x[i] + 1.0);
    const double t = std::numbers::pi * u / 2.0;
    x[i] = s + 10.0 * std::tan(t);
    const double dx = 10.0 * (std::numbers::pi / 2.0) / (std::cos(t) * std::cos(t));
    sw[i] = std::sqrt(0.5 * g.w[i] * dx);
    ai[i] = boost::math::airy_ai(x[i]);
    aip[i] = boost::math::airy_ai_prime(x[i]);
  }
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double k = i == j ? aip[i] * aip[i] - x[i] * ai[i] * ai[i]
                              : (ai[i] * aip[j] - aip[i] * ai[j]) / (x[i] - x[j]);
      M(i, j) = (i == j ? 1.0 : 0.0) - sw[i] * k * sw[j];
    }
  return M.partialPivLu().determinant();
}

// ---- BBP -----------------------------------------------------------------

inline double default_shift(std::span<const double> c) {
  double mx = 0.0;
  for (double v : c) mx = std::max(mx, v);
  return mx + 1.0;
}

inline ContourKernel bbp_contour_kernel(double s, std::vector<double> c, double E) {
  for (double v : c)
    if (!(E > v)) throw InvalidShift("contour shift E must exceed every c_j");
  auto log_A = [s, c](cplx w) {
    cplx r = w * w * w / 3.0 - s * w;
    for (double cj : c) r -= std::log(w + cj);
    return r;
  };
  auto log_B = [s, c](cplx v) {
    cplx r = -v * v * v / 3.0 + s * v;
    for (double cj : c) r += std::log(v + cj);
    return r;
  };
  return {log_A, log_B, RayKind::W, -E, RayKind::V, -E - 1.0, 8.0};
}

inline FredholmResult F_BBP_detail(double s, const std::vector<double>& c, double E,
                                   double tol = 1e-8, bool doubling = true) {
  return contour_kernel_fredholm(bbp_contour_kernel(s, c, E), tol, doubling);
}

inline double F_BBP(double s, const std::vector<double>& c) {
  return clamp01(F_BBP_detail(s, c, default_shift(c), 1e-8, false).value);
}

// ---- finite GUE ----------------------------------------------------------

// Graded panels: the pole of w^{-m} at 0 lies 0.38 from the w contour.
inline ContourKernel gue_contour_kernel(double s, int m) {
  return {[s, m](cplx w) { return -w * w / 2.0 - s * w - static_cast<double>(m) * std::log(w); },
          [s, m](cplx v) { return v * v / 2.0 + s * v + static_cast<double>(m) * std::log(v); },
          RayKind::U, -1.0, RayKind::X, -2.0, 12.0, 0.5, 3.0, 4, 12};
}

inline FredholmResult G_m_det_detail(double s, int m, double tol = 1e-8, bool doubling = true) {
  detail::require(m >= 1, "m must be >= 1");
  return contour_kernel_fredholm(gue_contour_kernel(s, m), tol, doubling);
}

inline double G_m_det(double s, int m) { return clamp01(G_m_det_detail(s, m, 1e-8, false).value); }

// Orthonormal Hermite functions phi_0..phi_{m-1} for the weight e^{-x^2/2}.
inline std::vector<double> hermite_functions(double x, int m) {
  std::vector<double> he(static_cast<std::size_t>(m));
  double prev = 0.0, cur = 1.0;
  for (int i = 0; i < m; ++i) {
    he[i] = cur;
    const double next = x * cur - i * prev;
    prev = cur;
    cur = next;
  }
  const double g = std::exp(-x * x / 4.0) / std::sqrt(std::sqrt(2.0 * std::numbers::pi));
  double fact = 1.0;
  for (int i = 0; i < m; ++i) {
    if (i > 0) fact *= i;
    he[i] *= g / std::sqrt(fact);
  }
  return he;
}

inline double gue_domain(int m) { return 12.0 + 2.0 * std::sqrt(static_cast<double>(m)); }

// The m-fold integral of the eigenvalue density over (-inf, s]^m reduces to the
// m x m determinant of partial Gram integrals of the Hermite functions. Above
// s = 0 the complement Z - (integral over [s, hi]) is used so that values near
// 1 are not the ratio of two nearly equal determinants.
inline double G_m_quad(double s, int m) {
  detail::require(m >= 1 && m <= 12, "m must lie in [1,12]");
  const double lo = -gue_domain(m), hi = gue_domain(m);
  auto gram = [&](double a, double b) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
    if (b <= a) return G;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / 0.5)));
    const quad::Rule r = quad::panels(a, b, panels, 24);
    for (std::size_t k = 0; k < r.x.size(); ++k) {
      const auto ph = hermite_functions(r.x[k], m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) G(i, j) += r.w[k] * ph[i] * ph[j];
    }
    return G;
  };
  const Eigen::MatrixXd lower = gram(lo, 0.0), upper = gram(0.0, hi);
  const double z = (lower + upper).determinant();
  if (s <= 0.0) return clamp01(gram(lo, std::max(s, lo)).determinant() / z);
  const Eigen::MatrixXd tail = gram(std::min(s, hi), hi);
  return clamp01((lower + upper - tail).determinant() / z);
}

inline double G_m(double s, int m) { return G_m_quad(s, m); }

inline double normal_cdf(double s) { return 0.5 * std::erfc(-s / std::numbers::sqrt2); }

// Maxima of n_samples Hermitian matrices with density proportional to exp(-tr H^2 / 2),
// sorted ascending. Sample i uses trajectory i of the seed.
inline std::vector<double> gue_max_eig_mc(int m, long n_samples, std::uint64_t seed) {
  detail::require(m >= 1 && m <= 8, "m must lie in [1,8]");
  detail::require(n_samples >= 1, "need at least one sample");
  std::vector<double> out(static_cast<std::size_t>(n_samples));
  Eigen::MatrixXcd H(m, m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
  for (long i = 0; i < n_samples; ++i) {
    rng::SequentialStream u(rng::KeyedStream(seed, static_cast<std::uint32_t>(i), rng::Tag::Gue));
    // Box-Muller, kept explicit so the stream is identical on every platform.
    auto normal_pair = [&u]() {
      const double r = std::sqrt(-2.0 * std::log(u.uniform()));
      const double th = 2.0 * std::numbers::pi * u.uniform();
      return std::pair{r * std::cos(th), r * std::sin(th)};
    };
    for (int a = 0; a < m; ++a) {
      H(a, a) = normal_pair().first;
      for (int b = a + 1; b < m; ++b) {
        const auto [re, im] = normal_pair();
        H(a, b) = cplx(re, im) * std::sqrt(0.5);
        H(b, a) = std::conj(H(a, b));
      }
    }
    es.compute(H, Eigen::EigenvaluesOnly);
    out[static_cast<std::size_t>(i)] = es.eigenvalues().maxCoeff();
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace kpz::limits
