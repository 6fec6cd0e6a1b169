#pragma once

// q-moments E[q^{k h_t(x)}] of the six-vertex height function with generalized
// step Bernoulli data, as k-fold contour integrals, plus an exact enumeration
// of the law of h_t(x) for tiny systems and the q-Laplace series built from
// the moments.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

#include "kpz/error.hpp"
#include "kpz/scaling.hpp"
#include "kpz/sixvertex.hpp"

namespace kpz::qmoment {

using cplx = std::complex<double>;

// (a; q)_n. n < 0 means the infinite product, stopped once |a q^i| < 1e-17.
inline cplx q_pochhammer(cplx a, double q, long n) {
  cplx p = 1.0;
  if (n >= 0) {
    cplx aq = a;
    for (long i = 0; i < n; ++i, aq *= q) p *= 1.0 - aq;
    return p;
  }
  detail::require(std::abs(q) < 1.0, "infinite q-Pochhammer needs |q| < 1");
  for (cplx aq = a; std::abs(aq) >= 1e-17; aq *= q) p *= 1.0 - aq;
  return p;
}

constexpr long kInfinite = -1;

struct Circle {
  cplx center;
  double radius = 0.0;
};

struct NestedContours {
  Circle c1;               // around -q, shared by every variable
  std::vector<Circle> c2;  // around 0, c2[i+1] contains c2[i] / q
};

// Parameters entering the contour integrand.
struct MomentModel {
  double q = 0.5;
  double kappa = 1.5;
  std::vector<double> beta;  // one per generalized column

  static MomentModel from(const SixVertexParams& p, const BernoulliBoundary& boundary) {
    p.validate();
    boundary.validate();
    return {p.q(), p.kappa(), boundary.betas()};
  }

  std::vector<cplx> excluded() const {
    std::vector<cplx> e{cplx(-kappa, 0.0)};
    for (double b : beta) e.emplace_back(q * b, 0.0);
    return e;
  }
};

inline void validate(const NestedContours& c, const MomentModel& mm) {
  const double q = mm.q;
  const double r1 = c.c1.radius;
  auto fail = [](const char* what) { throw Infeasible(what); };
  if (!(r1 > 0.0) || c.c2.empty()) fail("empty contour data");
  if (std::abs(c.c1.center - cplx(-q, 0.0)) + 1e-15 >= r1) fail("c1 must enclose -q");
  if (std::abs(c.c1.center) <= r1) fail("c1 must not enclose 0");
  // c1 and q c1 have disjoint interiors.
  if (std::abs(c.c1.center - q * c.c1.center) <= r1 + q * r1) fail("c1 meets q c1");
  for (const cplx& e : mm.excluded()) {
    if (std::abs(e - c.c1.center) <= r1) fail("c1 encloses an excluded point");
    for (const auto& ci : c.c2)
      if (std::abs(e - ci.center) <= ci.radius) fail("a c2 circle encloses an excluded point");
  }
  for (std::size_t i = 0; i < c.c2.size(); ++i) {
    if (std::abs(c.c2[i].center) != 0.0 || !(c.c2[i].radius > 0.0)) fail("c2 circles are centered at 0");
    if (i + 1 < c.c2.size() && !(c.c2[i + 1].radius > c.c2[i].radius / q))
      fail("c2[i+1] must strictly contain c2[i] / q");
  }
  const double rk = c.c2.back().radius;
  // Interior of c2[k] disjoint from interior of q c1.
  if (rk + q * r1 >= std::abs(q * c.c1.center)) fail("c2[k] meets q c1");
  if (rk >= std::abs(c.c1.center) - r1) fail("c2[k] meets c1");
}

// c1 radius: a third of the distance from -q to the nearest of 0 and the
// excluded points, capped at half the radius where c1 would touch q c1.
// c2 radii: geometric with ratio max(2, 1.5/q), the outermost at half of
// its admissible bound.
inline NestedContours build_contours(int k, const MomentModel& mm) {
  detail::require(k >= 1, "k must be >= 1");
  const double q = mm.q;
  detail::require(q > 0.0 && q < 1.0, "q must lie in (0,1)");
  double d0 = q;
  for (const cplx& e : mm.excluded()) d0 = std::min(d0, std::abs(e + q));
  const double r1 = std::min(d0 / 3.0, 0.5 * q * (1.0 - q) / (1.0 + q));
  double bound = q * q - q * r1;
  for (const cplx& e : mm.excluded()) bound = std::min(bound, std::abs(e));
  const double ratio = std::max(2.0, 1.5 / q);
  const double rk = 0.5 * bound;
  const double r_first = rk / std::pow(ratio, k - 1);
  if (!(r1 > 1e-10) || !(r_first > 1e-10)) throw Infeasible("contour radii collapse");
  NestedContours c;
  c.c1 = {cplx(-q, 0.0), r1};
  for (int i = 0; i < k; ++i) c.c2.push_back({cplx(0.0, 0.0), rk / std::pow(ratio, k - 1 - i)});
  validate(c, mm);
  return c;
}

struct MomentResult {
  double value = 0.0;
  double imag_residual = 0.0;
  int nodes = 0;  // per circle
  double doubling_delta = 0.0;
};

namespace detail {

// f(y)/y with f the single-variable factor of the integrand.
inline cplx integrand_factor(cplx y, long x, long t, const MomentModel& mm) {
  const double q = mm.q, kap = mm.kappa;
  cplx f = std::pow((1.0 + y) / (1.0 + y / q), static_cast<int>(t));
  if (x > 1) f *= std::pow((1.0 + y / (q * kap)) / (1.0 + y / kap), static_cast<int>(x - 1));
  for (double b : mm.beta) f /= 1.0 - y / (q * b);
  return f / y;
}

struct Node {
  cplx y;
  cplx w;  // includes the 1/(2 pi i) factor and dy
};

inline void add_circle(std::vector<Node>& out, const Circle& c, int n, long x, long t,
                       const MomentModel& mm) {
  for (int j = 0; j < n; ++j) {
    const double th = 2.0 * std::numbers::pi * (j + 0.5) / n;
    const cplx d = c.radius * cplx(std::cos(th), std::sin(th));
    const cplx y = c.center + d;
    out.push_back({y, integrand_factor(y, x, t, mm) * d / static_cast<double>(n)});
  }
}

inline cplx cross(cplx yi, cplx yj, double q) { return (yi - yj) / (yi - q * yj); }

inline cplx evaluate(int k, long x, long t, const MomentModel& mm, const NestedContours& c, int n) {
  std::vector<std::vector<Node>> var(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    add_circle(var[i], c.c1, n, x, t, mm);
    add_circle(var[i], c.c2[static_cast<std::size_t>(i)], n, x, t, mm);
  }
  const double pref = std::pow(mm.q, k * (k - 1) / 2.0);
  cplx total = 0.0;
  if (k == 1) {
    for (const Node& a : var[0]) total += a.w;
  } else if (k == 2) {
    for (const Node& a : var[0]) {
      cplx inner = 0.0;
      for (const Node& b : var[1]) inner += b.w * cross(a.y, b.y, mm.q);
      total += a.w * inner;
    }
  } else {
    const auto& v0 = var[0];
    const auto& v1 = var[1];
    const auto& v2 = var[2];
    const std::size_t n2 = v2.size();
    // Columns over the third variable, reused for each (a, b) pair.
    std::vector<cplx> c02(v0.size() * n2), c12(v1.size() * n2);
    for (std::size_t a = 0; a < v0.size(); ++a)
      for (std::size_t z = 0; z < n2; ++z) c02[a * n2 + z] = cross(v0[a].y, v2[z].y, mm.q) * v2[z].w;
    for (std::size_t b = 0; b < v1.size(); ++b)
      for (std::size_t z = 0; z < n2; ++z) c12[b * n2 + z] = cross(v1[b].y, v2[z].y, mm.q);
    for (std::size_t a = 0; a < v0.size(); ++a) {
      cplx sa = 0.0;
      const cplx* ra = &c02[a * n2];
      for (std::size_t b = 0; b < v1.size(); ++b) {
        const cplx* rb = &c12[b * n2];
        cplx sb = 0.0;
        for (std::size_t z = 0; z < n2; ++z) sb += ra[z] * rb[z];
        sa += v1[b].w * cross(v0[a].y, v1[b].y, mm.q) * sb;
      }
      total += v0[a].w * sa;
    }
  }
  return pref * total;
}

}  // namespace detail

// E[q^{k h_t(x)}] by tensor trapezoid quadrature on the union contours,
// doubling the node count until two successive values agree within `tol`.
inline MomentResult qmoment(int k, long x, long t, const MomentModel& mm, const NestedContours& c,
                            int n = 256, double tol = 1e-11, int n_max = 2048) {
  kpz::detail::require(k >= 1 && k <= 3, "k must lie in [1,3]");
  kpz::detail::require(x >= 1 && t >= 1, "x and t must be >= 1");
  kpz::detail::require(static_cast<int>(c.c2.size()) >= k, "not enough nested circles");
  validate(c, mm);
  cplx prev = detail::evaluate(k, x, t, mm, c, n);
  for (;;) {
    const int n2 = 2 * n;
    const cplx cur = detail::evaluate(k, x, t, mm, c, n2);
    const double delta = std::abs(cur - prev);
    if (delta <= tol) return {cur.real(), std::abs(cur.imag()), n2, delta};
    if (2 * n2 > n_max)
      throw NotConverged("q-moment quadrature did not converge under node doubling");
    n = n2;
    prev = cur;
  }
}

inline MomentResult qmoment(int k, long x, long t, const MomentModel& mm) {
  return qmoment(k, x, t, mm, build_contours(k, mm));
}

// Exact law of h_t(x) by enumerating every vertex choice of the first t rows.
// Columns >= x are summarized by the number of paths that have reached them,
// which is exact because arrows never move left.
inline std::vector<double> brute_force_height_dist(long t, long x, const SixVertexParams& p,
                                                   const BernoulliBoundary& boundary,
                                                   std::size_t node_budget = 2'000'000) {
  kpz::detail::require(t >= 1 && t <= 4, "t must lie in [1,4]");
  kpz::detail::require(x >= 1, "x must be >= 1");
  kpz::detail::require(boundary.m() <= 2, "at most 2 generalized columns");
  p.validate();
  boundary.validate();
  const double q = p.q(), d1 = p.delta1, d2 = p.delta2;
  const int m = boundary.m();
  const long w = x - 1;
  // Layout: [aux counts (m)] [main bits (w)] [far count]
  using State = std::vector<long>;
  std::map<State, double> cur;
  cur[State(static_cast<std::size_t>(m + w + 1), 0)] = 1.0;
  std::size_t nodes = 0;
  for (long row = 1; row <= t; ++row) {
    // Partial states carry the horizontal arrow as a trailing element.
    std::map<State, double> partial;
    for (const auto& [s, pr] : cur) {
      State z = s;
      z.push_back(1);
      partial[z] += pr;
    }
    auto expand = [&](std::size_t idx, auto&& table) {
      std::map<State, double> nxt;
      for (const auto& [s, pr] : partial) {
        const long i1 = s[idx];
        const int j1 = static_cast<int>(s.back());
        const hsvm::TransitionTable tt = table(i1, j1);
        for (int o = 0; o < tt.n; ++o) {
          if (tt.out[o].p == 0.0) continue;
          State z = s;
          z[idx] = tt.out[o].i2;
          z.back() = tt.out[o].j2;
          nxt[z] += pr * tt.out[o].p;
          if (++nodes > node_budget) throw SizeLimit("enumeration exceeded the node budget");
        }
      }
      partial.swap(nxt);
    };
    for (int j = 0; j < m; ++j) {
      const double b = boundary.b[static_cast<std::size_t>(j)];
      expand(static_cast<std::size_t>(j),
             [&](long i1, int j1) { return sixvertex::generalized_transition(i1, j1, q, b); });
    }
    for (long c = 0; c < w; ++c) {
      expand(static_cast<std::size_t>(m + c), [&](long i1, int j1) {
        return sixvertex::six_vertex_transition(static_cast<int>(i1), j1, d1, d2);
      });
    }
    cur.clear();
    for (auto& [s, pr] : partial) {
      State z(s.begin(), s.end() - 1);
      z.back() += s.back();  // a carry leaving column x-1 ends at a column >= x
      cur[z] += pr;
    }
  }
  std::vector<double> law(static_cast<std::size_t>(t + 1), 0.0);
  for (const auto& [s, pr] : cur) law[static_cast<std::size_t>(s.back())] += pr;
  return law;
}

struct SeriesResult {
  cplx value;
  double tail_bound = 0.0;
};

// sum_{k=0}^{K} zeta^k m_k / (q;q)_k for m_0..m_K. Because q^{k h} is
// nonincreasing in k, the tail is bounded by m_K sum_{k>K} |zeta|^k / (q;q)_k.
inline SeriesResult qlaplace_series(cplx zeta, const std::vector<double>& moments, double q,
                                    double tol = 0.05) {
  kpz::detail::require(std::abs(zeta) < 1.0, "|zeta| must be < 1");
  kpz::detail::require(!moments.empty(), "need at least m_0");
  kpz::detail::require(q > 0.0 && q < 1.0, "q must lie in (0,1)");
  SeriesResult r;
  cplx zk = 1.0;
  double qq = 1.0;  // (q;q)_k
  for (std::size_t k = 0; k < moments.size(); ++k) {
    if (k > 0) {
      zk *= zeta;
      qq *= 1.0 - std::pow(q, static_cast<double>(k));
    }
    r.value += zk * moments[k] / qq;
  }
  const long K = static_cast<long>(moments.size()) - 1;
  const double mK = std::clamp(moments.back(), 0.0, 1.0);
  double az = std::pow(std::abs(zeta), static_cast<double>(K));
  double tail = 0.0;
  for (long k = K + 1;; ++k) {
    az *= std::abs(zeta);
    qq *= 1.0 - std::pow(q, static_cast<double>(k));
    const double term = az / qq;
    tail += term;
    if (term < 1e-18 * std::max(tail, 1e-300)) break;
  }
  r.tail_bound = mK * tail;
  if (r.tail_bound > tol) throw TailTooLarge("q-Laplace tail bound exceeds tolerance");
  return r;
}

}  // namespace kpz::qmoment
