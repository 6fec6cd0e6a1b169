#pragma once

// Stochastic higher-spin vertex model on the quadrant, sampled one row at a
// time. A row is swept left to right: the horizontal arrow entering column x
// is the one leaving column x-1, so sweeping rows in order visits every vertex
// after the vertices below and to its left.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kpz/error.hpp"
#include "kpz/rng.hpp"

namespace kpz::hsvm {

struct VertexParams {
  double q = 0.5;
  std::function<double(long)> u;   // spectral parameter of row y
  std::function<double(long)> xi;  // inhomogeneity of column x
  std::function<double(long)> s;   // spin parameter of column x
};

struct ArrowConfig {
  long i1 = 0;
  int j1 = 0;
  long i2 = 0;
  int j2 = 0;

  bool conserves() const { return i1 + j1 == i2 + j2; }
  friend bool operator==(const ArrowConfig&, const ArrowConfig&) = default;
};

struct Outcome {
  long i2 = 0;
  int j2 = 0;
  double p = 0.0;
};

// The (at most two) admissible outputs of a vertex. `n` is 1 when the input
// has a single deterministic output.
struct TransitionTable {
  Outcome out[2];
  int n = 0;

  double prob(long i2, int j2) const {
    for (int k = 0; k < n; ++k)
      if (out[k].i2 == i2 && out[k].j2 == j2) return out[k].p;
    return 0.0;
  }
};

struct Cell {
  long column = 0;
  long count = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct SparseRowState {
  std::vector<Cell> occupied;  // strictly increasing columns, counts >= 1
  long row_index = 0;

  long total() const {
    long n = 0;
    for (const auto& c : occupied) n += c.count;
    return n;
  }
};

constexpr double kStochasticTol = 1e-12;
constexpr long kDefaultRunCap = 10'000'000;

namespace detail {

inline double checked(double p, const char* which) {
  if (!(p >= -kStochasticTol && p <= 1.0 + kStochasticTol) || !std::isfinite(p))
    throw NonStochastic(std::string("vertex probability out of [0,1]: ") + which + " = " +
                        std::to_string(p));
  return std::min(1.0, std::max(0.0, p));
}

}  // namespace detail

inline TransitionTable vertex_weights(long i1, int j1, double q, double s, double xi, double u) {
  kpz::detail::require(i1 >= 0 && (j1 == 0 || j1 == 1), "invalid vertex input");
  TransitionTable t;
  const double squ = s * xi * u;
  const double den = 1.0 - squ;
  const double qk = std::pow(q, static_cast<double>(i1));
  if (j1 == 0) {
    if (i1 == 0) {
      t.out[0] = {0, 0, 1.0};
      t.n = 1;
      return t;
    }
    const double stay = detail::checked((1.0 - qk * squ) / den, "(k,0)->(k,0)");
    const double turn = detail::checked((qk - 1.0) * squ / den, "(k,0)->(k-1,1)");
    t.out[0] = {i1, 0, stay};
    t.out[1] = {i1 - 1, 1, turn};
    t.n = 2;
  } else {
    const double absorb = detail::checked((1.0 - qk * s * s) / den, "(k,1)->(k+1,0)");
    const double pass = detail::checked((qk * s * s - squ) / den, "(k,1)->(k,1)");
    t.out[0] = {i1 + 1, 0, absorb};
    t.out[1] = {i1, 1, pass};
    t.n = 2;
  }
  if (std::abs(t.out[0].p + t.out[1].p - 1.0) > kStochasticTol)
    throw NonStochastic("vertex probabilities do not sum to 1");
  return t;
}

inline TransitionTable vertex_transition(long i1, int j1, long x, long y, const VertexParams& p) {
  return vertex_weights(i1, j1, p.q, p.s(x), p.xi(x), p.u(y));
}

// Spin-1/2 parameters under which the vertex weights are the six-vertex ones.
inline VertexParams six_vertex_params(double delta1, double delta2) {
  kpz::detail::require(delta1 > 0.0 && delta1 < delta2 && delta2 < 1.0,
                       "need 0 < delta1 < delta2 < 1");
  const double q = delta1 / delta2;
  const double kappa = (1.0 - delta1) / (1.0 - delta2);
  const double s = 1.0 / std::sqrt(q);
  return {q, [=](long) { return kappa * s; }, [](long) { return 1.0; }, [=](long) { return s; }};
}

// Maps one uniform draw to an output of the vertex.
inline std::pair<long, int> sample_vertex(const TransitionTable& t, double uniform) {
  if (t.n == 1 || uniform < t.out[0].p) return {t.out[0].i2, t.out[0].j2};
  return {t.out[1].i2, t.out[1].j2};
}

// One row update. The horizontal arrow entering column 1 is `incoming_j`.
// Beyond the last occupied column a surviving carry runs over empty columns
// until it turns up; `run_cap` bounds that run.
inline SparseRowState sweep_row(const SparseRowState& state, int incoming_j, const VertexParams& p,
                                const rng::KeyedStream& stream, long run_cap = kDefaultRunCap) {
  kpz::detail::require(incoming_j == 0 || incoming_j == 1, "incoming bit must be 0 or 1");
  SparseRowState next;
  next.row_index = state.row_index + 1;
  const auto y = static_cast<std::uint32_t>(next.row_index);
  next.occupied.reserve(state.occupied.size() + 1);

  int carry = incoming_j;
  long x = 1;
  std::size_t idx = 0;
  long run = 0;
  auto emit = [&](long col, long cnt) {
    if (cnt > 0) next.occupied.push_back({col, cnt});
  };
  while (idx < state.occupied.size() || carry == 1) {
    long i1 = 0;
    if (idx < state.occupied.size()) {
      const Cell& c = state.occupied[idx];
      if (carry == 0 && c.column > x) x = c.column;
      if (c.column == x) {
        i1 = c.count;
        ++idx;
      }
    }
    const TransitionTable t = vertex_transition(i1, carry, x, next.row_index, p);
    // draws keyed by (row, column)
    const auto [i2, j2] = sample_vertex(t, stream.uniform(y, static_cast<std::uint32_t>(x)));
    emit(x, i2);
    if (i1 == 0 && carry == 1 && j2 == 1 && idx >= state.occupied.size()) {
      if (++run > run_cap) throw NonTerminating("horizontal run exceeded the column cap");
    } else {
      run = 0;
    }
    carry = j2;
    ++x;
  }
  return next;
}

// Number of paths at columns >= x.
inline long height(const SparseRowState& state, long x) {
  long h = 0;
  for (const auto& c : state.occupied)
    if (c.column >= x) h += c.count;
  return h;
}

}  // namespace kpz::hsvm
