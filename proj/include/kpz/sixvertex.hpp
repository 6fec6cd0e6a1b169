#pragma once

// Stochastic six-vertex model with generalized step Bernoulli boundary data.
//
// Boundary bits come from an auxiliary strip of m generalized columns fed by
// one arrow per row; the arrow leaving the strip in row i (if any) enters the
// main lattice at column 1 of row i.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "kpz/error.hpp"
#include "kpz/hsvm.hpp"
#include "kpz/rng.hpp"
#include "kpz/scaling.hpp"

namespace kpz::sixvertex {

using hsvm::SparseRowState;
using hsvm::TransitionTable;

inline TransitionTable six_vertex_transition(int i1, int j1, double delta1, double delta2) {
  detail::require(delta1 > 0.0 && delta1 < 1.0 && delta2 > 0.0 && delta2 < 1.0,
                  "delta1, delta2 must lie in (0,1)");
  detail::require((i1 == 0 || i1 == 1) && (j1 == 0 || j1 == 1), "spin-1/2 inputs are bits");
  TransitionTable t;
  if (i1 == j1) {
    t.out[0] = {i1, j1, 1.0};
    t.n = 1;
  } else if (i1 == 1) {
    t.out[0] = {1, 0, delta1};
    t.out[1] = {0, 1, 1.0 - delta1};
    t.n = 2;
  } else {
    t.out[0] = {0, 1, delta2};
    t.out[1] = {1, 0, 1.0 - delta2};
    t.n = 2;
  }
  return t;
}

// Generalized column with density b: (k,0)->(k-1,1) w.p. (1-q^k)b and
// (k,1)->(k,1) w.p. b.
inline TransitionTable generalized_transition(long k, int j1, double q, double b) {
  TransitionTable t;
  if (j1 == 0) {
    if (k == 0) {
      t.out[0] = {0, 0, 1.0};
      t.n = 1;
      return t;
    }
    const double turn = (1.0 - std::pow(q, static_cast<double>(k))) * b;
    t.out[0] = {k, 0, 1.0 - turn};
    t.out[1] = {k - 1, 1, turn};
  } else {
    t.out[0] = {k, 1, b};
    t.out[1] = {k + 1, 0, 1.0 - b};
  }
  t.n = 2;
  return t;
}

struct BoundaryBits {
  std::vector<std::uint8_t> bits;  // bits[i-1] is the bit of row i

  int operator[](long row) const { return bits.at(static_cast<std::size_t>(row - 1)); }
  long size() const { return static_cast<long>(bits.size()); }

  static BoundaryBits constant(long n_rows, int bit) {
    return {std::vector<std::uint8_t>(static_cast<std::size_t>(n_rows),
                                      static_cast<std::uint8_t>(bit))};
  }
};

struct AuxColumnState {
  std::vector<long> counts;
};

// Advances the auxiliary strip by one row and returns the bit it emits.
// `uniform(x)` supplies the draw for column x (1-based).
template <class Uniform>
int aux_row(AuxColumnState& aux, const BernoulliBoundary& boundary, double q, Uniform&& uniform) {
  int carry = 1;
  for (int x = 0; x < boundary.m(); ++x) {
    long& k = aux.counts[static_cast<std::size_t>(x)];
    const TransitionTable t = generalized_transition(k, carry, q, boundary.b[static_cast<std::size_t>(x)]);
    const auto [i2, j2] = hsvm::sample_vertex(t, uniform(x + 1));
    k = i2;
    carry = j2;
  }
  return carry;
}

inline BoundaryBits sample_boundary(const BernoulliBoundary& boundary, double q, long n_rows,
                                    const rng::KeyedStream& stream) {
  boundary.validate();
  detail::require(n_rows >= 1, "n_rows must be >= 1");
  detail::require(q >= 0.0 && q < 1.0, "q must lie in [0,1)");
  const rng::KeyedStream s = stream.with_tag(rng::Tag::Boundary);
  AuxColumnState aux{std::vector<long>(static_cast<std::size_t>(boundary.m()), 0)};
  BoundaryBits out;
  out.bits.resize(static_cast<std::size_t>(n_rows));
  for (long i = 1; i <= n_rows; ++i) {
    const auto row = static_cast<std::uint32_t>(i);
    out.bits[static_cast<std::size_t>(i - 1)] = static_cast<std::uint8_t>(
        aux_row(aux, boundary, q, [&](int x) { return s.uniform(row, static_cast<std::uint32_t>(x)); }));
  }
  return out;
}

// Spin-1/2 row state: the occupied columns of one row, increasing.
using Columns = std::vector<long>;

enum class CarryMode { PerVertex, Geometric };

struct SixVertexSampler {
  double delta1 = 0.25;
  double delta2 = 0.5;
  CarryMode mode = CarryMode::Geometric;
  long run_cap = hsvm::kDefaultRunCap;

  // Writes row `row` into `out` given the previous row `cur` and the incoming bit.
  void step(const Columns& cur, int incoming, long row, const rng::KeyedStream& stream,
            Columns& out) const {
    out.clear();
    const rng::KeyedStream vs = stream.with_tag(rng::Tag::Vertex);
    const rng::KeyedStream gs = stream.with_tag(rng::Tag::Geometric);
    const auto y = static_cast<std::uint32_t>(row);
    const double log_d2 = std::log(delta2);
    int carry = incoming;
    long x = 1;  // first column not yet processed
    for (std::size_t idx = 0; idx <= cur.size(); ++idx) {
      const bool last = idx == cur.size();
      const long next = last ? std::numeric_limits<long>::max() : cur[idx];
      if (carry == 1 && x < next) {
        // Carry crosses the empty gap [x, next).
        const long gap = last ? std::numeric_limits<long>::max() : next - x;
        long n = 0;
        if (mode == CarryMode::Geometric) {
          const double g = std::floor(std::log(gs.uniform(y, static_cast<std::uint32_t>(x))) / log_d2);
          if (g > static_cast<double>(run_cap)) throw NonTerminating("horizontal run exceeded the column cap");
          n = static_cast<long>(g);
        } else {
          while (n < gap && vs.uniform(y, static_cast<std::uint32_t>(x + n)) < delta2) {
            if (++n > run_cap) throw NonTerminating("horizontal run exceeded the column cap");
          }
        }
        if (n < gap) {
          out.push_back(x + n);
          carry = 0;
        }
      }
      if (last) break;
      x = next;
      if (carry == 1) {
        out.push_back(x);  // (1,1) -> (1,1)
      } else if (vs.uniform(y, static_cast<std::uint32_t>(x)) < delta1) {
        out.push_back(x);  // (1,0) -> (1,0)
      } else {
        carry = 1;  // (1,0) -> (0,1)
      }
      ++x;
    }
  }

  // Runs rows 1..T, calling `observe(row, columns)` after every row.
  template <class Observer>
  Columns run(const BoundaryBits& bits, long T, const rng::KeyedStream& stream,
              Observer&& observe) const {
    detail::require(T >= 1, "T must be >= 1");
    detail::require(bits.size() >= T, "boundary bits do not cover T rows");
    Columns cur, nxt;
    cur.reserve(static_cast<std::size_t>(T));
    nxt.reserve(static_cast<std::size_t>(T));
    for (long t = 1; t <= T; ++t) {
      step(cur, bits[t], t, stream, nxt);
      std::swap(cur, nxt);
      observe(t, static_cast<const Columns&>(cur));
    }
    return cur;
  }

  Columns run(const BoundaryBits& bits, long T, const rng::KeyedStream& stream) const {
    return run(bits, T, stream, [](long, const Columns&) {});
  }
};

inline SparseRowState to_sparse(const Columns& cols, long row) {
  SparseRowState s;
  s.row_index = row;
  s.occupied.reserve(cols.size());
  for (long c : cols) s.occupied.push_back({c, 1});
  return s;
}

// Every row state of a run of T rows.
inline std::vector<SparseRowState> run_six_vertex(const SixVertexParams& p, const BoundaryBits& bits,
                                                  long T, const rng::KeyedStream& stream,
                                                  CarryMode mode = CarryMode::Geometric) {
  p.validate();
  SixVertexSampler sampler{p.delta1, p.delta2, mode};
  std::vector<SparseRowState> traj;
  traj.reserve(static_cast<std::size_t>(T));
  sampler.run(bits, T, stream, [&](long t, const Columns& c) { traj.push_back(to_sparse(c, t)); });
  return traj;
}

// Number of paths at row Y whose column is strictly greater than X.
inline long height_L(const Columns& row, double X) {
  long n = 0;
  for (auto it = row.rbegin(); it != row.rend() && static_cast<double>(*it) > X; ++it) ++n;
  return n;
}

inline long height_H(const std::vector<SparseRowState>& traj, double X, long Y) {
  detail::require(Y >= 1 && Y <= static_cast<long>(traj.size()), "row Y out of range");
  long n = 0;
  for (const auto& c : traj[static_cast<std::size_t>(Y - 1)].occupied)
    if (static_cast<double>(c.column) > X) n += c.count;
  return n;
}

// `row_index,col:count,...`
inline std::string snapshot_line(const SparseRowState& s) {
  std::ostringstream os;
  os << s.row_index;
  for (const auto& c : s.occupied) os << ',' << c.column << ':' << c.count;
  return os.str();
}

}  // namespace kpz::sixvertex
