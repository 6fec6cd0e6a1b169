#pragma once

// Continuous-time ASEP on a finite window of the initial configuration.
//
// Every particle carries a clock of rate L + R; at a ring the particle tries
// to jump right with probability R / (L + R) and left otherwise, and the jump
// is dropped if the target is occupied. Only the initial sites within the
// cutoff window below the measurement point are populated.

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "kpz/error.hpp"
#include "kpz/rng.hpp"
#include "kpz/scaling.hpp"
#include "kpz/sixvertex.hpp"

namespace kpz::asep {

struct CutoffPolicy {
  double epsilon_tail = 1e-8;

  // Smallest W with P[Poisson((L + R) T) >= W / 2] < epsilon_tail.
  long window(double L, double R, double T) const {
    detail::require(epsilon_tail > 0.0 && epsilon_tail < 1.0, "epsilon_tail must lie in (0,1)");
    const double lambda = (L + R) * T;
    if (lambda <= 0.0) return 2;
    long k = static_cast<long>(std::floor(lambda));
    // P[N >= k] = P(k, lambda), the regularized lower incomplete gamma.
    while (boost::math::gamma_p(static_cast<double>(k), lambda) >= epsilon_tail) ++k;
    return 2 * k;
  }
};

struct AsepState {
  std::vector<long> positions;  // strictly increasing
  long left_cutoff = 0;         // leftmost populated initial site
  long window = 0;              // guard distance required below a measurement point
  double time = 0.0;
  std::uint64_t events = 0;
};

// Site 1 - i holds a particle iff bit i is 1, for i = 1..bits.size().
inline AsepState init_from_boundary(const sixvertex::BoundaryBits& bits, long window) {
  detail::require(window >= 0, "window must be >= 0");
  AsepState s;
  s.left_cutoff = 1 - bits.size();
  s.window = window;
  for (long i = bits.size(); i >= 1; --i)
    if (bits[i] == 1) s.positions.push_back(1 - i);
  return s;
}

// Initial rows needed so that sites down to min(x, 0) - window are populated.
inline long rows_for(long x, long window) { return window + std::max(0L, -x) + 1; }

inline void simulate(AsepState& state, double L, double R, double T, const rng::KeyedStream& stream) {
  detail::require(L >= 0.0 && R > L, "need R > L >= 0");
  detail::require(T >= 0.0, "T must be >= 0");
  auto& pos = state.positions;
  const std::size_t n = pos.size();
  if (n == 0) {
    state.time += T;
    return;
  }
  const double rate = (L + R) * static_cast<double>(n);
  const double p_right = R / (L + R);
  rng::SequentialStream events(stream.with_tag(rng::Tag::Asep));
  double t = 0.0;
  for (;;) {
    const rng::Block b = events.next_block();
    t -= std::log(rng::to_open_unit(b[0], b[1])) / rate;
    if (t > T) break;
    const double u = rng::to_open_unit(b[2], b[3]) * static_cast<double>(n);
    const auto i = std::min(static_cast<std::size_t>(u), n - 1);
    const bool right = (u - static_cast<double>(i)) < p_right;
    if (right) {
      if (i + 1 == n || pos[i + 1] != pos[i] + 1) ++pos[i];
    } else {
      if (i == 0 || pos[i - 1] != pos[i] - 1) --pos[i];
    }
    ++state.events;
  }
  state.time += T;
}

// Particles strictly to the right of x.
inline long current_J(const AsepState& state, double x) {
  if (std::floor(x) - static_cast<double>(state.window) < static_cast<double>(state.left_cutoff))
    throw CutoffViolated("measurement point too close to the truncated edge");
  const auto it = std::upper_bound(state.positions.begin(), state.positions.end(), x,
                                   [](double v, long p) { return v < static_cast<double>(p); });
  return static_cast<long>(state.positions.end() - it);
}

// Samples L(x + N, N) of the six-vertex model with delta1 = eps L, delta2 = eps R and
// N = floor(t / eps) rows.
inline long degenerate_from_six_vertex(double L, double R, double eps, double t, long x,
                                       const BernoulliBoundary& boundary,
                                       const rng::KeyedStream& stream) {
  detail::require(eps > 0.0 && eps * (L + R) < 1.0, "need eps (L + R) < 1");
  detail::require(L >= 0.0 && R > L, "need R > L >= 0");
  const long N = static_cast<long>(std::floor(t / eps));
  detail::require(N >= 1, "t / eps must be >= 1");
  const auto bits = sixvertex::sample_boundary(boundary, L / R, N, stream);
  sixvertex::SixVertexSampler sampler{eps * L, eps * R};
  const auto row = sampler.run(bits, N, stream);
  return sixvertex::height_L(row, static_cast<double>(x + N));
}

}  // namespace kpz::asep
