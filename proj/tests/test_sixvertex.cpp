#include <gtest/gtest.h>

#include <cmath>

#include "kpz/qmoment.hpp"
#include "kpz/sixvertex.hpp"

using namespace kpz;
using namespace kpz::sixvertex;

TEST(SixVertexTransition, Weights) {
  const double d1 = 0.25, d2 = 0.5;
  EXPECT_EQ(six_vertex_transition(0, 0, d1, d2).prob(0, 0), 1.0);
  EXPECT_EQ(six_vertex_transition(1, 1, d1, d2).prob(1, 1), 1.0);
  auto t = six_vertex_transition(1, 0, d1, d2);
  EXPECT_EQ(t.prob(1, 0), d1);
  EXPECT_EQ(t.prob(0, 1), 1.0 - d1);
  t = six_vertex_transition(0, 1, d1, d2);
  EXPECT_EQ(t.prob(0, 1), d2);
  EXPECT_EQ(t.prob(1, 0), 1.0 - d2);
  EXPECT_THROW(six_vertex_transition(1, 0, 0.0, 0.5), DomainError);
  EXPECT_THROW(six_vertex_transition(1, 0, 0.5, 1.0), DomainError);
}

TEST(GeneralizedTransition, Weights) {
  const double q = 0.5, b = 0.3;
  EXPECT_EQ(generalized_transition(0, 0, q, b).prob(0, 0), 1.0);
  EXPECT_NEAR(generalized_transition(2, 0, q, b).prob(1, 1), 0.75 * b, 1e-15);
  EXPECT_NEAR(generalized_transition(2, 0, q, b).prob(2, 0), 1.0 - 0.75 * b, 1e-15);
  EXPECT_EQ(generalized_transition(2, 1, q, b).prob(2, 1), b);
  EXPECT_EQ(generalized_transition(2, 1, q, b).prob(3, 0), 1.0 - b);
}

TEST(Boundary, SingleColumnGivesIidBernoulli) {
  const double b = 0.3;
  const long n = 100000;
  const auto bits = sample_boundary(BernoulliBoundary::uniform(1, b), 0.5, n, rng::KeyedStream(5, 0, rng::Tag::Generic));
  double ones = 0.0;
  double pairs[2][2] = {{0, 0}, {0, 0}};
  for (long i = 1; i <= n; ++i) {
    ones += bits[i];
    if (i > 1) pairs[bits[i - 1]][bits[i]] += 1.0;
  }
  EXPECT_NEAR(ones / n, b, 4.0 * std::sqrt(b * (1 - b) / n));
  // chi-square for independence of consecutive bits, 3 degrees of freedom
  double chi = 0.0;
  const double np = static_cast<double>(n - 1);
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c) {
      const double e = np * (a ? b : 1 - b) * (c ? b : 1 - b);
      chi += (pairs[a][c] - e) * (pairs[a][c] - e) / e;
    }
  EXPECT_LT(chi, 16.27);  // 0.999 quantile of chi^2_3
}

TEST(Boundary, StepAndEmptyLimits) {
  const rng::KeyedStream s(6, 0, rng::Tag::Generic);
  const auto ones = sample_boundary(BernoulliBoundary::uniform(3, 1.0), 0.5, 500, s);
  for (long i = 1; i <= 500; ++i) ASSERT_EQ(ones[i], 1);
  const auto zeros = sample_boundary(BernoulliBoundary::uniform(3, 1e-300), 0.5, 500, s);
  for (long i = 1; i <= 500; ++i) ASSERT_EQ(zeros[i], 0);
}

TEST(Boundary, TwoColumnsAreCorrelatedButHaveDensityB) {
  // With m = 2 the bits are no longer independent; only the long-run density is b.
  const double b = 0.5;
  const long n = 200000;
  const auto bits = sample_boundary(BernoulliBoundary::uniform(2, b), 0.5, n, rng::KeyedStream(8, 0, rng::Tag::Generic));
  double ones = 0.0;
  for (long i = n / 2; i <= n; ++i) ones += bits[i];
  EXPECT_NEAR(ones / (n / 2 + 1), b, 0.02);
}

TEST(Boundary, AuxiliaryStripConservesArrows) {
  const BernoulliBoundary bd{{0.4, 0.7, 0.2}};
  AuxColumnState aux{std::vector<long>(3, 0)};
  const rng::KeyedStream s(9, 0, rng::Tag::Boundary);
  long before = 0;
  for (std::uint32_t row = 1; row <= 2000; ++row) {
    const int out = aux_row(aux, bd, 0.5, [&](int x) { return s.uniform(row, static_cast<std::uint32_t>(x)); });
    long after = 0;
    for (long c : aux.counts) {
      ASSERT_GE(c, 0);
      after += c;
    }
    ASSERT_EQ(after - before, 1 - out);
    before = after;
  }
}

TEST(Sampler, StepDataConservesPaths) {
  const SixVertexParams p{0.25, 0.5};
  const auto traj = run_six_vertex(p, BoundaryBits::constant(3, 1), 3, rng::KeyedStream(1, 0, rng::Tag::Generic));
  ASSERT_EQ(traj.size(), 3u);
  for (long t = 1; t <= 3; ++t) EXPECT_EQ(traj[static_cast<std::size_t>(t - 1)].total(), t);
}

TEST(Sampler, SingleRowGeometricColumn) {
  const SixVertexParams p{0.25, 0.6};
  const int n = 100000;
  std::vector<double> freq(6, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto row = SixVertexSampler{p.delta1, p.delta2}.run(BoundaryBits::constant(1, 1), 1,
                                                              rng::KeyedStream(2, static_cast<std::uint32_t>(i), rng::Tag::Generic));
    ASSERT_EQ(row.size(), 1u);
    if (row[0] < 6) freq[static_cast<std::size_t>(row[0])] += 1.0 / n;
  }
  for (long c = 1; c < 6; ++c) {
    const double pc = std::pow(p.delta2, c - 1) * (1 - p.delta2);
    EXPECT_NEAR(freq[static_cast<std::size_t>(c)], pc, 4 * std::sqrt(pc * (1 - pc) / n));
  }
}

TEST(Sampler, SmallDeltasGiveStaircase) {
  const SixVertexSampler s{1e-12, 2e-12};
  const auto row = s.run(BoundaryBits::constant(20, 1), 20, rng::KeyedStream(3, 0, rng::Tag::Generic));
  ASSERT_EQ(row.size(), 20u);
  for (long i = 0; i < 20; ++i) EXPECT_EQ(row[static_cast<std::size_t>(i)], i + 1);
}

// Exact law of h_T(x) for T <= 4 against enumeration, for both carry modes.
TEST(Sampler, SmallSystemLawMatchesEnumeration) {
  const SixVertexParams p{0.25, 0.5};
  struct Case {
    long T, x;
    BernoulliBoundary bd;
  };
  const std::vector<Case> cases{{4, 2, BernoulliBoundary::uniform(1, 0.3)},
                                {3, 3, BernoulliBoundary::uniform(2, 0.7)},
                                {4, 1, BernoulliBoundary{{0.4, 0.6}}}};
  for (const auto& c : cases)
    for (auto mode : {CarryMode::Geometric, CarryMode::PerVertex}) {
      const auto exact = qmoment::brute_force_height_dist(c.T, c.x, p, c.bd);
      const int n = 200000;
      std::vector<double> freq(static_cast<std::size_t>(c.T + 1), 0.0);
      const SixVertexSampler s{p.delta1, p.delta2, mode};
      for (int i = 0; i < n; ++i) {
        const rng::KeyedStream st(4, static_cast<std::uint32_t>(i), rng::Tag::Generic);
        const auto bits = sample_boundary(c.bd, p.q(), c.T, st);
        freq[static_cast<std::size_t>(height_L(s.run(bits, c.T, st), c.x - 1.0))] += 1.0 / n;
      }
      for (std::size_t h = 0; h < freq.size(); ++h)
        EXPECT_NEAR(freq[h], exact[h], 4 * std::sqrt(exact[h] * (1 - exact[h]) / n) + 1e-12)
            << "T=" << c.T << " x=" << c.x << " h=" << h << " mode=" << static_cast<int>(mode);
    }
}

TEST(Height, BridgeAndBounds) {
  const SixVertexParams p{0.25, 0.5};
  const long T = 30;
  const auto traj = run_six_vertex(p, BoundaryBits::constant(T, 1), T, rng::KeyedStream(7, 0, rng::Tag::Generic));
  for (long Y = 1; Y <= T; ++Y) {
    EXPECT_EQ(height_H(traj, 0.0, Y), Y);
    EXPECT_EQ(height_H(traj, 1e9, Y), 0);
    long prev = Y;
    for (long X = 0; X <= 3 * T; ++X) {
      const long h = height_H(traj, static_cast<double>(X), Y);
      EXPECT_EQ(h, hsvm::height(traj[static_cast<std::size_t>(Y - 1)], X + 1));
      EXPECT_LE(h, prev);
      EXPECT_GE(h, 0);
      prev = h;
    }
  }
  EXPECT_THROW(height_H(traj, 0.0, 0), DomainError);
  EXPECT_THROW(height_H(traj, 0.0, T + 1), DomainError);
}

TEST(Snapshot, LineFormat) {
  hsvm::SparseRowState s;
  s.row_index = 4;
  s.occupied = {{1, 1}, {5, 2}};
  EXPECT_EQ(snapshot_line(s), "4,1:1,5:2");
  s.occupied.clear();
  EXPECT_EQ(snapshot_line(s), "4");
}

TEST(Sampler, Reproducible) {
  const SixVertexSampler s{0.25, 0.5};
  const rng::KeyedStream st(99, 3, rng::Tag::Generic);
  const auto bits = sample_boundary(BernoulliBoundary::uniform(2, 0.5), 0.5, 300, st);
  EXPECT_EQ(s.run(bits, 300, st), s.run(bits, 300, st));
}
