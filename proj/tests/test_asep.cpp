#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <boost/math/distributions/poisson.hpp>
#include <algorithm>
#include <cmath>
#include <map>

#include "kpz/asep.hpp"

using namespace kpz;
using namespace kpz::asep;

TEST(Cutoff, WindowIsSmallestSatisfyingTailBound) {
  const CutoffPolicy p{1e-8};
  for (double T : {1.0, 4.0, 64.0}) {
    const long w = p.window(0.5, 1.5, T);
    const boost::math::poisson_distribution<double> pois(2.0 * T);
    // P[N >= w/2] via the complementary CDF at w/2 - 1
    EXPECT_LT(boost::math::cdf(boost::math::complement(pois, w / 2 - 1.0)), 1e-8);
    EXPECT_GE(boost::math::cdf(boost::math::complement(pois, w / 2 - 2.0)), 1e-8);
  }
}

TEST(Init, FromBoundaryBits) {
  auto s = init_from_boundary(sixvertex::BoundaryBits::constant(5, 1), 3);
  EXPECT_EQ(s.positions, (std::vector<long>{-4, -3, -2, -1, 0}));
  EXPECT_EQ(s.left_cutoff, -4);
  s = init_from_boundary(sixvertex::BoundaryBits::constant(5, 0), 3);
  EXPECT_TRUE(s.positions.empty());
}

TEST(Init, SingleColumnDensity) {
  const long n = 100000;
  const auto bits = sixvertex::sample_boundary(BernoulliBoundary::uniform(1, 0.3), 1.0 / 3.0, n,
                                               rng::KeyedStream(1, 0, rng::Tag::Generic));
  const auto s = init_from_boundary(bits, 10);
  EXPECT_NEAR(static_cast<double>(s.positions.size()) / n, 0.3, 4 * std::sqrt(0.21 / n));
  for (long p : s.positions) ASSERT_LE(p, 0);
}

TEST(Simulate, EmptyUnchanged) {
  AsepState s;
  simulate(s, 0.5, 1.5, 10.0, rng::KeyedStream(1, 0, rng::Tag::Generic));
  EXPECT_TRUE(s.positions.empty());
  EXPECT_EQ(s.time, 10.0);
}

TEST(Simulate, TotallyAsymmetricFreeParticleIsPoisson) {
  const double T = 3.0;
  const int n = 100000;
  std::map<long, double> freq;
  for (int i = 0; i < n; ++i) {
    AsepState s;
    s.positions = {0};
    simulate(s, 0.0, 1.0, T, rng::KeyedStream(2, static_cast<std::uint32_t>(i), rng::Tag::Generic));
    freq[s.positions[0]] += 1.0 / n;
  }
  const boost::math::poisson_distribution<double> pois(T);
  for (long k = 0; k <= 8; ++k) {
    const double p = boost::math::pdf(pois, static_cast<double>(k));
    EXPECT_NEAR(freq[k], p, 4 * std::sqrt(p * (1 - p) / n)) << k;
  }
}

TEST(Simulate, FreeParticleMoments) {
  const double L = 0.5, R = 1.5, T = 5.0;
  const int n = 100000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    AsepState s;
    s.positions = {0};
    simulate(s, L, R, T, rng::KeyedStream(3, static_cast<std::uint32_t>(i), rng::Tag::Generic));
    const double x = static_cast<double>(s.positions[0]);
    s1 += x;
    s2 += x * x;
  }
  const double mean = s1 / n, var = s2 / n - mean * mean;
  const double v = (R + L) * T;
  EXPECT_NEAR(mean, (R - L) * T, 4 * std::sqrt(v / n));
  // sd of the sample variance ~ sqrt((mu4 - v^2)/n), mu4 = 3v^2 + v for a compound Poisson walk with unit steps
  EXPECT_NEAR(var, v, 4 * std::sqrt((2 * v * v + v) / n));
}

// Two particles started at {0,1} with L = 0, R = 1: the law at time T is
// exp(T Q) for the generator on displacements (d1, d2), truncated at d <= K.
TEST(Simulate, TwoParticlesMatchGeneratorExponential) {
  const int K = 14;
  const double T = 0.7;
  auto idx = [&](int d1, int d2) { return d1 * (K + 1) + d2; };
  const int N = (K + 1) * (K + 1);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(N, N);
  for (int d1 = 0; d1 <= K; ++d1)
    for (int d2 = 0; d2 <= K; ++d2) {
      const int i = idx(d1, d2);
      // back particle at d1, front particle at 1 + d2
      if (d1 + 1 < 1 + d2) {
        Q(i, i) -= 1.0;
        if (d1 + 1 <= K) Q(i, idx(d1 + 1, d2)) += 1.0;
      }
      Q(i, i) -= 1.0;
      if (d2 + 1 <= K) Q(i, idx(d1, d2 + 1)) += 1.0;
    }
  const Eigen::MatrixXd P = (Q * T).exp();
  const int n = 200000;
  std::map<std::pair<long, long>, double> freq;
  for (int i = 0; i < n; ++i) {
    AsepState s;
    s.positions = {0, 1};
    simulate(s, 0.0, 1.0, T, rng::KeyedStream(4, static_cast<std::uint32_t>(i), rng::Tag::Generic));
    ASSERT_LT(s.positions[0], s.positions[1]);
    freq[{s.positions[0], s.positions[1] - 1}] += 1.0 / n;
  }
  for (auto [d1, d2] : std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 1}, {0, 2}, {1, 2}}) {
    const double p = P(idx(0, 0), idx(d1, d2));
    EXPECT_NEAR((freq[{d1, d2}]), p, 4 * std::sqrt(p * (1 - p) / n)) << d1 << "," << d2;
  }
}

TEST(Simulate, ExclusionConservationAndReproducibility) {
  const long w = CutoffPolicy{}.window(0.5, 1.5, 20.0);
  const rng::KeyedStream st(5, 0, rng::Tag::Generic);
  const auto bits = sixvertex::sample_boundary(BernoulliBoundary::uniform(2, 0.5), 1.0 / 3.0, rows_for(0, w), st);
  AsepState a = init_from_boundary(bits, w);
  const std::size_t n0 = a.positions.size();
  AsepState b = a;
  for (int k = 0; k < 20; ++k) {
    simulate(a, 0.5, 1.5, 1.0, st.with_tag(rng::Tag::Generic));
    for (std::size_t i = 1; i < a.positions.size(); ++i) ASSERT_LT(a.positions[i - 1], a.positions[i]);
    ASSERT_EQ(a.positions.size(), n0);
  }
  AsepState c = b;
  simulate(b, 0.5, 1.5, 20.0, st);
  simulate(c, 0.5, 1.5, 20.0, st);
  EXPECT_EQ(b.positions, c.positions);
  EXPECT_GT(b.events, 0u);
}

TEST(Current, Counting) {
  AsepState s;
  s.positions = {-1, 2, 5};
  s.left_cutoff = -100;
  EXPECT_EQ(current_J(s, 1.0), 2);
  EXPECT_EQ(current_J(s, 1.5), 2);
  EXPECT_EQ(current_J(s, 5.0), 0);
  AsepState e;
  e.left_cutoff = -10;
  EXPECT_EQ(current_J(e, 0.0), 0);
}

TEST(Current, StepDataAtTimeZero) {
  const auto s = init_from_boundary(sixvertex::BoundaryBits::constant(20, 1), 5);
  EXPECT_EQ(current_J(s, 0.0), 0);
  EXPECT_EQ(current_J(s, -3.0), 3);
  EXPECT_THROW(current_J(s, -15.0), CutoffViolated);
}

TEST(Degeneration, EmptyBoundaryGivesZero) {
  const BernoulliBoundary none = BernoulliBoundary::uniform(1, 1e-300);
  for (std::uint32_t i = 0; i < 50; ++i)
    EXPECT_EQ(degenerate_from_six_vertex(0.5, 1.5, 0.1, 4.0, 0, none, rng::KeyedStream(6, i, rng::Tag::Generic)), 0);
  EXPECT_THROW(degenerate_from_six_vertex(0.5, 1.5, 0.5, 4.0, 0, none, rng::KeyedStream(6, 0, rng::Tag::Generic)),
               DomainError);
}

TEST(Degeneration, TotallyAsymmetricCaseTrend) {
  const double R = 1.0, t = 4.0;
  const long n = 4000;
  const BernoulliBoundary bd = BernoulliBoundary::uniform(1, 0.5);
  const long w = CutoffPolicy{}.window(0.0, R, t);
  std::vector<double> J, ks;
  for (long i = 0; i < n; ++i) {
    const rng::KeyedStream st(8, static_cast<std::uint32_t>(i), rng::Tag::Generic);
    AsepState s = init_from_boundary(sixvertex::sample_boundary(bd, 0.0, rows_for(0, w), st), w);
    simulate(s, 0.0, R, t, st);
    J.push_back(static_cast<double>(current_J(s, 0.0)));
  }
  std::sort(J.begin(), J.end());
  std::uint32_t lane = 1;
  for (double eps : {0.25, 0.02}) {
    std::vector<double> h;
    for (long i = 0; i < n; ++i)
      h.push_back(static_cast<double>(
          degenerate_from_six_vertex(0.0, R, eps, t, 0, bd, rng::KeyedStream(8, static_cast<std::uint32_t>(i), rng::Tag::Generic, lane))));
    std::sort(h.begin(), h.end());
    // two-sample KS on integer data
    double d = 0.0;
    for (double x = 0; x <= 20; ++x) {
      const double a = static_cast<double>(std::upper_bound(J.begin(), J.end(), x) - J.begin()) / n;
      const double b = static_cast<double>(std::upper_bound(h.begin(), h.end(), x) - h.begin()) / n;
      d = std::max(d, std::abs(a - b));
    }
    ks.push_back(d);
    ++lane;
  }
  EXPECT_LT(ks[1], ks[0]);
}
