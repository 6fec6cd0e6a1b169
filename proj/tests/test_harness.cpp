#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "kpz/harness.hpp"

using namespace kpz;
using namespace kpz::harness;

namespace fs = std::filesystem;

TEST(Normalize, Centering) {
  const CenterScale cs{0.3, 0.7};
  EXPECT_EQ(normalize(0.3 * 1000.0, 1000.0, cs, Regime::TW), 0.0);
}

TEST(Normalize, CubeRootScaling) {
  const CenterScale cs{0.3, 0.7};
  const double dev = 5.0;
  const double a = normalize(0.3 * 100 - dev, 100, cs, Regime::TW);
  const double b = normalize(0.3 * 400 - dev, 400, cs, Regime::TW);
  EXPECT_NEAR(b / a, std::pow(4.0, -1.0 / 3.0), 1e-12);
  const double g = normalize(0.3 * 400 - dev, 400, cs, Regime::Gaussian);
  EXPECT_NEAR(g, dev / (0.7 * 20.0), 1e-12);
}

TEST(Config, ReferenceRegimesAreConsistent) {
  for (auto r : {Regime::TW, Regime::Gaussian, Regime::BBP}) {
    for (const auto& c : {six_vertex_reference(r), asep_reference(r)}) {
      const auto k = constants_of(c);
      const auto cs = scalings_at(c, k, slope_at(c, k, c.ladder.back()));
      EXPECT_GT(cs.scale, 0.0);
      EXPECT_GT(cs.center, 0.0);
    }
  }
  EXPECT_NEAR(six_vertex_reference(Regime::BBP).eta, 25.0 / 24.0, 1e-14);
}

TEST(Config, BbpDriftsAndShifts) {
  auto c = six_vertex_reference(Regime::BBP);
  EXPECT_EQ(shifts_of(c), (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(target_name(c), "F_BBP");
  c.column_drifts = {1.0, -1.0};
  const auto bd = boundary_at(c, 1000);
  EXPECT_NEAR(bd.b[0], 0.6, 1e-12);
  EXPECT_NEAR(bd.b[1], 0.4, 1e-12);
  c.column_drifts = {10.0, 0.0};
  EXPECT_THROW(boundary_at(c, 8), DomainError);
  auto g = six_vertex_reference(Regime::Gaussian);
  EXPECT_EQ(target_name(g), "G_1");
}

TEST(Config, JsonRoundTripAndOverrides) {
  auto c = asep_reference(Regime::Gaussian);
  c.seed = 123;
  c.ladder = {8, 16};
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  const auto o = config_from_json(nlohmann::json{{"eta", -0.1}, {"n_samples", 7}}, c);
  EXPECT_EQ(o.eta, -0.1);
  EXPECT_EQ(o.n_samples, 7);
  EXPECT_EQ(o.model, Model::Asep);
  EXPECT_THROW(config_from_json(nlohmann::json{{"model", "tasep"}}), DomainError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"m", "two"}}), DomainError);
}

TEST(Run, SampleCountsAndKsRange) {
  auto c = six_vertex_reference(Regime::Gaussian);
  c.ladder = {16, 32};
  c.n_samples = 200;
  const auto r = run_experiment(c, 2);
  ASSERT_EQ(r.sizes.size(), 2u);
  for (const auto& s : r.sizes) {
    EXPECT_EQ(s.samples.size(), 200u);
    EXPECT_GE(s.ks, 0.0);
    EXPECT_LE(s.ks, 1.0);
    EXPECT_TRUE(std::is_sorted(s.samples.begin(), s.samples.end()));
    EXPECT_EQ(s.grid.s.size(), s.grid.ecdf.size());
    EXPECT_EQ(s.x, static_cast<long>(std::floor(0.95 * s.T)));
  }
}

TEST(Run, DeterministicAcrossThreadCounts) {
  for (auto c : {six_vertex_reference(Regime::BBP), asep_reference(Regime::TW)}) {
    c.ladder = {16, 24};
    c.n_samples = 150;
    const auto a = run_experiment(c, 1);
    const auto b = run_experiment(c, 4);
    EXPECT_EQ(to_json(a, false).dump(), to_json(b, false).dump());
    for (std::size_t i = 0; i < a.sizes.size(); ++i) EXPECT_EQ(a.sizes[i].samples, b.sizes[i].samples);
  }
}

TEST(Run, SeedChangesSamples) {
  auto c = six_vertex_reference(Regime::TW);
  c.ladder = {16};
  c.n_samples = 50;
  const auto a = run_experiment(c);
  c.seed += 1;
  const auto b = run_experiment(c);
  EXPECT_NE(a.sizes[0].samples, b.sizes[0].samples);
}

// Near-step data in the TW regime: fluctuations approach Tracy-Widom.
TEST(Run, NearStepDataTracyWidomTrend) {
  auto c = six_vertex_reference(Regime::TW);
  c.b = 0.999;
  c.ladder = {32, 128, 512};
  c.n_samples = 1500;
  const auto r = run_experiment(c);
  EXPECT_LT(r.sizes[1].ks, r.sizes[0].ks);
  EXPECT_LT(r.sizes[2].ks, r.sizes[1].ks);
  // Spread of the normalized samples approaches the F_TW standard deviation.
  constexpr double kTwSd = 0.9018;
  double prev = 1e9;
  for (const auto& sz : r.sizes) {
    const double gap = std::abs(std::sqrt(stats::variance(sz.samples)) - kTwSd);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 0.2 * kTwSd);
}

TEST(Persist, RoundTripIsBitExact) {
  auto c = asep_reference(Regime::Gaussian);
  c.ladder = {8, 16};
  c.n_samples = 100;
  const auto r = run_experiment(c);
  const fs::path dir = fs::temp_directory_path() / "kpz_persist_test";
  fs::create_directories(dir);
  const fs::path p = dir / "result.json";
  persist(r, p);
  EXPECT_TRUE(fs::exists(csv_path_for(p)));
  const auto back = load(p);
  ASSERT_EQ(back.sizes.size(), r.sizes.size());
  for (std::size_t i = 0; i < r.sizes.size(); ++i) {
    EXPECT_EQ(back.sizes[i].ks, r.sizes[i].ks);
    EXPECT_EQ(back.sizes[i].samples, r.sizes[i].samples);
    EXPECT_EQ(back.sizes[i].raw_variance, r.sizes[i].raw_variance);
  }
  EXPECT_EQ(to_json(back).dump(), to_json(r).dump());
  std::ifstream in(p);
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("schema_version").get<std::string>(), kVersion);
  fs::remove_all(dir);
}

TEST(Persist, EmptyResultIsValid) {
  auto c = six_vertex_reference(Regime::TW);
  c.ladder = {8};
  c.n_samples = 0;
  const auto r = run_experiment(c);
  const fs::path dir = fs::temp_directory_path() / "kpz_persist_empty";
  fs::create_directories(dir);
  persist(r, dir / "r.json");
  const auto back = load(dir / "r.json");
  ASSERT_EQ(back.sizes.size(), 1u);
  EXPECT_TRUE(back.sizes[0].samples.empty());
  EXPECT_THROW(load(dir / "missing.json"), std::runtime_error);
  fs::remove_all(dir);
}

TEST(Parallel, PropagatesErrors) {
  EXPECT_THROW(parallel_for(100, 3, [](long i) {
                 if (i == 42) throw NotConverged("boom");
               }),
               NotConverged);
}
