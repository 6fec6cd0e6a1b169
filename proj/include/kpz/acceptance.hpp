#pragma once

// End-to-end acceptance checks. Each criterion returns a verdict with a
// one-line summary; the acceptance binary and `kpz_cli check` print them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kpz/asep.hpp"
#include "kpz/harness.hpp"
#include "kpz/limits.hpp"
#include "kpz/qmoment.hpp"
#include "kpz/sixvertex.hpp"
#include "kpz/stats.hpp"

namespace kpz::acceptance {

struct Verdict {
  Verdict() = default;
  Verdict(int i, std::string n) : id(i), name(std::move(n)) {}

  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  int threads = 1;
  std::uint64_t seed = 20240601;
  bool verbose = false;
};

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline void log(const Options& o, const std::string& s) {
  if (o.verbose) std::fprintf(stderr, "  %s\n", s.c_str());
}

}  // namespace detail

inline Verdict exact_oracle(const Options&) {
  Verdict v{1, "exact-oracle agreement"};
  const SixVertexParams p{0.25, 0.5};
  double worst = 0.0;
  int cases = 0;
  for (int m = 0; m <= 2; ++m)
    for (double b : {0.3, 0.7}) {
      if (m == 0 && b == 0.7) continue;  // b is irrelevant for step data
      const BernoulliBoundary bd = BernoulliBoundary::uniform(m, b);
      const auto mm = qmoment::MomentModel::from(p, bd);
      for (long t = 1; t <= 3; ++t)
        for (long x = 1; x <= 4; ++x) {
          const auto law = qmoment::brute_force_height_dist(t, x, p, bd);
          for (int k = 1; k <= 2; ++k) {
            double exact = 0.0;
            for (std::size_t h = 0; h < law.size(); ++h)
              exact += law[h] * std::pow(p.q(), static_cast<double>(k) * static_cast<double>(h));
            const double c = qmoment::qmoment(k, x, t, mm).value;
            worst = std::max(worst, std::abs(c - exact));
            ++cases;
          }
        }
    }
  v.pass = worst < 1e-8;
  v.detail = std::to_string(cases) + " cases, max |delta| = " + detail::fmt("%.2e", worst);
  return v;
}

inline double inv_qpoch_real(double z, double q) {
  return 1.0 / qmoment::q_pochhammer(qmoment::cplx(z, 0.0), q, qmoment::kInfinite).real();
}

inline Verdict qlaplace(const Options& o) {
  Verdict v{2, "q-Laplace series vs Monte Carlo"};
  const SixVertexParams p{0.25, 0.5};
  const BernoulliBoundary bd = BernoulliBoundary::uniform(2, 0.5);
  const long t = 3, x = 1, n = 100000;
  const double q = p.q();
  const auto mm = qmoment::MomentModel::from(p, bd);
  std::vector<double> moments{1.0};
  for (int k = 1; k <= 3; ++k) moments.push_back(qmoment::qmoment(k, x, t, mm).value);
  std::vector<double> h(static_cast<std::size_t>(n));
  harness::parallel_for(n, o.threads, [&](long i) {
    const rng::KeyedStream s(o.seed, static_cast<std::uint32_t>(i), rng::Tag::Generic, 20);
    const auto bits = sixvertex::sample_boundary(bd, q, t, s);
    const sixvertex::SixVertexSampler sm{p.delta1, p.delta2};
    h[static_cast<std::size_t>(i)] = static_cast<double>(sixvertex::height_L(sm.run(bits, t, s), x - 1.0));
  });
  bool ok = true;
  std::ostringstream os;
  for (int pw : {1, 2}) {
    const double zeta = -std::pow(q, pw);
    const auto series = qmoment::qlaplace_series(zeta, moments, q, 1.0);
    std::vector<double> f;
    f.reserve(h.size());
    for (double hv : h) f.push_back(inv_qpoch_real(zeta * std::pow(q, hv), q));
    const double mc = stats::mean(f);
    const double se = std::sqrt(stats::variance(f) / static_cast<double>(n));
    const double gap = std::abs(series.value.real() - mc);
    const double allowed = 4.0 * se + series.tail_bound;
    ok = ok && gap <= allowed;
    os << "p=" << pw << ": |series-MC|=" << detail::fmt("%.2e", gap) << " <= "
       << detail::fmt("%.2e", allowed) << "; ";
  }
  v.pass = ok;
  v.detail = os.str();
  return v;
}

inline Verdict limit_laws(const Options& o) {
  Verdict v{3, "limit-law cross-validation"};
  double tw = 0.0, bbp = 0.0, g1 = 0.0, g23 = 0.0, mc_z = 0.0;
  for (double s = -6.0; s <= 4.0; s += 2.0) {
    const double a = limits::F_TW_detail(s).value;
    tw = std::max(tw, std::abs(a - limits::F_TW_airy(s)));
    bbp = std::max(bbp, std::abs(limits::F_BBP_detail(s, {}, 1.0).value - a));
  }
  for (double s = -5.0; s <= 5.0; s += 0.5) {
    g1 = std::max(g1, std::abs(limits::G_m_quad(s, 1) - limits::normal_cdf(s)));
    g1 = std::max(g1, std::abs(limits::G_m_det_detail(s, 1).value - limits::normal_cdf(s)));
  }
  for (int m : {2, 3})
    for (double s = -2.0; s <= 5.0; s += 1.0)
      g23 = std::max(g23, std::abs(limits::G_m_quad(s, m) - limits::G_m_det_detail(s, m).value));
  const long n = 1000000;
  const auto mc = limits::gue_max_eig_mc(2, n, o.seed);
  for (double s = -1.0; s <= 4.0; s += 0.5) {
    const double F = limits::G_m(s, 2);
    const double e = stats::ecdf_on_grid(mc, std::vector<double>{s})[0];
    const double se = std::sqrt(std::max(F * (1.0 - F), 1e-12) / static_cast<double>(n));
    mc_z = std::max(mc_z, std::abs(e - F) / se);
  }
  v.pass = tw < 1e-6 && bbp < 1e-8 && g1 < 1e-8 && g23 < 1e-5 && mc_z < 4.0;
  v.detail = "TW contour/Airy " + detail::fmt("%.1e", tw) + ", BBP(c=())/TW " + detail::fmt("%.1e", bbp) +
             ", G_1/Phi " + detail::fmt("%.1e", g1) + ", G_2,3 quad/det " + detail::fmt("%.1e", g23) +
             ", G_2 vs MC max z " + detail::fmt("%.2f", mc_z);
  return v;
}

inline std::string ks_list(const harness::ExperimentResult& r) {
  std::ostringstream os;
  for (std::size_t i = 0; i < r.sizes.size(); ++i)
    os << (i ? "," : "") << r.sizes[i].ks;
  return os.str();
}

inline bool decreasing(const harness::ExperimentResult& r) {
  for (std::size_t i = 1; i < r.sizes.size(); ++i)
    if (!(r.sizes[i].ks < r.sizes[i - 1].ks)) return false;
  return true;
}

inline double variance_slope(const harness::ExperimentResult& r) {
  std::vector<double> T, V;
  for (const auto& s : r.sizes) {
    T.push_back(static_cast<double>(s.T));
    V.push_back(s.raw_variance);
  }
  return stats::log_log_slope(T, V);
}

inline harness::ExperimentResult run_reference(harness::ExperimentConfig c, const Options& o, int salt) {
  c.seed = o.seed + static_cast<std::uint64_t>(salt);
  c.n_samples = 4000;
  auto r = harness::run_experiment(c, o.threads);
  detail::log(o, to_string(c.model) + " " + to_string(c.regime) + " KS [" + ks_list(r) + "] in " +
                     detail::fmt("%.0fs", r.runtime_seconds));
  return r;
}

inline Verdict six_vertex_transition(const Options& o) {
  Verdict v{4, "six-vertex phase transition"};
  const auto tw = run_reference(harness::six_vertex_reference(Regime::TW), o, 1);
  const auto ga = run_reference(harness::six_vertex_reference(Regime::Gaussian), o, 2);
  const auto bb = run_reference(harness::six_vertex_reference(Regime::BBP), o, 3);
  const bool a = tw.sizes.back().ks < 0.08 && decreasing(tw);
  const bool b = ga.sizes.back().ks < 0.05;
  const bool c = bb.sizes.back().ks < 0.10;
  v.pass = a && b && c;
  v.detail = "(a) TW KS [" + ks_list(tw) + "] " + (a ? "ok" : "FAIL") + "; (b) Gaussian KS " +
             detail::fmt("%.4f", ga.sizes.back().ks) + (b ? " ok" : " FAIL") + "; (c) BBP KS " +
             detail::fmt("%.4f", bb.sizes.back().ks) + (c ? " ok" : " FAIL");
  return v;
}

inline Verdict asep_transition(const Options& o) {
  Verdict v{5, "ASEP phase transition"};
  const auto tw = run_reference(harness::asep_reference(Regime::TW), o, 4);
  const auto ga = run_reference(harness::asep_reference(Regime::Gaussian), o, 5);
  const auto bb = run_reference(harness::asep_reference(Regime::BBP), o, 6);
  const double st = variance_slope(tw), sg = variance_slope(ga);
  const bool a = std::abs(st - 2.0 / 3.0) <= 0.15;
  const bool b = std::abs(sg - 1.0) <= 0.15;
  v.pass = a && b;
  v.detail = "TW variance slope " + detail::fmt("%.3f", st) + (a ? " ok" : " FAIL") +
             ", Gaussian variance slope " + detail::fmt("%.3f", sg) + (b ? " ok" : " FAIL") +
             "; KS TW [" + ks_list(tw) + "] Gaussian [" + ks_list(ga) + "] BBP [" + ks_list(bb) + "]";
  return v;
}

inline Verdict degeneration(const Options& o) {
  Verdict v{6, "six-vertex to ASEP degeneration"};
  const double L = 0.5, R = 1.5, t = 4.0;
  const long x = 0, n = 10000;
  const BernoulliBoundary bd = BernoulliBoundary::uniform(1, 0.5);
  const long w = asep::CutoffPolicy{}.window(L, R, t);
  std::vector<double> J(static_cast<std::size_t>(n));
  harness::parallel_for(n, o.threads, [&](long i) {
    const rng::KeyedStream s(o.seed, static_cast<std::uint32_t>(i), rng::Tag::Generic, 30);
    const auto bits = sixvertex::sample_boundary(bd, L / R, asep::rows_for(x, w), s);
    asep::AsepState st = asep::init_from_boundary(bits, w);
    asep::simulate(st, L, R, t, s);
    J[static_cast<std::size_t>(i)] = static_cast<double>(asep::current_J(st, static_cast<double>(x)));
  });
  std::sort(J.begin(), J.end());
  std::vector<double> ks;
  std::uint32_t lane = 31;
  for (double eps : {0.1, 0.02}) {
    std::vector<double> h(static_cast<std::size_t>(n));
    harness::parallel_for(n, o.threads, [&](long i) {
      const rng::KeyedStream s(o.seed, static_cast<std::uint32_t>(i), rng::Tag::Generic, lane);
      h[static_cast<std::size_t>(i)] =
          static_cast<double>(asep::degenerate_from_six_vertex(L, R, eps, t, x, bd, s));
    });
    std::sort(h.begin(), h.end());
    ks.push_back(stats::ks_two_sample(h, J));
    ++lane;
  }
  v.pass = ks[1] < ks[0] && ks[1] < 0.05;
  v.detail = "two-sample KS eps=0.1: " + detail::fmt("%.4f", ks[0]) + ", eps=0.02: " + detail::fmt("%.4f", ks[1]);
  return v;
}

inline Verdict engine_properties(const Options& o) {
  Verdict v{7, "engine properties"};
  double worst = 0.0;
  for (double s = -6.0; s <= 4.0; s += 1.0) {
    worst = std::max(worst, limits::F_TW_detail(s, 1.0).node_doubling_delta);
    worst = std::max(worst, limits::F_BBP_detail(s, {0.0, 0.0}, 1.0, 1.0).node_doubling_delta);
    worst = std::max(worst, limits::G_m_det_detail(s + 2.0, 2, 1.0).node_doubling_delta);
  }
  bool mono = true;
  mono = mono && harness::target_table(Regime::TW, 1, {}, o.threads)->monotone();
  mono = mono && harness::target_table(Regime::BBP, 2, {0.0, 0.0}, o.threads)->monotone();
  for (int m = 1; m <= 3; ++m) mono = mono && harness::target_table(Regime::Gaussian, m, {}, o.threads)->monotone();

  bool same = true;
  for (auto base : {harness::six_vertex_reference(Regime::TW), harness::asep_reference(Regime::Gaussian)}) {
    base.ladder = {16, 32};
    base.n_samples = 300;
    base.seed = o.seed;
    const auto a = harness::run_experiment(base, 1);
    const auto b = harness::run_experiment(base, std::max(2, o.threads + 1));
    same = same && harness::to_json(a, false).dump() == harness::to_json(b, false).dump();
    for (std::size_t i = 0; i < a.sizes.size(); ++i) same = same && a.sizes[i].samples == b.sizes[i].samples;
  }
  v.pass = worst < 1e-8 && mono && same;
  v.detail = "max doubling delta " + detail::fmt("%.1e", worst) + ", CDF tables monotone: " +
             (mono ? "yes" : "no") + ", thread-count determinism: " + (same ? "yes" : "no");
  return v;
}

inline std::vector<std::function<Verdict(const Options&)>> all_criteria() {
  return {exact_oracle, qlaplace, limit_laws, six_vertex_transition, asep_transition, degeneration,
          engine_properties};
}

inline Verdict run_one(int id, const Options& o) {
  const auto crit = all_criteria();
  kpz::detail::require(id >= 1 && id <= static_cast<int>(crit.size()), "criterion id out of range");
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = crit[static_cast<std::size_t>(id - 1)](o);
  } catch (const std::exception& e) {
    v.id = id;
    v.name = "criterion " + std::to_string(id);
    v.pass = false;
    v.detail = std::string("error: ") + e.what();
  }
  v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return v;
}

inline std::string format(const Verdict& v) {
  return std::string(v.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(v.id) + " (" + v.name +
         "): " + v.detail + " [" + detail::fmt("%.1fs", v.seconds) + "]";
}

}  // namespace kpz::acceptance
