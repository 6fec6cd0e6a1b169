#pragma once

// Monte Carlo driver for the three fluctuation regimes: samples heights or
// currents along a ray, normalizes them and measures the KS distance to the
// limit law.

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kpz/asep.hpp"
#include "kpz/error.hpp"
#include "kpz/limits.hpp"
#include "kpz/rng.hpp"
#include "kpz/scaling.hpp"
#include "kpz/sixvertex.hpp"
#include "kpz/stats.hpp"
#include "kpz/version.hpp"

namespace kpz::harness {

using nlohmann::json;

struct ExperimentConfig {
  Model model = Model::SixVertex;
  SixVertexParams six_vertex;
  AsepParams asep;
  int m = 1;
  double b = 0.5;
  std::vector<double> column_drifts;  // d_j, BBP only; empty means zeros
  double slope_drift = 0.0;           // d, BBP only
  double eta = 1.2;                   // ignored in the BBP regime (eta_T = theta + d T^{-1/3})
  Regime regime = Regime::TW;
  std::vector<long> ladder{64, 256, 1024};
  long n_samples = 4000;
  std::uint64_t seed = 1;
  double epsilon_tail = 1e-8;  // ASEP cutoff
};

struct EcdfGrid {
  std::vector<double> s, ecdf, target;
};

struct SizeResult {
  long T = 0;
  long x = 0;                   // measurement column / site
  double eta_T = 0.0;
  CenterScale constants;
  std::vector<double> samples;  // normalized, ascending
  double raw_mean = 0.0;
  double raw_variance = 0.0;
  double ks = 0.0;
  EcdfGrid grid;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string target;
  std::vector<double> shifts;  // c_j, BBP only
  std::vector<SizeResult> sizes;
  double runtime_seconds = 0.0;
  int threads = 1;
};

inline void validate(const ExperimentConfig& c) {
  detail::require(c.m >= 1, "m must be >= 1");
  detail::require(c.b > 0.0 && c.b < 1.0, "b must lie in (0,1)");
  detail::require(!c.ladder.empty(), "T-ladder must not be empty");
  for (long T : c.ladder) detail::require(T >= 1, "ladder sizes must be >= 1");
  detail::require(c.n_samples >= 0, "n_samples must be >= 0");
  detail::require(c.column_drifts.empty() || static_cast<int>(c.column_drifts.size()) == c.m,
                  "need one drift per column");
  if (c.model == Model::SixVertex) c.six_vertex.validate();
  else c.asep.validate();
  if (c.regime == Regime::Gaussian) detail::require(c.column_drifts.empty(), "drifts are BBP only");
}

inline RegimeConstants constants_of(const ExperimentConfig& c) {
  return c.model == Model::SixVertex ? derive_six_vertex_constants(c.six_vertex, c.b)
                                     : derive_asep_constants(c.asep, c.b);
}

inline double slope_at(const ExperimentConfig& c, const RegimeConstants& k, long T) {
  if (c.regime != Regime::BBP) return c.eta;
  return k.theta + c.slope_drift * std::pow(static_cast<double>(T), -1.0 / 3.0);
}

inline CenterScale scalings_at(const ExperimentConfig& c, const RegimeConstants& k, double eta) {
  if (c.model == Model::Asep) {
    switch (c.regime) {
      case Regime::TW: return asep_tw_scaling(eta, c.b);
      case Regime::Gaussian: return asep_gaussian_scaling(eta, c.b);
      case Regime::BBP: return asep_tw_formula(eta);
    }
  }
  if (c.regime == Regime::BBP) return six_vertex_tw_formula(k, eta);
  return six_vertex_scalings(k, eta, c.regime);
}

inline double exponent_of(Regime r) { return r == Regime::Gaussian ? 0.5 : 1.0 / 3.0; }

// (center T - h) / (scale T^{1/3}) or T^{1/2} in the Gaussian regime.
inline double normalize(double h, double T, const CenterScale& cs, Regime r) {
  return (cs.center * T - h) / (cs.scale * std::pow(T, exponent_of(r)));
}

// b_{j,T} = b + d_j T^{-1/3}; refuses to clip.
inline BernoulliBoundary boundary_at(const ExperimentConfig& c, long T) {
  BernoulliBoundary bd = BernoulliBoundary::uniform(c.m, c.b);
  if (c.regime == Regime::BBP && !c.column_drifts.empty()) {
    const double f = std::pow(static_cast<double>(T), -1.0 / 3.0);
    for (int j = 0; j < c.m; ++j) {
      const double v = c.b + c.column_drifts[static_cast<std::size_t>(j)] * f;
      detail::require(v > 0.0 && v < 1.0, "drifted density leaves (0,1)");
      bd.b[static_cast<std::size_t>(j)] = v;
    }
  }
  return bd;
}

inline std::vector<double> shifts_of(const ExperimentConfig& c) {
  if (c.regime != Regime::BBP) return {};
  const std::vector<double> d = c.column_drifts.empty()
                                    ? std::vector<double>(static_cast<std::size_t>(c.m), 0.0)
                                    : c.column_drifts;
  return bbp_shifts(constants_of(c), c.slope_drift, d);
}

// Raw height of one trajectory: L(floor(eta T), T) or J_T(floor(eta T)).
inline double sample_height(const ExperimentConfig& c, long T, long x, const BernoulliBoundary& bd,
                            const rng::KeyedStream& stream) {
  if (c.model == Model::SixVertex) {
    const auto bits = sixvertex::sample_boundary(bd, c.six_vertex.q(), T, stream);
    const sixvertex::SixVertexSampler s{c.six_vertex.delta1, c.six_vertex.delta2};
    return static_cast<double>(sixvertex::height_L(s.run(bits, T, stream), static_cast<double>(x)));
  }
  const double L = c.asep.rateL, R = c.asep.rateR;
  const asep::CutoffPolicy policy{c.epsilon_tail};
  const long w = policy.window(L, R, static_cast<double>(T));
  const auto bits = sixvertex::sample_boundary(bd, L / R, asep::rows_for(x, w), stream);
  asep::AsepState st = asep::init_from_boundary(bits, w);
  asep::simulate(st, L, R, static_cast<double>(T), stream);
  return static_cast<double>(asep::current_J(st, static_cast<double>(x)));
}

// Runs f(i) for i in [0, n) on `threads` workers pulling indices from a shared
// counter. The first exception is rethrown after all workers stop.
inline void parallel_for(long n, int threads, const std::function<void(long)>& f) {
  threads = std::max(1, threads);
  if (threads == 1 || n <= 1) {
    for (long i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    for (long i; !failed && (i = next++) < n;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline std::string target_name(const ExperimentConfig& c) {
  switch (c.regime) {
    case Regime::TW: return "F_TW";
    case Regime::Gaussian: return "G_" + std::to_string(c.m);
    case Regime::BBP: return "F_BBP";
  }
  return "?";
}

// Target CDF tabulated on [-8, 6]; tables are cached per target.
inline std::shared_ptr<const stats::CdfTable> target_table(Regime r, int m, const std::vector<double>& c,
                                                           int threads = 1) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const stats::CdfTable>> cache;
  std::ostringstream key;
  key << std::setprecision(17) << static_cast<int>(r) << ':' << m;
  for (double v : c) key << ',' << v;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key.str()); it != cache.end()) return it->second;
  }
  std::function<double(double)> F;
  switch (r) {
    case Regime::TW: F = [](double s) { return limits::F_TW(s); }; break;
    case Regime::Gaussian: F = [m](double s) { return limits::G_m(s, m); }; break;
    case Regime::BBP: F = [c](double s) { return limits::F_BBP(s, c); }; break;
  }
  const double lo = -8.0, hi = 6.0, step = 0.05;
  auto table = std::make_shared<stats::CdfTable>();
  const auto n = static_cast<long>(std::lround((hi - lo) / step)) + 1;
  table->s.resize(static_cast<std::size_t>(n));
  table->F.resize(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](long i) {
    const double s = lo + static_cast<double>(i) * step;
    table->s[static_cast<std::size_t>(i)] = s;
    table->F[static_cast<std::size_t>(i)] = F(s);
  });
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key.str(), std::move(table)).first->second;
}

inline std::vector<double> default_grid() {
  std::vector<double> g;
  for (int i = -60; i <= 60; ++i) g.push_back(0.1 * i);
  return g;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult res;
  res.config = cfg;
  res.threads = threads;
  res.target = target_name(cfg);
  res.shifts = shifts_of(cfg);
  const RegimeConstants k = constants_of(cfg);
  const auto table = target_table(cfg.regime, cfg.m, res.shifts, threads);
  for (std::size_t lane = 0; lane < cfg.ladder.size(); ++lane) {
    SizeResult sr;
    sr.T = cfg.ladder[lane];
    sr.eta_T = slope_at(cfg, k, sr.T);
    sr.x = static_cast<long>(std::floor(sr.eta_T * static_cast<double>(sr.T)));
    sr.constants = scalings_at(cfg, k, sr.eta_T);
    const BernoulliBoundary bd = boundary_at(cfg, sr.T);
    std::vector<double> raw(static_cast<std::size_t>(cfg.n_samples));
    parallel_for(cfg.n_samples, threads, [&](long i) {
      const rng::KeyedStream stream(cfg.seed, static_cast<std::uint32_t>(i), rng::Tag::Generic,
                                    static_cast<std::uint32_t>(lane));
      raw[static_cast<std::size_t>(i)] = sample_height(cfg, sr.T, sr.x, bd, stream);
    });
    sr.samples.reserve(raw.size());
    for (double h : raw)
      sr.samples.push_back(normalize(h, static_cast<double>(sr.T), sr.constants, cfg.regime));
    std::sort(sr.samples.begin(), sr.samples.end());
    if (raw.size() >= 1) sr.raw_mean = stats::mean(raw);
    if (raw.size() >= 2) sr.raw_variance = stats::variance(raw);
    sr.grid.s = default_grid();
    for (double s : sr.grid.s) sr.grid.target.push_back((*table)(s));
    if (!sr.samples.empty()) {
      sr.ks = stats::ks_distance(sr.samples, [&](double s) { return (*table)(s); });
      sr.grid.ecdf = stats::ecdf_on_grid(sr.samples, sr.grid.s);
    } else {
      sr.grid.ecdf.assign(sr.grid.s.size(), 0.0);
    }
    res.sizes.push_back(std::move(sr));
  }
  res.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// Reference configurations of the phase-transition experiments.
inline ExperimentConfig six_vertex_reference(Regime r) {
  ExperimentConfig c;
  c.model = Model::SixVertex;
  c.six_vertex = {0.25, 0.5};
  c.b = 0.5;
  c.regime = r;
  c.ladder = {64, 256, 1024};
  switch (r) {
    case Regime::TW: c.m = 1; c.eta = 1.2; break;
    case Regime::Gaussian: c.m = 1; c.eta = 0.95; break;
    case Regime::BBP: c.m = 2; c.eta = constants_of(c).theta; break;
  }
  return c;
}

inline ExperimentConfig asep_reference(Regime r) {
  ExperimentConfig c;
  c.model = Model::Asep;
  c.asep = {0.5, 1.5};
  c.b = 0.5;
  c.regime = r;
  c.ladder = {16, 64, 256};
  switch (r) {
    case Regime::TW: c.m = 1; c.eta = 0.5; break;
    case Regime::Gaussian: c.m = 1; c.eta = -0.25; break;
    case Regime::BBP: c.m = 2; c.eta = 0.0; break;
  }
  return c;
}

// ---- serialization ----

inline Model model_from(const std::string& s) {
  if (s == "asep") return Model::Asep;
  if (s == "sixvertex") return Model::SixVertex;
  throw DomainError("unknown model: " + s);
}

inline Regime regime_from(const std::string& s) {
  if (s == "tw") return Regime::TW;
  if (s == "bbp") return Regime::BBP;
  if (s == "gaussian") return Regime::Gaussian;
  throw DomainError("unknown regime: " + s);
}

inline json to_json(const ExperimentConfig& c) {
  return {{"model", to_string(c.model)},
          {"delta1", c.six_vertex.delta1},
          {"delta2", c.six_vertex.delta2},
          {"L", c.asep.rateL},
          {"R", c.asep.rateR},
          {"m", c.m},
          {"b", c.b},
          {"column_drifts", c.column_drifts},
          {"slope_drift", c.slope_drift},
          {"eta", c.eta},
          {"regime", to_string(c.regime)},
          {"ladder", c.ladder},
          {"n_samples", c.n_samples},
          {"seed", c.seed},
          {"epsilon_tail", c.epsilon_tail}};
}

// Missing keys keep the defaults of `base`.
inline ExperimentConfig config_from_json(const json& j, ExperimentConfig base = {}) {
  ExperimentConfig c = std::move(base);
  try {
    if (j.contains("model")) c.model = model_from(j.at("model").get<std::string>());
    c.six_vertex.delta1 = j.value("delta1", c.six_vertex.delta1);
    c.six_vertex.delta2 = j.value("delta2", c.six_vertex.delta2);
    c.asep.rateL = j.value("L", c.asep.rateL);
    c.asep.rateR = j.value("R", c.asep.rateR);
    c.m = j.value("m", c.m);
    c.b = j.value("b", c.b);
    c.column_drifts = j.value("column_drifts", c.column_drifts);
    c.slope_drift = j.value("slope_drift", c.slope_drift);
    c.eta = j.value("eta", c.eta);
    if (j.contains("regime")) c.regime = regime_from(j.at("regime").get<std::string>());
    c.ladder = j.value("ladder", c.ladder);
    c.n_samples = j.value("n_samples", c.n_samples);
    c.seed = j.value("seed", c.seed);
    c.epsilon_tail = j.value("epsilon_tail", c.epsilon_tail);
  } catch (const json::exception& e) {
    throw DomainError(std::string("bad config: ") + e.what());
  }
  return c;
}

inline json to_json(const ExperimentResult& r, bool with_runtime = true) {
  json sizes = json::array();
  for (const auto& s : r.sizes) {
    sizes.push_back({{"T", s.T},
                     {"x", s.x},
                     {"eta_T", s.eta_T},
                     {"center", s.constants.center},
                     {"scale", s.constants.scale},
                     {"n_samples", s.samples.size()},
                     {"raw_mean", s.raw_mean},
                     {"raw_variance", s.raw_variance},
                     {"ks", s.ks},
                     {"grid", {{"s", s.grid.s}, {"ecdf", s.grid.ecdf}, {"target", s.grid.target}}}});
  }
  json j{{"schema_version", kVersion},
         {"config", to_json(r.config)},
         {"target", r.target},
         {"shifts", r.shifts},
         {"sizes", sizes}};
  if (with_runtime) {
    j["runtime_seconds"] = r.runtime_seconds;
    j["threads"] = r.threads;
  }
  return j;
}

inline std::filesystem::path csv_path_for(const std::filesystem::path& json_path) {
  auto p = json_path;
  return p.replace_extension(".csv");
}

// Writes `path` (JSON) and the raw normalized samples next to it as CSV.
inline void persist(const ExperimentResult& r, const std::filesystem::path& path) {
  std::ofstream js(path);
  if (!js) throw std::runtime_error("cannot open " + path.string());
  js << to_json(r).dump(2) << '\n';
  std::ofstream csv(csv_path_for(path));
  if (!csv) throw std::runtime_error("cannot open " + csv_path_for(path).string());
  csv << "T,index,value\n" << std::setprecision(17);
  for (const auto& s : r.sizes)
    for (std::size_t i = 0; i < s.samples.size(); ++i) csv << s.T << ',' << i << ',' << s.samples[i] << '\n';
  if (!js || !csv) throw std::runtime_error("write failed for " + path.string());
}

inline ExperimentResult load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("cannot parse " + path.string() + ": " + e.what());
  }
  ExperimentResult r;
  r.config = config_from_json(j.at("config"));
  r.target = j.at("target").get<std::string>();
  r.shifts = j.at("shifts").get<std::vector<double>>();
  r.runtime_seconds = j.value("runtime_seconds", 0.0);
  r.threads = j.value("threads", 1);
  std::map<long, std::size_t> by_T;
  for (const auto& s : j.at("sizes")) {
    SizeResult sr;
    sr.T = s.at("T").get<long>();
    sr.x = s.at("x").get<long>();
    sr.eta_T = s.at("eta_T").get<double>();
    sr.constants = {s.at("center").get<double>(), s.at("scale").get<double>()};
    sr.raw_mean = s.at("raw_mean").get<double>();
    sr.raw_variance = s.at("raw_variance").get<double>();
    sr.ks = s.at("ks").get<double>();
    sr.grid.s = s.at("grid").at("s").get<std::vector<double>>();
    sr.grid.ecdf = s.at("grid").at("ecdf").get<std::vector<double>>();
    sr.grid.target = s.at("grid").at("target").get<std::vector<double>>();
    by_T[sr.T] = r.sizes.size();
    r.sizes.push_back(std::move(sr));
  }
  std::ifstream csv(csv_path_for(path));
  if (csv) {
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
      std::istringstream ls(line);
      long T = 0;
      std::size_t i = 0;
      double v = 0.0;
      char c1 = 0, c2 = 0;
      if (!(ls >> T >> c1 >> i >> c2 >> v)) throw std::runtime_error("bad sample line: " + line);
      r.sizes.at(by_T.at(T)).samples.push_back(v);
    }
  }
  return r;
}

}  // namespace kpz::harness
