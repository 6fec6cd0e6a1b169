#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "kpz/kpz.hpp"

namespace fs = std::filesystem;
using namespace kpz;

namespace {

struct Common {
  std::uint64_t seed = 1;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "RNG seed");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output directory (stdout when omitted)");
}

// Writes `text` to <out>/<name>, or to stdout without --out.
void emit(const Common& c, const std::string& name, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(c.out);
  const fs::path p = fs::path(c.out) / name;
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot open " + p.string());
  f << text;
  std::cerr << "wrote " << p.string() << '\n';
}

struct SimArgs {
  std::string model = "sixvertex";
  double delta1 = 0.25, delta2 = 0.5, L = 0.5, R = 1.5, b = 0.5, time = 16.0;
  int m = 1;
  long rows = 16, trajectory = 0, x = 0;
};

void simulate(const SimArgs& a, const Common& c) {
  const BernoulliBoundary bd = BernoulliBoundary::uniform(a.m, a.b);
  const rng::KeyedStream stream(c.seed, static_cast<std::uint32_t>(a.trajectory), rng::Tag::Generic);
  std::ostringstream snap;
  nlohmann::json state;
  if (harness::model_from(a.model) == Model::SixVertex) {
    const SixVertexParams p{a.delta1, a.delta2};
    p.validate();
    const auto bits = sixvertex::sample_boundary(bd, p.q(), a.rows, stream);
    const auto traj = sixvertex::run_six_vertex(p, bits, a.rows, stream);
    for (const auto& row : traj) snap << sixvertex::snapshot_line(row) << '\n';
    std::vector<long> cols;
    for (const auto& cell : traj.back().occupied) cols.push_back(cell.column);
    state = {{"model", "sixvertex"}, {"rows", a.rows}, {"columns", cols},
             {"boundary_bits", bits.bits}, {"seed", c.seed}, {"trajectory", a.trajectory}};
  } else {
    const AsepParams p{a.L, a.R};
    p.validate();
    const long w = asep::CutoffPolicy{}.window(a.L, a.R, a.time);
    const auto bits = sixvertex::sample_boundary(bd, p.q(), asep::rows_for(a.x, w), stream);
    auto st = asep::init_from_boundary(bits, w);
    asep::simulate(st, a.L, a.R, a.time, stream);
    snap << "0";
    for (long pos : st.positions) snap << ',' << pos << ":1";
    snap << '\n';
    state = {{"model", "asep"}, {"time", st.time}, {"positions", st.positions},
             {"left_cutoff", st.left_cutoff}, {"window", st.window}, {"events", st.events},
             {"current_at_x", asep::current_J(st, static_cast<double>(a.x))}, {"x", a.x},
             {"seed", c.seed}, {"trajectory", a.trajectory}};
  }
  emit(c, "trajectory.txt", snap.str());
  if (!c.out.empty()) emit(c, "state.json", state.dump(2) + "\n");
}

struct MomentArgs {
  double delta1 = 0.25, delta2 = 0.5, b = 0.5;
  int m = 1, kmax = 3;
  long t = 3, x = 1;
};

void moments(const MomentArgs& a, const Common& c) {
  const SixVertexParams p{a.delta1, a.delta2};
  const auto mm = qmoment::MomentModel::from(p, BernoulliBoundary::uniform(a.m, a.b));
  std::ostringstream os;
  os << "k,x,t,value,imag_residual,nodes,doubling_delta\n" << std::setprecision(17);
  for (int k = 1; k <= a.kmax; ++k) {
    const auto r = qmoment::qmoment(k, a.x, a.t, mm);
    os << k << ',' << a.x << ',' << a.t << ',' << r.value << ',' << r.imag_residual << ',' << r.nodes << ','
       << r.doubling_delta << '\n';
  }
  emit(c, "moments.csv", os.str());
}

struct DistArgs {
  double smin = -6.0, smax = 4.0, step = 0.5;
  std::vector<double> c;  // one BBP shift vector
  std::vector<int> gm{1, 2};
  bool tw = true;
};

void dist(const DistArgs& a, const Common& c) {
  detail::require(a.smax >= a.smin && a.step > 0.0, "invalid grid");
  std::vector<double> grid;
  for (long i = 0;; ++i) {
    const double s = a.smin + static_cast<double>(i) * a.step;
    if (s > a.smax + 1e-9) break;
    grid.push_back(s);
  }
  const bool bbp = !a.c.empty();
  const std::size_t cols = (a.tw ? 1 : 0) + (bbp ? 1 : 0) + a.gm.size();
  std::vector<std::vector<double>> val(grid.size(), std::vector<double>(cols));
  harness::parallel_for(static_cast<long>(grid.size()), c.threads, [&](long i) {
    const double s = grid[static_cast<std::size_t>(i)];
    auto& row = val[static_cast<std::size_t>(i)];
    std::size_t j = 0;
    if (a.tw) row[j++] = limits::F_TW(s);
    if (bbp) row[j++] = limits::F_BBP(s, a.c);
    for (int m : a.gm) row[j++] = limits::G_m(s, m);
  });
  std::ostringstream os;
  os << 's';
  if (a.tw) os << ",F_TW";
  if (bbp) {
    os << ",F_BBP(";
    for (std::size_t i = 0; i < a.c.size(); ++i) os << (i ? ";" : "") << a.c[i];
    os << ')';
  }
  for (int m : a.gm) os << ",G_" << m;
  os << '\n' << std::setprecision(12);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << grid[i];
    for (double v : val[i]) os << ',' << v;
    os << '\n';
  }
  emit(c, "dist.csv", os.str());
}

struct ExpArgs {
  std::string config, model, regime;
  double eta = std::numeric_limits<double>::quiet_NaN();
  long n_samples = -1;
  std::vector<long> ladder;
};

void experiment(const ExpArgs& a, Common& c, bool seed_given) {
  harness::ExperimentConfig cfg;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw std::runtime_error("cannot open " + a.config);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw DomainError(std::string("bad config file: ") + e.what());
    }
    const Model model = harness::model_from(j.value("model", std::string("sixvertex")));
    const Regime regime = harness::regime_from(j.value("regime", std::string("tw")));
    cfg = harness::config_from_json(j, model == Model::Asep ? harness::asep_reference(regime)
                                                            : harness::six_vertex_reference(regime));
  }
  if (!a.model.empty() || !a.regime.empty()) {
    const Model model = a.model.empty() ? cfg.model : harness::model_from(a.model);
    const Regime regime = a.regime.empty() ? cfg.regime : harness::regime_from(a.regime);
    if (a.config.empty())
      cfg = model == Model::Asep ? harness::asep_reference(regime) : harness::six_vertex_reference(regime);
    cfg.model = model;
    cfg.regime = regime;
  }
  if (!std::isnan(a.eta)) cfg.eta = a.eta;
  if (a.n_samples >= 0) cfg.n_samples = a.n_samples;
  if (!a.ladder.empty()) cfg.ladder = a.ladder;
  if (seed_given) cfg.seed = c.seed;
  const auto r = harness::run_experiment(cfg, c.threads);
  if (c.out.empty()) {
    std::cout << harness::to_json(r).dump(2) << '\n';
    return;
  }
  fs::create_directories(c.out);
  const fs::path p = fs::path(c.out) / "experiment.json";
  harness::persist(r, p);
  std::cerr << "wrote " << p.string() << " and " << harness::csv_path_for(p).string() << '\n';
  for (const auto& s : r.sizes)
    std::cout << "T=" << s.T << " n=" << s.samples.size() << " KS(" << r.target << ")=" << s.ks
              << " raw_variance=" << s.raw_variance << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KPZ-class sampler and limit-law toolkit " + std::string(kVersion)};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Common common;

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "run one trajectory and dump its state");
  add_common(sim, common);
  sim->add_option("--model", sa.model, "sixvertex | asep")->check(CLI::IsMember({"sixvertex", "asep"}));
  sim->add_option("--delta1", sa.delta1);
  sim->add_option("--delta2", sa.delta2);
  sim->add_option("--L", sa.L, "ASEP left rate");
  sim->add_option("--R", sa.R, "ASEP right rate");
  sim->add_option("--m", sa.m, "generalized columns")->check(CLI::NonNegativeNumber);
  sim->add_option("--b", sa.b, "column density");
  sim->add_option("--rows", sa.rows, "six-vertex rows");
  sim->add_option("--time", sa.time, "ASEP time");
  sim->add_option("--x", sa.x, "ASEP measurement site");
  sim->add_option("--trajectory", sa.trajectory, "trajectory index within the seed");

  MomentArgs ma;
  auto* mom = app.add_subcommand("moments", "q-moments E[q^{k h_t(x)}] as CSV");
  add_common(mom, common);
  mom->add_option("--delta1", ma.delta1);
  mom->add_option("--delta2", ma.delta2);
  mom->add_option("--m", ma.m)->check(CLI::NonNegativeNumber);
  mom->add_option("--b", ma.b);
  mom->add_option("--t", ma.t);
  mom->add_option("--x", ma.x);
  mom->add_option("--kmax", ma.kmax)->check(CLI::Range(1, 3));

  DistArgs da;
  auto* dis = app.add_subcommand("dist", "limit-law CDF tables as CSV");
  add_common(dis, common);
  dis->add_option("--smin", da.smin);
  dis->add_option("--smax", da.smax);
  dis->add_option("--step", da.step);
  dis->add_option("--c", da.c, "BBP shifts c_1..c_m")->delimiter(',');
  dis->add_option("--gm", da.gm, "GUE sizes m for G_m")->delimiter(',');

  ExpArgs ea;
  auto* exp = app.add_subcommand("experiment", "regime experiment from a JSON config");
  add_common(exp, common);
  exp->add_option("--config", ea.config, "JSON config file")->check(CLI::ExistingFile);
  exp->add_option("--model", ea.model)->check(CLI::IsMember({"sixvertex", "asep"}));
  exp->add_option("--regime", ea.regime)->check(CLI::IsMember({"tw", "bbp", "gaussian"}));
  exp->add_option("--eta", ea.eta);
  exp->add_option("--n-samples", ea.n_samples);
  exp->add_option("--ladder", ea.ladder)->delimiter(',');

  int only = 0;
  bool verbose = false;
  auto* chk = app.add_subcommand("check", "run the acceptance criteria");
  add_common(chk, common);
  chk->add_option("--only", only, "single criterion id")->check(CLI::Range(1, 7));
  chk->add_flag("--verbose", verbose);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) simulate(sa, common);
    else if (*mom) moments(ma, common);
    else if (*dis) dist(da, common);
    else if (*exp) experiment(ea, common, exp->count("--seed") > 0);
    else if (*chk) {
      acceptance::Options o{common.threads, common.seed, verbose};
      if (chk->count("--seed") == 0) o.seed = acceptance::Options{}.seed;
      bool all = true;
      std::ostringstream report;
      for (int id = 1; id <= 7; ++id) {
        if (only && id != only) continue;
        const auto v = acceptance::run_one(id, o);
        const std::string line = acceptance::format(v);
        std::cout << line << '\n' << std::flush;
        report << line << '\n';
        all = all && v.pass;
      }
      if (!common.out.empty()) emit(common, "check.txt", report.str());
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
