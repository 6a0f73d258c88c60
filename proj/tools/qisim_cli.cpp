// qisim_cli: run sweeps, dump trajectories and Fock traces, print derived
// quantities.  Exit 0 on success, 1 on configuration errors, 2 on runtime
// errors.  Data goes to files; progress goes to stderr.

#include "qisim/qisim.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace {

using namespace qisim;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Overrides {
  std::optional<std::string> config_path, mode, trials, seed, out;
  std::vector<std::pair<std::string, std::optional<std::string>>> params{
      {"N_S", {}}, {"kappa", {}}, {"N_B", {}}, {"eta", {}}, {"K", {}}, {"epsilon", {}}, {"M", {}}, {"qcb", {}}};
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "key = value configuration file");
  app->add_option("--trials", o.trials, "Monte Carlo trials per estimate");
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--out", o.out, "output CSV path");
  for (auto& [key, val] : o.params) app->add_option("--" + key, val, "override " + key);
}

RunConfig load(const Overrides& o) {
  RunConfig c;
  if (o.config_path) {
    std::ifstream f(*o.config_path);
    if (!f) throw ConfigError("cannot read config file " + *o.config_path, 0);
    std::stringstream ss;
    ss << f.rdbuf();
    c = parse_config(ss.str());
  }
  if (o.mode) set_config_key(c, "mode", *o.mode);
  if (o.trials) set_config_key(c, "trials", *o.trials);
  if (o.seed) set_config_key(c, "seed", *o.seed);
  if (o.out) set_config_key(c, "out", *o.out);
  for (const auto& [key, val] : o.params)
    if (val) set_config_key(c, key, *val);
  try {
    c.params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), 0);
  }
  return c;
}

bool wants(const RunConfig& c, const std::string& r) {
  for (const auto& x : c.receivers)
    if (x == r) return true;
  return false;
}

std::string seed_comment(const RunConfig& c) {
  return "seed=" + std::to_string(c.seed) + " trials=" + std::to_string(c.trials);
}

void push_estimate(std::vector<double>& row, const std::optional<ErrorEstimate>& e) {
  if (e) row.insert(row.end(), {e->p_hat, e->ci_low, e->ci_high});
  else row.insert(row.end(), {kNaN, kNaN, kNaN});
}

void run_sweep(const RunConfig& c, bool fig2b) {
  SweepSpec spec;
  spec.mode = fig2b ? SweepMode::Fig2b : SweepMode::Fig2a;
  spec.base = c.params;
  spec.values = fig2b ? c.N_S_grid : c.M_grid;
  spec.qcb_target = c.qcb;
  spec.trials = c.trials;
  spec.seed = c.seed;
  spec.run_sfg = wants(c, "sfg");
  spec.run_ffsfg = wants(c, "ffsfg");

  Table t;
  t.comments.push_back(seed_comment(c));
  if (fig2b) t.header = {"N_S", "M"};
  else t.header = {"M"};
  for (const char* h : {"p_sfg", "ci_lo", "ci_hi", "p_ffsfg", "ci_lo", "ci_hi", "p_opa", "p_hom", "p_helstrom", "p_qcb"})
    t.header.emplace_back(h);

  // one value at a time so progress can be reported
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    SweepSpec one = spec;
    one.values = {spec.values[i]};
    one.seed = derive_seed(spec.seed, i);
    std::cerr << "qisim: " << (fig2b ? "N_S = " : "M = ") << spec.values[i] << " (" << i + 1 << "/"
              << spec.values.size() << ")\n";
    const SweepRow r = sweep(one).front();
    std::vector<double> row;
    if (fig2b) row = {r.value, r.modes};
    else row = {r.modes};
    push_estimate(row, r.sfg);
    push_estimate(row, r.ffsfg);
    row.insert(row.end(), {r.p_opa, r.p_hom, r.p_helstrom, r.p_qcb});
    t.rows.push_back(row);
  }
  emit_csv(t, c.out);
}

std::string suffixed(const std::string& path, const std::string& suffix) {
  const std::filesystem::path p(path);
  const std::string stem = p.stem().string(), ext = p.has_extension() ? p.extension().string() : ".csv";
  return (p.parent_path() / (stem + suffix + ext)).string();
}

void run_figS1(const RunConfig& c) {
  const int cutoffs[3] = {4, 4, 3};
  for (int M = 1; M <= 3; ++M) {
    std::cerr << "qisim: Fock evolution M = " << M << "\n";
    const FockConfig fc = FockConfig::quarter_period_run(M, cutoffs[M - 1], c.params.g);
    const auto samples = fock_evolve(0.0025, 0.002, cplx{-0.0015, 0.0}, fc, c.params.g);
    Table t;
    t.header = {"t", "C_re", "C_im", "b_re", "b_im", "n_b", "n_si", "F_re", "F_im", "G_re", "G_im", "n_s", "n_i"};
    for (const auto& s : samples) {
      const auto& m = s.moments;
      t.rows.push_back({s.t, m.C.real(), m.C.imag(), m.b.real(), m.b.imag(), m.n_b, m.n_si, m.F.real(), m.F.imag(),
                        m.G.real(), m.G.imag(), m.n_s, m.n_i});
    }
    emit_csv(t, suffixed(c.out, "_M" + std::to_string(M)));
  }
}

void run_trajectory(const RunConfig& c) {
  Rng rng = stream_rng(c.seed, 0);
  const auto tr = run_trial(c.params, Receiver::FFSFG, hypothesis_from(c.h_true), rng);
  Table t;
  t.comments.push_back("seed=" + std::to_string(c.seed) + " h_true=" + std::to_string(c.h_true) +
                       " initial_guess=" + std::to_string(to_int(tr.initial_guess)));
  t.header = {"k", "r_k", "N_b", "N_E", "p0", "p1", "h_tilde"};
  for (const auto& r : tr.cycles)
    t.rows.push_back({static_cast<double>(r.k), r.r_k, static_cast<double>(r.N_b), static_cast<double>(r.N_E), r.p0,
                      r.p1, static_cast<double>(to_int(r.h_tilde))});
  emit_csv(t, c.out);
}

void run_bounds(const RunConfig& c) {
  Table t;
  t.header = {"M", "N_T", "N_T_coh", "N_T_therm", "p_helstrom", "p_qcb", "p_hom", "p_opa"};
  for (double M : c.M_grid) {
    ScenarioParams p = c.params;
    p.modes = M;
    const Schedule s = build_schedule(p);
    const double NT = M * p.kappa * p.N_S / p.N_B;
    t.rows.push_back({M, NT, s.N_T_coh, s.N_T_therm, helstrom_coherent_vs_vacuum(NT).error_probability,
                      qcb_qi(p).error_probability, homodyne_coherent_error(NT).error_probability,
                      opa_qi_error(p).error_probability});
  }
  emit_csv(t, c.out);
}

void print_derived(const RunConfig& c) {
  const auto& p = c.params;
  const Schedule s = build_schedule(p);
  std::cout << "C_p = " << format_double(phase_sensitive_cross_correlation(p)) << '\n'
            << "K = " << s.K << '\n'
            << "epsilon = " << format_double(s.epsilon) << '\n'
            << "N_T_coh = " << format_double(s.N_T_coh) << '\n'
            << "N_T_therm = " << format_double(s.N_T_therm) << '\n'
            << "QCB = " << format_double(qcb_qi(p).error_probability) << '\n';
  for (const auto& w : p.regime_warnings()) std::cout << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-illumination SFG / FF-SFG receiver simulator"};
  app.require_subcommand(1);
  Overrides run_o, bounds_o, validate_o;
  auto* run = app.add_subcommand("run", "run an experiment mode and write CSV");
  add_common(run, run_o);
  run->add_option("--mode", run_o.mode, "fig2a | fig2b | figS1 | trajectory | bounds");
  auto* bnd = app.add_subcommand("bounds", "write closed-form bounds over the M grid");
  add_common(bnd, bounds_o);
  auto* val = app.add_subcommand("validate", "check a configuration and print derived quantities");
  add_common(val, validate_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  RunConfig cfg;
  try {
    if (*run) cfg = load(run_o);
    else if (*bnd) cfg = load(bounds_o);
    else cfg = load(validate_o);
  } catch (const std::exception& e) {
    std::cerr << "qisim: config error: " << e.what() << '\n';
    return 1;
  }

  try {
    // fail before a long run rather than after it
    const auto dir = std::filesystem::path(cfg.out).parent_path();
    if (!*val && !dir.empty() && !std::filesystem::is_directory(dir))
      throw std::runtime_error("output directory " + dir.string() + " does not exist");
    if (*val) {
      print_derived(cfg);
    } else if (*bnd || cfg.mode == "bounds") {
      run_bounds(cfg);
    } else if (cfg.mode == "fig2a" || cfg.mode == "fig2b") {
      run_sweep(cfg, cfg.mode == "fig2b");
    } else if (cfg.mode == "figS1") {
      run_figS1(cfg);
    } else if (cfg.mode == "trajectory") {
      run_trajectory(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "qisim: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
