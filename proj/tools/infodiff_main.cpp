// infodiff: information-diffusion games on networks.
//
// Subcommands: generate (graphs), predict (closed-form stable states),
// simulate (agent-based ensembles vs. theory), sweep (parameter scans),
// stability (fixed-point classification), invert (payoff constraints from an
// observed stable state).
//
// Exit codes: 0 success, 2 flag parse error, 3 invalid parameters /
// degenerate cases, 4 runtime failures (I/O, generator stalls).

#include <CLI11.hpp>
#include <json.hpp>

#include <infodiff/ess.hpp>
#include <infodiff/game.hpp>
#include <infodiff/graph.hpp>
#include <infodiff/rng.hpp>
#include <infodiff/sim.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ess = infodiff::ess;
namespace game = infodiff::game;
namespace net = infodiff::net;
namespace sim = infodiff::sim;

using game::PayoffMatrix;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

void emit_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + out_path);
  f << text;
}

struct Options {
  // graph source
  std::string family;
  std::string edges;
  uint32_t n = 1000;
  int k = 20;
  int m = 10;
  double kavg = 20.0;
  // game
  int pm = 1;
  double uff = 0.8, ufn = 0.6, unn = 0.4;
  double alpha = 0.1;
  std::string rule;
  std::string ba_log_base = "e";
  // execution
  int runs = 100;
  int regen_every = 500;
  uint64_t seed = 1;
  double initial_pf = 0.5;
  int64_t max_gens = 2000;
  int window = 50;
  double tol = 5e-3;
  std::string format = "table";
  std::string out;
  std::string traj_out;
  // sweep
  std::string axis;
  std::vector<double> values;
  // stability query / inversion
  double pf_query = 0.0;
  double pff_query = 0.0;
  double p_star = 0.5;
  std::string invert_mode = "exact";

  // presence trackers for options whose default must not silently apply
  CLI::Option* m_opt = nullptr;
  CLI::Option* kavg_opt = nullptr;
  CLI::Option* rule_opt = nullptr;
  CLI::Option* uff_opt = nullptr;
  CLI::Option* k_opt = nullptr;
  CLI::Option* pf_opt = nullptr;
  CLI::Option* pff_opt = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

void add_source_options(CLI::App* cmd, Options& o, bool allow_edges) {
  auto* fam = cmd->add_option("--family", o.family, "Graph family: regular|er|ba")
                  ->check(CLI::IsMember({"regular", "er", "ba"}));
  cmd->add_option("--n", o.n, "Number of nodes")->check(CLI::PositiveNumber);
  o.k_opt = cmd->add_option("--k", o.k, "Degree (regular family)")->check(CLI::PositiveNumber);
  o.m_opt = cmd->add_option("--m", o.m, "Attachment count (ba family)")->check(CLI::PositiveNumber);
  o.kavg_opt =
      cmd->add_option("--kavg", o.kavg, "Mean degree (er family)")->check(CLI::PositiveNumber);
  cmd->add_option("--ba-log-base", o.ba_log_base,
                  "Log base in the scale-free moment rule: e|10 (default e)")
      ->check(CLI::IsMember({"e", "10"}));
  if (allow_edges) {
    auto* edg = cmd->add_option("--edges", o.edges, "Edge-list file to load instead of generating");
    fam->excludes(edg);
    edg->excludes(fam);
  }
}

void add_payoff_options(CLI::App* cmd, Options& o) {
  auto* pm = cmd->add_option("--pm", o.pm, "Payoff preset 1..4")->check(CLI::Range(1, 4));
  auto* uf = cmd->add_option("--uff", o.uff, "Payoff for a forward-forward edge");
  auto* un = cmd->add_option("--ufn", o.ufn, "Payoff for a forward/not-forward edge");
  auto* nn = cmd->add_option("--unn", o.unn, "Payoff for a not-forward pair edge");
  uf->needs(un)->needs(nn);
  un->needs(uf);
  nn->needs(uf);
  pm->excludes(uf)->excludes(un)->excludes(nn);
  o.uff_opt = uf;
}

void add_exec_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--alpha", o.alpha, "Selection intensity in (0,1]");
  o.rule_opt = cmd->add_option("--rule", o.rule, "Update rule: im|bd|db")
                   ->check(CLI::IsMember({"im", "bd", "db"}));
  cmd->add_option("--runs", o.runs, "Ensemble size")->check(CLI::PositiveNumber);
  cmd->add_option("--regen-every", o.regen_every, "Regenerate the graph every R runs")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--initial-pf", o.initial_pf, "Initial forwarding fraction");
  cmd->add_option("--max-gens", o.max_gens, "Generation cap (one generation = N events)");
  cmd->add_option("--window", o.window, "Steadiness window in generations");
  cmd->add_option("--tol", o.tol, "Steadiness tolerance on the window means");
}

void add_output_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--format", o.format, "Output format: table|record")
      ->check(CLI::IsMember({"table", "record"}));
  cmd->add_option("--out", o.out, "Write the report here instead of stdout");
}

PayoffMatrix resolve_payoff(const Options& o) {
  if (given(o.uff_opt)) return PayoffMatrix(o.uff, o.ufn, o.unn);
  return PayoffMatrix::preset(o.pm);
}

ess::LogBase resolve_log_base(const Options& o) {
  return o.ba_log_base == "10" ? ess::LogBase::Base10 : ess::LogBase::Natural;
}

// Mean degree of the preferential-attachment generator's output, which is
// exact for the clique-seeded construction: m(m-1)/2 + m(n-m) edges.
double ba_mean_degree(uint32_t n, int m) {
  return (static_cast<double>(m) * (m - 1) + 2.0 * m * (static_cast<double>(n) - m)) /
         static_cast<double>(n);
}

struct SourceContext {
  std::string kind;  // regular | er | ba | edges
  net::Graph loaded;
  net::LoadReport load_report;
  std::optional<net::DegreeStats> loaded_stats;
  double degree_param = 0.0;  // k / kavg / m / measured mean degree
  uint32_t n = 0;
};

SourceContext resolve_source(const Options& o) {
  SourceContext sc;
  if (!o.edges.empty()) {
    sc.kind = "edges";
    sc.loaded = net::load_edge_list_file(o.edges, &sc.load_report);
    sc.loaded_stats = net::degree_stats(sc.loaded);
    sc.degree_param = sc.loaded_stats->mean_degree;
    sc.n = sc.loaded.node_count();
    return sc;
  }
  if (o.family.empty())
    throw std::invalid_argument("a graph source is required: --family or --edges");
  sc.kind = o.family;
  sc.n = o.n;
  if (o.family == "regular")
    sc.degree_param = o.k;
  else if (o.family == "er")
    sc.degree_param = o.kavg;
  else
    sc.degree_param = o.m;
  return sc;
}

// Theory dispatch: exact-degree formula for regular graphs, degree-moment
// formula with the family's kappa otherwise (measured moments for loaded
// graphs).
ess::EssResult compute_theory(const Options& o, const SourceContext& sc, const PayoffMatrix& U) {
  if (sc.kind == "regular") return ess::ess_uniform(U, o.k);
  if (sc.kind == "er") return ess::ess_er(U, o.kavg);
  if (sc.kind == "ba") {
    const double kbar = given(o.m_opt) || !given(o.kavg_opt) ? ba_mean_degree(o.n, o.m) : o.kavg;
    return ess::ess_ba(U, kbar, o.n, resolve_log_base(o));
  }
  return ess::ess_nonuniform(U, *sc.loaded_stats);
}

ess::DegreeDescriptor resolve_descriptor(const Options& o, const SourceContext& sc) {
  if (sc.kind == "regular") return ess::DegreeDescriptor::uniform(o.k);
  net::DegreeStats s;
  if (sc.kind == "er") {
    s.mean_degree = o.kavg;
    s.second_moment = o.kavg * (o.kavg + 1.0);
  } else if (sc.kind == "ba") {
    const double kbar = given(o.m_opt) || !given(o.kavg_opt) ? ba_mean_degree(o.n, o.m) : o.kavg;
    const double logn = resolve_log_base(o) == ess::LogBase::Base10
                            ? std::log10(static_cast<double>(o.n))
                            : std::log(static_cast<double>(o.n));
    s.mean_degree = kbar;
    s.second_moment = kbar * kbar * logn / 4.0;
    s.exponent_hint = 3.0;
  } else {
    return ess::DegreeDescriptor::from_stats(*sc.loaded_stats);
  }
  return ess::DegreeDescriptor::from_stats(s);
}

sim::UpdateRule resolve_rule(const Options& o, const SourceContext& sc) {
  if (given(o.rule_opt)) {
    if (o.rule == "im") return sim::UpdateRule::IM;
    if (o.rule == "bd") return sim::UpdateRule::BD;
    return sim::UpdateRule::DB;
  }
  // Default pairing: imitation on uniform-degree graphs, birth-death on
  // heterogeneous ones (the settings each closed-form system describes).
  return sc.kind == "regular" ? sim::UpdateRule::IM : sim::UpdateRule::BD;
}

sim::GraphSource make_graph_source(const Options& o, const SourceContext& sc) {
  if (sc.kind == "edges") return sim::GraphSource::fixed(sc.loaded);
  if (sc.kind == "regular") {
    const uint32_t n = o.n;
    const uint32_t k = static_cast<uint32_t>(o.k);
    return sim::GraphSource::generator(
        [n, k](uint64_t seed) { return net::build_regular(n, k, seed); });
  }
  if (sc.kind == "er") {
    const uint32_t n = o.n;
    const double kavg = o.kavg;
    return sim::GraphSource::generator(
        [n, kavg](uint64_t seed) { return net::build_erdos_renyi(n, kavg, seed); });
  }
  const uint32_t n = o.n;
  const uint32_t m = static_cast<uint32_t>(o.m);
  return sim::GraphSource::generator(
      [n, m](uint64_t seed) { return net::build_barabasi_albert(n, m, seed); });
}

sim::SimConfig make_sim_config(const Options& o, sim::UpdateRule rule, const PayoffMatrix& U) {
  sim::SimConfig cfg;
  cfg.rule = rule;
  cfg.alpha = o.alpha;
  cfg.payoff = U;
  cfg.initial_pf = o.initial_pf;
  cfg.max_steps = o.max_gens;
  cfg.window = o.window;
  cfg.steady_tol = o.tol;
  cfg.seed = o.seed;
  return cfg;
}

ordered_json payoff_json(const PayoffMatrix& U) {
  return {{"u_ff", U.u_ff}, {"u_fn", U.u_fn}, {"u_nn", U.u_nn}};
}

ordered_json source_json(const Options& o, const SourceContext& sc) {
  ordered_json j;
  if (sc.kind == "edges") {
    j["edges"] = o.edges;
    j["nodes"] = sc.loaded.node_count();
    j["edge_count"] = sc.loaded.edge_count();
    j["dropped_self_loops"] = sc.load_report.dropped_self_loops;
    j["dropped_duplicates"] = sc.load_report.dropped_duplicates;
    j["mean_degree"] = sc.loaded_stats->mean_degree;
    j["kappa"] = sc.loaded_stats->kappa();
  } else {
    j["family"] = sc.kind;
    j["n"] = o.n;
    if (sc.kind == "regular") j["k"] = o.k;
    if (sc.kind == "er") j["kavg"] = o.kavg;
    if (sc.kind == "ba") {
      j["m"] = o.m;
      j["mean_degree"] = ba_mean_degree(o.n, o.m);
      j["log_base"] = o.ba_log_base;
    }
  }
  return j;
}

ordered_json theory_json(const ess::EssResult& r) {
  ordered_json fps = ordered_json::array();
  for (const auto& fp : r.fixed_points)
    fps.push_back({{"p_f", fp.p_f}, {"p_ff", fp.p_ff}, {"stability", ess::to_string(fp.stability)}});
  return {{"regime", game::to_string(r.regime)},
          {"selected_ess", r.selected_ess},
          {"fixed_points", fps}};
}

ordered_json ensemble_json(const sim::EnsembleResult& e) {
  return {{"runs", e.runs},
          {"regen_every", e.regen_every},
          {"mean_final_pf", e.mean_final_pf},
          {"std_final_pf", e.std_final_pf},
          {"per_run_final", e.per_run_final}};
}

ordered_json sim_config_json(const Options& o, sim::UpdateRule rule, const PayoffMatrix& U) {
  return {{"rule", sim::to_string(rule)}, {"alpha", o.alpha},
          {"payoff", payoff_json(U)},     {"initial_pf", o.initial_pf},
          {"max_gens", o.max_gens},       {"window", o.window},
          {"tol", o.tol},                 {"runs", o.runs},
          {"regen_every", o.regen_every}, {"seed", o.seed}};
}

std::string dump_record(const ordered_json& j) { return j.dump(2) + "\n"; }

// One simulate-style experiment: ensemble plus (when available) theory.
struct ExperimentReport {
  SourceContext sc;
  sim::UpdateRule rule;
  std::optional<ess::EssResult> theory;
  std::string theory_error;
  sim::EnsembleResult ensemble;
};

ExperimentReport run_experiment(const Options& o, const PayoffMatrix& U) {
  ExperimentReport rep;
  rep.sc = resolve_source(o);
  rep.rule = resolve_rule(o, rep.sc);
  try {
    rep.theory = compute_theory(o, rep.sc, U);
  } catch (const std::exception& e) {
    // A loaded graph may fall outside the formula's domain (kappa <= 2);
    // report the simulation alone in that case.
    if (rep.sc.kind != "edges") throw;
    rep.theory_error = e.what();
  }
  const sim::GraphSource src = make_graph_source(o, rep.sc);
  const sim::SimConfig cfg = make_sim_config(o, rep.rule, U);
  rep.ensemble = sim::run_ensemble(src, cfg, o.runs, o.regen_every);
  return rep;
}

ordered_json experiment_record(const Options& o, const PayoffMatrix& U,
                               const ExperimentReport& rep) {
  ordered_json rec;
  rec["command"] = "simulate";
  rec["source"] = source_json(o, rep.sc);
  rec["config"] = sim_config_json(o, rep.rule, U);
  if (rep.theory)
    rec["theory"] = theory_json(*rep.theory);
  else
    rec["theory_error"] = rep.theory_error;
  rec["simulation"] = ensemble_json(rep.ensemble);
  if (rep.theory)
    rec["comparison"] = {
        {"gap", std::abs(rep.ensemble.mean_final_pf - rep.theory->selected_ess)}};
  return rec;
}

const char* kExperimentTableHeader =
    "source,n,degree_param,rule,alpha,u_ff,u_fn,u_nn,runs,seed,theory_ess,sim_mean,sim_std,gap\n";

std::string experiment_table_row(const Options& o, const PayoffMatrix& U,
                                 const ExperimentReport& rep) {
  std::string row;
  row += rep.sc.kind + "," + std::to_string(rep.sc.n) + "," + fmt_g(rep.sc.degree_param) + "," +
         sim::to_string(rep.rule) + "," + fmt_g(o.alpha) + "," + fmt_g(U.u_ff) + "," +
         fmt_g(U.u_fn) + "," + fmt_g(U.u_nn) + "," + std::to_string(o.runs) + "," +
         std::to_string(o.seed) + ",";
  if (rep.theory) {
    row += fmt_g(rep.theory->selected_ess) + "," + fmt_g(rep.ensemble.mean_final_pf) + "," +
           fmt_g(rep.ensemble.std_final_pf) + "," +
           fmt_g(std::abs(rep.ensemble.mean_final_pf - rep.theory->selected_ess));
  } else {
    row += "," + fmt_g(rep.ensemble.mean_final_pf) + "," + fmt_g(rep.ensemble.std_final_pf) + ",";
  }
  row += "\n";
  return row;
}

// ---------------------------------------------------------------- commands

int cmd_generate(const Options& o) {
  if (o.family.empty()) throw std::invalid_argument("generate requires --family");
  net::Graph g;
  if (o.family == "regular")
    g = net::build_regular(o.n, static_cast<uint32_t>(o.k), o.seed);
  else if (o.family == "er")
    g = net::build_erdos_renyi(o.n, o.kavg, o.seed);
  else
    g = net::build_barabasi_albert(o.n, static_cast<uint32_t>(o.m), o.seed);

  std::ostringstream edges;
  net::write_edge_list(g, edges);

  const net::DegreeStats stats = net::degree_stats(g);
  std::string report;
  if (o.format == "record") {
    ordered_json rec;
    rec["command"] = "generate";
    rec["family"] = o.family;
    rec["n"] = o.n;
    if (o.family == "regular") rec["k"] = o.k;
    if (o.family == "er") rec["kavg"] = o.kavg;
    if (o.family == "ba") rec["m"] = o.m;
    rec["seed"] = o.seed;
    rec["nodes"] = g.node_count();
    rec["edges"] = g.edge_count();
    rec["mean_degree"] = stats.mean_degree;
    rec["second_moment"] = stats.second_moment;
    rec["kappa"] = stats.kappa();
    if (stats.exponent_hint) rec["exponent_hint"] = *stats.exponent_hint;
    ordered_json hist;
    for (const auto& [deg, cnt] : stats.degree_histogram) hist[std::to_string(deg)] = cnt;
    rec["degree_histogram"] = hist;
    if (!o.out.empty()) rec["out"] = o.out;
    report = dump_record(rec);
  } else {
    report = "nodes,edges,mean_degree,second_moment,kappa,exponent_hint\n";
    report += std::to_string(g.node_count()) + "," + std::to_string(g.edge_count()) + "," +
              fmt_g(stats.mean_degree) + "," + fmt_g(stats.second_moment) + "," +
              fmt_g(stats.kappa()) + "," +
              (stats.exponent_hint ? fmt_g(*stats.exponent_hint) : std::string()) + "\n";
  }

  if (!o.out.empty()) {
    emit_text(o.out, edges.str());
    std::cout << report;
  } else {
    std::cout << edges.str();
    std::cerr << report;
  }
  return 0;
}

int cmd_predict(const Options& o) {
  const PayoffMatrix U = resolve_payoff(o);
  const SourceContext sc = resolve_source(o);
  const ess::EssResult theory = compute_theory(o, sc, U);

  std::string report;
  if (o.format == "record") {
    ordered_json rec;
    rec["command"] = "predict";
    rec["source"] = source_json(o, sc);
    rec["payoff"] = payoff_json(U);
    rec["theory"] = theory_json(theory);
    report = dump_record(rec);
  } else {
    report = "source,n,degree_param,u_ff,u_fn,u_nn,regime,selected_ess\n";
    report += sc.kind + "," + std::to_string(sc.n) + "," + fmt_g(sc.degree_param) + "," +
              fmt_g(U.u_ff) + "," + fmt_g(U.u_fn) + "," + fmt_g(U.u_nn) + "," +
              game::to_string(theory.regime) + "," + fmt_g(theory.selected_ess) + "\n";
  }
  emit_text(o.out, report);
  return 0;
}

int cmd_simulate(const Options& o) {
  const PayoffMatrix U = resolve_payoff(o);
  const ExperimentReport rep = run_experiment(o, U);

  if (!o.traj_out.empty()) {
    // Deterministic replay of ensemble run 0 on its own graph.
    const net::Graph* g0 = nullptr;
    net::Graph regenerated;
    if (rep.sc.kind == "edges") {
      g0 = &rep.sc.loaded;
    } else {
      regenerated = make_graph_source(o, rep.sc).gen(sim::ensemble_graph_seed(o.seed, 0));
      g0 = &regenerated;
    }
    sim::SimConfig c0 = make_sim_config(o, rep.rule, U);
    c0.seed = sim::ensemble_run_seed(o.seed, 0);
    const sim::Trajectory traj = sim::run(*g0, c0);
    std::ostringstream ss;
    sim::write_trajectory(traj, ss);
    emit_text(o.traj_out, ss.str());
  }

  std::string report;
  if (o.format == "record") {
    report = dump_record(experiment_record(o, U, rep));
  } else {
    report = kExperimentTableHeader;
    report += experiment_table_row(o, U, rep);
  }
  emit_text(o.out, report);
  return 0;
}

int cmd_sweep(const Options& o) {
  if (o.values.empty()) throw std::invalid_argument("sweep requires a non-empty --values list");
  const bool custom_payoff = given(o.uff_opt);

  struct SweepEntry {
    double value;
    Options opts;
    PayoffMatrix payoff = PayoffMatrix::preset(1);
    ExperimentReport report;
  };
  std::vector<SweepEntry> entries;
  for (const double v : o.values) {
    Options ov = o;
    if (o.axis == "degree") {
      if (ov.edges.empty() && ov.family.empty())
        throw std::invalid_argument("degree sweep requires a generator family");
      if (!ov.edges.empty())
        throw std::invalid_argument("degree sweep requires a generator family, not --edges");
      if (ov.family == "er") {
        ov.kavg = v;
      } else {
        const double r = std::rint(v);
        if (std::abs(v - r) > 1e-9 || r < 1.0)
          throw std::invalid_argument("degree sweep values must be positive integers for " +
                                      ov.family);
        if (ov.family == "regular")
          ov.k = static_cast<int>(r);
        else
          ov.m = static_cast<int>(r);
      }
    } else if (o.axis == "alpha") {
      ov.alpha = v;
    } else {  // payoff-preset
      if (custom_payoff)
        throw std::invalid_argument("payoff-preset sweep conflicts with --uff/--ufn/--unn");
      const double r = std::rint(v);
      if (std::abs(v - r) > 1e-9)
        throw std::invalid_argument("payoff-preset sweep values must be integers 1..4");
      ov.pm = static_cast<int>(r);
    }
    SweepEntry entry;
    entry.value = v;
    entry.payoff = resolve_payoff(ov);
    entry.report = run_experiment(ov, entry.payoff);
    entry.opts = std::move(ov);
    entries.push_back(std::move(entry));
  }

  std::string report;
  if (o.format == "record") {
    ordered_json rec;
    rec["command"] = "sweep";
    rec["axis"] = o.axis;
    rec["values"] = o.values;
    ordered_json records = ordered_json::array();
    for (const SweepEntry& e : entries) {
      ordered_json r = experiment_record(e.opts, e.payoff, e.report);
      r["command"] = "sweep";
      r["axis_value"] = e.value;
      records.push_back(std::move(r));
    }
    rec["records"] = std::move(records);
    report = dump_record(rec);
  } else {
    report = "axis,value,theory_ess,sim_mean,sim_std,gap\n";
    for (const SweepEntry& e : entries) {
      const ExperimentReport& rep = e.report;
      report += o.axis + "," + fmt_g(e.value) + ",";
      if (rep.theory) {
        report += fmt_g(rep.theory->selected_ess) + "," + fmt_g(rep.ensemble.mean_final_pf) + "," +
                  fmt_g(rep.ensemble.std_final_pf) + "," +
                  fmt_g(std::abs(rep.ensemble.mean_final_pf - rep.theory->selected_ess));
      } else {
        report += "," + fmt_g(rep.ensemble.mean_final_pf) + "," +
                  fmt_g(rep.ensemble.std_final_pf) + ",";
      }
      report += "\n";
    }
  }
  emit_text(o.out, report);
  return 0;
}

int cmd_stability(const Options& o) {
  const PayoffMatrix U = resolve_payoff(o);
  const SourceContext sc = resolve_source(o);

  std::string report;
  if (given(o.pf_opt)) {
    // Direct query of one point; rejected unless it is a fixed point.
    const ess::DegreeDescriptor dd = resolve_descriptor(o, sc);
    const double pf = o.pf_query;
    const double pff = given(o.pff_opt) ? o.pff_query : dd.closure_pff(pf);
    const ess::Stability st =
        ess::jacobian_stability(dd, game::SelectionParams(o.alpha), 1000, U, pf, pff);
    if (o.format == "record") {
      ordered_json rec;
      rec["command"] = "stability";
      rec["source"] = source_json(o, sc);
      rec["payoff"] = payoff_json(U);
      rec["query"] = {{"p_f", pf}, {"p_ff", pff}, {"stability", ess::to_string(st)}};
      report = dump_record(rec);
    } else {
      report = "p_f,p_ff,stability\n";
      report += fmt_g(pf) + "," + fmt_g(pff) + "," + ess::to_string(st) + "\n";
    }
  } else {
    const ess::EssResult theory = compute_theory(o, sc, U);
    if (o.format == "record") {
      ordered_json rec;
      rec["command"] = "stability";
      rec["source"] = source_json(o, sc);
      rec["payoff"] = payoff_json(U);
      rec["theory"] = theory_json(theory);
      report = dump_record(rec);
    } else {
      report = "p_f,p_ff,stability\n";
      for (const auto& fp : theory.fixed_points)
        report +=
            fmt_g(fp.p_f) + "," + fmt_g(fp.p_ff) + "," + ess::to_string(fp.stability) + "\n";
    }
  }
  emit_text(o.out, report);
  return 0;
}

int cmd_invert(const Options& o) {
  const ess::InvertMode mode =
      o.invert_mode == "large_k" ? ess::InvertMode::LargeK : ess::InvertMode::Exact;
  ess::DegreeDescriptor dd = ess::DegreeDescriptor::uniform(3);  // unused in large_k mode
  if (mode == ess::InvertMode::Exact) {
    if (!given(o.k_opt))
      throw std::invalid_argument("exact inversion requires --k (effective degree)");
    dd = ess::DegreeDescriptor::uniform(o.k);
  }
  const ess::PayoffRelation rel = ess::invert_payoff_relation(o.p_star, dd, mode);

  // Verification block: matrices sampled on the relation, forward-evaluated.
  const double samples[] = {0.25, 0.5, 0.75};
  ordered_json ver = ordered_json::array();
  std::string ver_rows;
  for (const double unn : samples) {
    const double uffv = rel.intercept + rel.slope * unn;
    const double p = ess::forward_ess(rel, unn);
    const double err = std::abs(p - rel.p_star);
    ver.push_back({{"u_nn", unn}, {"u_ff", uffv}, {"forward_p", p}, {"abs_err", err}});
    ver_rows += fmt_g(unn) + "," + fmt_g(uffv) + "," + fmt_g(p) + "," + fmt_g(err) + "\n";
  }

  std::string report;
  if (o.format == "record") {
    ordered_json rec;
    rec["command"] = "invert";
    rec["mode"] = o.invert_mode;
    rec["p_star"] = o.p_star;
    if (rel.effective_degree) rec["effective_degree"] = *rel.effective_degree;
    if (rel.ratio) rec["ratio"] = *rel.ratio;
    rec["u_fn"] = 1.0;
    rec["intercept"] = rel.intercept;
    rec["slope"] = rel.slope;
    rec["verification"] = std::move(ver);
    report = dump_record(rec);
  } else {
    report = "mode,p_star,effective_degree,ratio,intercept,slope,u_nn,u_ff,forward_p,abs_err\n";
    std::istringstream rows(ver_rows);
    std::string row;
    while (std::getline(rows, row)) {
      report += o.invert_mode + "," + fmt_g(o.p_star) + "," +
                (rel.effective_degree ? fmt_g(*rel.effective_degree) : std::string()) + "," +
                (rel.ratio ? fmt_g(*rel.ratio) : std::string()) + "," + fmt_g(rel.intercept) +
                "," + fmt_g(rel.slope) + "," + row + "\n";
    }
  }
  emit_text(o.out, report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information-diffusion games on networks: generation, simulation, prediction"};
  app.require_subcommand(1);

  Options gen_o, pre_o, sim_o, swp_o, stb_o, inv_o;

  CLI::App* gen = app.add_subcommand("generate", "Generate a graph and write its edge list");
  add_source_options(gen, gen_o, /*allow_edges=*/false);
  gen->add_option("--seed", gen_o.seed, "Generator seed");
  add_output_options(gen, gen_o);

  CLI::App* pre = app.add_subcommand("predict", "Closed-form stable state for a graph family");
  add_source_options(pre, pre_o, /*allow_edges=*/true);
  add_payoff_options(pre, pre_o);
  add_output_options(pre, pre_o);

  CLI::App* simc = app.add_subcommand("simulate", "Run an ensemble and compare against theory");
  add_source_options(simc, sim_o, /*allow_edges=*/true);
  add_payoff_options(simc, sim_o);
  add_exec_options(simc, sim_o);
  add_output_options(simc, sim_o);
  simc->add_option("--traj-out", sim_o.traj_out, "Write the run-0 trajectory CSV here");

  CLI::App* swp = app.add_subcommand("sweep", "Scan degree, alpha, or payoff preset");
  add_source_options(swp, swp_o, /*allow_edges=*/true);
  add_payoff_options(swp, swp_o);
  add_exec_options(swp, swp_o);
  add_output_options(swp, swp_o);
  swp->add_option("--axis", swp_o.axis, "Sweep axis: degree|alpha|payoff-preset")
      ->required()
      ->check(CLI::IsMember({"degree", "alpha", "payoff-preset"}));
  swp->add_option("--values", swp_o.values, "Comma-separated axis values")
      ->required()
      ->delimiter(',');

  CLI::App* stb = app.add_subcommand("stability", "Classify fixed points of the state dynamics");
  add_source_options(stb, stb_o, /*allow_edges=*/true);
  add_payoff_options(stb, stb_o);
  stb->add_option("--alpha", stb_o.alpha, "Selection intensity for the Jacobian evaluation");
  stb_o.pf_opt = stb->add_option("--pf", stb_o.pf_query, "Query a single point: node fraction");
  stb_o.pff_opt = stb->add_option("--pff", stb_o.pff_query,
                                  "Query a single point: edge fraction (default: pair closure)");
  add_output_options(stb, stb_o);

  CLI::App* inv = app.add_subcommand("invert", "Payoff constraint reproducing an observed state");
  inv->add_option("--p-star", inv_o.p_star, "Observed interior stable state")->required();
  inv->add_option("--mode", inv_o.invert_mode, "Inversion mode: exact|large_k")
      ->check(CLI::IsMember({"exact", "large_k"}));
  inv_o.k_opt = inv->add_option("--k", inv_o.k, "Effective degree (exact mode)");
  add_output_options(inv, inv_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_o);
    if (pre->parsed()) return cmd_predict(pre_o);
    if (simc->parsed()) return cmd_simulate(sim_o);
    if (swp->parsed()) return cmd_sweep(swp_o);
    if (stb->parsed()) return cmd_stability(stb_o);
    if (inv->parsed()) return cmd_invert(inv_o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
