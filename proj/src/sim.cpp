#include <infodiff/sim.hpp>

#include <infodiff/rng.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace infodiff::sim {

namespace {

// Stream tags for derive_seed; arbitrary but fixed (part of the reproducible
// output contract).
constexpr uint64_t kTagInit = 0x11;
constexpr uint64_t kTagDynamics = 0x12;
constexpr uint64_t kTagRun = 0x21;
constexpr uint64_t kTagGraph = 0x22;

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Fenwick tree over per-node fitness, for O(log n) fitness-proportional
// parent selection under the birth-death rule.
class Fenwick {
 public:
  void assign(const std::vector<double>& vals) {
    n_ = static_cast<int>(vals.size());
    t_.assign(static_cast<size_t>(n_) + 1, 0.0);
    for (int i = 1; i <= n_; ++i) {
      t_[i] += vals[i - 1];
      const int j = i + (i & -i);
      if (j <= n_) t_[j] += t_[i];
    }
  }
  void add(int i, double delta) {
    for (int j = i + 1; j <= n_; j += j & -j) t_[j] += delta;
  }
  double total() const {
    double s = 0.0;
    for (int i = n_; i > 0; i -= i & -i) s += t_[i];
    return s;
  }
  // Index of the first node whose cumulative fitness exceeds x.
  int sample(double x) const {
    int pos = 0;
    for (uint32_t mask = std::bit_floor(static_cast<uint32_t>(n_)); mask != 0; mask >>= 1) {
      const int next = pos + static_cast<int>(mask);
      if (next <= n_ && t_[next] <= x) {
        pos = next;
        x -= t_[next];
      }
    }
    return std::min(pos, n_ - 1);  // guard the x == total() rounding edge
  }

 private:
  int n_ = 0;
  std::vector<double> t_;  // 1-indexed
};

// Mutable simulation core. Keeps forward-neighbor counts per node so that a
// fitness evaluation is O(1) and a strategy flip is O(deg); the birth-death
// rule additionally keeps a Fenwick tree of fitness values in sync.
class Engine {
 public:
  Engine(const net::Graph& g, const SimConfig& cfg, SimState st)
      : g_(g), cfg_(cfg), st_(std::move(st)), sel_(cfg.alpha) {
    const uint32_t n = g_.node_count();
    nf_.assign(n, 0);
    for (uint32_t v = 0; v < n; ++v) {
      int c = 0;
      for (uint32_t u : g_.neighbors(v)) c += st_.strategies[u];
      nf_[v] = c;
    }
    if (cfg_.rule == UpdateRule::BD) rebuild_fitness();
  }

  const SimState& state() const { return st_; }
  SimState take_state() && { return std::move(st_); }

  bool absorbed() const {
    return st_.count_f == 0 || st_.count_f == static_cast<int64_t>(g_.node_count());
  }
  bool all_forward() const { return st_.count_f == static_cast<int64_t>(g_.node_count()); }

  double fitness_of(uint32_t v) const {
    const int k = static_cast<int>(g_.degree(v));
    const int kf = nf_[v];
    return st_.strategies[v] != 0 ? game::fitness_f(k, kf, sel_, cfg_.payoff)
                                  : game::fitness_n(k, k - kf, sel_, cfg_.payoff);
  }

  // Incremental fitness updates accumulate rounding drift in the tree; the
  // run loop calls this once per generation to pin it back down.
  void rebuild_fitness() {
    const uint32_t n = g_.node_count();
    fit_.resize(n);
    for (uint32_t v = 0; v < n; ++v) fit_[v] = fitness_of(v);
    tree_.assign(fit_);
  }

  void step_once(std::mt19937_64& rng) {
    switch (cfg_.rule) {
      case UpdateRule::IM:
        do_im(rng);
        break;
      case UpdateRule::BD:
        do_bd(rng);
        break;
      case UpdateRule::DB:
        do_db(rng);
        break;
    }
    st_.step += 1;
#ifndef NDEBUG
    if (st_.step % 10000 == 0) verify_counters(g_, st_);
#endif
  }

  TrajectorySample sample(int64_t gen) const {
    const double n = static_cast<double>(g_.node_count());
    const double m = static_cast<double>(g_.edge_count());
    TrajectorySample s;
    s.step = gen;
    s.p_f = static_cast<double>(st_.count_f) / n;
    if (m > 0) {
      s.p_ff = static_cast<double>(st_.count_ff) / m;
      s.p_fn = static_cast<double>(st_.count_fn) / m;
      s.p_nn = static_cast<double>(st_.count_nn) / m;
    } else {
      s.p_ff = s.p_fn = s.p_nn = 0.0;
    }
    return s;
  }

 private:
  void flip(uint32_t v, uint8_t ns) {
    const uint8_t os = st_.strategies[v];
    if (os == ns) return;
    const int d = static_cast<int>(g_.degree(v));
    const int kf = nf_[v];
    if (ns != 0) {  // not-forward -> forward
      st_.count_f += 1;
      st_.count_nn -= d - kf;
      st_.count_fn += d - kf;
      st_.count_fn -= kf;
      st_.count_ff += kf;
    } else {  // forward -> not-forward
      st_.count_f -= 1;
      st_.count_ff -= kf;
      st_.count_fn += kf;
      st_.count_fn -= d - kf;
      st_.count_nn += d - kf;
    }
    st_.strategies[v] = ns;
    const int dnf = ns != 0 ? +1 : -1;
    const bool track = cfg_.rule == UpdateRule::BD;
    for (uint32_t u : g_.neighbors(v)) {
      nf_[u] += dnf;
      if (track) {
        const double nu = fitness_of(u);
        tree_.add(static_cast<int>(u), nu - fit_[u]);
        fit_[u] = nu;
      }
    }
    if (track) {
      const double nv = fitness_of(v);
      tree_.add(static_cast<int>(v), nv - fit_[v]);
      fit_[v] = nv;
    }
  }

  // Imitation: a uniform focal node copies a member of {self} u neighbors
  // with probability proportional to fitness (self listed first, then
  // neighbors in adjacency order).
  void do_im(std::mt19937_64& rng) {
    const auto v = static_cast<uint32_t>(rng::uniform_below(rng, g_.node_count()));
    const auto nb = g_.neighbors(v);
    if (nb.empty()) return;  // copies itself
    double total = fitness_of(v);
    for (uint32_t u : nb) total += fitness_of(u);
    const double x = rng::uniform01(rng) * total;
    uint32_t chosen = v;
    double acc = fitness_of(v);
    if (x >= acc) {
      chosen = nb.back();
      for (uint32_t u : nb) {
        acc += fitness_of(u);
        if (x < acc) {
          chosen = u;
          break;
        }
      }
    }
    flip(v, st_.strategies[chosen]);
  }

  // Birth-death: a parent is chosen globally in proportion to fitness, then
  // overwrites a uniform neighbor.
  void do_bd(std::mt19937_64& rng) {
    const double x = rng::uniform01(rng) * tree_.total();
    const auto parent = static_cast<uint32_t>(tree_.sample(x));
    const auto nb = g_.neighbors(parent);
    if (nb.empty()) return;
    const uint32_t child = nb[rng::uniform_below(rng, nb.size())];
    flip(child, st_.strategies[parent]);
  }

  // Death-birth: a uniform focal node adopts the strategy of a neighbor
  // chosen in proportion to fitness (adjacency order).
  void do_db(std::mt19937_64& rng) {
    const auto v = static_cast<uint32_t>(rng::uniform_below(rng, g_.node_count()));
    const auto nb = g_.neighbors(v);
    if (nb.empty()) return;
    double total = 0.0;
    for (uint32_t u : nb) total += fitness_of(u);
    const double x = rng::uniform01(rng) * total;
    uint32_t chosen = nb.back();
    double acc = 0.0;
    for (uint32_t u : nb) {
      acc += fitness_of(u);
      if (x < acc) {
        chosen = u;
        break;
      }
    }
    flip(v, st_.strategies[chosen]);
  }

  const net::Graph& g_;
  const SimConfig& cfg_;
  SimState st_;
  game::SelectionParams sel_;
  std::vector<int> nf_;       // forward neighbors per node
  std::vector<double> fit_;   // birth-death only
  Fenwick tree_;              // birth-death only
};

SimState run_single_step(const net::Graph& g, SimState s, const SimConfig& cfg,
                         std::mt19937_64& rng, UpdateRule rule) {
  if (s.strategies.size() != g.node_count())
    throw std::invalid_argument("strategy vector does not match the graph size");
  SimConfig c = cfg;
  c.rule = rule;
  validate(c);
  Engine eng(g, c, std::move(s));
  eng.step_once(rng);
  return std::move(eng).take_state();
}

}  // namespace

const char* to_string(UpdateRule r) {
  switch (r) {
    case UpdateRule::IM:
      return "im";
    case UpdateRule::BD:
      return "bd";
    case UpdateRule::DB:
      return "db";
  }
  return "?";
}

const char* to_string(Terminal t) {
  switch (t) {
    case Terminal::AbsorbedAllF:
      return "absorbed_all_f";
    case Terminal::AbsorbedAllN:
      return "absorbed_all_n";
    case Terminal::Steady:
      return "steady";
    case Terminal::MaxSteps:
      return "max_steps";
  }
  return "?";
}

void validate(const SimConfig& cfg) {
  // alpha = 0 is neutral drift (all fitness equal); the update rules remain
  // well defined there.
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!(cfg.initial_pf >= 0.0 && cfg.initial_pf <= 1.0))
    throw std::invalid_argument("initial_pf must lie in [0, 1]");
  if (cfg.max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  if (cfg.window < 1) throw std::invalid_argument("window must be a positive integer");
  // max_steps == 0 is the degenerate "initial sample only" case; the window
  // bound applies to any run that actually steps.
  if (cfg.max_steps > 0 && cfg.window >= cfg.max_steps)
    throw std::invalid_argument("window must be smaller than max_steps");
  if (!(cfg.steady_tol > 0.0)) throw std::invalid_argument("steady_tol must be > 0");
}

SimState init_strategies(const net::Graph& g, double initial_pf, uint64_t seed) {
  if (!(initial_pf >= 0.0 && initial_pf <= 1.0))
    throw std::invalid_argument("initial_pf must lie in [0, 1]");
  const uint32_t n = g.node_count();
  SimState s;
  s.strategies.resize(n);
  auto eng = rng::make_engine(seed);
  for (uint32_t v = 0; v < n; ++v) {
    const uint8_t strat = rng::uniform01(eng) < initial_pf ? 1 : 0;
    s.strategies[v] = strat;
    s.count_f += strat;
  }
  for (uint32_t v = 0; v < n; ++v) {
    for (uint32_t u : g.neighbors(v)) {
      if (u <= v) continue;
      const int both = s.strategies[v] + s.strategies[u];
      if (both == 2)
        s.count_ff += 1;
      else if (both == 1)
        s.count_fn += 1;
      else
        s.count_nn += 1;
    }
  }
  return s;
}

double node_fitness(const net::Graph& g, const SimState& s, uint32_t v, const SimConfig& cfg) {
  if (s.strategies.size() != g.node_count())
    throw std::invalid_argument("strategy vector does not match the graph size");
  const game::SelectionParams sel(cfg.alpha);
  const int k = static_cast<int>(g.degree(v));
  int kf = 0;
  for (uint32_t u : g.neighbors(v)) kf += s.strategies[u];
  return s.strategies[v] != 0 ? game::fitness_f(k, kf, sel, cfg.payoff)
                              : game::fitness_n(k, k - kf, sel, cfg.payoff);
}

void verify_counters(const net::Graph& g, const SimState& s) {
  if (s.strategies.size() != g.node_count())
    throw std::logic_error("counter check: strategy vector does not match the graph size");
  int64_t cf = 0, cff = 0, cfn = 0, cnn = 0;
  for (uint32_t v = 0; v < g.node_count(); ++v) {
    cf += s.strategies[v];
    for (uint32_t u : g.neighbors(v)) {
      if (u <= v) continue;
      const int both = s.strategies[v] + s.strategies[u];
      if (both == 2)
        cff += 1;
      else if (both == 1)
        cfn += 1;
      else
        cnn += 1;
    }
  }
  if (cf != s.count_f || cff != s.count_ff || cfn != s.count_fn || cnn != s.count_nn)
    throw std::logic_error("simulation counters drifted from the strategy vector");
}

SimState step_im(const net::Graph& g, SimState s, const SimConfig& cfg, std::mt19937_64& rng) {
  return run_single_step(g, std::move(s), cfg, rng, UpdateRule::IM);
}
SimState step_bd(const net::Graph& g, SimState s, const SimConfig& cfg, std::mt19937_64& rng) {
  return run_single_step(g, std::move(s), cfg, rng, UpdateRule::BD);
}
SimState step_db(const net::Graph& g, SimState s, const SimConfig& cfg, std::mt19937_64& rng) {
  return run_single_step(g, std::move(s), cfg, rng, UpdateRule::DB);
}

bool detect_steady(std::span<const double> window_pf, double tol) {
  const size_t h = window_pf.size() / 2;
  if (h == 0) return false;
  const double a = std::accumulate(window_pf.begin(), window_pf.begin() + h, 0.0) /
                   static_cast<double>(h);
  const double b = std::accumulate(window_pf.end() - h, window_pf.end(), 0.0) /
                   static_cast<double>(h);
  return std::abs(a - b) < tol;
}

Trajectory run(const net::Graph& g, const SimConfig& cfg) {
  validate(cfg);
  const uint32_t n = g.node_count();
  if (n == 0) throw std::invalid_argument("simulation requires a non-empty graph");

  SimState init = init_strategies(g, cfg.initial_pf, rng::derive_seed(cfg.seed, {kTagInit}));
  auto rng = rng::make_engine(rng::derive_seed(cfg.seed, {kTagDynamics}));
  Engine eng(g, cfg, std::move(init));

  Trajectory traj;
  std::vector<double> pf_hist;
  const auto record = [&](int64_t gen) {
    const TrajectorySample s = eng.sample(gen);
    traj.samples.push_back(s);
    pf_hist.push_back(s.p_f);
  };
  const auto finish = [&](Terminal t, double final_pf) {
    verify_counters(g, eng.state());
    traj.terminal = t;
    traj.final_pf = final_pf;
    return traj;
  };

  record(0);
  if (eng.absorbed())
    return finish(eng.all_forward() ? Terminal::AbsorbedAllF : Terminal::AbsorbedAllN,
                  eng.all_forward() ? 1.0 : 0.0);
  if (cfg.max_steps == 0) return finish(Terminal::MaxSteps, pf_hist.back());

  for (int64_t gen = 1; gen <= cfg.max_steps; ++gen) {
    if (cfg.rule == UpdateRule::BD) eng.rebuild_fitness();
    bool absorbed = false;
    for (uint32_t e = 0; e < n; ++e) {  // one generation = N update events
      eng.step_once(rng);
      if (eng.absorbed()) {
        absorbed = true;
        break;
      }
    }
    record(gen);
    if (absorbed)
      return finish(eng.all_forward() ? Terminal::AbsorbedAllF : Terminal::AbsorbedAllN,
                    eng.all_forward() ? 1.0 : 0.0);
    if (pf_hist.size() >= static_cast<size_t>(cfg.window)) {
      const std::span<const double> w(pf_hist.data() + pf_hist.size() - cfg.window,
                                      static_cast<size_t>(cfg.window));
      if (detect_steady(w, cfg.steady_tol)) return finish(Terminal::Steady, mean_of(w));
    }
  }
  const size_t wlen = std::min(static_cast<size_t>(cfg.window), pf_hist.size());
  const std::span<const double> tail(pf_hist.data() + pf_hist.size() - wlen, wlen);
  return finish(Terminal::MaxSteps, mean_of(tail));
}

void write_trajectory(const Trajectory& traj, std::ostream& out) {
  out << "step,p_f,p_ff,p_fn,p_nn\n";
  char buf[160];
  for (const TrajectorySample& s : traj.samples) {
    std::snprintf(buf, sizeof(buf), "%lld,%.12g,%.12g,%.12g,%.12g\n",
                  static_cast<long long>(s.step), s.p_f, s.p_ff, s.p_fn, s.p_nn);
    out << buf;
  }
}

GraphSource GraphSource::fixed(const net::Graph& g) {
  GraphSource src;
  src.fixed_graph = &g;
  return src;
}

GraphSource GraphSource::generator(GraphGenerator gen) {
  GraphSource src;
  src.gen = std::move(gen);
  return src;
}

uint64_t ensemble_run_seed(uint64_t base_seed, int run_index) {
  return rng::derive_seed(base_seed, {kTagRun, static_cast<uint64_t>(run_index)});
}

uint64_t ensemble_graph_seed(uint64_t base_seed, int block_index) {
  return rng::derive_seed(base_seed, {kTagGraph, static_cast<uint64_t>(block_index)});
}

EnsembleResult run_ensemble(const GraphSource& src, const SimConfig& cfg, int runs,
                            int regen_every) {
  validate(cfg);
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (src.fixed_graph == nullptr && !src.gen)
    throw std::invalid_argument("graph source holds neither a graph nor a generator");
  if (src.fixed_graph == nullptr && regen_every < 1)
    throw std::invalid_argument("regen_every must be >= 1");

  EnsembleResult res;
  res.runs = runs;
  res.regen_every = regen_every;
  res.per_run_final.reserve(static_cast<size_t>(runs));

  net::Graph cached;
  int cached_block = -1;
  for (int i = 0; i < runs; ++i) {
    const net::Graph* g = src.fixed_graph;
    if (g == nullptr) {
      const int block = i / regen_every;
      if (block != cached_block) {
        cached = src.gen(ensemble_graph_seed(cfg.seed, block));
        cached_block = block;
      }
      g = &cached;
    }
    SimConfig run_cfg = cfg;
    run_cfg.seed = ensemble_run_seed(cfg.seed, i);
    res.per_run_final.push_back(run(*g, run_cfg).final_pf);
  }

  const double mu = mean_of(res.per_run_final);
  double var = 0.0;
  for (double x : res.per_run_final) var += (x - mu) * (x - mu);
  var /= static_cast<double>(runs);  // population variance; 0 when runs == 1
  res.mean_final_pf = mu;
  res.std_final_pf = std::sqrt(var);
  return res;
}

}  // namespace infodiff::sim
