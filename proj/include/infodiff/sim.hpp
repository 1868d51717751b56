#pragma once

#include <infodiff/game.hpp>
#include <infodiff/graph.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

// Agent-based strategy-update simulation: per update event one node's
// strategy may be replaced according to the configured rule; one generation
// is N events; macroscopic state is tracked with O(1) counters.

namespace infodiff::sim {

using game::PayoffMatrix;
using game::Strategy;

enum class UpdateRule { IM, BD, DB };
const char* to_string(UpdateRule r);

struct SimConfig {
  UpdateRule rule = UpdateRule::IM;
  double alpha = 0.1;  // selection intensity, (0,1]
  PayoffMatrix payoff = PayoffMatrix::preset(1);
  double initial_pf = 0.5;
  int64_t max_steps = 2000;  // generation cap (N update events each); 0 = initial sample only
  int window = 50;           // steadiness window, in sampled generations
  double steady_tol = 5e-3;
  uint64_t seed = 0;
};
void validate(const SimConfig& cfg);  // throws std::invalid_argument

struct SimState {
  std::vector<uint8_t> strategies;  // 1 = forward
  int64_t count_f = 0;              // nodes playing forward
  int64_t count_ff = 0, count_fn = 0, count_nn = 0;  // edge-type counts
  int64_t step = 0;                 // update events applied
};

// Independent Bernoulli(initial_pf) strategies; counters exact.
SimState init_strategies(const net::Graph& g, double initial_pf, uint64_t seed);

// (1 - alpha) + alpha * sum of edge payoffs; isolated nodes earn baseline only.
double node_fitness(const net::Graph& g, const SimState& s, uint32_t v, const SimConfig& cfg);

// Recounts all counters from scratch; throws std::logic_error on mismatch.
void verify_counters(const net::Graph& g, const SimState& s);

// Single update events. The rng is advanced; the returned state has step+1.
// IM: uniform focal copies one of {self} u neighbors, fitness-proportional.
// BD: global fitness-proportional parent overwrites a uniform neighbor.
// DB: uniform focal adopts a neighbor, fitness-proportional over neighbors.
SimState step_im(const net::Graph& g, SimState s, const SimConfig& cfg, std::mt19937_64& rng);
SimState step_bd(const net::Graph& g, SimState s, const SimConfig& cfg, std::mt19937_64& rng);
SimState step_db(const net::Graph& g, SimState s, const SimConfig& cfg, std::mt19937_64& rng);

struct TrajectorySample {
  int64_t step;  // generation index
  double p_f, p_ff, p_fn, p_nn;
};

// Rendered as absorbed_all_f / absorbed_all_n / steady / max_steps.
enum class Terminal { AbsorbedAllF, AbsorbedAllN, Steady, MaxSteps };
const char* to_string(Terminal t);

struct Trajectory {
  std::vector<TrajectorySample> samples;  // one per generation, first at 0
  Terminal terminal;
  double final_pf;  // absorbed value, or mean over the final window
};

// True iff the means of the window's first and second halves differ by < tol.
bool detect_steady(std::span<const double> window_pf, double tol);

// Runs until absorption, steadiness, or the generation cap.
Trajectory run(const net::Graph& g, const SimConfig& cfg);

// CSV: step,p_f,p_ff,p_fn,p_nn
void write_trajectory(const Trajectory& traj, std::ostream& out);

struct EnsembleResult {
  int runs;
  double mean_final_pf;
  double std_final_pf;  // population standard deviation
  std::vector<double> per_run_final;
  int regen_every;
};

using GraphGenerator = std::function<net::Graph(uint64_t seed)>;

// Either a caller-owned fixed graph or a seeded generator (regenerated every
// regen_every runs with a derived per-block seed).
struct GraphSource {
  static GraphSource fixed(const net::Graph& g);
  static GraphSource generator(GraphGenerator gen);
  const net::Graph* fixed_graph = nullptr;
  GraphGenerator gen;
};

// Deterministic seed derivation used for ensembles (exposed so callers can
// reproduce an individual run or regeneration block).
uint64_t ensemble_run_seed(uint64_t base_seed, int run_index);
uint64_t ensemble_graph_seed(uint64_t base_seed, int block_index);

EnsembleResult run_ensemble(const GraphSource& src, const SimConfig& cfg, int runs,
                            int regen_every = 500);

}  // namespace infodiff::sim
