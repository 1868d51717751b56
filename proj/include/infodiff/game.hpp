#pragma once

#include <cstdint>

namespace infodiff::game {

enum class Strategy : uint8_t { NotForward = 0, Forward = 1 };

// Symmetric 2x2 payoff matrix over {forward, not-forward}; entries are
// normalized to the open interval (0,1).
struct PayoffMatrix {
  double u_ff;
  double u_fn;  // payoff(forward, not-forward) == payoff(not-forward, forward)
  double u_nn;

  PayoffMatrix(double uff, double ufn, double unn);  // validates (0,1)
  double payoff(Strategy a, Strategy b) const {
    if (a == Strategy::Forward) return b == Strategy::Forward ? u_ff : u_fn;
    return b == Strategy::Forward ? u_fn : u_nn;
  }
  static PayoffMatrix preset(int index);  // 1..4
};

enum class Regime { AllForward, NoneForward, AntiCoordination, Coordination, Degenerate };
const char* to_string(Regime r);
Regime classify_regime(const PayoffMatrix& U);

// Selection intensity; baseline fitness is fixed to 1 in this model.
struct SelectionParams {
  double alpha = 0.1;
  double baseline = 1.0;
  SelectionParams() = default;
  explicit SelectionParams(double a);  // validates alpha in [0,1]
};

// Fitness of a node with k neighbors, k_f (resp. k_n) of which share an edge
// payoff u_ff (resp. u_nn): (1-alpha)*baseline + alpha * payoff sum.
double fitness_f(int k, int k_f, const SelectionParams& sel, const PayoffMatrix& U);
double fitness_n(int k, int k_n, const SelectionParams& sel, const PayoffMatrix& U);

// Binomial neighborhood-configuration probabilities.
double config_prob_f(int k, int k_f, double p_ff_cond);
double config_prob_n(int k, int k_n, double p_nn_cond);

// Macroscopic network state determined by (p_f, p_ff): node fraction, edge
// fractions, and conditional neighbor probabilities. Conditionals on an empty
// strategy class (p_f = 0 or 1) are vacuous; they are NaN when built from
// (p_f, p_ff) and formula-valued but still flagged when built by pair_closure.
struct NetworkState {
  double p_f = 0.0, p_n = 1.0;
  double p_ff = 0.0, p_fn = 0.0, p_nn = 1.0;
  double pf_given_f = 0.0, pn_given_f = 0.0;
  double pf_given_n = 0.0, pn_given_n = 0.0;

  bool f_class_empty() const { return p_f <= 0.0; }
  bool n_class_empty() const { return p_f >= 1.0; }
  bool boundary() const { return f_class_empty() || n_class_empty(); }
};

// Assembles the full state from (p_f, p_ff); rejects infeasible pairs
// (requires max(0, 2 p_f - 1) <= p_ff <= p_f).
NetworkState state_from_pf_pff(double p_f, double p_ff);

// Pair-approximation closure at degree k: p_f|f - p_f|n == 1/(k-1) holds
// bit-exactly by construction. Requires k >= 3.
NetworkState pair_closure(double p_f, int k);

}  // namespace infodiff::game
