#pragma once

#include <infodiff/game.hpp>
#include <infodiff/graph.hpp>

#include <optional>
#include <vector>

// Closed-form (p_f, p_ff) dynamics under weak selection, their fixed points
// and stability, and the inversion from an observed stable state back to a
// payoff constraint. Two dynamical systems are covered: imitation updating on
// a uniform-degree graph (exact degree k), and birth-death updating on a
// degree-heterogeneous graph summarized by kappa = E[k^2]/E[k].

namespace infodiff::ess {

using game::NetworkState;
using game::PayoffMatrix;
using game::Regime;
using game::SelectionParams;

struct DynamicsCoefficients {
  double gamma1, gamma2, gamma3;  // state-dependent payoff weights
  double a, b;                    // reduced-dynamic polynomial coefficients
};

// gamma's evaluated at an interior state; a,b depend on (k, U) only:
// a = (k-2)(u_ff - 2 u_fn + u_nn), b = (k-1) u_nn - (k-2) u_fn - u_ff.
DynamicsCoefficients dynamics_coefficients(const NetworkState& st, int k, const PayoffMatrix& U);

// Uniform-degree imitation dynamics. Boundary states (empty strategy class or
// p_fn = 0) are fixed points and return exactly 0.
double pf_dot_uniform(const NetworkState& st, int k, const SelectionParams& sel, int N,
                      const PayoffMatrix& U);
double pff_dot_uniform(const NetworkState& st, int k, int N);

// One-dimensional reduction of pf_dot_uniform along the pair closure:
// prefactor * p (1-p) (a p - b).
double reduced_pf_dot(double p_f, int k, const SelectionParams& sel, int N,
                      const PayoffMatrix& U);

// Expected total fitness proxy used by the birth-death dynamics.
double mean_fitness_bar(const NetworkState& st, int N, const PayoffMatrix& U);

// Degree-heterogeneous birth-death dynamics.
double pf_dot_nonuniform(const NetworkState& st, double mean_degree, const SelectionParams& sel,
                         int N, const PayoffMatrix& U);
double pff_dot_nonuniform(const NetworkState& st, const net::DegreeStats& stats,
                          const SelectionParams& sel, int N, const PayoffMatrix& U);

// Interior root of the reduced dynamics at effective degree k_eff (the same
// rational form serves the uniform theorem with k_eff = k and the
// heterogeneous theorem with k_eff = kappa). Raw doubles: scale-invariant.
double interior_root(double k_eff, double uff, double ufn, double unn);
// Large-degree limit 1 / (1 + (u_fn-u_ff)/(u_fn-u_nn)).
double large_k_root(double uff, double ufn, double unn);
double ess_approx_large_k(const PayoffMatrix& U);  // rejects u_fn == u_nn

// Selects which dynamical system a fixed-point query refers to.
struct DegreeDescriptor {
  static DegreeDescriptor uniform(int k);
  static DegreeDescriptor from_stats(net::DegreeStats s);
  bool is_uniform() const { return !stats.has_value(); }
  double kappa() const;        // k when uniform, E[k^2]/E[k] otherwise
  double mean_degree() const;  // k when uniform
  // Pair-closure p_ff for a given p_f under this descriptor's kappa.
  double closure_pff(double p_f) const;

  int k = 0;
  std::optional<net::DegreeStats> stats;
};

enum class Stability { Stable, Unstable, Saddle, Inconclusive };
const char* to_string(Stability s);

// Classifies a verified fixed point of the (p_f, p_ff) system by the sign
// pattern of the numerical Jacobian (stable iff det > 0 and tr < 0). Central
// differences with h = 1e-6, one-sided at the feasibility boundary; absorbing
// corners are evaluated at a small nudge along the closure manifold since the
// corner itself is coordinate-singular. Rejects points where either time
// derivative exceeds 1e-9 in magnitude.
Stability jacobian_stability(const DegreeDescriptor& dd, const SelectionParams& sel, int N,
                             const PayoffMatrix& U, double p_f, double p_ff);

struct FixedPoint {
  double p_f;
  double p_ff;
  Stability stability;
};

struct EssResult {
  std::vector<FixedPoint> fixed_points;  // 0 and 1 always; interior when in (0,1)
  double selected_ess;
  Regime regime;
};

// Case split: all-forward ordering selects 1, none-forward selects 0,
// otherwise the interior candidate when it lies in (0,1), else the stable
// corner. Stability labels are attached to every fixed point.
EssResult ess_uniform(const PayoffMatrix& U, int k);
EssResult ess_nonuniform(const PayoffMatrix& U, const net::DegreeStats& stats);  // kappa > 2
EssResult ess_er(const PayoffMatrix& U, double mean_degree);  // kappa = mean_degree + 1

enum class LogBase { Natural, Base10 };
// Scale-free moment rule kappa = mean_degree * log(n) / 4; requires kappa > 2.
EssResult ess_ba(const PayoffMatrix& U, double mean_degree, uint64_t n,
                 LogBase base = LogBase::Natural);

enum class InvertMode { Exact, LargeK };

// Constraint on (u_ff, u_nn) with u_fn normalized to 1 that reproduces a
// given interior stable state: u_ff = intercept + slope * u_nn.
struct PayoffRelation {
  InvertMode mode;
  double p_star;
  double intercept;
  double slope;
  std::optional<double> ratio;             // (1-u_ff)/(1-u_nn), large-k mode
  std::optional<double> effective_degree;  // k or kappa, exact mode
};

PayoffRelation invert_payoff_relation(double p_star, const DegreeDescriptor& dd, InvertMode mode);

// Forward evaluation of the matching ESS formula for a point on the relation.
double forward_ess(const PayoffRelation& rel, double u_nn);

}  // namespace infodiff::ess
