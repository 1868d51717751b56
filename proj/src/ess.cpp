#include <infodiff/ess.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace infodiff::ess {

namespace {

void check_k(int k) {
  if (k < 3) throw std::invalid_argument("uniform-degree dynamics require k >= 3");
}

void check_n(int N) {
  if (N < 2) throw std::invalid_argument("population size N must be at least 2");
}

bool boundary_fixed(const NetworkState& st) { return st.boundary() || st.p_fn == 0.0; }

}  // namespace

DynamicsCoefficients dynamics_coefficients(const NetworkState& st, int k, const PayoffMatrix& U) {
  check_k(k);
  DynamicsCoefficients c{};
  const double s = (k - 1.0) * (st.pn_given_n + st.pf_given_f);
  c.gamma1 = -st.pn_given_n * (s + 3.0);
  c.gamma2 = st.pn_given_n - st.pf_given_f + (st.pn_given_f - st.pf_given_n) * (s + 2.0);
  c.gamma3 = st.pf_given_f * (s + 3.0);
  c.a = (k - 2.0) * (U.u_ff - 2.0 * U.u_fn + U.u_nn);
  c.b = (k - 1.0) * U.u_nn - (k - 2.0) * U.u_fn - U.u_ff;
  return c;
}

double pf_dot_uniform(const NetworkState& st, int k, const SelectionParams& sel, int N,
                      const PayoffMatrix& U) {
  check_k(k);
  check_n(N);
  if (boundary_fixed(st)) return 0.0;
  const DynamicsCoefficients c = dynamics_coefficients(st, k, U);
  const double pre =
      sel.alpha * k * (k - 1.0) * st.p_fn / (2.0 * N * (k + 1.0) * (k + 1.0));
  return pre * (c.gamma1 * U.u_nn + c.gamma2 * U.u_fn + c.gamma3 * U.u_ff);
}

double pff_dot_uniform(const NetworkState& st, int k, int N) {
  check_k(k);
  check_n(N);
  if (boundary_fixed(st)) return 0.0;
  return st.p_fn / ((k + 1.0) * N) *
         (1.0 + (k - 1.0) * (st.pf_given_n - st.pf_given_f));
}

double reduced_pf_dot(double p_f, int k, const SelectionParams& sel, int N,
                      const PayoffMatrix& U) {
  check_k(k);
  check_n(N);
  const double a = (k - 2.0) * (U.u_ff - 2.0 * U.u_fn + U.u_nn);
  const double b = (k - 1.0) * U.u_nn - (k - 2.0) * U.u_fn - U.u_ff;
  const double pre = sel.alpha * k * (k - 2.0) * (k + 3.0) /
                     (static_cast<double>(N) * (k - 1.0) * (k + 1.0) * (k + 1.0));
  return pre * p_f * (1.0 - p_f) * (a * p_f - b);
}

double mean_fitness_bar(const NetworkState& st, int N, const PayoffMatrix& U) {
  check_n(N);
  return N * (st.p_ff * U.u_ff + st.p_fn * U.u_fn + st.p_nn * U.u_nn);
}

double pf_dot_nonuniform(const NetworkState& st, double mean_degree, const SelectionParams& sel,
                         int N, const PayoffMatrix& U) {
  if (!(mean_degree > 1.0))
    throw std::invalid_argument("heterogeneous dynamics require mean degree > 1");
  check_n(N);
  if (boundary_fixed(st)) return 0.0;
  const double pibar = mean_fitness_bar(st, N, U);
  const double bracket = st.pf_given_f * (U.u_ff - U.u_fn) - st.pn_given_n * (U.u_nn - U.u_fn);
  return sel.alpha * (mean_degree - 1.0) * st.p_fn / (2.0 * pibar * N) * bracket;
}

namespace {

// Weak-selection per-event probabilities that the forwarding count rises
// (P+) or falls (P-) under birth-death updating; shared by the p_ff dynamic.
// (P+ - P-)/N reproduces pf_dot_nonuniform identically.
void bd_event_probs(const NetworkState& st, double kbar, const SelectionParams& sel, int N,
                    const PayoffMatrix& U, double& p_plus, double& p_minus) {
  const double pibar = mean_fitness_bar(st, N, U);
  const double common = st.p_fn / (2.0 * pibar);
  p_plus = common * ((1.0 - sel.alpha) +
                     sel.alpha * (U.u_ff * (kbar - 1.0) * st.pf_given_f +
                                  U.u_fn * (st.pf_given_f + kbar * st.pn_given_f)));
  p_minus = common * ((1.0 - sel.alpha) +
                      sel.alpha * (U.u_nn * (kbar - 1.0) * st.pn_given_n +
                                   U.u_fn * (st.pn_given_n + kbar * st.pf_given_n)));
}

}  // namespace

double pff_dot_nonuniform(const NetworkState& st, const net::DegreeStats& stats,
                          const SelectionParams& sel, int N, const PayoffMatrix& U) {
  if (!(stats.mean_degree > 1.0))
    throw std::invalid_argument("heterogeneous dynamics require mean degree > 1");
  check_n(N);
  if (boundary_fixed(st)) return 0.0;
  const double kbar = stats.mean_degree;
  const double kappa = stats.kappa();  // replaced nodes are reached along an edge
  double p_plus, p_minus;
  bd_event_probs(st, kbar, sel, N, U, p_plus, p_minus);
  return (((kappa - 1.0) * st.pf_given_n + 1.0) * p_plus -
          (kappa - 1.0) * st.pf_given_f * p_minus) /
         (kbar * N / 2.0);
}

double interior_root(double k_eff, double uff, double ufn, double unn) {
  return ((k_eff - 2.0) * ufn + uff - (k_eff - 1.0) * unn) /
         ((k_eff - 2.0) * (2.0 * ufn - uff - unn));
}

double large_k_root(double uff, double ufn, double unn) {
  return 1.0 / (1.0 + (ufn - uff) / (ufn - unn));
}

double ess_approx_large_k(const PayoffMatrix& U) {
  if (std::abs(U.u_fn - U.u_nn) < 1e-12)
    throw std::domain_error("large-degree approximation undefined for u_fn == u_nn");
  return large_k_root(U.u_ff, U.u_fn, U.u_nn);
}

DegreeDescriptor DegreeDescriptor::uniform(int k) {
  check_k(k);
  DegreeDescriptor d;
  d.k = k;
  return d;
}

DegreeDescriptor DegreeDescriptor::from_stats(net::DegreeStats s) {
  if (!(s.mean_degree > 1.0))
    throw std::invalid_argument("degree stats require mean degree > 1");
  DegreeDescriptor d;
  d.stats = std::move(s);
  return d;
}

double DegreeDescriptor::kappa() const { return is_uniform() ? k : stats->kappa(); }
double DegreeDescriptor::mean_degree() const { return is_uniform() ? k : stats->mean_degree; }

double DegreeDescriptor::closure_pff(double p_f) const {
  const double kap = kappa();
  return p_f * (p_f + (1.0 - p_f) / (kap - 1.0));
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Saddle: return "saddle";
    case Stability::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

bool feasible(double p, double q) {
  return p > 0.0 && p < 1.0 && q <= p && q >= std::max(0.0, 2.0 * p - 1.0);
}

struct System {
  const DegreeDescriptor& dd;
  const SelectionParams& sel;
  int N;
  const PayoffMatrix& U;

  double f1(double p, double q) const {
    const NetworkState st = game::state_from_pf_pff(p, q);
    return dd.is_uniform() ? pf_dot_uniform(st, dd.k, sel, N, U)
                           : pf_dot_nonuniform(st, dd.stats->mean_degree, sel, N, U);
  }
  double f2(double p, double q) const {
    const NetworkState st = game::state_from_pf_pff(p, q);
    return dd.is_uniform() ? pff_dot_uniform(st, dd.k, N)
                           : pff_dot_nonuniform(st, *dd.stats, sel, N, U);
  }
};

}  // namespace

Stability jacobian_stability(const DegreeDescriptor& dd, const SelectionParams& sel, int N,
                             const PayoffMatrix& U, double p_f, double p_ff) {
  if (!(sel.alpha > 0.0 && sel.alpha < 1.0))
    throw std::invalid_argument("stability test requires alpha in (0,1)");
  check_n(N);
  if (!dd.is_uniform() && !(dd.kappa() > 2.0))
    throw std::invalid_argument("stability test requires kappa > 2");

  // state_from_pf_pff rejects points outside the feasible wedge.
  const System sys{dd, sel, N, U};
  {
    const double r1 = sys.f1(p_f, p_ff), r2 = sys.f2(p_f, p_ff);
    if (!(std::abs(r1) < 1e-9 && std::abs(r2) < 1e-9)) {
      std::ostringstream os;
      os << "not a fixed point: |pf_dot| = " << std::abs(r1) << ", |pff_dot| = " << std::abs(r2);
      throw std::invalid_argument(os.str());
    }
  }

  // Absorbing corners are coordinate-singular (vacuous conditionals, axis
  // steps leave the wedge); differentiate at a nearby point on the closure
  // manifold instead, which preserves the sign pattern.
  const double delta = 1e-3;
  double p0 = p_f, q0 = p_ff;
  if (p_f < delta || p_f > 1.0 - delta) {
    p0 = std::clamp(p_f, delta, 1.0 - delta);
    q0 = dd.closure_pff(p0);
  }

  const double h = 1e-6;
  auto deriv = [&](auto&& f, bool wrt_p) {
    const double dp = wrt_p ? h : 0.0, dq = wrt_p ? 0.0 : h;
    const bool up_ok = feasible(p0 + dp, q0 + dq);
    const bool dn_ok = feasible(p0 - dp, q0 - dq);
    if (up_ok && dn_ok) return (f(p0 + dp, q0 + dq) - f(p0 - dp, q0 - dq)) / (2.0 * h);
    if (up_ok) return (f(p0 + dp, q0 + dq) - f(p0, q0)) / h;
    if (dn_ok) return (f(p0, q0) - f(p0 - dp, q0 - dq)) / h;
    throw std::runtime_error("no feasible finite-difference stencil at the fixed point");
  };
  auto f1 = [&](double p, double q) { return sys.f1(p, q); };
  auto f2 = [&](double p, double q) { return sys.f2(p, q); };
  const double j11 = deriv(f1, true), j12 = deriv(f1, false);
  const double j21 = deriv(f2, true), j22 = deriv(f2, false);

  const double scale = std::max({std::abs(j11), std::abs(j12), std::abs(j21), std::abs(j22)});
  if (scale == 0.0) return Stability::Inconclusive;
  const double det = j11 * j22 - j12 * j21;
  const double tr = j11 + j22;
  const double det_tol = 1e-12 * scale * scale;
  const double tr_tol = 1e-12 * scale;
  if (det > det_tol && tr < -tr_tol) return Stability::Stable;
  if (det > det_tol && tr > tr_tol) return Stability::Unstable;
  if (det < -det_tol) return Stability::Saddle;
  return Stability::Inconclusive;
}

namespace {

// Stability labels are attached with fixed internal evaluation parameters;
// the sign pattern of the Jacobian is invariant to both (alpha scales one
// row linearly, N scales both rows).
constexpr double kLabelAlpha = 0.1;
constexpr int kLabelN = 1000;

EssResult assemble_ess(const PayoffMatrix& U, const DegreeDescriptor& dd) {
  EssResult res;
  res.regime = game::classify_regime(U);
  const double k_eff = dd.kappa();
  const SelectionParams label_sel(kLabelAlpha);

  std::optional<double> interior;
  if (res.regime != Regime::AllForward && res.regime != Regime::NoneForward) {
    const double den = (k_eff - 2.0) * (2.0 * U.u_fn - U.u_ff - U.u_nn);
    if (std::abs(den) < 1e-12)
      throw std::domain_error("degenerate payoff matrix: interior state undefined");
    const double cand = interior_root(k_eff, U.u_ff, U.u_fn, U.u_nn);
    if (cand > 0.0 && cand < 1.0) interior = cand;
  }

  auto label = [&](double p, double q) {
    return jacobian_stability(dd, label_sel, kLabelN, U, p, q);
  };
  res.fixed_points.push_back({0.0, 0.0, label(0.0, 0.0)});
  if (interior)
    res.fixed_points.push_back({*interior, dd.closure_pff(*interior), label(*interior, dd.closure_pff(*interior))});
  res.fixed_points.push_back({1.0, 1.0, label(1.0, 1.0)});

  if (res.regime == Regime::AllForward) {
    res.selected_ess = 1.0;
  } else if (res.regime == Regime::NoneForward) {
    res.selected_ess = 0.0;
  } else if (interior) {
    res.selected_ess = *interior;
  } else {
    // No admissible interior state: the dynamic is one-signed on (0,1) and
    // exactly one corner attracts.
    const Stability at0 = res.fixed_points.front().stability;
    const Stability at1 = res.fixed_points.back().stability;
    if ((at1 == Stability::Stable) != (at0 == Stability::Stable)) {
      res.selected_ess = at1 == Stability::Stable ? 1.0 : 0.0;
    } else {
      const double mid = dd.is_uniform()
                             ? reduced_pf_dot(0.5, dd.k, label_sel, kLabelN, U)
                             : pf_dot_nonuniform(game::state_from_pf_pff(0.5, dd.closure_pff(0.5)),
                                                 dd.stats->mean_degree, label_sel, kLabelN, U);
      res.selected_ess = mid > 0.0 ? 1.0 : 0.0;
    }
  }
  return res;
}

}  // namespace

EssResult ess_uniform(const PayoffMatrix& U, int k) {
  return assemble_ess(U, DegreeDescriptor::uniform(k));
}

EssResult ess_nonuniform(const PayoffMatrix& U, const net::DegreeStats& stats) {
  auto dd = DegreeDescriptor::from_stats(stats);
  if (!(dd.kappa() > 2.0))
    throw std::domain_error("heterogeneous stable-state formula requires kappa > 2");
  return assemble_ess(U, dd);
}

EssResult ess_er(const PayoffMatrix& U, double mean_degree) {
  if (!(mean_degree > 1.0))
    throw std::invalid_argument("er stable-state formula requires mean degree > 1");
  net::DegreeStats s;
  s.mean_degree = mean_degree;
  s.second_moment = mean_degree * (mean_degree + 1.0);  // Poisson: kappa = kbar + 1
  return ess_nonuniform(U, s);
}

EssResult ess_ba(const PayoffMatrix& U, double mean_degree, uint64_t n, LogBase base) {
  if (!(mean_degree > 0.0) || n < 3)
    throw std::invalid_argument("ba stable-state formula requires mean degree > 0 and n >= 3");
  const double logn =
      base == LogBase::Natural ? std::log(static_cast<double>(n)) : std::log10(static_cast<double>(n));
  if (!(mean_degree * logn > 8.0))
    throw std::domain_error("ba stable-state formula requires mean_degree * log(n) > 8");
  net::DegreeStats s;
  s.mean_degree = mean_degree;
  s.second_moment = mean_degree * mean_degree * logn / 4.0;  // kappa = kbar log(n)/4
  s.exponent_hint = 3.0;
  return ess_nonuniform(U, s);
}

PayoffRelation invert_payoff_relation(double p_star, const DegreeDescriptor& dd, InvertMode mode) {
  if (!(p_star > 0.0 && p_star < 1.0))
    throw std::domain_error("inversion requires an interior stable state in (0,1)");
  PayoffRelation rel;
  rel.mode = mode;
  rel.p_star = p_star;
  if (mode == InvertMode::LargeK) {
    const double r = 1.0 / p_star - 1.0;
    rel.ratio = r;
    rel.slope = r;
    rel.intercept = 1.0 - r;
    return rel;
  }
  const double k_eff = dd.kappa();
  const double den = 1.0 + p_star * (k_eff - 2.0);
  rel.effective_degree = k_eff;
  rel.intercept = (k_eff - 2.0) * (2.0 * p_star - 1.0) / den;
  rel.slope = ((k_eff - 1.0) - p_star * (k_eff - 2.0)) / den;
  return rel;
}

double forward_ess(const PayoffRelation& rel, double u_nn) {
  const double u_ff = rel.intercept + rel.slope * u_nn;
  if (rel.mode == InvertMode::Exact) return interior_root(*rel.effective_degree, u_ff, 1.0, u_nn);
  return large_k_root(u_ff, 1.0, u_nn);
}

}  // namespace infodiff::ess
