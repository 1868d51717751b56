#include <infodiff/game.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace infodiff::game {

namespace {

void check_unit_open(double u, const char* name) {
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument(std::string(name) + " must lie strictly in (0,1)");
}

double binomial_pmf(int k, int j, double p) {
  if (k < 0 || j < 0 || j > k) throw std::invalid_argument("configuration count out of range");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("conditional probability out of range");
  double c = 1.0;
  for (int i = 1; i <= j; ++i) c *= static_cast<double>(k - j + i) / i;
  // pow(0,0) == 1 covers the degenerate corners.
  return c * std::pow(p, j) * std::pow(1.0 - p, k - j);
}

}  // namespace

PayoffMatrix::PayoffMatrix(double uff, double ufn, double unn) : u_ff(uff), u_fn(ufn), u_nn(unn) {
  check_unit_open(u_ff, "u_ff");
  check_unit_open(u_fn, "u_fn");
  check_unit_open(u_nn, "u_nn");
}

PayoffMatrix PayoffMatrix::preset(int index) {
  switch (index) {
    case 1: return PayoffMatrix(0.8, 0.6, 0.4);
    case 2: return PayoffMatrix(0.6, 0.8, 0.4);
    case 3: return PayoffMatrix(0.4, 0.8, 0.6);
    case 4: return PayoffMatrix(0.4, 0.6, 0.8);
    default: throw std::invalid_argument("payoff preset index must be 1..4");
  }
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::AllForward: return "all-forward";
    case Regime::NoneForward: return "none-forward";
    case Regime::AntiCoordination: return "anti-coordination";
    case Regime::Coordination: return "coordination";
    case Regime::Degenerate: return "degenerate";
  }
  return "?";
}

Regime classify_regime(const PayoffMatrix& U) {
  if (U.u_ff > U.u_fn && U.u_fn > U.u_nn) return Regime::AllForward;
  if (U.u_nn > U.u_fn && U.u_fn > U.u_ff) return Regime::NoneForward;
  if (U.u_fn > U.u_ff && U.u_fn > U.u_nn) return Regime::AntiCoordination;
  if (U.u_ff > U.u_fn && U.u_nn > U.u_fn) return Regime::Coordination;
  return Regime::Degenerate;
}

SelectionParams::SelectionParams(double a) : alpha(a) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("selection intensity alpha must lie in [0,1]");
}

double fitness_f(int k, int k_f, const SelectionParams& sel, const PayoffMatrix& U) {
  if (k_f < 0 || k_f > k) throw std::invalid_argument("k_f must lie in [0,k]");
  return (1.0 - sel.alpha) * sel.baseline +
         sel.alpha * (k_f * U.u_ff + (k - k_f) * U.u_fn);
}

double fitness_n(int k, int k_n, const SelectionParams& sel, const PayoffMatrix& U) {
  if (k_n < 0 || k_n > k) throw std::invalid_argument("k_n must lie in [0,k]");
  return (1.0 - sel.alpha) * sel.baseline +
         sel.alpha * (k_n * U.u_nn + (k - k_n) * U.u_fn);
}

double config_prob_f(int k, int k_f, double p_ff_cond) { return binomial_pmf(k, k_f, p_ff_cond); }
double config_prob_n(int k, int k_n, double p_nn_cond) { return binomial_pmf(k, k_n, p_nn_cond); }

NetworkState state_from_pf_pff(double p_f, double p_ff) {
  if (!(p_f >= 0.0 && p_f <= 1.0)) throw std::invalid_argument("p_f must lie in [0,1]");
  if (!(p_ff >= 0.0 && p_ff <= 1.0)) throw std::invalid_argument("p_ff must lie in [0,1]");
  if (p_ff > p_f)
    throw std::invalid_argument("infeasible state: p_ff > p_f (more f-f edge mass than f nodes)");
  if (p_ff < 2.0 * p_f - 1.0)
    throw std::invalid_argument("infeasible state: p_ff < 2 p_f - 1 (p_nn would be negative)");

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  NetworkState st;
  st.p_f = p_f;
  st.p_n = 1.0 - p_f;
  st.p_ff = p_ff;
  st.p_fn = 2.0 * (p_f - p_ff);
  st.p_nn = 1.0 - 2.0 * p_f + p_ff;
  if (p_f > 0.0) {
    st.pf_given_f = p_ff / p_f;
    st.pn_given_f = 1.0 - st.pf_given_f;
  } else {
    st.pf_given_f = st.pn_given_f = nan;  // vacuous: no f nodes
  }
  if (p_f < 1.0) {
    st.pf_given_n = (p_f - p_ff) / st.p_n;
    st.pn_given_n = 1.0 - st.pf_given_n;
  } else {
    st.pf_given_n = st.pn_given_n = nan;  // vacuous: no n nodes
  }
  return st;
}

NetworkState pair_closure(double p_f, int k) {
  if (k < 3) throw std::invalid_argument("pair closure requires k >= 3");
  if (!(p_f >= 0.0 && p_f <= 1.0)) throw std::invalid_argument("p_f must lie in [0,1]");

  NetworkState st;
  st.p_f = p_f;
  st.p_n = 1.0 - p_f;
  // p_f|n is defined through p_f|f so the closure identity
  // p_f|f - p_f|n == 1/(k-1) holds bit-exactly.
  st.pf_given_f = p_f + (1.0 - p_f) / (k - 1.0);
  st.pf_given_n = st.pf_given_f - 1.0 / (k - 1.0);
  st.pn_given_f = 1.0 - st.pf_given_f;
  st.pn_given_n = 1.0 - st.pf_given_n;
  st.p_ff = st.p_f * st.pf_given_f;
  st.p_fn = 2.0 * st.p_f * st.pn_given_f;
  st.p_nn = st.p_n * st.pn_given_n;
  return st;
}

}  // namespace infodiff::game
