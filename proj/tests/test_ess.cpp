#include <doctest.h>

#include <infodiff/ess.hpp>
#include <infodiff/game.hpp>

#include <cmath>
#include <stdexcept>

using namespace infodiff;
using ess::DegreeDescriptor;
using ess::InvertMode;
using ess::Stability;
using game::PayoffMatrix;
using game::SelectionParams;

// Reference values in this file were frozen from an independent
// implementation of the closed-form dynamics (straightforward transliteration
// of the equations in a separate scripting language), then pinned here.

TEST_CASE("dynamics coefficients at a frozen interior state") {
  const auto st = game::state_from_pf_pff(0.37, 0.20);
  const auto U = PayoffMatrix::preset(2);
  const auto c = ess::dynamics_coefficients(st, 10, U);
  CHECK(c.gamma1 == doctest::Approx(-10.540785683642829).epsilon(1e-12));
  CHECK(c.gamma2 == doctest::Approx(2.7373838261869148).epsilon(1e-12));
  CHECK(c.gamma3 == doctest::Approx(7.8034018574559125).epsilon(1e-12));
  CHECK(c.a == doctest::Approx(-4.8).epsilon(1e-12));
  CHECK(c.b == doctest::Approx(-3.4).epsilon(1e-12));
  CHECK_THROWS_AS(ess::dynamics_coefficients(st, 2, U), std::invalid_argument);
}

TEST_CASE("uniform-degree drift at frozen states") {
  const auto st = game::state_from_pf_pff(0.37, 0.20);
  const auto U = PayoffMatrix::preset(2);
  const SelectionParams sel(0.2);
  CHECK(ess::pf_dot_uniform(st, 10, sel, 700, U) ==
        doctest::Approx(9.5941437308332892e-05).epsilon(1e-12));
  CHECK(ess::pff_dot_uniform(st, 10, 700) ==
        doctest::Approx(-6.3420749135034848e-05).epsilon(1e-12));
  CHECK(ess::reduced_pf_dot(0.37, 10, sel, 700, U) ==
        doctest::Approx(0.00010329176859504137).epsilon(1e-12));

  // hand-checkable point: p_f|n == p_f|f makes the pair drift p_fn/((k+1)N)
  CHECK(ess::pff_dot_uniform(game::state_from_pf_pff(0.5, 0.25), 10, 1000) ==
        doctest::Approx(0.5 / 11000.0).epsilon(1e-12));
}

TEST_CASE("boundary states are exact fixed points") {
  const auto U = PayoffMatrix::preset(2);
  const SelectionParams sel(0.1);
  for (const auto& st : {game::state_from_pf_pff(0.0, 0.0), game::state_from_pf_pff(1.0, 1.0),
                         game::state_from_pf_pff(0.5, 0.5)}) {  // last: p_fn = 0
    CHECK(ess::pf_dot_uniform(st, 10, sel, 1000, U) == 0.0);
    CHECK(ess::pff_dot_uniform(st, 10, 1000) == 0.0);
    CHECK(ess::pf_dot_nonuniform(st, 12.0, sel, 1000, U) == 0.0);
  }
  CHECK(ess::reduced_pf_dot(0.0, 10, sel, 1000, U) == 0.0);
  CHECK(ess::reduced_pf_dot(1.0, 10, sel, 1000, U) == 0.0);
}

TEST_CASE("reduced dynamic matches the pair dynamic along the closure") {
  const SelectionParams sel(0.1);
  for (const int pm : {1, 2, 4}) {
    const auto U = PayoffMatrix::preset(pm);
    for (const int k : {5, 10, 20, 50}) {
      for (double p = 0.1; p < 0.95; p += 0.1) {
        const auto st = game::pair_closure(p, k);
        const double full = ess::pf_dot_uniform(st, k, sel, 1000, U);
        const double red = ess::reduced_pf_dot(p, k, sel, 1000, U);
        CHECK(std::abs(full - red) < 1e-12);
      }
    }
  }
}

TEST_CASE("reduced dynamic vanishes at its analytic roots") {
  const auto U = PayoffMatrix::preset(2);
  const SelectionParams sel(0.1);
  const double root = ess::interior_root(10, U.u_ff, U.u_fn, U.u_nn);
  CHECK(root == doctest::Approx(0.70833333333333337).epsilon(1e-14));
  CHECK(std::abs(ess::reduced_pf_dot(root, 10, sel, 1000, U)) < 1e-18);
}

TEST_CASE("drift is monotone in the payoff entries") {
  const SelectionParams sel(0.1);
  const auto st = game::pair_closure(0.4, 20);
  const double base = ess::pf_dot_uniform(st, 20, sel, 1000, PayoffMatrix(0.6, 0.8, 0.4));
  const double up_ff = ess::pf_dot_uniform(st, 20, sel, 1000, PayoffMatrix(0.65, 0.8, 0.4));
  const double up_nn = ess::pf_dot_uniform(st, 20, sel, 1000, PayoffMatrix(0.6, 0.8, 0.45));
  CHECK(up_ff > base);  // rewarding mutual forwarding pushes p_f up
  CHECK(up_nn < base);  // rewarding mutual silence pushes p_f down
}

TEST_CASE("heterogeneous birth-death drift at frozen states") {
  const auto st = game::state_from_pf_pff(0.37, 0.20);
  const auto U = PayoffMatrix::preset(2);
  const SelectionParams sel(0.2);
  CHECK(ess::mean_fitness_bar(st, 700, U) == doctest::Approx(403.2).epsilon(1e-12));
  CHECK(ess::pf_dot_nonuniform(st, 12.5, sel, 700, U) ==
        doctest::Approx(2.5484181946766977e-07).epsilon(1e-12));
  net::DegreeStats stats;
  stats.mean_degree = 12.5;
  stats.second_moment = 178.75;  // kappa = 14.3
  CHECK(ess::pff_dot_nonuniform(st, stats, sel, 700, U) ==
        doctest::Approx(-3.4622105098295588e-07).epsilon(1e-12));

  // fully hand-checkable point
  const auto mid = game::state_from_pf_pff(0.5, 0.275);
  CHECK(mid.pf_given_f == doctest::Approx(0.55).epsilon(1e-14));
  CHECK(ess::pf_dot_nonuniform(mid, 20.0, SelectionParams(0.1), 1000, U) ==
        doctest::Approx(7.4055118110236218e-08).epsilon(1e-12));

  CHECK_THROWS_AS(ess::pf_dot_nonuniform(st, 1.0, sel, 700, U), std::invalid_argument);
}

TEST_CASE("interior root tends to the large-degree limit") {
  const auto U = PayoffMatrix::preset(2);
  const double limit = ess::ess_approx_large_k(U);
  CHECK(limit == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(ess::interior_root(1e9, U.u_ff, U.u_fn, U.u_nn) - limit) < 1e-8);
  CHECK_THROWS_AS(ess::ess_approx_large_k(PayoffMatrix(0.5, 0.4, 0.4)), std::domain_error);
}

TEST_CASE("degree descriptor") {
  const auto uni = DegreeDescriptor::uniform(11);
  CHECK(uni.is_uniform());
  CHECK(uni.kappa() == 11.0);
  CHECK(uni.mean_degree() == 11.0);
  CHECK(uni.closure_pff(0.5) == doctest::Approx(0.275).epsilon(1e-14));

  net::DegreeStats s;
  s.mean_degree = 20.0;
  s.second_moment = 420.0;
  const auto het = DegreeDescriptor::from_stats(s);
  CHECK_FALSE(het.is_uniform());
  CHECK(het.kappa() == doctest::Approx(21.0).epsilon(1e-14));
  CHECK(het.closure_pff(0.5) == doctest::Approx(0.2625).epsilon(1e-14));

  CHECK_THROWS_AS(DegreeDescriptor::uniform(2), std::invalid_argument);
  net::DegreeStats bad;
  bad.mean_degree = 0.5;
  bad.second_moment = 0.5;
  CHECK_THROWS_AS(DegreeDescriptor::from_stats(bad), std::invalid_argument);
}

TEST_CASE("stability labels for the four experiment matrices") {
  for (const int k : {10, 20}) {
    const auto all_f = ess::ess_uniform(PayoffMatrix::preset(1), k);
    REQUIRE(all_f.fixed_points.size() == 2);
    CHECK(all_f.regime == game::Regime::AllForward);
    CHECK(all_f.selected_ess == 1.0);
    CHECK(all_f.fixed_points.front().stability == Stability::Saddle);
    CHECK(all_f.fixed_points.back().stability == Stability::Stable);

    const auto none_f = ess::ess_uniform(PayoffMatrix::preset(4), k);
    REQUIRE(none_f.fixed_points.size() == 2);
    CHECK(none_f.selected_ess == 0.0);
    CHECK(none_f.fixed_points.front().stability == Stability::Stable);
    CHECK(none_f.fixed_points.back().stability == Stability::Saddle);
  }

  const auto anti = ess::ess_uniform(PayoffMatrix::preset(2), 20);
  REQUIRE(anti.fixed_points.size() == 3);
  CHECK(anti.regime == game::Regime::AntiCoordination);
  CHECK(anti.fixed_points[0].stability == Stability::Saddle);
  CHECK(anti.fixed_points[1].stability == Stability::Stable);
  CHECK(anti.fixed_points[2].stability == Stability::Saddle);
  CHECK(anti.fixed_points[1].p_f == doctest::Approx(0.68518518518518523).epsilon(1e-12));
  CHECK(anti.fixed_points[1].p_ff ==
        doctest::Approx(DegreeDescriptor::uniform(20).closure_pff(anti.fixed_points[1].p_f))
            .epsilon(1e-12));

  const auto anti3 = ess::ess_uniform(PayoffMatrix::preset(3), 20);
  CHECK(anti3.selected_ess == doctest::Approx(0.31481481481481471).epsilon(1e-12));
  CHECK(anti3.fixed_points[1].stability == Stability::Stable);
}

TEST_CASE("stability labels do not depend on alpha or N") {
  const auto U = PayoffMatrix::preset(2);
  const auto dd = DegreeDescriptor::uniform(20);
  const double p = ess::interior_root(20, U.u_ff, U.u_fn, U.u_nn);
  const double q = dd.closure_pff(p);
  CHECK(ess::jacobian_stability(dd, SelectionParams(0.05), 500, U, p, q) == Stability::Stable);
  CHECK(ess::jacobian_stability(dd, SelectionParams(0.9), 100000, U, p, q) == Stability::Stable);
}

TEST_CASE("stability query rejects non-fixed points and bad parameters") {
  const auto U = PayoffMatrix::preset(1);
  const auto dd = DegreeDescriptor::uniform(10);
  CHECK_THROWS_AS(
      ess::jacobian_stability(dd, SelectionParams(0.1), 1000, U, 0.3, dd.closure_pff(0.3)),
      std::invalid_argument);
  CHECK_THROWS_AS(ess::jacobian_stability(dd, SelectionParams(0.0), 1000, U, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ess::jacobian_stability(dd, SelectionParams(1.0), 1000, U, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("coordination regime: interior separatrix is not an attractor") {
  const PayoffMatrix U(0.8, 0.2, 0.6);
  const auto res = ess::ess_uniform(U, 10);
  REQUIRE(res.fixed_points.size() == 3);
  CHECK(res.regime == game::Regime::Coordination);
  CHECK(res.selected_ess == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(res.fixed_points[1].stability != Stability::Stable);
}

TEST_CASE("degenerate matrices are rejected by the stable-state solver") {
  // all entries tied: no corner regime applies and the interior denominator
  // 2 u_fn - u_ff - u_nn vanishes
  CHECK_THROWS_AS(ess::ess_uniform(PayoffMatrix(0.5, 0.5, 0.5), 4), std::domain_error);
  CHECK_THROWS_AS(ess::ess_uniform(PayoffMatrix::preset(2), 2), std::invalid_argument);
}

TEST_CASE("poisson and scale-free stable-state specializations") {
  const auto U2 = PayoffMatrix::preset(2);
  const auto U3 = PayoffMatrix::preset(3);

  CHECK(ess::ess_uniform(U2, 10).selected_ess ==
        doctest::Approx(0.70833333333333337).epsilon(1e-12));
  CHECK(ess::ess_uniform(U2, 50).selected_ess ==
        doctest::Approx(0.67361111111111138).epsilon(1e-12));

  CHECK(ess::ess_er(U2, 20.0).selected_ess ==
        doctest::Approx(0.68421052631578949).epsilon(1e-12));
  CHECK(ess::ess_er(U3, 20.0).selected_ess ==
        doctest::Approx(0.31578947368421056).epsilon(1e-12));
  CHECK(ess::ess_er(U2, 10.0).selected_ess ==
        doctest::Approx(0.70370370370370372).epsilon(1e-12));

  CHECK(ess::ess_ba(U2, 20.0, 1000).selected_ess ==
        doctest::Approx(0.67691085437943721).epsilon(1e-12));
  CHECK(ess::ess_ba(U3, 10.0, 1000).selected_ess ==
        doctest::Approx(0.31150316377952747).epsilon(1e-12));
  // exact mean degree of the attachment generator at n=1000, m=10
  CHECK(ess::ess_ba(U2, 19.89, 1000).selected_ess ==
        doctest::Approx(0.67697101174566487).epsilon(1e-12));
  CHECK(ess::ess_ba(U3, 19.89, 1000).selected_ess ==
        doctest::Approx(0.32302898825433513).epsilon(1e-12));
  // base-10 moment rule: kappa = 20 * 3 / 4 = 15 exactly
  CHECK(ess::ess_ba(U2, 20.0, 1000, ess::LogBase::Base10).selected_ess ==
        doctest::Approx(5.4 / 7.8).epsilon(1e-12));

  // the ER rule is the heterogeneous formula with kappa = mean + 1
  net::DegreeStats s;
  s.mean_degree = 20.0;
  s.second_moment = 420.0;
  CHECK(ess::ess_nonuniform(U2, s).selected_ess ==
        doctest::Approx(ess::ess_er(U2, 20.0).selected_ess).epsilon(1e-14));

  CHECK_THROWS_AS(ess::ess_er(U2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ess::ess_ba(U2, 1.0, 20), std::domain_error);  // kbar log n <= 8
  CHECK_THROWS_AS(ess::ess_ba(U2, 10.0, 2), std::invalid_argument);
  net::DegreeStats thin;
  thin.mean_degree = 1.5;
  thin.second_moment = 2.7;  // kappa = 1.8 <= 2
  CHECK_THROWS_AS(ess::ess_nonuniform(U2, thin), std::domain_error);
}

TEST_CASE("heterogeneous stable state sits on the kappa closure") {
  net::DegreeStats s;
  s.mean_degree = 20.0;
  s.second_moment = 420.0;
  const auto res = ess::ess_nonuniform(PayoffMatrix::preset(2), s);
  REQUIRE(res.fixed_points.size() == 3);
  CHECK(res.fixed_points[0].stability == Stability::Saddle);
  CHECK(res.fixed_points[1].stability == Stability::Stable);
  CHECK(res.fixed_points[2].stability == Stability::Saddle);
}

TEST_CASE("payoff inversion: large-degree mode") {
  const auto dd = DegreeDescriptor::uniform(3);  // ignored in this mode
  const double stars[] = {0.19, 0.35, 0.53, 0.77, 0.81};
  const double ratios[] = {4.2631578947368425, 1.8571428571428572, 0.88679245283018848,
                           0.29870129870129869, 0.23456790123456783};
  for (int i = 0; i < 5; ++i) {
    const auto rel = ess::invert_payoff_relation(stars[i], dd, InvertMode::LargeK);
    REQUIRE(rel.ratio.has_value());
    CHECK(*rel.ratio == doctest::Approx(ratios[i]).epsilon(1e-12));
    CHECK(rel.slope == *rel.ratio);
    CHECK(rel.intercept == doctest::Approx(1.0 - ratios[i]).epsilon(1e-12));
    CHECK_FALSE(rel.effective_degree.has_value());
    for (const double unn : {0.25, 0.5, 0.75}) {
      CHECK(std::abs(ess::forward_ess(rel, unn) - stars[i]) < 1e-12);
    }
  }
}

TEST_CASE("payoff inversion: exact mode round trips") {
  for (const double star : {0.19, 0.35, 0.53, 0.77, 0.81}) {
    const auto rel10 =
        ess::invert_payoff_relation(star, DegreeDescriptor::uniform(10), InvertMode::Exact);
    REQUIRE(rel10.effective_degree.has_value());
    CHECK(*rel10.effective_degree == 10.0);
    CHECK_FALSE(rel10.ratio.has_value());
    for (const double unn : {0.25, 0.5, 0.75}) {
      CHECK(std::abs(ess::forward_ess(rel10, unn) - star) < 1e-12);
    }

    const auto rel499 =
        ess::invert_payoff_relation(star, DegreeDescriptor::uniform(499), InvertMode::Exact);
    for (const double unn : {0.25, 0.5, 0.75}) {
      CHECK(std::abs(ess::forward_ess(rel499, unn) - star) < 1e-9);
    }
  }

  // heterogeneous effective degree flows through unchanged
  net::DegreeStats s;
  s.mean_degree = 20.0;
  s.second_moment = 420.0;
  const auto rel =
      ess::invert_payoff_relation(0.53, DegreeDescriptor::from_stats(s), InvertMode::Exact);
  CHECK(*rel.effective_degree == doctest::Approx(21.0).epsilon(1e-14));
  CHECK(std::abs(ess::forward_ess(rel, 0.5) - 0.53) < 1e-12);

  CHECK_THROWS_AS(ess::invert_payoff_relation(0.0, DegreeDescriptor::uniform(10), InvertMode::Exact),
                  std::domain_error);
  CHECK_THROWS_AS(ess::invert_payoff_relation(1.0, DegreeDescriptor::uniform(10), InvertMode::LargeK),
                  std::domain_error);
}
