#include <gtest/gtest.h>

#include <cmath>

#include "afs/pnl.hpp"
#include "afs/policy.hpp"

using namespace afs;

namespace {

PolicySpec spec(double c, double tau, double T, double g = 1.0) { return PolicySpec{AfsParams{c, tau, 1, 1, g}, T}; }

OptimalPlan constant_plan(const PolicySpec& s, double alpha, std::size_t n = 50) {
  return optimal_impact(s, sample_alpha(AlphaModel::constant(alpha), TimeGrid{0, s.horizon, n}, 0));
}

}  // namespace

TEST(OptimalImpact, TwoThirdsForSquareRoot) {
  for (double tau : {0.05, 0.2, 3.0}) {
    const auto plan = constant_plan(spec(0.5, tau, 1.0), 0.7);
    for (std::size_t k = 0; k < plan.grid.n; ++k) EXPECT_NEAR(plan.i_star[k] / 0.7, 2.0 / 3.0, 1e-12);
    EXPECT_EQ(plan.i_star.back(), 0.7);
  }
}

TEST(OptimalImpact, OneHalfForLinear) {
  const auto plan = constant_plan(spec(1.0, 0.2, 1.0), -1.3);
  for (std::size_t k = 0; k < plan.grid.n; ++k) EXPECT_NEAR(plan.i_star[k] / -1.3, 0.5, 1e-12);
}

TEST(OptimalImpact, OuFraction) {
  const double theta = 0.8, tau = 0.2;
  const auto s = spec(0.5, tau, 2.0);
  const auto alpha = sample_alpha(AlphaModel::ou(1.0, theta, 0.0), TimeGrid{0, 2.0, 40}, 0);
  const auto plan = optimal_impact(s, alpha);
  for (std::size_t k = 0; k < plan.grid.n; ++k)
    EXPECT_NEAR(plan.i_star[k] / alpha.alpha[k], (2.0 / 3.0) * (1.0 + tau / theta), 1e-12);
}

TEST(OptimalImpact, ImpactStateConsistency) {
  const auto s = spec(0.48, 0.2, 1.0, 1.7);
  const auto alpha = sample_alpha(AlphaModel::ou(0.9, 0.5, 1.0), TimeGrid{0, 1.0, 64}, 3);
  const auto plan = optimal_impact(s, alpha);
  for (std::size_t k = 0; k < plan.grid.size(); ++k)
    EXPECT_NEAR(plan.i_star[k], impact_of_state(s.believed, plan.j_star[k]), 1e-12 * std::abs(plan.i_star[k]) + 1e-300);
}

TEST(OptimalImpact, PositionsFromImpactState) {
  const auto s = spec(0.5, 0.3, 1.0);
  const auto plan = constant_plan(s, 1.0, 10);
  const double j = std::pow(2.0 / 3.0, 2.0);
  EXPECT_NEAR(plan.initial_jump, j, 1e-14);
  EXPECT_NEAR(plan.q_star[0], j, 1e-14);
  for (std::size_t k = 1; k < 10; ++k) EXPECT_NEAR(plan.q_star[k], j + j * plan.grid.time(k) / 0.3, 1e-12);
  EXPECT_NEAR(plan.q_star[10], 1.0 + j / 0.3, 1e-12);
  EXPECT_NEAR(plan.terminal_jump, 1.0 - j, 1e-14);
}

TEST(OptimalImpact, ImpactIndependentOfLambda) {
  const auto a = constant_plan(spec(0.48, 0.2, 1.0, 1.0), 0.6);
  const auto b = constant_plan(spec(0.48, 0.2, 1.0, 4.0), 0.6);
  for (std::size_t k = 0; k < a.grid.n; ++k) {
    EXPECT_DOUBLE_EQ(a.i_star[k], b.i_star[k]);
    EXPECT_NE(a.j_star[k], b.j_star[k]);
  }
}

TEST(OptimalImpact, SquareRootMoreAggressiveThanLinear) {
  const auto sq = constant_plan(spec(0.5, 0.2, 1.0), 1.0);
  const auto lin = constant_plan(spec(1.0, 0.2, 1.0), 1.0);
  EXPECT_GT(sq.i_star[3], lin.i_star[3]);
}

TEST(OptimalImpact, NegativeAdjustedAlphaKeepsSign) {
  const auto plan = constant_plan(spec(0.5, 0.2, 1.0), -2.0);
  for (double j : plan.j_star) EXPECT_LT(j, 0.0);
}

TEST(OptimalImpact, RequiresGridOnHorizon) {
  const auto alpha = sample_alpha(AlphaModel::constant(1.0), TimeGrid{0, 2.0, 10}, 0);
  EXPECT_THROW(optimal_impact(spec(0.5, 0.2, 1.0), alpha), std::invalid_argument);
}

TEST(OptimalImpact, RealizedPathTracksTargets) {
  const auto s = spec(0.48, 0.2, 1.0);
  const auto plan = constant_plan(s, 1.0, 20);
  const auto path = realize_plan(s.believed, plan);
  for (std::size_t k = 0; k <= 20; ++k) EXPECT_NEAR(path.j[k], plan.j_star[k], 1e-12);
  // Replaying Q* in the believed market reproduces the same positions.
  const auto replay = replay_plan(s.believed, plan);
  for (std::size_t k = 0; k <= 20; ++k) EXPECT_NEAR(replay.q[k], plan.q_star[k], 1e-12);
}

TEST(OptimalImpact, FirstOrderOptimality) {
  const AfsParams p{0.5, 0.2, 1, 1, 1};
  const PolicySpec s{p, 1.0};
  const auto alpha = sample_alpha(AlphaModel::ou(1.0, 0.7, 0.0), TimeGrid{0, 1.0, 40}, 0);
  const auto plan = optimal_impact(s, alpha);
  const double base = value_impact_space(p, realize_plan(p, plan), alpha).raw;
  auto perturbed = [&](double eps) {
    OptimalPlan q = plan;
    for (std::size_t k = 0; k < q.grid.n; ++k) q.j_star[k] += eps * std::sin(1.0 + 0.37 * k);
    q.j_star.back() += eps;
    q.terminal_jump += eps;
    q.initial_jump = q.j_star[0];
    return value_impact_space(p, realize_plan(p, q), alpha).raw;
  };
  const double d1 = base - perturbed(1e-4);
  const double d2 = base - perturbed(5e-5);
  const double dm = base - perturbed(-1e-4);
  EXPECT_GT(d1, 0.0);
  EXPECT_GT(dm, 0.0);
  EXPECT_NEAR(d1 / d2, 4.0, 0.05);  // quadratic decay
}

TEST(OrderSizing, Examples) {
  const auto s = spec(0.5, 0.2, 0.2);
  EXPECT_NEAR(order_size_from_alpha(s, 1.0), 13.0 / 9.0, 1e-14);
  EXPECT_NEAR(implied_alpha(s, 13.0 / 9.0), 1.0, 1e-14);
  EXPECT_EQ(order_size_from_alpha(s, 0.0), 0.0);
  EXPECT_EQ(implied_alpha(s, 0.0), 0.0);
  const double lam = 1.0 / std::sqrt(13.0 / 9.0);
  EXPECT_NEAR(order_size_from_alpha(s, lam), 1.0, 1e-14);
  EXPECT_NEAR(order_size_from_alpha(s, -1.0), -13.0 / 9.0, 1e-14);
}

TEST(OrderSizing, RoundTrip) {
  const auto s = spec(0.5, 0.3, 1.1, 0.7);
  for (double q : {1e-4, 1e-3, 1e-2, 1e-1}) {
    for (double sgn : {-1.0, 1.0}) {
      const double back = order_size_from_alpha(s, implied_alpha(s, sgn * q));
      EXPECT_NEAR(back, sgn * q, 1e-12 * q);
    }
  }
}

TEST(OrderSizing, MatchesDynamicsAndMaximizesPnl) {
  // Terminal position of the optimal plan run through the dynamics.
  const PolicySpec s = spec(0.5, 0.2, 0.2);
  const auto alpha = sample_alpha(AlphaModel::constant(1.0), TimeGrid{0, 0.2, 400}, 0);
  const auto plan = optimal_impact(s, alpha);
  const auto path = realize_plan(s.believed, plan);
  EXPECT_NEAR(path.q.back(), 13.0 / 9.0, 1e-9);

  // Scaling the whole J trajectory by a: the P&L peaks at a = 1.
  auto pnl = [&](double a) {
    OptimalPlan q = plan;
    for (auto& j : q.j_star) j *= a;
    q.terminal_jump *= a;
    q.initial_jump *= a;
    return value_impact_space(s.believed, realize_plan(s.believed, q), alpha).raw;
  };
  double lo = 0.2, hi = 3.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    if (pnl(x1) < pnl(x2)) lo = x1;
    else hi = x2;
  }
  EXPECT_NEAR(0.5 * (lo + hi) * path.q.back(), 13.0 / 9.0, 1e-5);
}

TEST(OrderSizing, OnlySquareRoot) {
  EXPECT_THROW(order_size_from_alpha(spec(0.48, 0.2, 1.0), 1.0), std::domain_error);
  EXPECT_THROW(implied_alpha(spec(1.0, 0.2, 1.0), 1.0), std::domain_error);
}

TEST(TurnoverFactor, Examples) {
  EXPECT_NEAR(turnover_factor(0.5, 1e-12, 1.0), 1.0, 1e-11);
  EXPECT_NEAR(turnover_factor(0.5, 1.0, 1.0), 4.0, 1e-14);
  EXPECT_NEAR(turnover_factor(1.0, 1.0, 1.0), 2.0, 1e-14);
  EXPECT_THROW(turnover_factor(0.5, 0.0, 1.0), std::invalid_argument);
}

TEST(TurnoverFactor, RatioOfStateMagnitudes) {
  // J* under OU over J* under constant alpha at the same level.
  for (double c : {0.5, 1.0, 0.48}) {
    const double tau = 0.2, theta = 0.2;
    const auto s = spec(c, tau, 1.0);
    const auto cst = constant_plan(s, 1.0, 10);
    const auto ou = optimal_impact(s, sample_alpha(AlphaModel::ou(1.0, theta, 0.0), TimeGrid{0, 1.0, 10}, 0));
    EXPECT_NEAR(ou.j_star[0] / cst.j_star[0], turnover_factor(c, tau, theta), 1e-12);
  }
}

TEST(Tca, OptimalAndOverTrading) {
  const auto ok = tca_check(0.5, 0.2, 1.5, 0.0, 1.0);
  EXPECT_NEAR(ok.optimal_fraction, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(ok.efficiency, 1.0, 1e-15);
  const auto over = tca_check(0.5, 0.2, 1.0, -1.0, 1.2);
  EXPECT_NEAR(over.adjusted_alpha, 1.2, 1e-15);
  EXPECT_NEAR(over.efficiency, 1.5, 1e-15);
  EXPECT_THROW(tca_check(0.0, 0.2, 1, 0, 1), std::invalid_argument);
}
