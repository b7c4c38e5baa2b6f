#include <gtest/gtest.h>

#include <cmath>

#include "afs/impact.hpp"

using namespace afs;

namespace {

AfsParams unit(double c) { return AfsParams{c, 0.2, 1.0, 1.0, 1.0}; }

TradeSchedule idle(std::size_t n) { return TradeSchedule{std::vector<double>(n, 0.0), {}}; }

}  // namespace

TEST(ImpactOfState, Examples) {
  EXPECT_EQ(impact_of_state(unit(0.5), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(impact_of_state(unit(0.5), 4.0), 2.0);
  EXPECT_DOUBLE_EQ(impact_of_state(unit(0.48), -1.0), -1.0);
}

TEST(ImpactOfState, OddAndScaled) {
  AfsParams p{0.37, 0.3, 2.0, 1e6, 0.8};
  for (double j : {1.0, 17.0, 3e4}) {
    EXPECT_DOUBLE_EQ(impact_of_state(p, -j), -impact_of_state(p, j));
    EXPECT_NEAR(impact_of_state(p, j), 2.0 * 0.8 / std::pow(1e6, 0.37) * std::pow(j, 0.37), 1e-15);
  }
}

TEST(Params, Validation) {
  EXPECT_THROW((AfsParams{0.0, 0.2, 1, 1, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((AfsParams{1.1, 0.2, 1, 1, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((AfsParams{0.5, 0.0, 1, 1, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((AfsParams{0.5, 0.2, -1, 1, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((AfsParams{0.5, 0.2, 1, 0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((AfsParams{0.5, 0.2, 1, 1, 0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((AfsParams{1.0, 0.2, 1, 1, 1}.validate()));
  EXPECT_THROW((TimeGrid{0, 1, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((TimeGrid{1, 1, 4}.validate()), std::invalid_argument);
}

TEST(EvolveImpact, ZeroTrades) {
  const TimeGrid grid{0.0, 1.0, 50};
  const auto path = evolve_impact(unit(0.5), grid, idle(50));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_EQ(path.j[k], 0.0);
    EXPECT_EQ(path.i[k], 0.0);
    EXPECT_EQ(path.q[k], 0.0);
  }
  EXPECT_TRUE(path.jumps.empty());
  EXPECT_EQ(execution_cost(unit(0.5), path), 0.0);
}

TEST(EvolveImpact, SingleBlockDecays) {
  const TimeGrid grid{0.0, 1.0, 100};
  auto s = idle(100);
  s.blocks.push_back({0.0, 1.0});
  const auto path = evolve_impact(unit(0.5), grid, s);
  EXPECT_NEAR(path.j[20], std::exp(-1.0), 1e-14);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_NEAR(path.j[k], std::exp(-grid.time(k) / 0.2), 1e-14);
    EXPECT_EQ(path.q[k], 1.0);
    if (k > 0) EXPECT_LT(path.j[k], path.j[k - 1]);
  }
  ASSERT_EQ(path.jumps.size(), 1u);
  EXPECT_EQ(path.jumps[0].quantity, 1.0);
}

TEST(EvolveImpact, ConstantRateMatchesOdeSolution) {
  const double qdot = 3.5, tau = 0.2;
  for (std::size_t n : {1u, 7u, 1000u}) {
    const TimeGrid grid{0.0, 5.0, n};
    TradeSchedule s{std::vector<double>(n, qdot), {}};
    const auto path = evolve_impact(AfsParams{0.5, tau, 1, 1, 1}, grid, s);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double t = grid.time(k);
      const double exact = qdot * tau * (-std::expm1(-t / tau));
      EXPECT_NEAR(path.j[k], exact, 1e-12 * std::max(1.0, std::abs(exact)));
      EXPECT_NEAR(path.q[k], qdot * t, 1e-12 * std::max(1.0, qdot * t));
    }
    EXPECT_NEAR(path.j.back(), qdot * tau, 1e-9);
  }
}

TEST(EvolveImpact, PiecewiseExactnessIndependentOfRefinement) {
  // Two-rate profile evaluated on coarse and fine grids; the shared node at t=1
  // must agree to rounding.
  auto run = [](std::size_t n) {
    const TimeGrid grid{0.0, 2.0, n};
    TradeSchedule s;
    for (std::size_t k = 0; k < n; ++k) s.rates.push_back(grid.time(k) < 1.0 ? 2.0 : -1.0);
    return evolve_impact(unit(0.5), grid, s);
  };
  const auto coarse = run(2), fine = run(2048);
  EXPECT_NEAR(coarse.j[1], fine.j[1024], 1e-12);
  EXPECT_NEAR(coarse.j[2], fine.j[2048], 1e-12);
}

TEST(EvolveImpact, ImpactMatchesState) {
  const TimeGrid grid{0.0, 1.0, 64};
  TradeSchedule s;
  for (std::size_t k = 0; k < 64; ++k) s.rates.push_back(std::sin(0.3 * k) * 5.0);
  s.blocks.push_back({0.5, -0.7});
  const AfsParams p{0.6, 0.1, 1.3, 50.0, 0.9};
  const auto path = evolve_impact(p, grid, s);
  for (std::size_t k = 0; k < grid.size(); ++k)
    EXPECT_NEAR(path.i[k], p.lambda() * signed_pow(path.j[k], 0.6), 1e-12 * std::max(1e-300, std::abs(path.i[k])));
}

TEST(EvolveImpact, RejectsBadInput) {
  const TimeGrid grid{0.0, 1.0, 4};
  TradeSchedule s{{1.0, NAN, 0.0, 0.0}, {}};
  EXPECT_THROW(evolve_impact(unit(0.5), grid, s), std::invalid_argument);
  TradeSchedule wrong{{1.0}, {}};
  EXPECT_THROW(evolve_impact(unit(0.5), grid, wrong), std::invalid_argument);
  TradeSchedule off{std::vector<double>(4, 0.0), {{0.3, 1.0}}};
  EXPECT_THROW(evolve_impact(unit(0.5), grid, off), std::invalid_argument);
  TradeSchedule inf_block{std::vector<double>(4, 0.0), {{0.25, INFINITY}}};
  EXPECT_THROW(evolve_impact(unit(0.5), grid, inf_block), std::invalid_argument);
}

TEST(ExecutionCost, SingleBlock) {
  const TimeGrid grid{0.0, 1.0, 10};
  auto s = idle(10);
  s.blocks.push_back({0.0, 1.0});
  EXPECT_NEAR(execution_cost(unit(0.5), evolve_impact(unit(0.5), grid, s)), 1.0 / 1.5, 1e-15);
}

TEST(ExecutionCost, SellBlockCostsTheSame) {
  const TimeGrid grid{0.0, 1.0, 10};
  auto s = idle(10);
  s.blocks.push_back({0.0, -1.0});
  EXPECT_NEAR(execution_cost(unit(0.5), evolve_impact(unit(0.5), grid, s)), 1.0 / 1.5, 1e-15);
}

TEST(ExecutionCost, RoundTripVanishesAsWindowShrinks) {
  const AfsParams p = unit(0.5);
  double prev = INFINITY;
  for (double window : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const TimeGrid grid{0.0, window, 1};
    TradeSchedule s{{0.0}, {{0.0, 1.0}, {window, -1.0}}};
    const auto path = evolve_impact(p, grid, s);
    const double e = std::exp(-window / p.tau);
    const double oracle = (impact_antiderivative(p, 1.0) - impact_antiderivative(p, 0.0)) +
                          (impact_antiderivative(p, e - 1.0) - impact_antiderivative(p, e));
    const double cost = execution_cost(p, path);
    EXPECT_NEAR(cost, oracle, 1e-14);
    EXPECT_LT(cost, prev);
    prev = cost;
  }
  EXPECT_LT(prev, 1e-7);
}

TEST(ExecutionCost, SmoothCostConvergesToIntegral) {
  // Constant rate r from J=0 with c=1: int I dQ = lambda r^2 tau (T - tau(1-e^{-T/tau})).
  const AfsParams p{1.0, 0.2, 1, 1, 1};
  const double r = 2.0, T = 1.0;
  const double exact = r * r * p.tau * (T - p.tau * (-std::expm1(-T / p.tau)));
  for (std::size_t n : {16u, 256u}) {
    TradeSchedule s{std::vector<double>(n, r), {}};
    const auto path = evolve_impact(p, TimeGrid{0, T, n}, s);
    EXPECT_NEAR(execution_cost(p, path), exact, 5.0 / (n * n));
  }
}

TEST(Properties, SignSymmetry) {
  const TimeGrid grid{0.0, 1.0, 32};
  TradeSchedule s, neg;
  for (std::size_t k = 0; k < 32; ++k) s.rates.push_back(std::cos(0.5 * k) + 0.2);
  s.blocks = {{0.0, 0.4}, {0.5, -0.9}};
  neg = s;
  for (auto& r : neg.rates) r = -r;
  for (auto& b : neg.blocks) b.quantity = -b.quantity;
  const AfsParams p{0.48, 0.2, 1, 1, 1};
  const auto a = evolve_impact(p, grid, s), b = evolve_impact(p, grid, neg);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_EQ(a.j[k], -b.j[k]);
    EXPECT_EQ(a.i[k], -b.i[k]);
    EXPECT_EQ(a.q[k], -b.q[k]);
  }
  EXPECT_DOUBLE_EQ(execution_cost(p, a), execution_cost(p, b));
}

TEST(Properties, LambdaScaling) {
  const TimeGrid grid{0.0, 1.0, 32};
  TradeSchedule s;
  for (std::size_t k = 0; k < 32; ++k) s.rates.push_back(1.0 + 0.1 * k);
  s.blocks = {{0.25, 2.0}};
  const AfsParams p{0.48, 0.2, 1, 1, 1};
  AfsParams p3 = p;
  p3.g = 3.0;
  const auto a = evolve_impact(p, grid, s), b = evolve_impact(p3, grid, s);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_EQ(a.j[k], b.j[k]);
    EXPECT_EQ(a.q[k], b.q[k]);
    EXPECT_NEAR(b.i[k], 3.0 * a.i[k], 1e-14 * std::abs(b.i[k]));
  }
  EXPECT_NEAR(execution_cost(p3, b), 3.0 * execution_cost(p, a), 1e-12);
}

TEST(TrackingSchedule, HitsTargets) {
  const TimeGrid grid{0.0, 1.0, 20};
  std::vector<double> left(21), right(21);
  for (std::size_t k = 0; k <= 20; ++k) right[k] = left[k] = std::sin(0.2 * k) + 1.0;
  left[0] = 0.0;
  right[20] = 3.0;
  const AfsParams p{0.5, 0.35, 1, 1, 1};
  const auto path = evolve_impact(p, grid, tracking_schedule(p.tau, grid, left, right));
  for (std::size_t k = 0; k <= 20; ++k) {
    EXPECT_NEAR(path.j[k], right[k], 1e-12);
    EXPECT_NEAR(path.j_before(k), left[k], 1e-12);
  }
  EXPECT_THROW(tracking_schedule(p.tau, grid, right, right), std::invalid_argument);
}
