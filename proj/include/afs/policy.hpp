#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "afs/alpha.hpp"
#include "afs/impact.hpp"
#include "afs/params.hpp"

namespace afs {

// A policy is always built from the parameters the trader believes.
struct PolicySpec {
  AfsParams believed;
  double horizon = 1.0;  // T, days

  void validate() const {
    believed.validate();
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("PolicySpec: horizon must be positive");
  }
};

// Optimal impact-space plan. Samples are right limits, so j_star[0] is the
// state after the initial block and j_star[n] the state after the terminal one.
struct OptimalPlan {
  PolicySpec spec;
  TimeGrid grid;
  std::vector<double> alpha;
  std::vector<double> drift;
  std::vector<double> i_star;
  std::vector<double> j_star;
  std::vector<double> q_star;
  double initial_jump = 0.0;
  double terminal_jump = 0.0;

  double j_before_terminal() const { return j_star.back() - terminal_jump; }

  // J targets as (left limit, right limit) per node.
  std::vector<double> j_left() const {
    std::vector<double> out = j_star;
    out.front() = 0.0;
    out.back() = j_before_terminal();
    return out;
  }
};

// Interior target impact (alpha - tau mu)/(1 + c).
inline double interior_impact(double c, double tau, double alpha, double drift) {
  return (alpha - tau * drift) / (1.0 + c);
}

inline double state_for_impact(const AfsParams& p, double impact) {
  return signed_pow(impact / p.lambda(), 1.0 / p.c);
}

inline OptimalPlan optimal_impact(const PolicySpec& spec, const AlphaPath& alpha) {
  spec.validate();
  alpha.validate();
  const auto& b = spec.believed;
  if (!(b.lambda() > 0.0)) throw std::invalid_argument("optimal_impact: believed lambda must be positive");
  const TimeGrid& grid = alpha.grid;
  if (std::abs(grid.t0) > 1e-12 || std::abs(grid.t1 - spec.horizon) > 1e-9 * spec.horizon)
    throw std::invalid_argument("optimal_impact: alpha grid must cover [0, T]");

  OptimalPlan plan;
  plan.spec = spec;
  plan.grid = grid;
  plan.alpha = alpha.alpha;
  plan.drift = alpha.drift;
  const std::size_t m = grid.size();
  const std::size_t n = grid.n;
  plan.i_star.resize(m);
  plan.j_star.resize(m);
  for (std::size_t k = 0; k < n; ++k) {
    plan.i_star[k] = interior_impact(b.c, b.tau, alpha.alpha[k], alpha.drift[k]);
    plan.j_star[k] = state_for_impact(b, plan.i_star[k]);
  }
  // Left limit at T follows the interior branch; the terminal block moves the
  // impact to alpha_T.
  const double j_pre_terminal = state_for_impact(b, interior_impact(b.c, b.tau, alpha.alpha[n], alpha.drift[n]));
  plan.i_star[n] = alpha.alpha[n];
  plan.j_star[n] = state_for_impact(b, plan.i_star[n]);
  plan.initial_jump = plan.j_star[0];
  plan.terminal_jump = plan.j_star[n] - j_pre_terminal;

  // Q* = J* + (1/tau) int_0^t J* ds, trapezoid on the continuous part.
  plan.q_star.resize(m);
  const double dt = grid.dt();
  double integral = 0.0;
  plan.q_star[0] = plan.j_star[0];
  for (std::size_t k = 0; k < n; ++k) {
    const double right = (k + 1 == n) ? j_pre_terminal : plan.j_star[k + 1];
    integral += 0.5 * dt * (plan.j_star[k] + right);
    plan.q_star[k + 1] = plan.j_star[k + 1] + integral / b.tau;
  }
  return plan;
}

// Target impact state path of a plan, as seen by a market with decay `tau`:
// the trades drive J exactly through the plan's targets.
inline ImpactPath realize_plan(const AfsParams& market, const OptimalPlan& plan) {
  const auto left = plan.j_left();
  return evolve_impact(market, plan.grid, tracking_schedule(market.tau, plan.grid, left, plan.j_star));
}

// Trades of the believed Q* replayed through a market with the given params.
inline ImpactPath replay_plan(const AfsParams& market, const OptimalPlan& plan) {
  TradeSchedule s;
  const std::size_t n = plan.grid.n;
  const double dt = plan.grid.dt();
  s.rates.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double dq = plan.q_star[k + 1] - plan.q_star[k];
    if (k + 1 == n) dq -= plan.terminal_jump;
    s.rates[k] = dq / dt;
  }
  if (plan.initial_jump != 0.0) s.blocks.push_back({plan.grid.time(0), plan.initial_jump});
  if (plan.terminal_jump != 0.0) s.blocks.push_back({plan.grid.time(n), plan.terminal_jump});
  return evolve_impact(market, plan.grid, s);
}

namespace detail {

inline void require_square_root(const PolicySpec& spec) {
  spec.validate();
  if (spec.believed.c != 0.5)
    throw std::domain_error("order sizing is only defined for square-root impact (c = 0.5)");
}

// Lambda = g / sqrt(1 + (4/9) T / tau)
inline double sizing_scale(const PolicySpec& spec) {
  return spec.believed.g / std::sqrt(1.0 + (4.0 / 9.0) * spec.horizon / spec.believed.tau);
}

}  // namespace detail

// Optimal signed order size Q_T/V for a constant alpha of `sharpe` = alpha/sigma.
inline double order_size_from_alpha(const PolicySpec& spec, double sharpe) {
  detail::require_square_root(spec);
  const double scale = detail::sizing_scale(spec);
  return sign(sharpe) * sharpe * sharpe / (scale * scale);
}

// Constant alpha/sigma rationalizing a signed order of q_frac = Q/V.
inline double implied_alpha(const PolicySpec& spec, double q_frac) {
  detail::require_square_root(spec);
  return detail::sizing_scale(spec) * sign(q_frac) * std::sqrt(std::abs(q_frac));
}

// Turnover increase of a mean-reverting alpha over a constant one: (1 + tau/theta)^(1/c).
inline double turnover_factor(double c, double tau, double theta) {
  if (!(c > 0.0) || !(tau > 0.0) || !(theta > 0.0))
    throw std::invalid_argument("turnover_factor: arguments must be positive");
  return std::pow(1.0 + tau / theta, 1.0 / c);
}

// Trade monitoring: realized impact against the optimal fraction of the
// decay-adjusted alpha. efficiency = 1 means optimal; > 1 over-trading.
struct TcaCheck {
  double optimal_fraction = 0.0;   // 1 / (1 + c)
  double adjusted_alpha = 0.0;     // alpha - tau * mu
  double target_impact = 0.0;
  double realized_fraction = 0.0;  // impact / adjusted_alpha
  double efficiency = 0.0;         // impact / target_impact
};

inline TcaCheck tca_check(double c, double tau, double alpha, double drift, double impact) {
  if (!(c > 0.0 && c <= 1.0) || !(tau > 0.0)) throw std::invalid_argument("tca_check: invalid impact parameters");
  TcaCheck r;
  r.optimal_fraction = 1.0 / (1.0 + c);
  r.adjusted_alpha = alpha - tau * drift;
  r.target_impact = r.optimal_fraction * r.adjusted_alpha;
  r.realized_fraction = r.adjusted_alpha != 0.0 ? impact / r.adjusted_alpha : 0.0;
  r.efficiency = r.target_impact != 0.0 ? impact / r.target_impact : 0.0;
  return r;
}

}  // namespace afs
