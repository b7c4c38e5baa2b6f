#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "afs/alpha.hpp"
#include "afs/detail/numeric.hpp"
#include "afs/impact.hpp"
#include "afs/params.hpp"
#include "afs/policy.hpp"

namespace afs {

struct PnlReport {
  double raw = 0.0;         // E[Y_T], price * shares
  double normalized = 0.0;  // raw / lambda_actual
  double alpha_capture = 0.0;
  double impact_paid = 0.0;
  std::uint64_t n_paths = 0;  // 0 for deterministic evaluations
  double stderr_ = 0.0;
};

inline PnlReport make_report(const AfsParams& actual, double capture, double paid) {
  PnlReport r;
  r.alpha_capture = capture;
  r.impact_paid = paid;
  r.raw = capture - paid;
  r.normalized = r.raw / actual.lambda();
  return r;
}

// Expected P&L of an impact-state trajectory under `actual`:
//   (1/tau) int ((alpha - tau mu) J - lambda |J|^{1+c}) dt + alpha_T J_T - lambda/(1+c) |J_T|^{1+c}
// Trapezoid quadrature; at nodes with blocks the left/right limits close the
// adjacent segments.
inline PnlReport value_impact_space(const AfsParams& actual, const ImpactPath& path, const AlphaPath& alpha) {
  actual.validate();
  path.validate();
  alpha.validate();
  if (!(path.grid == alpha.grid)) throw std::invalid_argument("value_impact_space: path and alpha grids differ");
  const double lam = actual.lambda();
  const double tau = actual.tau;
  const double pc = 1.0 + actual.c;
  const double dt = path.grid.dt();
  const std::size_t n = path.grid.n;

  auto gain = [&](std::size_t k, double j) { return (alpha.alpha[k] - tau * alpha.drift[k]) * j / tau; };
  auto loss = [&](double j) { return lam * std::pow(std::abs(j), pc) / tau; };

  std::vector<double> gains(n), losses(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double jl = path.j[k];
    const double jr = path.j_before(k + 1);
    gains[k] = 0.5 * dt * (gain(k, jl) + gain(k + 1, jr));
    losses[k] = 0.5 * dt * (loss(jl) + loss(jr));
  }
  const double jT = path.j[n];
  const double capture = detail::pairwise_sum(gains) + alpha.alpha[n] * jT;
  const double paid = detail::pairwise_sum(losses) + lam * std::pow(std::abs(jT), pc) / pc;
  return make_report(actual, capture, paid);
}

// Closed-form P&L pair for a misspecified policy and the correctly specified
// one, in units of sigma * V (or sigma * V per day for steady-state rates).
struct ClosedFormValue {
  double misspecified = 0.0;
  double optimal = 0.0;
  double ratio() const { return misspecified / optimal; }
};

// Constant alpha of |alpha/sigma| = sharpe traded over [0, T], concavity
// misspecified (decay correct). P&L is even in the sign of alpha.
inline ClosedFormValue misspec_value_constant_alpha(double actual_c, double believed_c, double g_actual,
                                                    double g_believed, double sharpe, double T, double tau) {
  const double c = actual_c;
  const double ch = believed_c;
  const double s = std::abs(sharpe);
  ClosedFormValue v;
  const double a = std::pow(g_believed, -1.0 / ch) *
                   (std::pow(s, 1.0 + 1.0 / ch) * (T / (tau * std::pow(1.0 + ch, 1.0 / ch)) + 1.0) -
                    g_actual / std::pow(g_believed, c / ch) * std::pow(s, (1.0 + c) / ch) *
                        (T / (tau * std::pow(1.0 + ch, (1.0 + c) / ch)) + 1.0 / (1.0 + c)));
  v.misspecified = a;
  v.optimal = std::pow(g_actual, -1.0 / c) * std::pow(s, 1.0 + 1.0 / c) * (c / (1.0 + c)) *
              (T / (tau * std::pow(1.0 + c, 1.0 / c)) + 1.0);
  return v;
}

// Steady-state P&L rate for an OU alpha with decay theta when the impact
// decay is misspecified. `moment` = E|alpha/sigma|^{1+1/c}.
inline ClosedFormValue misspec_value_decay_ou(double actual_tau, double believed_tau, double theta, double c,
                                              double g_actual, double g_believed, double moment) {
  const double bt = 1.0 + believed_tau / theta;
  const double at = 1.0 + actual_tau / theta;
  ClosedFormValue v;
  v.misspecified = (1.0 / actual_tau) * std::pow(bt / (g_believed * (1.0 + c)), 1.0 / c) *
                   (at - g_actual * bt / (g_believed * (1.0 + c))) * moment;
  v.optimal = (1.0 / actual_tau) * c * std::pow(at, 1.0 + 1.0 / c) /
              (std::pow(g_actual, 1.0 / c) * std::pow(1.0 + c, 1.0 + 1.0 / c)) * moment;
  return v;
}

// Decay profit ratio when g(tau) = g(tau_hat): (1/c) rho^{1/c} (1 + c - rho).
inline double decay_ratio_equal_g(double actual_tau, double believed_tau, double theta, double c) {
  const double rho = (1.0 + believed_tau / theta) / (1.0 + actual_tau / theta);
  return std::pow(rho, 1.0 / c) * (1.0 + c - rho) / c;
}

// Believed tau at which the decay-misspecified P&L crosses zero (equal g).
inline double decay_zero_profit_tau(double actual_tau, double theta, double c) {
  return theta * ((1.0 + c) * (1.0 + actual_tau / theta) - 1.0);
}

enum class Execution {
  // The trader realizes the believed impact-state targets in the actual market.
  track_impact,
  // The believed Q* trades are replayed through the actual market.
  replay_positions,
};

struct SimOptions {
  Execution execution = Execution::track_impact;
  bool price_noise = true;        // sigma dW on the unperturbed price
  bool stationary_start = false;  // OU alpha starts from its stationary law
  unsigned threads = 1;
};

namespace detail {

struct PathOutcome {
  double pnl = 0.0;
  double capture = 0.0;
  double paid = 0.0;
};

// P&L of one realization. The unperturbed price is S = N - alpha with N a
// martingale of volatility sigma, so alpha_t = E_t[S_inf - S_t]. The P&L is
// int Q dS, plus the remaining alpha on the terminal position, minus int I dQ.
inline PathOutcome realize_pnl(const AfsParams& actual, const ImpactPath& path, const std::vector<double>& alpha,
                               bool price_noise, Rng& rng) {
  const std::size_t n = path.grid.n;
  const double dt = path.grid.dt();
  std::vector<double> parts(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = actual.sigma * std::sqrt(dt);
  for (std::size_t k = 0; k < n; ++k) {
    double ds = -(alpha[k + 1] - alpha[k]);
    if (price_noise) ds += sd * normal(rng);
    parts[k] = path.q[k] * ds;
  }
  PathOutcome out;
  out.capture = pairwise_sum(parts) + alpha[n] * path.q[n];
  out.paid = execution_cost(actual, path);
  out.pnl = out.capture - out.paid;
  return out;
}

}  // namespace detail

// Monte Carlo expected P&L of trading `plan` (built from believed params) in a
// market with `actual` params. Stochastic alphas are redrawn per path and the
// believed plan rebuilt on each draw. Each path uses the RNG stream derived
// from (seed, path index).
inline PnlReport simulate_pnl(const AfsParams& actual, const OptimalPlan& plan, const AlphaModel& alpha_model,
                              std::uint64_t n_paths, std::uint64_t seed, const SimOptions& opts = {}) {
  actual.validate();
  alpha_model.validate();
  if (n_paths < 1) throw std::invalid_argument("simulate_pnl: n_paths must be >= 1");
  std::vector<detail::PathOutcome> outcomes(n_paths);
  detail::parallel_for(n_paths, opts.threads, [&](std::size_t idx) {
    detail::Rng rng(detail::stream_seed(seed, idx, 0));
    const OptimalPlan* used = &plan;
    OptimalPlan redrawn;
    if (alpha_model.stochastic()) {
      const auto path = sample_alpha(alpha_model, plan.grid, detail::stream_seed(seed, idx, 1),
                                     SampleOptions{opts.stationary_start});
      redrawn = optimal_impact(plan.spec, path);
      used = &redrawn;
    }
    const ImpactPath traded =
        opts.execution == Execution::track_impact ? realize_plan(actual, *used) : replay_plan(actual, *used);
    outcomes[idx] = detail::realize_pnl(actual, traded, used->alpha, opts.price_noise, rng);
  });
  std::vector<double> pnl(n_paths), cap(n_paths), paid(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    pnl[i] = outcomes[i].pnl;
    cap[i] = outcomes[i].capture;
    paid[i] = outcomes[i].paid;
  }
  const auto stats = detail::mean_stderr(pnl);
  PnlReport r = make_report(actual, detail::pairwise_sum(cap) / static_cast<double>(n_paths),
                            detail::pairwise_sum(paid) / static_cast<double>(n_paths));
  r.raw = stats.mean;
  r.normalized = r.raw / actual.lambda();
  r.n_paths = n_paths;
  r.stderr_ = stats.stderr_;
  return r;
}

// Deterministic value of the believed-optimal policy for a deterministic alpha
// (constant, or OU without noise), with grid refinement until successive
// doublings agree to `rel_tol` (n capped at 2^20).
inline PnlReport value_policy(const AfsParams& actual, const PolicySpec& spec, const AlphaModel& alpha_model,
                              double rel_tol = 1e-6, std::size_t n0 = 64) {
  if (alpha_model.stochastic()) throw std::invalid_argument("value_policy: alpha must be deterministic");
  constexpr std::size_t max_n = std::size_t{1} << 20;
  PnlReport prev;
  bool have_prev = false;
  for (std::size_t n = n0; n <= max_n; n *= 2) {
    const TimeGrid grid{0.0, spec.horizon, n};
    const auto alpha = sample_alpha(alpha_model, grid, 0);
    const auto plan = optimal_impact(spec, alpha);
    const auto cur = value_impact_space(actual, realize_plan(actual, plan), alpha);
    if (have_prev && std::abs(cur.raw - prev.raw) <= rel_tol * std::max(std::abs(cur.raw), 1e-300)) return cur;
    prev = cur;
    have_prev = true;
  }
  return prev;
}

}  // namespace afs
