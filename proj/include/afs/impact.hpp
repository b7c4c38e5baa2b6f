#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "afs/params.hpp"

namespace afs {

struct BlockTrade {
  double time = 0.0;
  double quantity = 0.0;  // shares, signed
};

// Piecewise-constant trading rates (one per grid step) plus block trades placed
// on grid nodes. A block at node k is applied after the step ending at k.
struct TradeSchedule {
  std::vector<double> rates;
  std::vector<BlockTrade> blocks;
};

// Trajectory sampled at grid nodes. Samples are right limits: at a node
// carrying a block, j/q/i hold the post-trade values.
struct ImpactPath {
  TimeGrid grid;
  std::vector<double> q;
  std::vector<double> j;
  std::vector<double> i;
  std::vector<double> rates;       // n entries
  std::vector<double> node_block;  // n+1 entries, merged block per node
  std::vector<BlockTrade> jumps;   // non-zero blocks, time ordered

  // Left limit of J at node k.
  double j_before(std::size_t k) const { return j[k] - node_block[k]; }

  void validate() const {
    grid.validate();
    const std::size_t m = grid.size();
    if (q.size() != m || j.size() != m || i.size() != m || node_block.size() != m || rates.size() != grid.n)
      throw std::invalid_argument("ImpactPath: arrays not aligned to grid");
  }
};

// lambda * sign(j) |j|^c
inline double impact_of_state(const AfsParams& p, double j) { return p.lambda() * signed_pow(j, p.c); }

// Antiderivative of impact_of_state in J: lambda * |x|^{1+c} / (1+c). Even in x,
// so H(b) - H(a) is the cost of moving the state from a to b instantaneously.
inline double impact_antiderivative(const AfsParams& p, double x) {
  return p.lambda() * std::pow(std::abs(x), 1.0 + p.c) / (1.0 + p.c);
}

namespace detail {

inline std::vector<double> blocks_per_node(const TimeGrid& grid, const std::vector<BlockTrade>& blocks) {
  std::vector<double> out(grid.size(), 0.0);
  for (const auto& b : blocks) {
    if (!std::isfinite(b.quantity) || !std::isfinite(b.time))
      throw std::invalid_argument("evolve_impact: non-finite block trade");
    out[grid.node_at(b.time)] += b.quantity;
  }
  return out;
}

}  // namespace detail

// Exact exponential stepping of dJ = -J/tau dt + dQ with J_0 = 0 (before any
// block at t0).
inline ImpactPath evolve_impact(const AfsParams& p, const TimeGrid& grid, const TradeSchedule& trades) {
  p.validate();
  grid.validate();
  if (trades.rates.size() != grid.n)
    throw std::invalid_argument("evolve_impact: expected one rate per grid step");
  for (double r : trades.rates)
    if (!std::isfinite(r)) throw std::invalid_argument("evolve_impact: non-finite trade rate");

  ImpactPath path;
  path.grid = grid;
  path.rates = trades.rates;
  path.node_block = detail::blocks_per_node(grid, trades.blocks);
  const std::size_t m = grid.size();
  path.q.assign(m, 0.0);
  path.j.assign(m, 0.0);
  path.i.assign(m, 0.0);

  const double dt = grid.dt();
  const double decay = std::exp(-dt / p.tau);
  const double fill = p.tau * (-std::expm1(-dt / p.tau));

  path.q[0] = path.node_block[0];
  path.j[0] = path.node_block[0];
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double r = trades.rates[k];
    path.j[k + 1] = decay * path.j[k] + r * fill + path.node_block[k + 1];
    path.q[k + 1] = path.q[k] + r * dt + path.node_block[k + 1];
  }
  for (std::size_t k = 0; k < m; ++k) {
    path.i[k] = impact_of_state(p, path.j[k]);
    if (path.node_block[k] != 0.0) path.jumps.push_back({grid.time(k), path.node_block[k]});
  }
  return path;
}

// Schedule that drives J exactly through the given targets: `j_left[k]` is the
// state just before node k, `j_right[k]` just after it (j_left[0] must be 0).
inline TradeSchedule tracking_schedule(double tau, const TimeGrid& grid, const std::vector<double>& j_left,
                                       const std::vector<double>& j_right) {
  grid.validate();
  if (j_left.size() != grid.size() || j_right.size() != grid.size())
    throw std::invalid_argument("tracking_schedule: targets not aligned to grid");
  if (j_left[0] != 0.0) throw std::invalid_argument("tracking_schedule: J must start at 0");
  const double dt = grid.dt();
  const double decay = std::exp(-dt / tau);
  const double fill = tau * (-std::expm1(-dt / tau));
  TradeSchedule s;
  s.rates.resize(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k) s.rates[k] = (j_left[k + 1] - decay * j_right[k]) / fill;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double jump = j_right[k] - j_left[k];
    if (jump != 0.0) s.blocks.push_back({grid.time(k), jump});
  }
  return s;
}

struct CostBreakdown {
  double smooth = 0.0;
  double blocks = 0.0;
  double total() const { return smooth + blocks; }
};

// Integral of I dQ. Smooth segments use the midpoint rule with the exact
// mid-step state; blocks are costed as H(J- + dQ) - H(J-).
inline CostBreakdown execution_cost_breakdown(const AfsParams& p, const ImpactPath& path) {
  path.validate();
  const double dt = path.grid.dt();
  const double half_decay = std::exp(-0.5 * dt / p.tau);
  const double half_fill = p.tau * (-std::expm1(-0.5 * dt / p.tau));
  CostBreakdown out;
  for (std::size_t k = 0; k < path.grid.n; ++k) {
    const double r = path.rates[k];
    if (r == 0.0) continue;
    const double j_mid = half_decay * path.j[k] + r * half_fill;
    out.smooth += impact_of_state(p, j_mid) * r * dt;
  }
  for (std::size_t k = 0; k < path.grid.size(); ++k) {
    if (path.node_block[k] == 0.0) continue;
    out.blocks += impact_antiderivative(p, path.j[k]) - impact_antiderivative(p, path.j_before(k));
  }
  return out;
}

inline double execution_cost(const AfsParams& p, const ImpactPath& path) {
  return execution_cost_breakdown(p, path).total();
}

}  // namespace afs
