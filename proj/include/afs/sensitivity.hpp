#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "afs/alpha.hpp"
#include "afs/calibration.hpp"
#include "afs/detail/numeric.hpp"
#include "afs/pnl.hpp"

namespace afs {

// Prefactor as a function of one believed parameter: constant, or tabulated
// from a calibration grid with log g interpolated linearly (in c, or in log tau).
class GCurve {
 public:
  static GCurve constant(double g) {
    if (!(g > 0.0)) throw std::invalid_argument("GCurve: g must be positive");
    GCurve out;
    out.constant_ = g;
    return out;
  }

  static GCurve tabulated(std::vector<double> xs, std::vector<double> gs, bool log_x) {
    if (xs.size() != gs.size() || xs.empty()) throw std::invalid_argument("GCurve: table size mismatch");
    GCurve out;
    out.log_x_ = log_x;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (!(gs[k] > 0.0) || !std::isfinite(gs[k])) continue;
      out.xs_.push_back(log_x ? std::log(xs[k]) : xs[k]);
      out.log_g_.push_back(std::log(gs[k]));
    }
    if (out.xs_.empty()) throw std::invalid_argument("GCurve: no positive g values");
    for (std::size_t k = 1; k < out.xs_.size(); ++k)
      if (!(out.xs_[k] > out.xs_[k - 1])) throw std::invalid_argument("GCurve: abscissae must increase");
    return out;
  }

  // g(c_hat) along the calibration row nearest to `tau`.
  static GCurve along_c(const CalibGrid& grid, double tau) {
    const std::size_t it = grid.nearest_tau(tau);
    std::vector<double> gs;
    for (std::size_t ic = 0; ic < grid.c_values.size(); ++ic)
      gs.push_back(grid.valid[grid.index(ic, it)] ? grid.g_at(ic, it) : -1.0);
    return tabulated(grid.c_values, gs, false);
  }

  // g(tau_hat) along the calibration column nearest to `c`.
  static GCurve along_tau(const CalibGrid& grid, double c) {
    const std::size_t ic = grid.nearest_c(c);
    std::vector<double> gs;
    for (std::size_t it = 0; it < grid.tau_values.size(); ++it)
      gs.push_back(grid.valid[grid.index(ic, it)] ? grid.g_at(ic, it) : -1.0);
    return tabulated(grid.tau_values, gs, true);
  }

  bool is_constant() const { return constant_.has_value(); }

  double operator()(double x) const {
    if (constant_) return *constant_;
    const double u = log_x_ ? std::log(x) : x;
    if (xs_.size() == 1 || u <= xs_.front()) return std::exp(log_g_.front());
    if (u >= xs_.back()) return std::exp(log_g_.back());
    const auto hi = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), u) - xs_.begin());
    const std::size_t lo = hi - 1;
    const double w = (u - xs_[lo]) / (xs_[hi] - xs_[lo]);
    return std::exp(log_g_[lo] + w * (log_g_[hi] - log_g_[lo]));
  }

 private:
  std::optional<double> constant_;
  bool log_x_ = false;
  std::vector<double> xs_;
  std::vector<double> log_g_;
};

// Profit ratios over (axis1 = believed parameter, axis2 = signal parameter).
// Matrices are indexed [i2 * axis1.size() + i1].
struct ScanResult {
  std::vector<double> axis1;
  std::vector<double> axis2;
  std::vector<double> ratio;
  std::vector<double> u_misspec;
  std::vector<double> u_opt;
  std::vector<std::optional<double>> critical;  // per axis2 value
  std::vector<char> monotone;                    // danger side monotone up to the crossing

  std::size_t index(std::size_t i1, std::size_t i2) const { return i2 * axis1.size() + i1; }
  double ratio_at(std::size_t i1, std::size_t i2) const { return ratio[index(i1, i2)]; }
};

struct ConcavityScanConfig {
  double actual_c = 0.48;
  GCurve g = GCurve::constant(1.0);
  double horizon = 1.0;  // T
  double tau = 0.2;
};

inline ClosedFormValue concavity_value(const ConcavityScanConfig& cfg, double c_hat, double sharpe) {
  return misspec_value_constant_alpha(cfg.actual_c, c_hat, cfg.g(cfg.actual_c), cfg.g(c_hat), sharpe, cfg.horizon,
                                      cfg.tau);
}

namespace detail {

// Walks away from the correctly specified value toward `dir` (-1: decreasing
// axis, +1: increasing) and bisects the first sign change of u(x).
template <class U>
std::optional<double> first_crossing(const std::vector<double>& axis, double truth, int dir, U&& u,
                                     bool* monotone) {
  std::vector<double> side;
  for (double x : axis)
    if ((dir < 0 && x < truth) || (dir > 0 && x > truth)) side.push_back(x);
  if (dir < 0) std::sort(side.rbegin(), side.rend());
  else std::sort(side.begin(), side.end());
  double prev_x = truth;
  double prev_u = u(truth);
  if (monotone) *monotone = 1;
  for (double x : side) {
    const double cur = u(x);
    if (cur <= 0.0 && prev_u > 0.0) return bisect(u, std::min(prev_x, x), std::max(prev_x, x), 1e-15);
    if (monotone && cur > prev_u) *monotone = 0;
    prev_x = x;
    prev_u = cur;
  }
  return std::nullopt;
}

}  // namespace detail

// Profit ratio U(J(c_hat); c) / U(J(c); c) over c_hat x sharpe, with the
// critical c_min per sharpe (first zero crossing below the actual c).
inline ScanResult scan_concavity(const ConcavityScanConfig& cfg, const std::vector<double>& sharpe_values,
                                 const std::vector<double>& c_hat_values) {
  if (sharpe_values.empty() || c_hat_values.empty()) throw std::invalid_argument("scan_concavity: empty lattice");
  for (double c : c_hat_values)
    if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("scan_concavity: c_hat must lie in (0, 1]");
  ScanResult r;
  r.axis1 = c_hat_values;
  r.axis2 = sharpe_values;
  r.ratio.resize(c_hat_values.size() * sharpe_values.size());
  r.u_misspec.resize(r.ratio.size());
  r.u_opt.resize(r.ratio.size());
  for (std::size_t i2 = 0; i2 < sharpe_values.size(); ++i2) {
    for (std::size_t i1 = 0; i1 < c_hat_values.size(); ++i1) {
      const auto v = concavity_value(cfg, c_hat_values[i1], sharpe_values[i2]);
      r.u_misspec[r.index(i1, i2)] = v.misspecified;
      r.u_opt[r.index(i1, i2)] = v.optimal;
      r.ratio[r.index(i1, i2)] = c_hat_values[i1] == cfg.actual_c ? 1.0 : v.ratio();
    }
    bool mono = true;
    const double s = sharpe_values[i2];
    r.critical.push_back(detail::first_crossing(
        c_hat_values, cfg.actual_c, -1, [&](double ch) { return concavity_value(cfg, ch, s).misspecified; }, &mono));
    r.monotone.push_back(mono);
  }
  return r;
}

struct DecayScanConfig {
  double actual_tau = 0.2;
  double c = 0.48;
  GCurve g = GCurve::constant(1.0);
  double stationary_ratio = 1.0;  // stationary std of alpha / sigma
};

inline ClosedFormValue decay_value(const DecayScanConfig& cfg, double tau_hat, double theta) {
  const double p = 1.0 + 1.0 / cfg.c;
  const auto model = AlphaModel::ou(0.0, theta, AlphaModel::vol_for_stationary_ratio(1.0, theta, cfg.stationary_ratio));
  return misspec_value_decay_ou(cfg.actual_tau, tau_hat, theta, cfg.c, cfg.g(cfg.actual_tau), cfg.g(tau_hat),
                                stationary_abs_moment(model, 1.0, p));
}

// Steady-state profit ratio over tau_hat x theta, with the zero-profit tau_hat
// per theta (first crossing above the actual tau).
inline ScanResult scan_decay(const DecayScanConfig& cfg, const std::vector<double>& theta_values,
                             const std::vector<double>& tau_hat_values) {
  if (theta_values.empty() || tau_hat_values.empty()) throw std::invalid_argument("scan_decay: empty lattice");
  for (double t : theta_values)
    if (!(t > 0.0)) throw std::invalid_argument("scan_decay: theta must be positive");
  for (double t : tau_hat_values)
    if (!(t > 0.0)) throw std::invalid_argument("scan_decay: tau_hat must be positive");
  ScanResult r;
  r.axis1 = tau_hat_values;
  r.axis2 = theta_values;
  r.ratio.resize(tau_hat_values.size() * theta_values.size());
  r.u_misspec.resize(r.ratio.size());
  r.u_opt.resize(r.ratio.size());
  for (std::size_t i2 = 0; i2 < theta_values.size(); ++i2) {
    const double theta = theta_values[i2];
    for (std::size_t i1 = 0; i1 < tau_hat_values.size(); ++i1) {
      const auto v = decay_value(cfg, tau_hat_values[i1], theta);
      r.u_misspec[r.index(i1, i2)] = v.misspecified;
      r.u_opt[r.index(i1, i2)] = v.optimal;
      r.ratio[r.index(i1, i2)] = tau_hat_values[i1] == cfg.actual_tau ? 1.0 : v.ratio();
    }
    bool mono = true;
    r.critical.push_back(detail::first_crossing(
        tau_hat_values, cfg.actual_tau, +1, [&](double th) { return decay_value(cfg, th, theta).misspecified; },
        &mono));
    r.monotone.push_back(mono);
  }
  return r;
}

// Paired curves on the c_hat axis: statistical fit ratio R^2(c_hat)/R^2(c) and
// profit ratio U(c_hat)/U(c), plus bootstrap band edges around c.
struct AsymmetryCurves {
  std::vector<double> c_hat;
  std::vector<double> r2_ratio;
  std::vector<double> u_ratio;
  double c = 0.0;
  double tau = 0.0;  // calibration row used
  double band_inner_lo = 0.0, band_inner_hi = 0.0;  // c -/+ std
  double band_outer_lo = 0.0, band_outer_hi = 0.0;  // c -/+ 2 std
};

struct AsymmetryConfig {
  double c = 0.48;    // point estimate, must be on the calibration lattice
  double tau = 0.2;   // calibration row
  double sharpe = 1.0;
  double horizon = 1.0;
  double c_std = 0.0;  // bootstrap std of c
  std::vector<double> c_hat;  // empty: the calibration lattice
};

inline AsymmetryCurves statistical_vs_pnl(const CalibGrid& calib, const AsymmetryConfig& cfg) {
  auto on_lattice = [&](double x) {
    for (std::size_t k = 0; k < calib.c_values.size(); ++k)
      if (std::abs(calib.c_values[k] - x) <= 1e-9) return std::optional<std::size_t>(k);
    return std::optional<std::size_t>{};
  };
  const auto ic0 = on_lattice(cfg.c);
  if (!ic0) throw std::invalid_argument("statistical_vs_pnl: c is not on the calibration lattice");
  const std::size_t it = calib.nearest_tau(cfg.tau);
  if (!calib.valid[calib.index(*ic0, it)]) throw std::invalid_argument("statistical_vs_pnl: invalid calibration cell at c");

  AsymmetryCurves out;
  out.c = calib.c_values[*ic0];
  out.tau = calib.tau_values[it];
  const auto axis = cfg.c_hat.empty() ? calib.c_values : cfg.c_hat;
  ConcavityScanConfig scan{out.c, GCurve::along_c(calib, out.tau), cfg.horizon, out.tau};
  const double r2c = calib.r2_at(*ic0, it);
  for (double ch : axis) {
    const auto ic = on_lattice(ch);
    if (!ic) throw std::invalid_argument("statistical_vs_pnl: requested c_hat is not on the calibration lattice");
    if (!calib.valid[calib.index(*ic, it)]) continue;
    out.c_hat.push_back(ch);
    out.r2_ratio.push_back(calib.r2_at(*ic, it) / r2c);
    out.u_ratio.push_back(*ic == *ic0 ? 1.0 : concavity_value(scan, ch, cfg.sharpe).ratio());
  }
  out.band_inner_lo = out.c - cfg.c_std;
  out.band_inner_hi = out.c + cfg.c_std;
  out.band_outer_lo = out.c - 2.0 * cfg.c_std;
  out.band_outer_hi = out.c + 2.0 * cfg.c_std;
  return out;
}

}  // namespace afs
