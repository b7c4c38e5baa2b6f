#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "afs/detail/numeric.hpp"
#include "afs/impact.hpp"
#include "afs/params.hpp"

namespace afs {

// One child-order interval of a meta-order. `t` is absolute (days).
struct Fill {
  double t = 0.0;
  double dt = 0.0;
  double dq = 0.0;  // shares
  double dp = 0.0;  // price units
};

struct MetaOrder {
  std::int64_t order_id = 0;
  double start = 0.0;
  double duration = 0.0;
  double signed_frac = 0.0;  // Q / V
  std::vector<Fill> fills;
};

struct SynthConfig {
  double size_lo = 1e-4;  // |Q|/V, log-uniform
  double size_hi = 1e-1;
  double duration_lo = 0.02;  // days, uniform
  double duration_hi = 0.6;
  int fills_lo = 3;
  int fills_hi = 50;
  double noise_vol = 1.0;   // price noise in sigma units
  double alpha_leak = 0.0;  // drift in the order's direction, sigma units per day

  void validate() const {
    if (!(size_lo > 0.0) || !(size_hi >= size_lo)) throw std::invalid_argument("synth: invalid size bounds");
    if (!(duration_lo > 0.0) || !(duration_hi >= duration_lo) || duration_hi > 1.0)
      throw std::invalid_argument("synth: durations must lie in (0, 1] day");
    if (fills_lo < 3 || fills_hi < fills_lo) throw std::invalid_argument("synth: need at least 3 fills per order");
    if (!(noise_vol >= 0.0) || !std::isfinite(alpha_leak)) throw std::invalid_argument("synth: invalid noise");
  }

  // Mean of the log-uniform size law.
  double expected_size() const {
    if (size_hi == size_lo) return size_lo;
    return (size_hi - size_lo) / std::log(size_hi / size_lo);
  }
};

// Impact state after trading at constant `rate` for `u` days from J = 0.
inline double twap_state(double rate, double tau, double u) { return rate * tau * (-std::expm1(-u / tau)); }

// TWAP meta-orders whose fill-interval price changes are the AFS impact
// increments plus Gaussian noise.
inline std::vector<MetaOrder> synth_metaorders(const AfsParams& actual, std::size_t n_orders, const SynthConfig& cfg,
                                               std::uint64_t seed) {
  actual.validate();
  cfg.validate();
  std::vector<MetaOrder> out(n_orders);
  const double lam = actual.lambda();
  for (std::size_t i = 0; i < n_orders; ++i) {
    detail::Rng rng(detail::stream_seed(seed, i, 0x5eed));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> fill_count(cfg.fills_lo, cfg.fills_hi);
    std::normal_distribution<double> normal(0.0, 1.0);

    MetaOrder& o = out[i];
    o.order_id = static_cast<std::int64_t>(i);
    const double log_lo = std::log(cfg.size_lo);
    const double frac = std::exp(log_lo + (std::log(cfg.size_hi) - log_lo) * unit(rng));
    const double side = unit(rng) < 0.5 ? -1.0 : 1.0;
    o.signed_frac = side * frac;
    o.duration = cfg.duration_lo + (cfg.duration_hi - cfg.duration_lo) * unit(rng);
    o.start = static_cast<double>(i) + (1.0 - o.duration) * unit(rng);
    const int m = fill_count(rng);

    const double q = o.signed_frac * actual.adv;
    const double rate = q / o.duration;
    const double step = o.duration / m;
    o.fills.resize(static_cast<std::size_t>(m));
    double prev_impact = 0.0;
    for (int k = 0; k < m; ++k) {
      const double u1 = (k + 1 == m) ? o.duration : step * (k + 1);
      const double impact = lam * signed_pow(twap_state(rate, actual.tau, u1), actual.c);
      Fill& f = o.fills[static_cast<std::size_t>(k)];
      f.t = o.start + step * k;
      f.dt = u1 - step * k;
      f.dq = q / m;
      f.dp = impact - prev_impact + cfg.noise_vol * actual.sigma * std::sqrt(f.dt) * normal(rng) +
             cfg.alpha_leak * actual.sigma * side * f.dt;
      prev_impact = impact;
    }
  }
  return out;
}

struct CalibGrid {
  std::vector<double> c_values;
  std::vector<double> tau_values;
  // row-major: [ic * tau_values.size() + it]
  std::vector<double> r2;
  std::vector<double> g;
  std::vector<char> valid;

  std::size_t index(std::size_t ic, std::size_t it) const { return ic * tau_values.size() + it; }
  double r2_at(std::size_t ic, std::size_t it) const { return r2[index(ic, it)]; }
  double g_at(std::size_t ic, std::size_t it) const { return g[index(ic, it)]; }

  struct Cell {
    std::size_t ic = 0;
    std::size_t it = 0;
  };

  Cell argmax_r2() const {
    Cell best;
    double best_r2 = -std::numeric_limits<double>::infinity();
    for (std::size_t ic = 0; ic < c_values.size(); ++ic)
      for (std::size_t it = 0; it < tau_values.size(); ++it)
        if (valid[index(ic, it)] && r2_at(ic, it) > best_r2) {
          best_r2 = r2_at(ic, it);
          best = {ic, it};
        }
    return best;
  }

  std::size_t nearest_tau(double tau) const { return nearest(tau_values, tau, true); }
  std::size_t nearest_c(double c) const { return nearest(c_values, c, false); }

 private:
  static std::size_t nearest(const std::vector<double>& xs, double x, bool log_scale) {
    if (xs.empty()) throw std::invalid_argument("CalibGrid: empty lattice");
    std::size_t best = 0;
    for (std::size_t k = 1; k < xs.size(); ++k) {
      const double dk = log_scale ? std::abs(std::log(xs[k] / x)) : std::abs(xs[k] - x);
      const double db = log_scale ? std::abs(std::log(xs[best] / x)) : std::abs(xs[best] - x);
      if (dk < db) best = k;
    }
    return best;
  }
};

struct FitScale {
  double sigma = 1.0;
  double adv = 1.0;
};

namespace detail {

// Flattened TWAP geometry: per order, the fill boundaries relative to the
// order start and the meta-order's rate.
struct FillLayout {
  std::vector<std::size_t> offset;  // boundaries of order i: [offset[i], offset[i+1])
  std::vector<double> u;            // boundary times since order start
  std::vector<double> rate;         // per order
  std::vector<double> dp;           // per interval, aligned to boundary index of its end
  std::size_t n_intervals = 0;

  std::size_t orders() const { return rate.size(); }
};

inline FillLayout layout_fills(const std::vector<MetaOrder>& orders) {
  FillLayout L;
  L.offset.reserve(orders.size() + 1);
  L.offset.push_back(0);
  for (const auto& o : orders) {
    if (o.fills.empty()) throw std::invalid_argument("grid_fit: meta-order without fills");
    double q = 0.0, dur = 0.0;
    for (const auto& f : o.fills) {
      q += f.dq;
      dur += f.dt;
    }
    if (!(dur > 0.0)) throw std::invalid_argument("grid_fit: meta-order with zero duration");
    L.rate.push_back(q / dur);
    const double start = o.fills.front().t;
    L.u.push_back(0.0);
    L.dp.push_back(0.0);
    for (const auto& f : o.fills) {
      L.u.push_back(f.t + f.dt - start);
      L.dp.push_back(f.dp);
    }
    L.n_intervals += o.fills.size();
    L.offset.push_back(L.u.size());
  }
  return L;
}

struct Moments {
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
};

// Per-order regression moments for one (c_hat, tau_hat) cell.
template <class Sink>
void cell_moments(const FillLayout& L, double c_hat, double tau_hat, const FitScale& scale,
                  std::vector<double>& phi, Sink&& sink) {
  const double basis = scale.sigma / std::pow(scale.adv, c_hat);
  phi.resize(L.u.size());
  for (std::size_t i = 0; i < L.orders(); ++i) {
    const double r = L.rate[i];
    Moments m;
    for (std::size_t b = L.offset[i]; b < L.offset[i + 1]; ++b)
      phi[b] = basis * signed_pow(twap_state(r, tau_hat, L.u[b]), c_hat);
    for (std::size_t b = L.offset[i] + 1; b < L.offset[i + 1]; ++b) {
      const double x = phi[b] - phi[b - 1];
      const double y = L.dp[b];
      m.sxx += x * x;
      m.sxy += x * y;
      m.syy += y * y;
    }
    sink(i, m);
  }
}

struct CellFit {
  double g = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
};

// Regression of dP on the impact basis through the origin.
inline CellFit fit_from_moments(const Moments& m) {
  CellFit f;
  if (!(m.sxx > 0.0) || !(m.syy > 0.0) || !std::isfinite(m.sxx)) return f;
  f.g = m.sxy / m.sxx;
  f.r2 = std::clamp(m.sxy * m.sxy / (m.sxx * m.syy), 0.0, 1.0);
  f.valid = true;
  return f;
}

}  // namespace detail

// Pooled regression of fill-interval price changes on impact increments for
// each (c_hat, tau_hat). The slope is g, R^2 is uncentered (no intercept).
inline CalibGrid grid_fit(const std::vector<MetaOrder>& orders, const std::vector<double>& c_values,
                          const std::vector<double>& tau_values, const FitScale& scale = {}, unsigned threads = 1) {
  if (c_values.empty() || tau_values.empty()) throw std::invalid_argument("grid_fit: empty lattice");
  for (double c : c_values)
    if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("grid_fit: c values must lie in (0, 1]");
  for (double t : tau_values)
    if (!(t > 0.0)) throw std::invalid_argument("grid_fit: tau values must be positive");
  const auto L = detail::layout_fills(orders);
  if (L.n_intervals < 2) throw std::invalid_argument("grid_fit: need at least two fills");

  CalibGrid grid;
  grid.c_values = c_values;
  grid.tau_values = tau_values;
  const std::size_t cells = c_values.size() * tau_values.size();
  grid.r2.assign(cells, std::numeric_limits<double>::quiet_NaN());
  grid.g.assign(cells, std::numeric_limits<double>::quiet_NaN());
  grid.valid.assign(cells, 0);
  detail::parallel_for(cells, threads, [&](std::size_t cell) {
    const std::size_t ic = cell / tau_values.size();
    const std::size_t it = cell % tau_values.size();
    std::vector<double> phi;
    detail::Moments total;
    detail::cell_moments(L, c_values[ic], tau_values[it], scale, phi, [&](std::size_t, const detail::Moments& m) {
      total.sxx += m.sxx;
      total.sxy += m.sxy;
      total.syy += m.syy;
    });
    const auto fit = detail::fit_from_moments(total);
    grid.g[cell] = fit.g;
    grid.r2[cell] = fit.r2;
    grid.valid[cell] = fit.valid;
  });
  return grid;
}

struct LoglogOptions {
  double size_floor = 1e-3;  // bins whose mean size is below this are excluded
  std::size_t min_count = 20;
  double sigma = 1.0;
  // Weight bins by the inverse delta-method variance of log(mean return).
  bool weighted = true;
};

struct LoglogFit {
  double slope = 0.0;
  double intercept = 0.0;  // natural log of the prefactor
  std::size_t bins_used = 0;
  std::vector<double> bin_size;    // geometric mean |Q|/V per bin
  std::vector<double> bin_return;  // mean signed return (sigma units)
  std::vector<std::size_t> bin_count;
};

// Per-order (|Q|/V, signed return in sigma units).
struct OrderReturn {
  double size = 0.0;
  double ret = 0.0;
};

inline std::vector<OrderReturn> order_returns(const std::vector<MetaOrder>& orders, double sigma) {
  std::vector<OrderReturn> out;
  out.reserve(orders.size());
  for (const auto& o : orders) {
    double dp = 0.0;
    for (const auto& f : o.fills) dp += f.dp;
    out.push_back({std::abs(o.signed_frac), sign(o.signed_frac) * dp / sigma});
  }
  return out;
}

// Log-binned mean signed return against size and a least-squares line in
// log-log space over the bins above the size floor. `weights` (optional)
// gives a multiplicity per order, as produced by resampling.
inline LoglogFit fit_loglog(const std::vector<OrderReturn>& data, std::size_t n_bins, const LoglogOptions& opts = {},
                            const std::vector<std::uint32_t>* weights = nullptr) {
  if (n_bins < 2) throw std::invalid_argument("fit_loglog: need at least 2 bins");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (weights && (*weights)[i] == 0) continue;
    if (!(data[i].size > 0.0)) continue;
    lo = std::min(lo, data[i].size);
    hi = std::max(hi, data[i].size);
  }
  if (!(hi > 0.0) || std::log10(hi / lo) < 1.0 - 1e-9)
    throw std::invalid_argument("fit_loglog: sizes must span at least one decade");
  const double llo = std::log(lo), lhi = std::log(hi);
  const double width = (lhi - llo) / static_cast<double>(n_bins);
  std::vector<double> sum_logx(n_bins, 0.0), sum_r(n_bins, 0.0), sum_r2(n_bins, 0.0);
  std::vector<std::size_t> count(n_bins, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::uint32_t w = weights ? (*weights)[i] : 1u;
    if (w == 0 || !(data[i].size > 0.0)) continue;
    const double lx = std::log(data[i].size);
    auto b = static_cast<std::size_t>((lx - llo) / width);
    if (b >= n_bins) b = n_bins - 1;
    sum_logx[b] += w * lx;
    sum_r[b] += w * data[i].ret;
    sum_r2[b] += w * data[i].ret * data[i].ret;
    count[b] += w;
  }
  LoglogFit fit;
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (count[b] == 0) continue;
    const double mx = sum_logx[b] / count[b];
    const double mr = sum_r[b] / count[b];
    fit.bin_size.push_back(std::exp(mx));
    fit.bin_return.push_back(mr);
    fit.bin_count.push_back(count[b]);
    if (std::exp(mx) < opts.size_floor || count[b] < opts.min_count || !(mr > 0.0)) continue;
    const double ly = std::log(mr);
    double wb = 1.0;
    if (opts.weighted) {
      const double nb = static_cast<double>(count[b]);
      const double var = std::max(sum_r2[b] / nb - mr * mr, 0.0) * nb / std::max(nb - 1.0, 1.0);
      wb = var > 0.0 ? nb * mr * mr / var : 1.0;
    }
    sw += wb;
    sx += wb * mx;
    sy += wb * ly;
    sxx += wb * mx * mx;
    sxy += wb * mx * ly;
    ++fit.bins_used;
  }
  if (fit.bins_used < 2) throw std::invalid_argument("fit_loglog: fewer than two usable bins above the size floor");
  const double den = sw * sxx - sx * sx;
  if (!(den > 0.0)) throw std::invalid_argument("fit_loglog: degenerate size bins");
  fit.slope = (sw * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / sw;
  return fit;
}

inline LoglogFit fit_loglog(const std::vector<MetaOrder>& orders, std::size_t n_bins, const LoglogOptions& opts = {}) {
  return fit_loglog(order_returns(orders, opts.sigma), n_bins, opts);
}

enum class BootstrapMethod { loglog, profile };

struct BootstrapOptions {
  BootstrapMethod method = BootstrapMethod::loglog;
  std::size_t n_bins = 20;
  LoglogOptions loglog;
  // profile method: R^2 profile over c_values at fixed tau
  std::vector<double> c_values;
  double tau = 0.2;
  FitScale scale;
  double band = 0.95;  // central quantile band
  unsigned threads = 1;
};

struct BootstrapResult {
  double estimate = 0.0;  // on the full sample
  double mean = 0.0;
  double std = 0.0;
  double q_lo = 0.0;
  double q_hi = 0.0;
  std::vector<double> samples;
};

namespace detail {

inline double quantile_sorted(const std::vector<double>& s, double p) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

// Argmax of an R^2 profile with a parabolic refinement through its neighbours.
inline double profile_peak(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < ys.size(); ++k)
    if (ys[k] > ys[best]) best = k;
  if (best == 0 || best + 1 >= ys.size()) return xs[best];
  const double x0 = xs[best - 1], x1 = xs[best], x2 = xs[best + 1];
  const double y0 = ys[best - 1], y1 = ys[best], y2 = ys[best + 1];
  const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
  const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
  if (den == 0.0) return x1;
  return std::clamp(x1 - 0.5 * num / den, x0, x2);
}

}  // namespace detail

// Bootstrap of the concavity estimate by resampling meta-orders with
// replacement. Resample r uses the RNG stream derived from (seed, r).
inline BootstrapResult bootstrap_c(const std::vector<MetaOrder>& orders, std::size_t n_resamples, std::uint64_t seed,
                                   const BootstrapOptions& opts = {}) {
  if (n_resamples < 100) throw std::invalid_argument("bootstrap_c: need at least 100 resamples");
  const std::size_t n = orders.size();
  if (n < 2) throw std::invalid_argument("bootstrap_c: need at least two meta-orders");

  std::function<double(const std::vector<std::uint32_t>*)> estimate;
  std::vector<OrderReturn> returns;
  std::vector<detail::Moments> moments;  // order-major, |c_values| per order
  if (opts.method == BootstrapMethod::loglog) {
    returns = order_returns(orders, opts.loglog.sigma);
    estimate = [&](const std::vector<std::uint32_t>* w) { return fit_loglog(returns, opts.n_bins, opts.loglog, w).slope; };
  } else {
    if (opts.c_values.size() < 3) throw std::invalid_argument("bootstrap_c: profile needs at least 3 c values");
    const auto L = detail::layout_fills(orders);
    const std::size_t nc = opts.c_values.size();
    moments.resize(n * nc);
    std::vector<double> phi;
    for (std::size_t ic = 0; ic < nc; ++ic)
      detail::cell_moments(L, opts.c_values[ic], opts.tau, opts.scale, phi,
                           [&](std::size_t i, const detail::Moments& m) { moments[i * nc + ic] = m; });
    estimate = [&, nc](const std::vector<std::uint32_t>* w) {
      std::vector<detail::Moments> tot(nc);
      for (std::size_t i = 0; i < n; ++i) {
        const double wi = w ? (*w)[i] : 1.0;
        if (wi == 0.0) continue;
        for (std::size_t ic = 0; ic < nc; ++ic) {
          const auto& m = moments[i * nc + ic];
          tot[ic].sxx += wi * m.sxx;
          tot[ic].sxy += wi * m.sxy;
          tot[ic].syy += wi * m.syy;
        }
      }
      std::vector<double> r2(nc);
      for (std::size_t ic = 0; ic < nc; ++ic) {
        const auto f = detail::fit_from_moments(tot[ic]);
        r2[ic] = f.valid ? f.r2 : -1.0;
      }
      return detail::profile_peak(opts.c_values, r2);
    };
  }

  BootstrapResult res;
  res.estimate = estimate(nullptr);
  res.samples.resize(n_resamples);
  detail::parallel_for(n_resamples, opts.threads, [&](std::size_t r) {
    detail::Rng rng(detail::stream_seed(seed, r, 0xb007));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::uint32_t> w(n, 0);
    for (std::size_t k = 0; k < n; ++k) ++w[pick(rng)];
    res.samples[r] = estimate(&w);
  });
  const auto st = detail::mean_stderr(res.samples);
  res.mean = st.mean;
  res.std = st.stdev;
  auto sorted = res.samples;
  std::sort(sorted.begin(), sorted.end());
  res.q_lo = detail::quantile_sorted(sorted, 0.5 * (1.0 - opts.band));
  res.q_hi = detail::quantile_sorted(sorted, 0.5 * (1.0 + opts.band));
  return res;
}

}  // namespace afs
