#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace afs {

// AFS transient-impact parameters in trader units: I = lambda * sign(J) |J|^c
// with lambda = sigma * g / adv^c.
struct AfsParams {
  double c = 0.5;       // concavity, (0, 1]
  double tau = 0.2;     // impact decay timescale, days
  double sigma = 1.0;   // daily price volatility
  double adv = 1.0;     // average daily volume, shares/day
  double g = 1.0;       // normalized impact prefactor

  double lambda() const { return sigma * g / std::pow(adv, c); }

  void validate() const {
    if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("AfsParams: c must lie in (0, 1]");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("AfsParams: tau must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("AfsParams: sigma must be positive");
    if (!(adv > 0.0) || !std::isfinite(adv)) throw std::invalid_argument("AfsParams: adv must be positive");
    if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("AfsParams: g must be positive");
  }
};

// Uniform grid t_k = t0 + k * dt, k = 0..n.
struct TimeGrid {
  double t0 = 0.0;
  double t1 = 1.0;
  std::size_t n = 1;

  double dt() const { return (t1 - t0) / static_cast<double>(n); }
  double time(std::size_t k) const {
    return k == n ? t1 : t0 + static_cast<double>(k) * dt();
  }
  std::size_t size() const { return n + 1; }

  void validate() const {
    if (n < 1) throw std::invalid_argument("TimeGrid: n must be >= 1");
    if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1))
      throw std::invalid_argument("TimeGrid: requires finite t1 > t0");
  }

  // Index of the node at time t, or throws when t is not on the grid.
  std::size_t node_at(double t, double rel_tol = 1e-9) const {
    const double x = (t - t0) / dt();
    const double k = std::round(x);
    if (k < 0.0 || k > static_cast<double>(n) || std::abs(x - k) > rel_tol * std::max(1.0, std::abs(x)))
      throw std::invalid_argument("TimeGrid: time " + std::to_string(t) + " is not a grid node");
    return static_cast<std::size_t>(k);
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

inline double sign(double x) { return (x > 0.0) - (x < 0.0); }

// sign(x) |x|^p
inline double signed_pow(double x, double p) {
  return x == 0.0 ? 0.0 : sign(x) * std::pow(std::abs(x), p);
}

}  // namespace afs
