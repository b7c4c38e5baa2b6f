#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "afs/detail/numeric.hpp"
#include "afs/params.hpp"

namespace afs {

enum class AlphaKind { constant, ou, sampled };

struct AlphaPath {
  TimeGrid grid;
  std::vector<double> alpha;
  std::vector<double> drift;  // mu^alpha
  std::uint64_t seed = 0;

  void validate() const {
    grid.validate();
    if (alpha.size() != grid.size() || drift.size() != grid.size())
      throw std::invalid_argument("AlphaPath: arrays not aligned to grid");
    for (std::size_t k = 0; k < alpha.size(); ++k)
      if (!std::isfinite(alpha[k]) || !std::isfinite(drift[k]))
        throw std::invalid_argument("AlphaPath: non-finite sample");
  }
};

// Alpha signal: level alpha_t (price units) and drift mu^alpha_t.
struct AlphaModel {
  AlphaKind kind = AlphaKind::constant;
  double alpha0 = 0.0;
  double theta = 1.0;    // OU relaxation time (ou only)
  double vol = 0.0;      // OU innovation volatility sigma_alpha (ou only)
  double horizon = 0.0;  // prediction horizon h; metadata only
  AlphaPath samples;     // sampled only

  static AlphaModel constant(double level) {
    AlphaModel m;
    m.kind = AlphaKind::constant;
    m.alpha0 = level;
    return m;
  }

  static AlphaModel ou(double alpha0, double theta, double vol) {
    AlphaModel m;
    m.kind = AlphaKind::ou;
    m.alpha0 = alpha0;
    m.theta = theta;
    m.vol = vol;
    return m;
  }

  // Innovation volatility giving a stationary std of alpha/sigma equal to `ratio`.
  static double vol_for_stationary_ratio(double sigma, double theta, double ratio = 1.0) {
    return ratio * sigma * std::sqrt(2.0 / theta);
  }

  static AlphaModel sampled(AlphaPath path) {
    path.validate();
    AlphaModel m;
    m.kind = AlphaKind::sampled;
    m.alpha0 = path.alpha.front();
    m.samples = std::move(path);
    return m;
  }

  bool stochastic() const { return kind == AlphaKind::ou && vol > 0.0; }

  void validate() const {
    if (!std::isfinite(alpha0)) throw std::invalid_argument("AlphaModel: alpha0 must be finite");
    if (kind == AlphaKind::ou) {
      if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("AlphaModel: theta must be positive");
      if (!(vol >= 0.0) || !std::isfinite(vol)) throw std::invalid_argument("AlphaModel: vol must be >= 0");
    }
    if (kind == AlphaKind::sampled) samples.validate();
  }
};

// Draws the OU level at t0 from the stationary law instead of using alpha0.
struct SampleOptions {
  bool stationary_start = false;
};

inline AlphaPath sample_alpha(const AlphaModel& model, const TimeGrid& grid, std::uint64_t seed,
                              SampleOptions opts = {}) {
  model.validate();
  grid.validate();
  AlphaPath out;
  out.grid = grid;
  switch (model.kind) {
    case AlphaKind::constant:
      out.alpha.assign(grid.size(), model.alpha0);
      out.drift.assign(grid.size(), 0.0);
      return out;
    case AlphaKind::sampled:
      if (!(model.samples.grid == grid))
        throw std::invalid_argument("sample_alpha: sampled path grid does not match requested grid");
      return model.samples;
    case AlphaKind::ou:
      break;
  }
  out.seed = seed;
  const double dt = grid.dt();
  const double decay = std::exp(-dt / model.theta);
  const double stationary_var = model.vol * model.vol * model.theta / 2.0;
  const double innov_sd = std::sqrt(stationary_var * (-std::expm1(-2.0 * dt / model.theta)));
  detail::Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.alpha.resize(grid.size());
  out.alpha[0] = opts.stationary_start ? std::sqrt(stationary_var) * normal(rng) : model.alpha0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    out.alpha[k + 1] = decay * out.alpha[k] + (innov_sd > 0.0 ? innov_sd * normal(rng) : 0.0);
  }
  out.drift.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) out.drift[k] = -out.alpha[k] / model.theta;
  return out;
}

// E|alpha/sigma|^p under the stationary OU law.
inline double stationary_abs_moment(const AlphaModel& model, double sigma, double p) {
  if (model.kind != AlphaKind::ou) throw std::invalid_argument("stationary_abs_moment: requires an OU alpha model");
  if (!(p > 0.0)) throw std::invalid_argument("stationary_abs_moment: p must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("stationary_abs_moment: sigma must be positive");
  model.validate();
  const double s = (model.vol / sigma) * std::sqrt(model.theta / 2.0);
  return std::pow(s, p) * std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
}

// CSV with header `t,alpha,drift`; times must form a uniform grid.
inline AlphaPath load_alpha_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("alpha csv: empty input");
  if (line.rfind("t,alpha,drift", 0) != 0) throw std::invalid_argument("alpha csv: expected header t,alpha,drift");
  std::vector<double> ts;
  AlphaPath out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c, ','))
      throw std::invalid_argument("alpha csv: malformed row: " + line);
    ts.push_back(std::stod(a));
    out.alpha.push_back(std::stod(b));
    out.drift.push_back(std::stod(c));
  }
  if (ts.size() < 2) throw std::invalid_argument("alpha csv: need at least two rows");
  out.grid = TimeGrid{ts.front(), ts.back(), ts.size() - 1};
  const double dt = out.grid.dt();
  for (std::size_t k = 0; k < ts.size(); ++k)
    if (std::abs(ts[k] - out.grid.time(k)) > 1e-9 * std::max(1.0, std::abs(dt) * static_cast<double>(k)))
      throw std::invalid_argument("alpha csv: times are not uniformly spaced");
  out.validate();
  return out;
}

inline AlphaPath load_alpha_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return load_alpha_csv(f);
}

}  // namespace afs
