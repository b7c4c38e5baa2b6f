#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "afs/calibration.hpp"
#include "afs/pnl.hpp"
#include "afs/policy.hpp"
#include "afs/sensitivity.hpp"

namespace afs::io {

// Shortest text that round-trips the double.
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline double parse_num(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("csv: bad number '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

inline void expect_header(std::istream& in, const std::string& header, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(std::string(what) + ": empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw std::invalid_argument(std::string(what) + ": expected header '" + header + "', got '" + line + "'");
}

// ---- meta-orders: order_id,t,dt,dQ,dP -------------------------------------

inline void write_orders_csv(std::ostream& out, const std::vector<MetaOrder>& orders) {
  out << "order_id,t,dt,dQ,dP\n";
  for (const auto& o : orders)
    for (const auto& f : o.fills)
      out << o.order_id << ',' << num(f.t) << ',' << num(f.dt) << ',' << num(f.dq) << ',' << num(f.dp) << '\n';
}

// Rows of one order must be contiguous. `adv` converts traded shares to Q/V.
inline std::vector<MetaOrder> read_orders_csv(std::istream& in, double adv) {
  if (!(adv > 0.0)) throw std::invalid_argument("orders csv: adv must be positive");
  expect_header(in, "order_id,t,dt,dQ,dP", "orders csv");
  std::vector<MetaOrder> orders;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5) throw std::invalid_argument("orders csv: line " + std::to_string(lineno) + " needs 5 columns");
    const auto id = std::stoll(cells[0]);
    Fill f{parse_num(cells[1]), parse_num(cells[2]), parse_num(cells[3]), parse_num(cells[4])};
    if (!(f.dt > 0.0)) throw std::invalid_argument("orders csv: line " + std::to_string(lineno) + " has dt <= 0");
    if (orders.empty() || orders.back().order_id != id) {
      for (const auto& o : orders)
        if (o.order_id == id) throw std::invalid_argument("orders csv: rows of order " + std::to_string(id) + " are not contiguous");
      MetaOrder o;
      o.order_id = id;
      o.start = f.t;
      orders.push_back(std::move(o));
    }
    orders.back().fills.push_back(f);
  }
  for (auto& o : orders) {
    double q = 0.0, dur = 0.0;
    for (const auto& f : o.fills) {
      q += f.dq;
      dur += f.dt;
    }
    o.duration = dur;
    o.signed_frac = q / adv;
  }
  return orders;
}

// ---- calibration grid: c,tau,r2,g ----------------------------------------

inline void write_calib_csv(std::ostream& out, const CalibGrid& grid) {
  out << "c,tau,r2,g\n";
  for (std::size_t ic = 0; ic < grid.c_values.size(); ++ic)
    for (std::size_t it = 0; it < grid.tau_values.size(); ++it)
      out << num(grid.c_values[ic]) << ',' << num(grid.tau_values[it]) << ',' << num(grid.r2_at(ic, it)) << ','
          << num(grid.g_at(ic, it)) << '\n';
}

inline CalibGrid read_calib_csv(std::istream& in) {
  expect_header(in, "c,tau,r2,g", "calib csv");
  struct Row {
    double c, tau, r2, g;
  };
  std::vector<Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw std::invalid_argument("calib csv: rows need 4 columns");
    rows.push_back({parse_num(cells[0]), parse_num(cells[1]), parse_num(cells[2]), parse_num(cells[3])});
  }
  CalibGrid grid;
  std::map<double, std::size_t> cs, ts;
  for (const auto& r : rows) {
    cs.emplace(r.c, 0);
    ts.emplace(r.tau, 0);
  }
  for (auto& [v, idx] : cs) {
    idx = grid.c_values.size();
    grid.c_values.push_back(v);
  }
  for (auto& [v, idx] : ts) {
    idx = grid.tau_values.size();
    grid.tau_values.push_back(v);
  }
  const std::size_t cells = cs.size() * ts.size();
  if (rows.size() != cells) throw std::invalid_argument("calib csv: rows do not form a full lattice");
  grid.r2.assign(cells, std::numeric_limits<double>::quiet_NaN());
  grid.g.assign(cells, std::numeric_limits<double>::quiet_NaN());
  grid.valid.assign(cells, 0);
  for (const auto& r : rows) {
    const std::size_t k = grid.index(cs[r.c], ts[r.tau]);
    grid.r2[k] = r.r2;
    grid.g[k] = r.g;
    grid.valid[k] = std::isfinite(r.r2) && std::isfinite(r.g);
  }
  return grid;
}

// ---- plans: t,alpha,drift,i_star,j_star,q_star ----------------------------

inline void write_plan_csv(std::ostream& out, const OptimalPlan& plan) {
  out << "t,alpha,drift,i_star,j_star,q_star\n";
  for (std::size_t k = 0; k < plan.grid.size(); ++k)
    out << num(plan.grid.time(k)) << ',' << num(plan.alpha[k]) << ',' << num(plan.drift[k]) << ','
        << num(plan.i_star[k]) << ',' << num(plan.j_star[k]) << ',' << num(plan.q_star[k]) << '\n';
}

// ---- scans ------------------------------------------------------------------

inline void write_scan_csv(std::ostream& out, const ScanResult& r) {
  out << "axis1,axis2,ratio,u_misspec,u_opt\n";
  for (std::size_t i2 = 0; i2 < r.axis2.size(); ++i2)
    for (std::size_t i1 = 0; i1 < r.axis1.size(); ++i1) {
      const auto k = r.index(i1, i2);
      out << num(r.axis1[i1]) << ',' << num(r.axis2[i2]) << ',' << num(r.ratio[k]) << ',' << num(r.u_misspec[k])
          << ',' << num(r.u_opt[k]) << '\n';
    }
}

inline void write_criticals_csv(std::ostream& out, const ScanResult& r) {
  out << "axis2,critical_value\n";
  for (std::size_t i2 = 0; i2 < r.axis2.size(); ++i2)
    out << num(r.axis2[i2]) << ',' << (r.critical[i2] ? num(*r.critical[i2]) : std::string("nan")) << '\n';
}

inline void write_asymmetry_csv(std::ostream& out, const AsymmetryCurves& f) {
  out << "c_hat,r2_ratio,u_ratio\n";
  for (std::size_t k = 0; k < f.c_hat.size(); ++k)
    out << num(f.c_hat[k]) << ',' << num(f.r2_ratio[k]) << ',' << num(f.u_ratio[k]) << '\n';
}

// ---- JSON -------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const PnlReport& r) {
  nlohmann::ordered_json j;
  j["raw"] = r.raw;
  j["normalized"] = r.normalized;
  j["alpha_capture"] = r.alpha_capture;
  j["impact_paid"] = r.impact_paid;
  j["n_paths"] = r.n_paths;
  j["stderr"] = r.stderr_;
  return j;
}

inline PnlReport pnl_from_json(const nlohmann::json& j) {
  PnlReport r;
  r.raw = j.at("raw").get<double>();
  r.normalized = j.at("normalized").get<double>();
  r.alpha_capture = j.at("alpha_capture").get<double>();
  r.impact_paid = j.at("impact_paid").get<double>();
  r.n_paths = j.at("n_paths").get<std::uint64_t>();
  r.stderr_ = j.at("stderr").get<double>();
  return r;
}

inline nlohmann::ordered_json to_json(const AfsParams& p) {
  nlohmann::ordered_json j;
  j["c"] = p.c;
  j["tau"] = p.tau;
  j["sigma"] = p.sigma;
  j["adv"] = p.adv;
  j["g"] = p.g;
  j["lambda"] = p.lambda();
  return j;
}

template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  writer(f);
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace afs::io
