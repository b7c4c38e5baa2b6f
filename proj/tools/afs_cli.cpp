// afs: optimal trading under nonlinear transient impact, calibration and
// misspecification scans. Trader units at the boundary: alphas in sigma units,
// sizes as fractions of ADV, times in days.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "afs/afs.hpp"

namespace {

using nlohmann::ordered_json;

struct Common {
  std::uint64_t seed = 42;
  std::string output;
  std::string format = "csv";
  unsigned threads = 1;
};

struct ModelFlags {
  double c = 0.5;
  double tau = 0.2;
  double sigma = 1.0;
  double adv = 1.0;
  double g = 1.0;

  afs::AfsParams params() const { return afs::AfsParams{c, tau, sigma, adv, g}; }
};

struct AlphaFlags {
  std::string kind = "constant";
  double alpha0 = 1.0;  // sigma units
  double theta = 1.0;
  double sigma_alpha = -1.0;  // sigma units per sqrt(day); < 0: stationary std of alpha/sigma = 1
  double horizon = 0.0;
  std::string csv;
  bool stationary = false;
};

// "lo:hi:step", "a,b,c" or a single value.
std::vector<double> parse_range(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ':')) parts.push_back(afs::io::parse_num(tok));
    if (parts.size() != 3) throw std::invalid_argument("range '" + text + "' must be min:max:step");
    return afs::detail::linspace_step(parts[0], parts[1], parts[2]);
  }
  std::vector<double> out;
  for (const auto& tok : afs::io::split_csv(text)) out.push_back(afs::io::parse_num(tok));
  if (out.empty()) throw std::invalid_argument("empty value list");
  return out;
}

ordered_json model_json(const ModelFlags& m) {
  return ordered_json{{"c", m.c}, {"tau", m.tau}, {"sigma", m.sigma}, {"adv", m.adv}, {"g", m.g}};
}

ordered_json alpha_json(const AlphaFlags& a) {
  return ordered_json{{"kind", a.kind},   {"alpha0", a.alpha0},   {"theta", a.theta},
                      {"sigma_alpha", a.sigma_alpha}, {"horizon", a.horizon}, {"csv", a.csv},
                      {"stationary_start", a.stationary}};
}

void add_model(CLI::App* cmd, ModelFlags& m, bool need_c = false) {
  auto* c = cmd->add_option("--c", m.c, "impact concavity")->capture_default_str();
  if (need_c) c->required();
  cmd->add_option("--tau", m.tau, "impact decay timescale (days)")->capture_default_str();
  cmd->add_option("--sigma", m.sigma, "daily price volatility")->capture_default_str();
  cmd->add_option("--adv", m.adv, "average daily volume")->capture_default_str();
  cmd->add_option("--g", m.g, "impact prefactor")->capture_default_str();
}

void add_alpha(CLI::App* cmd, AlphaFlags& a) {
  cmd->add_option("--alpha-kind", a.kind, "constant | ou | sampled")
      ->check(CLI::IsMember({"constant", "ou", "sampled"}))
      ->capture_default_str();
  cmd->add_option("--alpha0", a.alpha0, "initial or constant alpha (sigma units)")->capture_default_str();
  cmd->add_option("--theta", a.theta, "OU relaxation time (days)")->capture_default_str();
  cmd->add_option("--sigma-alpha", a.sigma_alpha, "OU innovation vol (sigma units); default: unit stationary std");
  cmd->add_option("--horizon", a.horizon, "prediction horizon h (metadata)")->capture_default_str();
  cmd->add_option("--alpha-csv", a.csv, "sampled alpha path (t,alpha,drift)");
  cmd->add_flag("--stationary-start", a.stationary, "draw the initial OU level from its stationary law");
}

afs::AlphaModel build_alpha(const AlphaFlags& a, double sigma) {
  afs::AlphaModel m;
  if (a.kind == "constant") {
    m = afs::AlphaModel::constant(a.alpha0 * sigma);
  } else if (a.kind == "ou") {
    const double vol = a.sigma_alpha < 0.0 ? afs::AlphaModel::vol_for_stationary_ratio(sigma, a.theta)
                                           : a.sigma_alpha * sigma;
    m = afs::AlphaModel::ou(a.alpha0 * sigma, a.theta, vol);
  } else {
    if (a.csv.empty()) throw std::invalid_argument("--alpha-kind sampled requires --alpha-csv");
    auto path = afs::load_alpha_csv(a.csv);
    for (auto& x : path.alpha) x *= sigma;
    for (auto& x : path.drift) x *= sigma;
    m = afs::AlphaModel::sampled(std::move(path));
  }
  m.horizon = a.horizon;
  m.validate();
  return m;
}

// Writes the artifact to --output (plus the config echo) or to stdout.
template <class Writer>
void emit(const Common& common, const ordered_json& config, Writer&& writer) {
  if (common.output.empty()) {
    writer(std::cout);
    return;
  }
  afs::io::write_file(common.output, writer);
  afs::io::write_file(common.output + ".config.json", [&](std::ostream& out) { out << config.dump(2) << '\n'; });
}

ordered_json base_config(const std::string& command, const Common& common) {
  return ordered_json{{"command", command},
                      {"seed", common.seed},
                      {"output", common.output},
                      {"format", common.format},
                      {"threads", common.threads}};
}

std::vector<afs::MetaOrder> read_orders(const std::string& path, double adv) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return afs::io::read_orders_csv(in, adv);
}

afs::CalibGrid read_calib(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return afs::io::read_calib_csv(in);
}

std::string fmt(double x, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal trading under nonlinear transient impact"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "RNG seed")->capture_default_str();
  app.add_option("--output,-o", common.output, "output file (default: stdout)");
  app.add_option("--format", common.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--threads", common.threads, "worker threads (0: all cores)")->capture_default_str();
  app.fallthrough();

  // optimize
  auto* optimize = app.add_subcommand("optimize", "optimal impact plan for an alpha signal");
  ModelFlags opt_model;
  AlphaFlags opt_alpha;
  double opt_T = 1.0;
  std::size_t opt_n = 200;
  add_model(optimize, opt_model);
  add_alpha(optimize, opt_alpha);
  optimize->add_option("--T", opt_T, "trading horizon (days)")->capture_default_str();
  optimize->add_option("--steps", opt_n, "grid steps")->capture_default_str();

  // backtest
  auto* backtest = app.add_subcommand("backtest", "Monte Carlo P&L of a (possibly misspecified) policy");
  ModelFlags bt_model;
  AlphaFlags bt_alpha;
  double bt_T = 1.0, bt_chat = -1, bt_tauhat = -1, bt_ghat = -1;
  std::size_t bt_n = 200;
  std::uint64_t bt_paths = 10000;
  std::string bt_exec = "track";
  bool bt_no_noise = false;
  add_model(backtest, bt_model);
  add_alpha(backtest, bt_alpha);
  backtest->add_option("--T", bt_T, "trading horizon (days)")->capture_default_str();
  backtest->add_option("--steps", bt_n, "grid steps")->capture_default_str();
  backtest->add_option("--paths", bt_paths, "Monte Carlo paths")->capture_default_str();
  backtest->add_option("--chat", bt_chat, "believed concavity (default: actual)");
  backtest->add_option("--tauhat", bt_tauhat, "believed decay (default: actual)");
  backtest->add_option("--ghat", bt_ghat, "believed prefactor (default: actual)");
  backtest->add_option("--execution", bt_exec, "track | replay")
      ->check(CLI::IsMember({"track", "replay"}))
      ->capture_default_str();
  backtest->add_flag("--no-price-noise", bt_no_noise, "drop the martingale price noise");

  // synth
  auto* synth = app.add_subcommand("synth", "synthetic TWAP meta-orders");
  ModelFlags sy_model;
  sy_model.c = 0.48;
  afs::SynthConfig sy_cfg;
  std::size_t sy_n = 100000;
  add_model(synth, sy_model);
  synth->add_option("--n", sy_n, "number of meta-orders")->capture_default_str();
  synth->add_option("--size-lo", sy_cfg.size_lo, "min |Q|/V")->capture_default_str();
  synth->add_option("--size-hi", sy_cfg.size_hi, "max |Q|/V")->capture_default_str();
  synth->add_option("--duration-lo", sy_cfg.duration_lo, "min duration (days)")->capture_default_str();
  synth->add_option("--duration-hi", sy_cfg.duration_hi, "max duration (days)")->capture_default_str();
  synth->add_option("--fills-lo", sy_cfg.fills_lo, "min child orders")->capture_default_str();
  synth->add_option("--fills-hi", sy_cfg.fills_hi, "max child orders")->capture_default_str();
  synth->add_option("--noise", sy_cfg.noise_vol, "price noise (sigma units)")->capture_default_str();
  synth->add_option("--alpha-leak", sy_cfg.alpha_leak, "alpha drift along the order (sigma/day)")->capture_default_str();

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "grid regression R2/g over (c_hat, tau_hat)");
  std::string cal_input, cal_chat = "0.2:1.0:0.04", cal_tauhat = "0.02,0.05,0.1,0.2,0.5,1,2,5";
  double cal_adv = 1.0, cal_sigma = 1.0;
  std::size_t cal_bins = 20, cal_boot = 0;
  calibrate->add_option("--input,-i", cal_input, "meta-order CSV")->required();
  calibrate->add_option("--adv", cal_adv, "average daily volume")->capture_default_str();
  calibrate->add_option("--sigma", cal_sigma, "daily price volatility")->capture_default_str();
  calibrate->add_option("--chat", cal_chat, "c_hat lattice")->capture_default_str();
  calibrate->add_option("--tauhat", cal_tauhat, "tau_hat lattice")->capture_default_str();
  calibrate->add_option("--bins", cal_bins, "log-log bins")->capture_default_str();
  calibrate->add_option("--bootstrap", cal_boot, "bootstrap resamples for std(c) (0: skip)")->capture_default_str();

  // scan-concavity
  auto* scan_c = app.add_subcommand("scan-concavity", "profit ratio over c_hat x sharpe");
  double sc_c = 0.48, sc_tau = 0.2, sc_T = 1.0, sc_g = 1.0;
  std::string sc_sharpe = "1", sc_chat = "0.2:1.0:0.01", sc_calib;
  scan_c->add_option("--c", sc_c, "actual concavity")->required();
  scan_c->add_option("--tau", sc_tau, "impact decay (days)")->capture_default_str();
  scan_c->add_option("--T", sc_T, "horizon (days)")->capture_default_str();
  scan_c->add_option("--g", sc_g, "constant prefactor")->capture_default_str();
  scan_c->add_option("--calib", sc_calib, "calibration CSV: use g(c_hat) from its tau row");
  scan_c->add_option("--sharpe", sc_sharpe, "alpha/sigma values")->capture_default_str();
  scan_c->add_option("--chat", sc_chat, "c_hat lattice")->capture_default_str();

  // scan-decay
  auto* scan_d = app.add_subcommand("scan-decay", "steady-state profit ratio over tau_hat x theta");
  double sd_tau = 0.2, sd_c = 0.48, sd_g = 1.0, sd_ratio = 1.0;
  std::string sd_theta = "1", sd_tauhat = "0.01:2:0.01", sd_calib;
  scan_d->add_option("--tau", sd_tau, "actual impact decay (days)")->required();
  scan_d->add_option("--c", sd_c, "concavity")->capture_default_str();
  scan_d->add_option("--g", sd_g, "constant prefactor")->capture_default_str();
  scan_d->add_option("--calib", sd_calib, "calibration CSV: use g(tau_hat) from its c column");
  scan_d->add_option("--alpha-std", sd_ratio, "stationary std of alpha/sigma")->capture_default_str();
  scan_d->add_option("--theta", sd_theta, "alpha decay values (days)")->capture_default_str();
  scan_d->add_option("--tauhat", sd_tauhat, "tau_hat lattice")->capture_default_str();

  // compare-fig1
  auto* fig1 = app.add_subcommand("compare-fig1", "R2 ratio vs profit ratio along c_hat");
  std::string f1_calib;
  double f1_c = -1, f1_tau = 0.2, f1_sharpe = 1.0, f1_T = 1.0, f1_std = 0.0;
  fig1->add_option("--calib", f1_calib, "calibration CSV")->required();
  fig1->add_option("--c", f1_c, "concavity estimate (default: argmax R2 on the tau row)");
  fig1->add_option("--tau", f1_tau, "calibration tau row")->capture_default_str();
  fig1->add_option("--sharpe", f1_sharpe, "alpha/sigma")->capture_default_str();
  fig1->add_option("--T", f1_T, "horizon (days)")->capture_default_str();
  fig1->add_option("--c-std", f1_std, "bootstrap std of c")->capture_default_str();

  // tca
  auto* tca = app.add_subcommand("tca", "implied alpha and optimality check for an order");
  ModelFlags tca_model;
  double tca_T = 1.0, tca_frac = 0.0, tca_alpha = 0.0, tca_drift = 0.0, tca_impact = 0.0;
  add_model(tca, tca_model, true);
  tca->add_option("--T", tca_T, "horizon (days)")->capture_default_str();
  auto* frac_opt = tca->add_option("--order-frac", tca_frac, "signed order size Q/V");
  auto* impact_opt = tca->add_option("--impact", tca_impact, "realized impact (sigma units)");
  tca->add_option("--alpha", tca_alpha, "alpha (sigma units), for the impact check")->capture_default_str();
  tca->add_option("--drift", tca_drift, "alpha drift (sigma units/day)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*optimize) {
      const auto actual = opt_model.params();
      actual.validate();
      const auto model = build_alpha(opt_alpha, actual.sigma);
      const afs::TimeGrid grid = model.kind == afs::AlphaKind::sampled ? model.samples.grid : afs::TimeGrid{0, opt_T, opt_n};
      const afs::PolicySpec spec{actual, grid.t1};
      const auto plan = afs::optimal_impact(spec, afs::sample_alpha(model, grid, common.seed, {opt_alpha.stationary}));
      auto config = base_config("optimize", common);
      config["model"] = model_json(opt_model);
      config["alpha"] = alpha_json(opt_alpha);
      config["T"] = grid.t1;
      config["steps"] = grid.n;
      emit(common, config, [&](std::ostream& out) {
        if (common.format == "csv") return afs::io::write_plan_csv(out, plan);
        ordered_json j;
        j["t"] = std::vector<double>();
        for (std::size_t k = 0; k < grid.size(); ++k) j["t"].push_back(grid.time(k));
        j["alpha"] = plan.alpha;
        j["drift"] = plan.drift;
        j["i_star"] = plan.i_star;
        j["j_star"] = plan.j_star;
        j["q_star"] = plan.q_star;
        j["initial_jump"] = plan.initial_jump;
        j["terminal_jump"] = plan.terminal_jump;
        out << j.dump(2) << '\n';
      });
      const double a0 = plan.alpha[0] - actual.tau * plan.drift[0];
      std::cerr << "I*/adjusted alpha at t0 = " << fmt(a0 != 0 ? plan.i_star[0] / a0 : 0.0)
                << ", Q_T/V = " << fmt(plan.q_star.back() / actual.adv) << '\n';
    } else if (*backtest) {
      const auto actual = bt_model.params();
      actual.validate();
      auto believed = actual;
      if (bt_chat > 0) believed.c = bt_chat;
      if (bt_tauhat > 0) believed.tau = bt_tauhat;
      if (bt_ghat > 0) believed.g = bt_ghat;
      believed.validate();
      const auto model = build_alpha(bt_alpha, actual.sigma);
      const afs::TimeGrid grid = model.kind == afs::AlphaKind::sampled ? model.samples.grid : afs::TimeGrid{0, bt_T, bt_n};
      const afs::PolicySpec spec{believed, grid.t1};
      const auto plan = afs::optimal_impact(spec, afs::sample_alpha(model, grid, common.seed, {bt_alpha.stationary}));
      afs::SimOptions opts;
      opts.execution = bt_exec == "track" ? afs::Execution::track_impact : afs::Execution::replay_positions;
      opts.price_noise = !bt_no_noise;
      opts.stationary_start = bt_alpha.stationary;
      opts.threads = common.threads;
      const auto report = afs::simulate_pnl(actual, plan, model, bt_paths, common.seed, opts);
      auto config = base_config("backtest", common);
      config["model"] = model_json(bt_model);
      config["believed"] = afs::io::to_json(believed);
      config["alpha"] = alpha_json(bt_alpha);
      config["T"] = grid.t1;
      config["steps"] = grid.n;
      config["paths"] = bt_paths;
      config["execution"] = bt_exec;
      config["price_noise"] = !bt_no_noise;
      emit(common, config, [&](std::ostream& out) {
        if (common.format == "json") {
          out << afs::io::to_json(report).dump(2) << '\n';
          return;
        }
        out << "raw,normalized,alpha_capture,impact_paid,n_paths,stderr\n"
            << afs::io::num(report.raw) << ',' << afs::io::num(report.normalized) << ','
            << afs::io::num(report.alpha_capture) << ',' << afs::io::num(report.impact_paid) << ','
            << report.n_paths << ',' << afs::io::num(report.stderr_) << '\n';
      });
      std::cerr << "E[P&L] = " << fmt(report.raw) << " +/- " << fmt(report.stderr_) << " (U = " << fmt(report.normalized)
                << ")\n";
    } else if (*synth) {
      const auto actual = sy_model.params();
      const auto orders = afs::synth_metaorders(actual, sy_n, sy_cfg, common.seed);
      auto config = base_config("synth", common);
      config["model"] = model_json(sy_model);
      config["n"] = sy_n;
      config["size"] = {sy_cfg.size_lo, sy_cfg.size_hi};
      config["duration"] = {sy_cfg.duration_lo, sy_cfg.duration_hi};
      config["fills"] = {sy_cfg.fills_lo, sy_cfg.fills_hi};
      config["noise"] = sy_cfg.noise_vol;
      config["alpha_leak"] = sy_cfg.alpha_leak;
      emit(common, config, [&](std::ostream& out) {
        if (common.format == "csv") return afs::io::write_orders_csv(out, orders);
        ordered_json rows = ordered_json::array();
        for (const auto& o : orders)
          for (const auto& f : o.fills)
            rows.push_back(ordered_json{{"order_id", o.order_id}, {"t", f.t}, {"dt", f.dt}, {"dQ", f.dq}, {"dP", f.dp}});
        out << rows.dump() << '\n';
      });
      std::size_t fills = 0;
      for (const auto& o : orders) fills += o.fills.size();
      std::cerr << "wrote " << orders.size() << " meta-orders, " << fills << " fills\n";
    } else if (*calibrate) {
      const auto orders = read_orders(cal_input, cal_adv);
      const afs::FitScale scale{cal_sigma, cal_adv};
      const auto grid = afs::grid_fit(orders, parse_range(cal_chat), parse_range(cal_tauhat), scale, common.threads);
      afs::LoglogOptions ll;
      ll.sigma = cal_sigma;
      const auto fit = afs::fit_loglog(orders, cal_bins, ll);
      auto config = base_config("calibrate", common);
      config["input"] = cal_input;
      config["adv"] = cal_adv;
      config["sigma"] = cal_sigma;
      config["chat"] = grid.c_values;
      config["tauhat"] = grid.tau_values;
      config["bins"] = cal_bins;
      config["bootstrap"] = cal_boot;
      emit(common, config, [&](std::ostream& out) {
        if (common.format == "csv") return afs::io::write_calib_csv(out, grid);
        ordered_json rows = ordered_json::array();
        for (std::size_t ic = 0; ic < grid.c_values.size(); ++ic)
          for (std::size_t it = 0; it < grid.tau_values.size(); ++it)
            rows.push_back(ordered_json{{"c", grid.c_values[ic]},
                                        {"tau", grid.tau_values[it]},
                                        {"r2", grid.r2_at(ic, it)},
                                        {"g", grid.g_at(ic, it)}});
        out << rows.dump(2) << '\n';
      });
      const auto best = grid.argmax_r2();
      std::cerr << "argmax R2 at c = " << fmt(grid.c_values[best.ic]) << ", tau = " << fmt(grid.tau_values[best.it])
                << " (R2 = " << fmt(grid.r2_at(best.ic, best.it)) << ", g = " << fmt(grid.g_at(best.ic, best.it))
                << "); log-log slope = " << fmt(fit.slope);
      if (cal_boot > 0) {
        afs::BootstrapOptions bo;
        bo.n_bins = cal_bins;
        bo.loglog = ll;
        bo.threads = common.threads;
        const auto bs = afs::bootstrap_c(orders, cal_boot, common.seed, bo);
        std::cerr << ", bootstrap std = " << fmt(bs.std);
      }
      std::cerr << '\n';
    } else if (*scan_c) {
      afs::ConcavityScanConfig cfg;
      cfg.actual_c = sc_c;
      cfg.tau = sc_tau;
      cfg.horizon = sc_T;
      cfg.g = sc_calib.empty() ? afs::GCurve::constant(sc_g) : afs::GCurve::along_c(read_calib(sc_calib), sc_tau);
      const auto r = afs::scan_concavity(cfg, parse_range(sc_sharpe), parse_range(sc_chat));
      auto config = base_config("scan-concavity", common);
      config["c"] = sc_c;
      config["tau"] = sc_tau;
      config["T"] = sc_T;
      config["g"] = sc_calib.empty() ? ordered_json(sc_g) : ordered_json(sc_calib);
      config["sharpe"] = r.axis2;
      config["chat"] = r.axis1;
      emit(common, config, [&](std::ostream& out) {
        if (common.format == "csv") return afs::io::write_scan_csv(out, r);
        ordered_json j{{"axis1", r.axis1}, {"axis2", r.axis2}, {"ratio", r.ratio}, {"u_misspec", r.u_misspec}, {"u_opt", r.u_opt}};
        j["critical"] = ordered_json::array();
        for (const auto& c : r.critical) j["critical"].push_back(c ? ordered_json(*c) : ordered_json(nullptr));
        out << j.dump(2) << '\n';
      });
      if (!common.output.empty() && common.format == "csv")
        afs::io::write_file(common.output + ".criticals.csv", [&](std::ostream& out) { afs::io::write_criticals_csv(out, r); });
      for (std::size_t i2 = 0; i2 < r.axis2.size(); ++i2) {
        std::cerr << "sharpe " << fmt(r.axis2[i2]) << ": c_min = " << (r.critical[i2] ? fmt(*r.critical[i2]) : "none");
        for (std::size_t i1 = 0; i1 < r.axis1.size(); ++i1)
          if (std::abs(r.axis1[i1] - sc_c) < 1e-12) std::cerr << ", ratio at c = " << fmt(r.ratio_at(i1, i2));
        std::cerr << '\n';
      }
    } else if (*scan_d) {
      afs::DecayScanConfig cfg;
      cfg.actual_tau = sd_tau;
      cfg.c = sd_c;
      cfg.stationary_ratio = sd_ratio;
      cfg.g = sd_calib.empty() ? afs::GCurve::constant(sd_g) : afs::GCurve::along_tau(read_calib(sd_calib), sd_c);
      const auto r = afs::scan_decay(cfg, parse_range(sd_theta), parse_range(sd_tauhat));
      auto config = base_config("scan-decay", common);
      config["tau"] = sd_tau;
      config["c"] = sd_c;
      config["g"] = sd_calib.empty() ? ordered_json(sd_g) : ordered_json(sd_calib);
      config["alpha_std"] = sd_ratio;
      config["theta"] = r.axis2;
      config["tauhat"] = r.axis1;
      emit(common, config, [&](std::ostream& out) {
        if (common.format == "csv") return afs::io::write_scan_csv(out, r);
        ordered_json j{{"axis1", r.axis1}, {"axis2", r.axis2}, {"ratio", r.ratio}, {"u_misspec", r.u_misspec}, {"u_opt", r.u_opt}};
        j["critical"] = ordered_json::array();
        for (const auto& c : r.critical) j["critical"].push_back(c ? ordered_json(*c) : ordered_json(nullptr));
        out << j.dump(2) << '\n';
      });
      if (!common.output.empty() && common.format == "csv")
        afs::io::write_file(common.output + ".criticals.csv", [&](std::ostream& out) { afs::io::write_criticals_csv(out, r); });
      for (std::size_t i2 = 0; i2 < r.axis2.size(); ++i2)
        std::cerr << "theta " << fmt(r.axis2[i2]) << ": zero-profit tau_hat = "
                  << (r.critical[i2] ? fmt(*r.critical[i2]) : "none") << '\n';
    } else if (*fig1) {
      const auto calib = read_calib(f1_calib);
      afs::AsymmetryConfig cfg;
      cfg.tau = f1_tau;
      cfg.sharpe = f1_sharpe;
      cfg.horizon = f1_T;
      cfg.c_std = f1_std;
      if (f1_c > 0) {
        cfg.c = f1_c;
      } else {
        const std::size_t it = calib.nearest_tau(f1_tau);
        std::size_t best = 0;
        for (std::size_t ic = 1; ic < calib.c_values.size(); ++ic)
          if (calib.valid[calib.index(ic, it)] && calib.r2_at(ic, it) > calib.r2_at(best, it)) best = ic;
        cfg.c = calib.c_values[best];
      }
      const auto f = afs::statistical_vs_pnl(calib, cfg);
      auto config = base_config("compare-fig1", common);
      config["calib"] = f1_calib;
      config["c"] = f.c;
      config["tau"] = f.tau;
      config["sharpe"] = f1_sharpe;
      config["T"] = f1_T;
      config["c_std"] = f1_std;
      emit(common, config, [&](std::ostream& out) {
        if (common.format == "csv") return afs::io::write_asymmetry_csv(out, f);
        ordered_json j{{"c_hat", f.c_hat},
                       {"r2_ratio", f.r2_ratio},
                       {"u_ratio", f.u_ratio},
                       {"c", f.c},
                       {"tau", f.tau},
                       {"band_inner", {f.band_inner_lo, f.band_inner_hi}},
                       {"band_outer", {f.band_outer_lo, f.band_outer_hi}}};
        out << j.dump(2) << '\n';
      });
      std::cerr << "c = " << fmt(f.c) << " (tau row " << fmt(f.tau) << "), band [" << fmt(f.band_inner_lo) << ", "
                << fmt(f.band_inner_hi) << "]\n";
    } else if (*tca) {
      const auto p = tca_model.params();
      p.validate();
      if (frac_opt->count() == 0 && impact_opt->count() == 0)
        throw std::invalid_argument("tca needs --order-frac and/or --impact");
      auto config = base_config("tca", common);
      config["model"] = model_json(tca_model);
      config["T"] = tca_T;
      ordered_json result;
      if (frac_opt->count()) {
        const double a = afs::implied_alpha(afs::PolicySpec{p, tca_T}, tca_frac);
        config["order_frac"] = tca_frac;
        result["implied_alpha_over_sigma"] = a;
        std::cout << "implied alpha/sigma = " << fmt(a) << '\n';
      }
      if (impact_opt->count()) {
        const auto chk = afs::tca_check(p.c, p.tau, tca_alpha, tca_drift, tca_impact);
        config["alpha"] = tca_alpha;
        config["drift"] = tca_drift;
        config["impact"] = tca_impact;
        result["optimal_fraction"] = chk.optimal_fraction;
        result["adjusted_alpha"] = chk.adjusted_alpha;
        result["target_impact"] = chk.target_impact;
        result["realized_fraction"] = chk.realized_fraction;
        result["efficiency"] = chk.efficiency;
        std::cout << "impact / optimal impact = " << fmt(chk.efficiency) << " (optimal fraction "
                  << fmt(chk.optimal_fraction) << ")\n";
      }
      if (!common.output.empty())
        emit(common, config, [&](std::ostream& out) {
          if (common.format == "json") {
            out << result.dump(2) << '\n';
            return;
          }
          bool first = true;
          for (const auto& [k, v] : result.items()) out << (std::exchange(first, false) ? "" : ",") << k;
          out << '\n';
          first = true;
          for (const auto& [k, v] : result.items())
            out << (std::exchange(first, false) ? "" : ",") << afs::io::num(v.get<double>());
          out << '\n';
        });
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
