// Command-line front door for the expanderlab shared library. All numerics
// go through the C API in expanderlab.h; this file only parses flags,
// writes CSV/JSON artifacts, and prints summaries.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "expanderlab.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerification = 3;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct CsvWriter {
  std::ofstream out;
  explicit CsvWriter(const fs::path& path) : out(path, std::ios::binary) {
    if (!out) throw std::runtime_error("cannot open " + path.string());
  }
  void header(const std::string& h) { out << h << "\n"; }
  template <typename... T>
  void row(T... cols) {
    bool first = true;
    ((out << (first ? (first = false, "") : ",") << cols), ...);
    out << "\n";
  }
};

[[noreturn]] void die_numerical(exl_status status) {
  std::cerr << "error: " << exl_status_name(status) << ": " << exl_last_error()
            << "\n";
  std::exit(kExitNumerical);
}

void check(exl_status status) {
  if (status != EXL_OK) die_numerical(status);
}

struct Manifest {
  json j;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  Manifest(const std::string& command, const std::vector<std::string>& argv) {
    j["schema"] = 1;
    j["command"] = command;
    j["argv"] = argv;
    j["parameters"] = json::object();
    j["derived_constants"] = json::object();
    j["artifacts"] = json::array();
  }
  void param(const std::string& k, const json& v) { j["parameters"][k] = v; }
  void derived(const std::string& k, double v, double tol) {
    j["derived_constants"][k] = {{"value", v}, {"tolerance", tol}};
  }
  void artifact(const fs::path& p) { j["artifacts"].push_back(p.string()); }
  void write(const fs::path& dir) {
    j["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << j.dump(2) << "\n";
  }
};

fs::path ensure_out(const std::string& out) {
  fs::path dir = out.empty() ? fs::path("out") : fs::path(out);
  fs::create_directories(dir);
  return dir;
}

void write_run_series(exl_run* run, const fs::path& dir, Manifest& man) {
  int ns = exl_run_series_count(run);
  for (int k = 0; k < ns; ++k) {
    std::string label = exl_run_series_label(run, k);
    for (char& c : label)
      if (c == '=' || c == '.') c = '_';
    int gsize = exl_run_grid_size(run, k);
    std::vector<double> r(gsize), h(gsize), v(gsize), w(gsize);
    check(exl_run_grid(run, k, r.data()));
    bool has_vw = exl_run_has_vw(run, k) != 0;
    int nsnap = exl_run_snapshot_count(run, k);
    json times = json::array();
    for (int j = 0; j < nsnap; ++j) {
      check(exl_run_snapshot(run, k, j, h.data()));
      if (has_vw) check(exl_run_snapshot_vw(run, k, j, v.data(), w.data()));
      char name[128];
      std::snprintf(name, sizeof name, "%s_%03d.csv", label.c_str(), j);
      CsvWriter csv(dir / name);
      csv.header(has_vw ? "r,h,v,w" : "r,h");
      for (int i = 0; i < gsize; ++i) {
        if (has_vw)
          csv.row(fmt17(r[i]), fmt17(h[i]), fmt17(v[i]), fmt17(w[i]));
        else
          csv.row(fmt17(r[i]), fmt17(h[i]));
      }
      times.push_back(exl_run_snapshot_time(run, k, j));
      man.artifact(dir / name);
    }
    man.j["series"][label]["times"] = times;
  }
  json metrics = json::object();
  for (int i = 0; i < exl_run_metric_count(run); ++i)
    metrics[exl_run_metric_name(run, i)] = exl_run_metric_value(run, i);
  man.j["metrics"] = metrics;
}

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? json("nan") : json("infinity");
}

// Shared flag bundle; config-file values act as defaults, flags override.
struct Common {
  int d = 3;
  double tol = 1e-10;
  double rho_max = 30.0;
  std::string out = "out";
};

struct GridFlags {
  double r_max = 20.0;
  double r1 = 0.0;   // 0 = 1e-3 * r_max
  double cap = 0.0;  // 0 = r_max / 200
  exl_grid_spec spec() const {
    exl_grid_spec g{};
    g.r_max = r_max;
    g.r1 = r1 > 0 ? r1 : 1e-3 * r_max;
    g.cap = cap > 0 ? cap : r_max / 200.0;
    g.uniform = 0;
    g.cells = 0;
    return g;
  }
};

std::vector<double> parse_seq(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

bool parse_span(const std::string& s, double* a, double* b) {
  auto pos = s.find(':');
  if (pos == std::string::npos) return false;
  *a = std::stod(s.substr(0, pos));
  *b = std::stod(s.substr(pos + 1));
  return true;
}

int dispatch(std::vector<std::string> args);

int cmd_rerun(const std::string& manifest_path, const std::string& out) {
  std::ifstream in(manifest_path);
  if (!in) {
    std::cerr << "error: cannot read manifest " << manifest_path << "\n";
    return kExitUsage;
  }
  json m = json::parse(in);
  std::vector<std::string> args = m["argv"].get<std::vector<std::string>>();
  // Replace the output directory if a new one was requested.
  if (!out.empty()) {
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--out") args[i + 1] = out;
  }
  return dispatch(args);
}

int dispatch(std::vector<std::string> args) {
  CLI::App app{"expanderlab — self-similar expanders of the equivariant "
               "harmonic map heat flow"};
  app.require_subcommand(1);

  std::string config_file;
  app.add_option("--config", config_file, "JSON file with default flag values");

  Common common;
  GridFlags grid;
  double alpha = 1.0, ell = 1.0, dt = 0, delta = 1e-3;
  double h0_amp = 0.0;
  int n = 200, branch = 0, snapshots = 0;
  std::string pole = "north", range = "0.01:100", t_span, eps_seq, suite,
              subpde, manifest_path, h0_kind = "const";

  auto add_common = [&](CLI::App* c) {
    c->add_option("--d", common.d, "dimension (>= 3)");
    c->add_option("--tol", common.tol, "solver tolerance");
    c->add_option("--rho-max", common.rho_max, "profile truncation radius");
    c->add_option("--out", common.out, "output directory");
  };

  CLI::App* profile = app.add_subcommand("profile", "solve one expander profile");
  add_common(profile);
  profile->add_option("--alpha", alpha, "shooting slope at the origin");
  profile->add_option("--pole", pole, "north or south");

  CLI::App* scan = app.add_subcommand("scan", "bifurcation diagram scan");
  add_common(scan);
  scan->add_option("--range", range, "alpha range lo:hi");
  scan->add_option("--n", n, "number of samples");

  CLI::App* critical = app.add_subcommand("critical", "alpha0, alpha*, ell*, delta*");
  add_common(critical);

  CLI::App* shoot = app.add_subcommand("shoot", "match a target limit");
  add_common(shoot);
  shoot->add_option("--ell", ell, "target limit");
  shoot->add_option("--branch", branch, "equator crossing count (0 or 1)");

  CLI::App* pde = app.add_subcommand("pde", "heat flow experiments");
  add_common(pde);
  pde->add_option("sub", subpde, "expander | pair | selfsim")->required();
  pde->add_option("--ell", ell, "data level / target limit");
  pde->add_option("--alpha", alpha, "profile slope (selfsim)");
  pde->add_option("--grid", grid.r_max, "domain radius");
  pde->add_option("--grid-r1", grid.r1, "first node (0 = auto)");
  pde->add_option("--grid-cap", grid.cap, "spacing cap (0 = auto)");
  pde->add_option("--dt", dt, "time step (0 = auto)");
  pde->add_option("--t-span", t_span, "time span a:b");
  pde->add_option("--delta", delta, "singular-data launch time");
  pde->add_option("--snapshots", snapshots, "snapshot count (0 = auto)");
  pde->add_option("--h0", h0_kind, "far-field data: const | ramp");
  pde->add_option("--h0-amp", h0_amp, "ramp amplitude");

  CLI::App* gl = app.add_subcommand("gl", "Ginzburg-Landau selection");
  add_common(gl);
  gl->add_option("--ell", ell, "data level h0(0)");
  gl->add_option("--epsilon-seq", eps_seq, "comma-separated epsilons");
  gl->add_option("--grid", grid.r_max, "domain radius");
  gl->add_option("--dt", dt, "time step (0 = auto)");
  gl->add_option("--t-span", t_span, "time span 0:b");
  gl->add_option("--delta", delta, "reference launch time");
  gl->add_option("--snapshots", snapshots, "snapshot count (0 = auto)");

  CLI::App* verify = app.add_subcommand("verify", "pass/fail check suites");
  add_common(verify);
  verify->add_option("--suite", suite,
                     "comparison | energy | supersolution | asymptotics | "
                     "regularity | all");

  CLI::App* calibrate =
      app.add_subcommand("calibrate", "regression constants via the "
                                      "high-resolution oracles");
  add_common(calibrate);

  CLI::App* rerun = app.add_subcommand("rerun", "re-execute a stored manifest");
  rerun->add_option("--manifest", manifest_path, "manifest.json path")
      ->required();
  rerun->add_option("--out", common.out, "override output directory");

  // Config-file defaults: parsed before flags so flags win.
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") {
      std::ifstream in(args[i + 1]);
      if (!in) {
        std::cerr << "error: cannot read config " << args[i + 1] << "\n";
        return kExitUsage;
      }
      json cfg = json::parse(in, nullptr, false);
      if (cfg.is_discarded()) {
        std::cerr << "error: config is not valid JSON\n";
        return kExitUsage;
      }
      if (cfg.contains("d")) common.d = cfg["d"];
      if (cfg.contains("tol")) common.tol = cfg["tol"];
      if (cfg.contains("rho_max")) common.rho_max = cfg["rho_max"];
      if (cfg.contains("out")) common.out = cfg["out"];
      if (cfg.contains("dt")) dt = cfg["dt"];
      if (cfg.contains("grid")) grid.r_max = cfg["grid"];
    }
  }

  std::vector<const char*> argv;
  argv.push_back("expanderlab");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  std::vector<std::string> full_args = args;

  if (rerun->parsed()) return cmd_rerun(manifest_path, common.out);

  if (profile->parsed()) {
    fs::path dir = ensure_out(common.out);
    Manifest man("profile", full_args);
    man.param("d", common.d);
    man.param("alpha", alpha);
    man.param("pole", pole);
    man.param("tol", common.tol);
    man.param("rho_max", common.rho_max);

    exl_profile* p = nullptr;
    check(exl_profile_solve(common.d, alpha,
                            pole == "south" ? EXL_POLE_SOUTH : EXL_POLE_NORTH,
                            common.rho_max, common.tol, &p));
    std::unique_ptr<exl_profile, decltype(&exl_profile_free)> guard(
        p, exl_profile_free);

    int nn = exl_profile_nodes(p);
    std::vector<double> rho(nn), psi(nn), dpsi(nn);
    check(exl_profile_data(p, rho.data(), psi.data(), dpsi.data()));
    CsvWriter csv(dir / "profile.csv");
    csv.header("rho,psi,dpsi");
    for (int i = 0; i < nn; ++i)
      csv.row(fmt17(rho[i]), fmt17(psi[i]), fmt17(dpsi[i]));
    man.artifact(dir / "profile.csv");
    man.derived("psi_inf", exl_profile_psi_inf(p),
                exl_profile_psi_inf_error(p));
    man.j["metrics"]["crossings"] = exl_profile_crossings(p);
    man.write(dir);
    std::cout << "psi_inf = " << fmt17(exl_profile_psi_inf(p))
              << "  crossings = " << exl_profile_crossings(p) << "\n";
    return 0;
  }

  if (scan->parsed()) {
    double lo, hi;
    if (!parse_span(range, &lo, &hi)) {
      std::cerr << "error: --range expects lo:hi\n";
      return kExitUsage;
    }
    fs::path dir = ensure_out(common.out);
    Manifest man("scan", full_args);
    man.param("d", common.d);
    man.param("lo", lo);
    man.param("hi", hi);
    man.param("n", n);
    man.param("tol", common.tol);
    man.param("rho_max", common.rho_max);

    exl_scan* s = nullptr;
    check(exl_scan_branches(common.d, lo, hi, n, common.rho_max, common.tol, &s));
    std::unique_ptr<exl_scan, decltype(&exl_scan_free)> guard(s, exl_scan_free);

    CsvWriter csv(dir / "scan.csv");
    csv.header("alpha,limit,crossings");
    int sign_changes = 0;
    double prev = 0;
    for (int i = 0; i < exl_scan_size(s); ++i) {
      double a, lim;
      int cr;
      check(exl_scan_row(s, i, &a, &lim, &cr));
      csv.row(fmt17(a), fmt17(lim), cr);
      double g = lim - M_PI / 2;
      if (i > 0 && (g < 0) != (prev < 0)) ++sign_changes;
      prev = g;
    }
    man.artifact(dir / "scan.csv");
    man.j["metrics"]["sign_changes_about_equator"] = sign_changes;
    man.write(dir);
    std::cout << "samples = " << exl_scan_size(s)
              << "  sign changes about pi/2 = " << sign_changes << "\n";
    return 0;
  }

  if (critical->parsed()) {
    fs::path dir = ensure_out(common.out);
    Manifest man("critical", full_args);
    man.param("d", common.d);
    man.param("tol", common.tol);
    man.param("rho_max", common.rho_max);
    double a0, as, ls, ds;
    check(exl_critical_params(common.d, common.tol, common.rho_max, &a0, &as,
                              &ls, &ds));
    man.j["derived_constants"]["alpha0"] = {
        {"value", finite_or_string(a0)}, {"tolerance", common.tol}};
    man.j["derived_constants"]["alpha_star"] = {
        {"value", finite_or_string(as)}, {"tolerance", common.tol}};
    man.j["derived_constants"]["ell_star"] = {
        {"value", finite_or_string(ls)}, {"tolerance", common.tol}};
    man.j["derived_constants"]["delta_star"] = {
        {"value", finite_or_string(ds)}, {"tolerance", common.tol}};
    man.write(dir);
    std::cout << "alpha0 = " << fmt17(a0) << "\nalpha* = " << fmt17(as)
              << "\nell*   = " << fmt17(ls) << "\ndelta* = " << fmt17(ds)
              << "\n";
    return 0;
  }

  if (shoot->parsed()) {
    fs::path dir = ensure_out(common.out);
    Manifest man("shoot", full_args);
    man.param("d", common.d);
    man.param("ell", ell);
    man.param("branch", branch);
    man.param("tol", common.tol);
    exl_profile* p = nullptr;
    double a = 0;
    check(exl_profile_shoot(common.d, ell, branch, common.tol, common.rho_max,
                            &p, &a));
    std::unique_ptr<exl_profile, decltype(&exl_profile_free)> guard(
        p, exl_profile_free);
    man.derived("alpha", a, common.tol);
    man.derived("psi_inf", exl_profile_psi_inf(p),
                exl_profile_psi_inf_error(p));
    man.write(dir);
    std::cout << "alpha = " << fmt17(a)
              << "  psi_inf = " << fmt17(exl_profile_psi_inf(p)) << "\n";
    return 0;
  }

  if (pde->parsed()) {
    fs::path dir = ensure_out(common.out);
    Manifest man("pde " + subpde, full_args);
    man.param("d", common.d);
    man.param("sub", subpde);

    exl_sim_spec sim{};
    sim.theta = 0.5;
    sim.delta_start = delta;
    exl_run* run = nullptr;

    if (subpde == "expander") {
      double a = 1.0, b = 10.0;
      if (!t_span.empty() && !parse_span(t_span, &a, &b)) return kExitUsage;
      grid.r_max = grid.r_max == 20.0 ? 26.0 : grid.r_max;
      sim.dt = dt > 0 ? dt : 2.5e-3;
      sim.t_begin = a;
      sim.t_end = b;
      sim.snapshot_count = snapshots > 0 ? snapshots : 11;
      man.param("ell", ell);
      man.param("t_span", t_span.empty() ? "1:10" : t_span);
      exl_grid_spec g = grid.spec();
      check(exl_pde_expander_run(common.d, ell, &g, &sim, &run));
    } else if (subpde == "pair") {
      double a = delta, b = 10 * delta;
      if (!t_span.empty() && !parse_span(t_span, &a, &b)) return kExitUsage;
      sim.dt = dt > 0 ? dt : (b - a) / 4000;
      sim.delta_start = a;
      sim.t_end = b;
      sim.snapshot_count = snapshots > 0 ? snapshots : 61;
      man.param("ell", ell);
      man.param("delta", a);
      man.param("h0", h0_kind);
      exl_grid_spec g = grid.spec();
      check(exl_pde_pair_run(common.d, ell,
                             h0_kind == "ramp" ? EXL_H0_RAMP : EXL_H0_CONSTANT,
                             h0_amp, &g, &sim, 0.1, &run));
    } else if (subpde == "selfsim") {
      double a = 0.0, b = 8.0;
      if (!t_span.empty() && !parse_span(t_span, &a, &b)) return kExitUsage;
      grid.r_max = grid.r_max == 20.0 ? 40.0 : grid.r_max;
      sim.dt = dt > 0 ? dt : 2e-3;
      sim.t_begin = a;
      sim.t_end = b;
      sim.snapshot_count = snapshots > 0 ? snapshots : 81;
      man.param("alpha", alpha);
      exl_grid_spec g = grid.spec();
      check(exl_pde_selfsim_run(common.d, alpha, 0.05, &g, &sim, 1.5,
                                b - a - 1.5, &run));
    } else {
      std::cerr << "error: pde subcommand must be expander|pair|selfsim\n";
      return kExitUsage;
    }
    std::unique_ptr<exl_run, decltype(&exl_run_free)> guard(run, exl_run_free);
    write_run_series(run, dir, man);
    man.write(dir);
    for (int i = 0; i < exl_run_metric_count(run); ++i)
      std::cout << exl_run_metric_name(run, i) << " = "
                << fmt17(exl_run_metric_value(run, i)) << "\n";
    return 0;
  }

  if (gl->parsed()) {
    fs::path dir = ensure_out(common.out);
    Manifest man("gl", full_args);
    std::vector<double> eps =
        eps_seq.empty() ? std::vector<double>{0.04, 0.02, 0.01}
                        : parse_seq(eps_seq);
    double a = 0.0, b = 0.05;
    if (!t_span.empty() && !parse_span(t_span, &a, &b)) return kExitUsage;
    grid.r_max = grid.r_max == 20.0 ? 2.0 : grid.r_max;
    if (grid.r1 <= 0) grid.r1 = 0.003;
    if (grid.cap <= 0) grid.cap = 0.03;
    exl_sim_spec sim{};
    sim.dt = dt > 0 ? dt : 2e-5;
    sim.t_end = b;
    sim.snapshot_count = snapshots > 0 ? snapshots : 26;
    sim.delta_start = delta == 1e-3 ? 1e-4 : delta;
    man.param("d", common.d);
    man.param("ell", ell);
    man.param("epsilon_seq", eps);
    exl_grid_spec g = grid.spec();
    exl_run* run = nullptr;
    check(exl_gl_select_run(common.d, ell, eps.data(),
                            static_cast<int>(eps.size()), &g, &sim, &run));
    std::unique_ptr<exl_run, decltype(&exl_run_free)> guard(run, exl_run_free);
    write_run_series(run, dir, man);
    man.write(dir);
    for (int i = 0; i < exl_run_metric_count(run); ++i)
      std::cout << exl_run_metric_name(run, i) << " = "
                << fmt17(exl_run_metric_value(run, i)) << "\n";
    return 0;
  }

  if (verify->parsed()) {
    fs::path dir = ensure_out(common.out);
    std::vector<std::string> suites;
    if (suite.empty() || suite == "all")
      suites = {"comparison", "energy", "supersolution", "asymptotics",
                "regularity"};
    else
      suites = {suite};

    Manifest man("verify", full_args);
    bool all_pass = true;
    json rows = json::array();
    for (const auto& s : suites) {
      exl_report* rep = nullptr;
      check(exl_verify(s.c_str(), &rep));
      std::unique_ptr<exl_report, decltype(&exl_report_free)> guard(
          rep, exl_report_free);
      bool pass = exl_report_passed(rep) != 0;
      all_pass = all_pass && pass;
      std::cout << "suite " << s << ": " << (pass ? "PASS" : "FAIL") << "\n";
      for (int i = 0; i < exl_report_size(rep); ++i) {
        std::printf("  %-42s %14.6e  threshold %10.3e  %s\n",
                    exl_report_row_name(rep, i), exl_report_row_value(rep, i),
                    exl_report_row_threshold(rep, i),
                    exl_report_row_pass(rep, i) ? "pass" : "FAIL");
        rows.push_back({{"suite", s},
                        {"name", exl_report_row_name(rep, i)},
                        {"value", exl_report_row_value(rep, i)},
                        {"threshold", exl_report_row_threshold(rep, i)},
                        {"pass", exl_report_row_pass(rep, i) != 0}});
      }
    }
    man.j["rows"] = rows;
    man.j["passed"] = all_pass;
    man.write(dir);
    return all_pass ? 0 : kExitVerification;
  }

  if (calibrate->parsed()) {
    fs::path dir = ensure_out(common.out);
    Manifest man("calibrate", full_args);
    json out;
    out["schema"] = 1;
    out["oracle"] = {{"tol", 1e-10},
                     {"alpha_hat_tol", 1e-12},
                     {"rho_max", 50.0},
                     {"validation_rho_max", 60.0}};
    for (int d = 3; d <= 6; ++d) {
      double a0, as, ls, ds, a0v, asv, lsv, dsv;
      check(exl_critical_params(d, 1e-10, 50.0, &a0, &as, &ls, &ds));
      check(exl_critical_params(d, 1e-10, 60.0, &a0v, &asv, &lsv, &dsv));
      json entry;
      entry["alpha0"] = a0;
      entry["alpha_star"] = as;
      entry["ell_star"] = ls;
      entry["delta_star"] = ds;
      entry["validation_drift"] = {{"alpha0", std::fabs(a0 - a0v)},
                                   {"alpha_star", std::fabs(as - asv)},
                                   {"ell_star", std::fabs(ls - lsv)}};
      out["d" + std::to_string(d)] = entry;
      std::cout << "d=" << d << ": alpha0=" << fmt17(a0)
                << " alpha*=" << fmt17(as) << " ell*=" << fmt17(ls)
                << " delta*=" << fmt17(ds) << "\n";
    }
    {
      exl_profile* p = nullptr;
      double a = 0;
      check(exl_profile_shoot(3, 1.0, 0, 1e-12, 50.0, &p, &a));
      exl_profile_free(p);
      out["d3"]["alpha_hat_ell_1"] = a;
      std::cout << "d=3 alpha_hat(ell=1.0) = " << fmt17(a) << "\n";
    }
    std::ofstream f(dir / "constants.json", std::ios::binary);
    f << out.dump(2) << "\n";
    man.artifact(dir / "constants.json");
    man.write(dir);
    return 0;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(std::move(args));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
