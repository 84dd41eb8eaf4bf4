#include "expanderlab/verify.hpp"

#include <cmath>
#include <random>

#include "expanderlab/asymptotics.hpp"
#include "expanderlab/checks.hpp"
#include "expanderlab/gl.hpp"
#include "expanderlab/pde.hpp"
#include "expanderlab/profile.hpp"
#include "expanderlab/variation.hpp"

namespace xlab {

namespace {

void row(VerifyReport& rep, const std::string& name, double value,
         double threshold, bool pass) {
  rep.rows.push_back({name, value, threshold, pass});
}

RadialField field_from(std::shared_ptr<const RadialGrid> grid,
                       const DataFn& f, OriginBc bc) {
  RadialField x;
  x.grid = grid;
  x.origin_bc = bc;
  x.values.resize(grid->nodes());
  for (std::size_t i = 0; i < grid->nodes(); ++i) x.values[i] = f(grid->r[i]);
  return x;
}

VerifyReport verify_comparison() {
  VerifyReport rep;
  rep.suite = "comparison";
  auto grid = std::make_shared<RadialGrid>(RadialGrid::graded(8.0, 0.008, 0.08));
  SimConfig cfg;
  cfg.dt = 1e-4;
  cfg.t_begin = 0;
  cfg.t_end = 0.3;
  cfg.snapshot_count = 31;

  auto lo = field_from(grid, [](double r) { return 0.3 * std::min(1.0, r); },
                       OriginBc::DirichletZero);
  auto hi = field_from(grid, [](double r) { return 0.6 * std::min(1.0, r); },
                       OriginBc::DirichletZero);

  Evolution el = evolve(lo, 3, cfg);
  row(rep, "identical data violation", check_comparison(el, el), 0.0,
      check_comparison(el, el) <= 0.0);

  Evolution eh = evolve(hi, 3, cfg);
  double v1 = check_comparison(el, eh);
  row(rep, "ordered pair violation (base grid)", v1, 1e-6, v1 <= 1e-6);

  auto grid2 = std::make_shared<RadialGrid>(grid->refined());
  SimConfig cfg2 = cfg;
  cfg2.dt = cfg.dt / 2;
  auto lo2 = field_from(grid2, [](double r) { return 0.3 * std::min(1.0, r); },
                        OriginBc::DirichletZero);
  auto hi2 = field_from(grid2, [](double r) { return 0.6 * std::min(1.0, r); },
                        OriginBc::DirichletZero);
  double v2 = check_comparison(evolve(lo2, 3, cfg2), evolve(hi2, 3, cfg2));
  row(rep, "ordered pair violation (refined)", v2, 1e-6, v2 <= 1e-6);

  // Expander sandwich between the barriers of the asymptotic lemma.
  {
    ProfileParams pp;
    pp.d = 3;
    pp.alpha = 0.5;
    pp.rho_max = 50;
    auto prof = std::make_shared<Profile>(solve_profile(pp));
    CriticalParams crit = critical_params(3, 1e-8);
    ProfileParams p0 = pp;
    p0.alpha = crit.alpha0;
    Profile prof0 = solve_profile(p0);
    VariationSolution V = solve_y(prof0);
    V.kind = VariationKind::VUpper;
    VariationSolution W = solve_y(*prof);
    W.kind = VariationKind::WUpper;

    auto sgrid = std::make_shared<RadialGrid>(RadialGrid::graded(30.0, 0.03, 0.1));
    double b = 0.2;
    auto up = [&](double s, double rho) {
      if (rho <= 0) return 0.0;
      return std::min(prof0.psi(rho),
                      prof->psi(rho) + b * std::exp(-s / 2) *
                                           V.trajectory.eval1(std::clamp(
                                               rho, V.trajectory.front(),
                                               V.trajectory.back()), 0));
    };
    auto dn = [&](double s, double rho) {
      if (rho <= 0) return 0.0;
      return std::max(0.0, prof->psi(rho) -
                               b * std::exp(-s / 2) *
                                   W.trajectory.eval1(std::clamp(
                                       rho, W.trajectory.front(),
                                       W.trajectory.back()), 0));
    };
    RadialField v0 = field_from(sgrid,
                                [&](double r) { return 0.5 * (up(0, r) + dn(0, r)); },
                                OriginBc::DirichletZero);
    SimConfig sc;
    sc.dt = 2e-3;
    sc.snapshot_count = 21;
    // The barrier tails decay like e^{-s/2}; the outer value must follow
    // or the frozen boundary eventually pokes through them.
    sc.outer_bc = OuterBc::DecayingPerturbation;
    Evolution run = evolve_selfsimilar(v0, 0.0, 3.0, prof, sc);
    double worst = 0.0;
    for (const auto& snap : run.snapshots) {
      for (std::size_t i = 0; i < sgrid->nodes(); ++i) {
        double r = sgrid->r[i];
        worst = std::max(worst, snap.values[i] - up(snap.time, r));
        worst = std::max(worst, dn(snap.time, r) - snap.values[i]);
      }
    }
    row(rep, "expander sandwich violation", worst, 1e-3, worst <= 1e-3);
  }
  return rep;
}

VerifyReport verify_energy() {
  VerifyReport rep;
  rep.suite = "energy";

  auto grid = std::make_shared<RadialGrid>(RadialGrid::graded(12.0, 0.012, 0.06));
  SimConfig cfg;
  cfg.dt = 5e-4;
  cfg.t_begin = 1.0;
  cfg.t_end = 2.0;
  cfg.snapshot_count = 81;

  // Stationary zero field: both sides vanish.
  {
    auto z = field_from(grid, [](double) { return 0.0; },
                        OriginBc::DirichletZero);
    Evolution e = evolve(z, 3, cfg);
    TestFunctionPair tf = TestFunctionPair::bumps(1.0, 8.0, cfg.t_begin,
                                                  cfg.t_end, 0.05);
    double m = energy_inequality_margin(e, tf);
    row(rep, "stationary zero margin", m, 1e-12, std::fabs(m) <= 1e-12);
  }

  // Pure expander run: equality up to quadrature error.
  {
    ShootResult s = shoot_for_limit(3, 1.0, 0, 1e-9);
    ProfileParams pp;
    pp.d = 3;
    pp.alpha = s.alpha;
    pp.rho_max = 40;
    auto prof = std::make_shared<Profile>(solve_profile(pp));
    RadialField f = field_from(grid,
                               [&](double r) { return r > 0 ? prof->psi(r) : 0.0; },
                               OriginBc::DirichletZero);
    SimConfig ce = cfg;
    ce.outer_bc = OuterBc::ExpanderExact;
    ce.profile = prof;
    Evolution e = evolve(f, 3, ce);
    TestFunctionPair tf = TestFunctionPair::bumps(1.0, 8.0, cfg.t_begin,
                                                  cfg.t_end, 0.05);
    double m = energy_inequality_margin(e, tf);
    row(rep, "expander margin |LHS-RHS|", std::fabs(m), 1e-3,
        std::fabs(m) <= 1e-3);
    row(rep, "expander margin >= -1e-3", m, -1e-3, m >= -1e-3);
  }
  return rep;
}

VerifyReport verify_supersolution() {
  VerifyReport rep;
  rep.suite = "supersolution";

  ProfileParams pp;
  pp.d = 3;
  pp.alpha = 0.5;
  pp.rho_max = 250;
  Profile prof = solve_profile(pp);
  KappaBracket kb = kappa_threshold(prof, 1e-6);
  row(rep, "kappa threshold", kb.lo, 0.0, kb.lo > 0.0);

  VariationSolution w = solve_w(prof, kb.lo / 2);
  row(rep, "w positive at kappa/2", w.min_value, 0.0, w.positive);
  row(rep, "w limit positive", w.limit.value_or(-1), 0.0,
      w.limit.value_or(-1) > 0.0);

  SupersolutionParams params = find_supersolution_params(prof, w, 1.0, 1.0);
  std::vector<double> s_grid, rho_grid;
  for (int i = 0; i < 17; ++i) s_grid.push_back(params.s0 - 8.0 + 8.0 * i / 16.0);
  for (int i = 0; i < 3000; ++i)
    rho_grid.push_back(std::exp(std::log(1e-3) +
                                (std::log(0.95 * pp.rho_max) - std::log(1e-3)) *
                                    i / 2999.0));
  ResidualStats plus = supersolution_residual(params, prof, w, s_grid, rho_grid, +1);
  ResidualStats minus = supersolution_residual(params, prof, w, s_grid, rho_grid, -1);
  row(rep, "u+ residual min", plus.min, -1e-8, plus.min >= -1e-8);
  row(rep, "u- residual max", minus.max, 1e-8, minus.max <= 1e-8);
  return rep;
}

VerifyReport verify_asymptotics() {
  VerifyReport rep;
  rep.suite = "asymptotics";

  // Synthetic exactness of the tail model.
  {
    std::vector<double> rho, val;
    for (int i = 0; i <= 80; ++i) {
      double r = 10.0 + 0.25 * i;
      rho.push_back(r);
      val.push_back(1.0 + 3.0 / (r * r));
    }
    TailFit fit = tail_extrapolate(rho, val, 10, 30, 1);
    row(rep, "synthetic tail limit error", std::fabs(fit.limit - 1.0), 1e-10,
        std::fabs(fit.limit - 1.0) <= 1e-10);
  }

  ProfileParams pp;
  pp.d = 3;
  pp.alpha = 0.5;
  pp.rho_max = 30;
  Profile prof = solve_profile(pp);
  Potential pot = profile_potential(prof);
  BasisPair basis = basis_at_infinity(pot, 3, 10.0, 30.0, 1e-10);

  {
    auto logw = [&](double r) {
      return std::log(std::fabs(basis.phi1.trajectory.eval1(r, 0))) +
             3 * std::log(r) + r * r / 4;
    };
    double ref = logw(15.0), spread = 0.0;
    for (double r = 15; r <= 25.0001; r += 0.25)
      spread = std::max(spread, std::fabs(logw(r) - ref));
    row(rep, "phi1 gaussian-weight log spread", spread, 0.1, spread <= 0.1);
  }
  {
    std::vector<double> rho, val;
    for (int i = 0; i <= 80; ++i) {
      double r = 10.0 + 0.25 * i;
      rho.push_back(r);
      val.push_back(basis.phi2.trajectory.eval1(r, 0) - 1.0);
    }
    DecayFit f = fit_decay(rho, val, DecayModel::Power);
    row(rep, "phi2 - 1 exponent", f.exponent, 0.2,
        std::fabs(f.exponent + 2.0) <= 0.2);
  }
  {
    double ratio = basis.phi1.trajectory.eval1(15.0, 1) /
                   (-7.5 * basis.phi1.trajectory.eval1(15.0, 0));
    row(rep, "phi1' / (-rho/2 phi1) at 15", ratio, 0.1,
        std::fabs(ratio - 1.0) <= 0.1);
  }
  {
    std::vector<double> rho, val;
    for (int i = 0; i <= 80; ++i) {
      double r = 9.5 + 0.25 * i;
      rho.push_back(r);
      val.push_back(std::fabs(prof.psi(r) - prof.psi_inf));
    }
    DecayFit f = fit_decay(rho, val, DecayModel::Power);
    row(rep, "psi tail exponent", f.exponent, 0.2,
        std::fabs(f.exponent + 2.0) <= 0.2);
  }
  row(rep, "phi1 defect vs fine reference", basis.phi1.max_ode_residual,
      100 * 1e-10, basis.phi1.max_ode_residual <= 1e-8);
  row(rep, "phi2 defect vs fine reference", basis.phi2.max_ode_residual,
      100 * 1e-10, basis.phi2.max_ode_residual <= 1e-8);
  {
    double wmin = 1e300;
    for (double r = 10.5; r < 29.5; r += 0.5) {
      double w = basis.phi1.trajectory.eval1(r, 0) *
                     basis.phi2.trajectory.eval1(r, 1) -
                 basis.phi1.trajectory.eval1(r, 1) *
                     basis.phi2.trajectory.eval1(r, 0);
      wmin = std::min(wmin, std::fabs(w));
    }
    row(rep, "wronskian min |det|", wmin, 0.0, wmin > 0.0);
  }
  {
    double r0 = estimate_r0(pot, 3, 30.0, 1e-10);
    row(rep, "single-vanishing radius R0", r0, 15.0, r0 <= 15.0);
  }
  return rep;
}

VerifyReport verify_regularity() {
  VerifyReport rep;
  rep.suite = "regularity";

  // Equator map: all gradient monitors vanish.
  {
    auto grid = std::make_shared<RadialGrid>(RadialGrid::uniform(5.0, 50));
    auto f = field_from(grid, [](double) { return M_PI / 2; },
                        OriginBc::FreeSingular);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_begin = 0;
    cfg.t_end = 0.05;
    cfg.snapshot_count = 6;
    Evolution e = evolve(f, 3, cfg);
    RegularityReport r = regularity_monitors(e);
    row(rep, "equator sup r|h_r|", r.sup_r_dh, 1e-12, r.sup_r_dh <= 1e-12);
    row(rep, "equator sup (t+r^2)|h_t|", r.sup_scaled_dt, 1e-12,
        r.sup_scaled_dt <= 1e-12);
  }

  // Expander run over a decade of t: r|h_r| bounded with no growth trend.
  {
    ShootResult s = shoot_for_limit(3, 1.0, 0, 1e-9);
    ProfileParams pp;
    pp.d = 3;
    pp.alpha = s.alpha;
    pp.rho_max = 40;
    auto prof = std::make_shared<Profile>(solve_profile(pp));
    auto grid = std::make_shared<RadialGrid>(RadialGrid::graded(26.0, 0.026, 0.13));
    auto f = field_from(grid,
                        [&](double r) { return r > 0 ? prof->psi(r) : 0.0; },
                        OriginBc::DirichletZero);
    SimConfig cfg;
    cfg.dt = 2.5e-3;
    cfg.t_begin = 1.0;
    cfg.t_end = 10.0;
    cfg.snapshot_count = 21;
    cfg.outer_bc = OuterBc::ExpanderExact;
    cfg.profile = prof;
    Evolution e = evolve(f, 3, cfg);
    RegularityReport r = regularity_monitors(e);
    row(rep, "expander sup r|h_r|", r.sup_r_dh, 10.0, r.sup_r_dh <= 10.0);
    row(rep, "expander r|h_r| trend", r.trend_r_dh, 1.25,
        r.trend_r_dh <= 1.25);
    row(rep, "expander sup (r+sqrt t)|h_r|", r.sup_scaled_dh, 10.0,
        r.sup_scaled_dh <= 10.0);
    row(rep, "expander sup (t+r^2)|h_t|", r.sup_scaled_dt, 10.0,
        r.sup_scaled_dt <= 10.0);
  }
  return rep;
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  return {"comparison", "energy", "supersolution", "asymptotics", "regularity"};
}

VerifyReport verify_suite(const std::string& suite) {
  if (suite == "comparison") return verify_comparison();
  if (suite == "energy") return verify_energy();
  if (suite == "supersolution") return verify_supersolution();
  if (suite == "asymptotics") return verify_asymptotics();
  if (suite == "regularity") return verify_regularity();
  fail(ErrorKind::InvalidArgument, "unknown verify suite: " + suite);
}

}  // namespace xlab
