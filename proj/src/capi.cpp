#include "expanderlab.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "expanderlab/asymptotics.hpp"
#include "expanderlab/checks.hpp"
#include "expanderlab/gl.hpp"
#include "expanderlab/parallel.hpp"
#include "expanderlab/pde.hpp"
#include "expanderlab/profile.hpp"
#include "expanderlab/variation.hpp"
#include "expanderlab/verify.hpp"

using namespace xlab;

namespace {

thread_local std::string g_last_error;

exl_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return EXL_ERR_INVALID_ARGUMENT;
    case ErrorKind::StepUnderflow: return EXL_ERR_STEP_UNDERFLOW;
    case ErrorKind::NonFiniteState: return EXL_ERR_NONFINITE;
    case ErrorKind::IntegrationFailure: return EXL_ERR_INTEGRATION;
    case ErrorKind::NoBracket: return EXL_ERR_NO_BRACKET;
    case ErrorKind::PositivityLost: return EXL_ERR_POSITIVITY_LOST;
    case ErrorKind::BadFit: return EXL_ERR_BAD_FIT;
    case ErrorKind::RangeError: return EXL_ERR_RANGE;
    case ErrorKind::LinearSolveFailure: return EXL_ERR_LINEAR_SOLVE;
    case ErrorKind::NewtonDivergence: return EXL_ERR_NEWTON_DIVERGENCE;
    case ErrorKind::DomainViolation: return EXL_ERR_DOMAIN;
    case ErrorKind::UnresolvedRegion: return EXL_ERR_UNRESOLVED_REGION;
  }
  return EXL_ERR_UNKNOWN;
}

template <typename Fn>
exl_status guarded(Fn&& fn) {
  try {
    fn();
    return EXL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EXL_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown error";
    return EXL_ERR_UNKNOWN;
  }
}

std::shared_ptr<const RadialGrid> build_grid(const exl_grid_spec* spec) {
  require(spec != nullptr, "grid spec is null");
  if (spec->uniform)
    return std::make_shared<RadialGrid>(
        RadialGrid::uniform(spec->r_max, spec->cells));
  return std::make_shared<RadialGrid>(
      RadialGrid::graded(spec->r_max, spec->r1, spec->cap));
}

DataFn make_h0(int kind, double ell, double param) {
  if (kind == EXL_H0_CONSTANT) return [ell](double) { return ell; };
  if (kind == EXL_H0_RAMP)
    return [ell, param](double r) {
      double x = std::min(r, 1.0);
      return ell + param * x * (2 - x);
    };
  fail(ErrorKind::InvalidArgument, "unknown h0 kind");
}

}  // namespace

struct exl_profile {
  Profile p;
};
struct exl_scan {
  BranchScan s;
};
struct exl_variation {
  VariationSolution v;
};
struct exl_report {
  VerifyReport r;
};

struct exl_run {
  struct Series {
    std::string label;
    std::shared_ptr<const RadialGrid> grid;
    std::vector<double> times;
    std::vector<std::vector<double>> h;
    std::vector<std::vector<double>> v, w;  // optional
  };
  std::vector<Series> series;
  std::vector<std::pair<std::string, double>> metrics;
};

extern "C" {

const char* exl_status_name(exl_status status) {
  switch (status) {
    case EXL_OK: return "ok";
    case EXL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case EXL_ERR_STEP_UNDERFLOW: return "step underflow";
    case EXL_ERR_NONFINITE: return "non-finite state";
    case EXL_ERR_INTEGRATION: return "integration failure";
    case EXL_ERR_NO_BRACKET: return "no bracket";
    case EXL_ERR_POSITIVITY_LOST: return "positivity lost";
    case EXL_ERR_BAD_FIT: return "bad fit";
    case EXL_ERR_RANGE: return "range error";
    case EXL_ERR_LINEAR_SOLVE: return "linear solve failure";
    case EXL_ERR_NEWTON_DIVERGENCE: return "newton divergence";
    case EXL_ERR_DOMAIN: return "domain violation";
    case EXL_ERR_UNRESOLVED_REGION: return "unresolved region";
    default: return "unknown error";
  }
}

const char* exl_last_error(void) { return g_last_error.c_str(); }

const char* exl_version(void) { return "expanderlab 1.0.0"; }

void exl_set_max_threads(int n) { set_max_threads(n); }

double exl_hardy_ratio(int d) { return hardy_ratio(d); }

/* ---------------------------- profiles ---------------------------- */

exl_status exl_profile_solve(int d, double alpha, int pole, double rho_max,
                             double tol, exl_profile** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    ProfileParams params;
    params.d = d;
    params.alpha = alpha;
    params.pole = pole == EXL_POLE_SOUTH ? Pole::South : Pole::North;
    params.rho_max = rho_max;
    params.tol = tol;
    *out = new exl_profile{solve_profile(params)};
  });
}

exl_status exl_profile_shoot(int d, double ell, int branch, double tol,
                             double rho_max, exl_profile** out,
                             double* alpha_out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    ScanOptions opts;
    opts.rho_max = rho_max;
    ShootResult shot = shoot_for_limit(d, ell, branch, tol, opts);
    ProfileParams params;
    params.d = d;
    params.alpha = shot.alpha;
    params.rho_max = rho_max;
    *out = new exl_profile{solve_profile(params)};
    if (alpha_out) *alpha_out = shot.alpha;
  });
}

exl_status exl_profile_south(int d, double ell, double tol, double rho_max,
                             exl_profile** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    ScanOptions opts;
    opts.rho_max = rho_max;
    *out = new exl_profile{south_profile(d, ell, tol, opts)};
  });
}

void exl_profile_free(exl_profile* p) { delete p; }

double exl_profile_alpha(const exl_profile* p) { return p->p.params.alpha; }
double exl_profile_psi_inf(const exl_profile* p) { return p->p.psi_inf; }
double exl_profile_psi_inf_error(const exl_profile* p) {
  return p->p.psi_inf_error;
}
int exl_profile_crossings(const exl_profile* p) {
  return p->p.crossings_of_equator;
}
int exl_profile_nodes(const exl_profile* p) {
  return static_cast<int>(p->p.trajectory.size());
}

exl_status exl_profile_data(const exl_profile* p, double* rho, double* psi,
                            double* dpsi) {
  return guarded([&] {
    const Trajectory& t = p->p.trajectory;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (rho) rho[i] = t.node(i);
      if (psi) psi[i] = t.state(i, 0);
      if (dpsi) dpsi[i] = t.state(i, 1);
    }
  });
}

exl_status exl_profile_eval(const exl_profile* p, double rho, double* psi,
                            double* dpsi) {
  return guarded([&] {
    if (psi) *psi = p->p.psi(rho);
    if (dpsi) *dpsi = p->p.dpsi(rho);
  });
}

/* ------------------------------ scans ----------------------------- */

exl_status exl_scan_branches(int d, double lo, double hi, int n,
                             double rho_max, double tol, exl_scan** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    ScanOptions opts;
    opts.rho_max = rho_max;
    opts.tol = tol;
    *out = new exl_scan{scan_branches(d, lo, hi, n, opts)};
  });
}

void exl_scan_free(exl_scan* s) { delete s; }
int exl_scan_size(const exl_scan* s) {
  return static_cast<int>(s->s.alphas.size());
}

exl_status exl_scan_row(const exl_scan* s, int i, double* alpha, double* limit,
                        int* crossings) {
  return guarded([&] {
    require(i >= 0 && i < exl_scan_size(s), "scan index out of range");
    if (alpha) *alpha = s->s.alphas[i];
    if (limit) *limit = s->s.limits[i];
    if (crossings) *crossings = s->s.crossings[i];
  });
}

exl_status exl_critical_params(int d, double tol, double rho_max,
                               double* alpha0, double* alpha_star,
                               double* ell_star, double* delta_star) {
  return guarded([&] {
    ScanOptions opts;
    opts.rho_max = rho_max;
    CriticalParams c = critical_params(d, tol, opts);
    if (alpha0) *alpha0 = c.alpha0;
    if (alpha_star) *alpha_star = c.alpha_star;
    if (ell_star) *ell_star = c.ell_star;
    if (delta_star) *delta_star = c.delta_star;
  });
}

/* ---------------------------- variations -------------------------- */

exl_status exl_variation_solve(const exl_profile* p, int kind, double kappa,
                               exl_variation** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    VariationSolution v;
    switch (kind) {
      case EXL_VARIATION_PHI: v = solve_variation_phi(p->p); break;
      case EXL_VARIATION_UNDERLINE: v = solve_variation_underline(p->p); break;
      case EXL_VARIATION_W: v = solve_w(p->p, kappa); break;
      case EXL_VARIATION_Y: v = solve_y(p->p); break;
      default: fail(ErrorKind::InvalidArgument, "unknown variation kind");
    }
    *out = new exl_variation{std::move(v)};
  });
}

void exl_variation_free(exl_variation* v) { delete v; }
double exl_variation_limit(const exl_variation* v) {
  return v->v.limit.value_or(std::nan(""));
}
double exl_variation_min(const exl_variation* v) { return v->v.min_value; }
int exl_variation_positive(const exl_variation* v) {
  return v->v.positive ? 1 : 0;
}
int exl_variation_nodes(const exl_variation* v) {
  return static_cast<int>(v->v.trajectory.size());
}

exl_status exl_variation_data(const exl_variation* v, double* rho, double* u,
                              double* du) {
  return guarded([&] {
    const Trajectory& t = v->v.trajectory;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (rho) rho[i] = t.node(i);
      if (u) u[i] = t.state(i, 0);
      if (du) du[i] = t.state(i, 1);
    }
  });
}

exl_status exl_kappa_threshold(const exl_profile* p, double tol, double* lo,
                               double* hi) {
  return guarded([&] {
    KappaBracket kb = kappa_threshold(p->p, tol);
    if (lo) *lo = kb.lo;
    if (hi) *hi = kb.hi;
  });
}

/* ------------------------------ runs ------------------------------ */

void exl_run_free(exl_run* r) { delete r; }

int exl_run_metric_count(const exl_run* r) {
  return static_cast<int>(r->metrics.size());
}
const char* exl_run_metric_name(const exl_run* r, int i) {
  return r->metrics[i].first.c_str();
}
double exl_run_metric_value(const exl_run* r, int i) {
  return r->metrics[i].second;
}

int exl_run_series_count(const exl_run* r) {
  return static_cast<int>(r->series.size());
}
const char* exl_run_series_label(const exl_run* r, int k) {
  return r->series[k].label.c_str();
}
int exl_run_grid_size(const exl_run* r, int k) {
  return static_cast<int>(r->series[k].grid->nodes());
}
exl_status exl_run_grid(const exl_run* r, int k, double* out) {
  return guarded([&] {
    const auto& g = r->series[k].grid->r;
    std::memcpy(out, g.data(), g.size() * sizeof(double));
  });
}
int exl_run_snapshot_count(const exl_run* r, int k) {
  return static_cast<int>(r->series[k].times.size());
}
double exl_run_snapshot_time(const exl_run* r, int k, int j) {
  return r->series[k].times[j];
}
exl_status exl_run_snapshot(const exl_run* r, int k, int j, double* h) {
  return guarded([&] {
    const auto& vals = r->series[k].h[j];
    std::memcpy(h, vals.data(), vals.size() * sizeof(double));
  });
}
int exl_run_has_vw(const exl_run* r, int k) {
  return r->series[k].v.empty() ? 0 : 1;
}
exl_status exl_run_snapshot_vw(const exl_run* r, int k, int j, double* v,
                               double* w) {
  return guarded([&] {
    require(!r->series[k].v.empty(), "series has no equivariant components");
    if (v)
      std::memcpy(v, r->series[k].v[j].data(),
                  r->series[k].v[j].size() * sizeof(double));
    if (w)
      std::memcpy(w, r->series[k].w[j].data(),
                  r->series[k].w[j].size() * sizeof(double));
  });
}

namespace {

exl_run::Series series_of(const std::string& label, const Evolution& evo) {
  exl_run::Series s;
  s.label = label;
  s.grid = evo.snapshots.front().grid;
  for (const auto& snap : evo.snapshots) {
    s.times.push_back(snap.time);
    s.h.push_back(snap.values);
  }
  return s;
}

}  // namespace

exl_status exl_pde_expander_run(int d, double ell, const exl_grid_spec* grid,
                                const exl_sim_spec* sim, exl_run** out) {
  return guarded([&] {
    require(out != nullptr && sim != nullptr, "null argument");
    auto g = build_grid(grid);
    ShootResult shot = shoot_for_limit(d, ell, 0, 1e-9);
    ProfileParams pp;
    pp.d = d;
    pp.alpha = shot.alpha;
    pp.rho_max = std::max(40.0, 1.2 * grid->r_max / std::sqrt(sim->t_begin));
    auto prof = std::make_shared<Profile>(solve_profile(pp));

    auto data_on = [&](std::shared_ptr<const RadialGrid> gg) {
      RadialField f;
      f.grid = gg;
      f.origin_bc = OriginBc::DirichletZero;
      f.values.resize(gg->nodes());
      for (std::size_t i = 0; i < gg->nodes(); ++i)
        f.values[i] = i == 0 ? 0.0
                             : prof->psi(gg->r[i] / std::sqrt(sim->t_begin));
      return f;
    };

    SimConfig cfg;
    cfg.dt = sim->dt;
    cfg.theta = sim->theta;
    cfg.t_begin = sim->t_begin;
    cfg.t_end = sim->t_end;
    cfg.snapshot_count = sim->snapshot_count;
    cfg.outer_bc = OuterBc::ExpanderExact;
    cfg.profile = prof;

    Evolution base = evolve(data_on(g), d, cfg);
    auto g2 = std::make_shared<RadialGrid>(g->refined());
    SimConfig cfg2 = cfg;
    cfg2.dt = cfg.dt / 2;
    Evolution fine = evolve(data_on(g2), d, cfg2);

    double tracking = 0.0, tracking_fine = 0.0, disc = 0.0;
    for (const auto& dg : base.diag) tracking = std::max(tracking, dg.tracking_error);
    for (const auto& dg : fine.diag)
      tracking_fine = std::max(tracking_fine, dg.tracking_error);
    for (std::size_t j = 0; j < base.snapshots.size(); ++j)
      for (std::size_t i = 0; i < g->nodes(); ++i)
        disc = std::max(disc, std::fabs(base.snapshots[j].values[i] -
                                        fine.snapshots[j].values[2 * i]));

    auto run = std::make_unique<exl_run>();
    run->series.push_back(series_of("run", base));
    run->metrics = {{"alpha", shot.alpha},
                    {"tracking_sup", tracking},
                    {"tracking_sup_refined", tracking_fine},
                    {"refine_ratio", tracking_fine / tracking},
                    {"disc_err", disc},
                    {"tracking_over_disc", tracking / disc}};
    *out = run.release();
  });
}

exl_status exl_pde_pair_run(int d, double ell, int h0_kind, double h0_param,
                            const exl_grid_spec* grid, const exl_sim_spec* sim,
                            double zeta_epsilon, exl_run** out) {
  return guarded([&] {
    require(out != nullptr && sim != nullptr, "null argument");
    auto g = build_grid(grid);
    SimConfig cfg;
    cfg.dt = sim->dt;
    cfg.theta = sim->theta;
    cfg.delta_start = sim->delta_start;
    cfg.t_begin = sim->delta_start;
    cfg.t_end = sim->t_end;
    cfg.snapshot_count = sim->snapshot_count;
    DataFn h0 = make_h0(h0_kind, ell, h0_param);
    PairResult pr = nonuniqueness_pair(d, ell, h0, cfg, g, zeta_epsilon);

    TestFunctionPair tf = TestFunctionPair::bumps(
        std::max(0.5, 2 * g->r[1]), 0.45 * grid->r_max, cfg.t_begin, cfg.t_end,
        0.05);
    double margin_n = energy_inequality_margin(pr.north, tf);
    double margin_s = energy_inequality_margin(pr.south, tf);

    auto run = std::make_unique<exl_run>();
    run->series.push_back(series_of("north", pr.north));
    run->series.push_back(series_of("south", pr.south));
    run->metrics = {{"min_sup_diff", pr.min_sup_diff},
                    {"final_sup_diff", pr.sup_diff.back()},
                    {"zeta_north", pr.zeta_north},
                    {"zeta_south", pr.zeta_south},
                    {"zeta_epsilon", zeta_epsilon},
                    {"energy_margin_north", margin_n},
                    {"energy_margin_south", margin_s},
                    {"alpha_north", pr.north_profile->params.alpha},
                    {"alpha_south", pr.south_profile->params.alpha}};
    *out = run.release();
  });
}

exl_status exl_pde_selfsim_run(int d, double alpha, double perturb_amp,
                               const exl_grid_spec* grid,
                               const exl_sim_spec* sim, double fit_lo,
                               double fit_hi, exl_run** out) {
  return guarded([&] {
    require(out != nullptr && sim != nullptr, "null argument");
    auto g = build_grid(grid);
    ProfileParams pp;
    pp.d = d;
    pp.alpha = alpha;
    pp.rho_max = std::max(40.0, 1.2 * grid->r_max);
    auto prof = std::make_shared<Profile>(solve_profile(pp));
    SimConfig cfg;
    cfg.dt = sim->dt;
    cfg.theta = sim->theta;
    cfg.t_begin = sim->t_begin;
    cfg.t_end = sim->t_end;
    cfg.snapshot_count = sim->snapshot_count;
    DataFn gfun = [perturb_amp](double rho) {
      return perturb_amp * rho / (1 + rho * rho);
    };
    DecayExperiment ex =
        selfsim_decay_experiment(prof, gfun, cfg, g, fit_lo, fit_hi);

    auto run = std::make_unique<exl_run>();
    run->series.push_back(series_of("perturbed", ex.perturbed));
    run->series.push_back(series_of("reference", ex.reference));
    run->metrics = {{"fitted_rate", ex.fitted_rate},
                    {"initial_sup_diff", ex.sup_diff.front()},
                    {"final_sup_diff", ex.sup_diff.back()}};
    *out = run.release();
  });
}

exl_status exl_gl_select_run(int d, double ell, const double* epsilons,
                             int n_eps, const exl_grid_spec* grid,
                             const exl_sim_spec* sim, exl_run** out) {
  return guarded([&] {
    require(out != nullptr && sim != nullptr, "null argument");
    require(epsilons != nullptr && n_eps >= 1, "epsilon sequence required");
    auto g = build_grid(grid);
    GLConfig cfg;
    cfg.epsilon_sequence.assign(epsilons, epsilons + n_eps);
    cfg.dt = sim->dt;
    cfg.t_end = sim->t_end;
    cfg.snapshot_count = sim->snapshot_count;
    cfg.reference_delta = sim->delta_start;
    DataFn h0 = [ell](double) { return ell; };
    GLSelectReport rep = gl_select(d, ell, h0, cfg, g);

    auto run = std::make_unique<exl_run>();
    run->series.push_back(series_of("reference", rep.reference));
    for (std::size_t k = 0; k < rep.runs.size(); ++k) {
      exl_run::Series s;
      s.label = "eps=" + std::to_string(rep.epsilons[k]);
      s.grid = g;
      for (const auto& snap : rep.runs[k].snapshots) {
        s.times.push_back(snap.time);
        std::vector<double> h(snap.v.size());
        for (std::size_t i = 0; i < h.size(); ++i)
          h[i] = gl_reconstruct_h(snap.v[i], snap.w[i]);
        s.h.push_back(std::move(h));
        s.v.push_back(snap.v);
        s.w.push_back(snap.w);
      }
      run->series.push_back(std::move(s));
    }
    run->metrics.push_back({"monotone", rep.monotone ? 1.0 : 0.0});
    for (std::size_t k = 0; k < rep.epsilons.size(); ++k) {
      std::string tag = std::to_string(k);
      run->metrics.push_back({"distance_" + tag, rep.distance[k]});
      run->metrics.push_back({"min_v_origin_" + tag, rep.min_v_origin[k]});
      run->metrics.push_back({"modulus_excess_" + tag, rep.modulus_excess[k]});
      run->metrics.push_back({"dt_h_l2_" + tag, rep.dt_h_l2[k]});
    }
    *out = run.release();
  });
}

/* ----------------------------- verify ----------------------------- */

exl_status exl_verify(const char* suite, exl_report** out) {
  return guarded([&] {
    require(suite != nullptr && out != nullptr, "null argument");
    *out = new exl_report{verify_suite(suite)};
  });
}

void exl_report_free(exl_report* r) { delete r; }
int exl_report_size(const exl_report* r) {
  return static_cast<int>(r->r.rows.size());
}
const char* exl_report_row_name(const exl_report* r, int i) {
  return r->r.rows[i].name.c_str();
}
double exl_report_row_value(const exl_report* r, int i) {
  return r->r.rows[i].value;
}
double exl_report_row_threshold(const exl_report* r, int i) {
  return r->r.rows[i].threshold;
}
int exl_report_row_pass(const exl_report* r, int i) {
  return r->r.rows[i].pass ? 1 : 0;
}
int exl_report_passed(const exl_report* r) { return r->r.passed() ? 1 : 0; }

} /* extern "C" */
