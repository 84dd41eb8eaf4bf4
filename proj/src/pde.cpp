#include "expanderlab/pde.hpp"

#include <algorithm>
#include <cmath>

#include "expanderlab/asymptotics.hpp"
#include "expanderlab/parallel.hpp"

namespace xlab {

// --------------------------------------------------------------------------
// Grids
// --------------------------------------------------------------------------

RadialGrid RadialGrid::uniform(double R, int cells) {
  require(R > 0 && cells >= 4, "uniform grid needs R > 0 and >= 4 cells");
  RadialGrid g;
  g.spacing = Spacing::Uniform;
  g.r.resize(cells + 1);
  for (int i = 0; i <= cells; ++i) g.r[i] = R * i / cells;
  return g;
}

RadialGrid RadialGrid::graded(double R, double r1, double cap, double ratio) {
  require(R > 0 && r1 > 0 && r1 < R, "bad graded grid parameters");
  require(cap >= r1 && ratio > 1.0, "bad graded grid parameters");
  RadialGrid g;
  g.spacing = Spacing::Graded;
  g.r.push_back(0.0);
  double h = r1, x = 0.0;
  while (x + h < R * (1 - 1e-12)) {
    x += h;
    g.r.push_back(x);
    h = std::min(h * ratio, cap);
  }
  // Avoid a degenerate final cell.
  if (g.r.size() >= 2 && R - g.r.back() < 0.3 * (g.r.back() - g.r[g.r.size() - 2]))
    g.r.pop_back();
  g.r.push_back(R);
  return g;
}

RadialGrid RadialGrid::refined() const {
  RadialGrid g;
  g.spacing = spacing;
  g.r.reserve(2 * r.size());
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    g.r.push_back(r[i]);
    g.r.push_back(0.5 * (r[i] + r[i + 1]));
  }
  g.r.push_back(r.back());
  return g;
}

double branch_cutoff(double r) {
  if (r <= 0.5) return 0.0;
  if (r >= 1.0) return 1.0;
  double t = (r - 0.5) / 0.5;
  return t * t * t * (t * (6 * t - 15) + 10);
}

// --------------------------------------------------------------------------
// Stepper
// --------------------------------------------------------------------------

namespace {

double sinc2(double x) {
  // sin(2x)/(2x), continuous through 0.
  double y = 2 * x;
  if (std::fabs(y) < 1e-4) return 1.0 - y * y / 6.0 + y * y * y * y / 120.0;
  return std::sin(y) / y;
}

struct Tridiag {
  std::vector<double> lower, diag, upper, rhs;

  void solve(std::vector<double>& x) {
    std::size_t n = diag.size();
    std::vector<double> c(n), dd(n);
    if (diag[0] == 0.0)
      fail(ErrorKind::LinearSolveFailure, "zero pivot in tridiagonal solve");
    c[0] = upper[0] / diag[0];
    dd[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
      double den = diag[i] - lower[i] * c[i - 1];
      if (den == 0.0)
        fail(ErrorKind::LinearSolveFailure, "zero pivot in tridiagonal solve");
      c[i] = upper[i] / den;
      dd[i] = (rhs[i] - lower[i] * dd[i - 1]) / den;
    }
    x.resize(n);
    x[n - 1] = dd[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = dd[i] - c[i] * x[i + 1];
  }
};

class Stepper {
public:
  Stepper(int d, std::shared_ptr<const RadialGrid> grid, const SimConfig& cfg)
      : d_(d), grid_(std::move(grid)), cfg_(cfg) {
    check_dimension(d);
    require(cfg_.dt > 0, "dt must be positive");
    require(cfg_.theta >= 0.5 && cfg_.theta <= 1.0, "theta outside [0.5, 1]");
    if (cfg_.outer_bc == OuterBc::ExpanderExact ||
        cfg_.nonlinearity == Nonlinearity::LinearizedValpha ||
        cfg_.perturbation_form)
      require(cfg_.profile != nullptr, "configuration needs a profile");
    build_operator();
    if (cfg_.profile) {
      const auto& r = grid_->r;
      psi_.resize(r.size());
      for (std::size_t i = 0; i < r.size(); ++i)
        psi_[i] = r[i] > 0 ? cfg_.profile->psi(r[i]) : profile_origin();
    }
  }

  // Boundary state captured from the initial field of a run.
  void capture_boundary(const RadialField& initial, double t_begin) {
    t_begin_ = t_begin;
    outer_initial_ = initial.values.back();
    if (cfg_.outer_bc == OuterBc::DecayingPerturbation) {
      double base = cfg_.perturbation_form
                        ? 0.0
                        : (cfg_.profile ? psi_.back() : outer_initial_);
      outer_base_ = base;
      outer_pert0_ = outer_initial_ - base;
    }
  }

  RadialField advance(const RadialField& state, double dt,
                      double* newton_residual) const {
    const auto& r = grid_->r;
    std::size_t n = r.size();
    const std::vector<double>& h = state.values;

    std::vector<double> Lh(n, 0.0), N(n, 0.0), Np(n, 0.0);
    apply_operator(h, Lh);
    reaction(h, state.origin_bc, N, Np);

    Tridiag sys;
    sys.lower.assign(n, 0.0);
    sys.diag.assign(n, 0.0);
    sys.upper.assign(n, 0.0);
    sys.rhs.assign(n, 0.0);

    double th = cfg_.theta;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      sys.lower[i] = -th * lo_[i];
      sys.diag[i] = 1.0 / dt + th * (lo_[i] + up_[i]) + th * Np[i];
      sys.upper[i] = -th * up_[i];
      sys.rhs[i] = Lh[i] - N[i];
    }

    // Origin row.
    if (state.origin_bc == OriginBc::FreeSingular) {
      sys.diag[0] = 1.0 / dt + th * up_[0] + th * Np[0];
      sys.upper[0] = -th * up_[0];
      sys.rhs[0] = Lh[0] - N[0];
    } else {
      double target = origin_value(state.origin_bc);
      sys.diag[0] = 1.0;
      sys.rhs[0] = target - h[0];
    }

    // Outer row.
    double t_next = state.time + dt;
    switch (cfg_.outer_bc) {
      case OuterBc::NeumannZero:
        sys.lower[n - 1] = -1.0;
        sys.diag[n - 1] = 1.0;
        sys.rhs[n - 1] = h[n - 2] - h[n - 1];
        break;
      case OuterBc::ExpanderExact: {
        double target = cfg_.profile->psi(r.back() / std::sqrt(t_next));
        sys.diag[n - 1] = 1.0;
        sys.rhs[n - 1] = target - h[n - 1];
        break;
      }
      case OuterBc::DecayingPerturbation: {
        double target = outer_base_ + outer_pert0_ * std::exp(-cfg_.outer_decay_rate *
                                                              (t_next - t_begin_));
        sys.diag[n - 1] = 1.0;
        sys.rhs[n - 1] = target - h[n - 1];
        break;
      }
      case OuterBc::Frozen:
      default:
        sys.diag[n - 1] = 1.0;
        sys.rhs[n - 1] = outer_initial_ - h[n - 1];
        break;
    }

    std::vector<double> delta;
    sys.solve(delta);

    RadialField next = state;
    next.time = t_next;
    for (std::size_t i = 0; i < n; ++i) {
      next.values[i] = h[i] + delta[i];
      if (!std::isfinite(next.values[i]))
        fail(ErrorKind::NonFiniteState, "PDE state became non-finite");
    }

    if (newton_residual) {
      // Defect of the theta scheme with the nonlinearity re-evaluated at
      // the new state (the single Newton sweep leaves this much behind).
      std::vector<double> Lh1(n, 0.0), N1(n, 0.0), Np1(n, 0.0);
      apply_operator(next.values, Lh1);
      reaction(next.values, state.origin_bc, N1, Np1);
      double worst = 0.0;
      for (std::size_t i = 1; i + 1 < n; ++i) {
        double res = delta[i] / dt - th * (Lh1[i] - N1[i]) -
                     (1 - th) * (Lh[i] - N[i]);
        worst = std::max(worst, std::fabs(res) * dt);
      }
      *newton_residual = worst;
    }
    return next;
  }

  const std::vector<double>& psi_on_grid() const { return psi_; }

private:
  double profile_origin() const {
    return cfg_.profile->params.pole == Pole::South ? M_PI : 0.0;
  }

  double origin_value(OriginBc bc) const {
    if (cfg_.perturbation_form) return 0.0;
    return bc == OriginBc::DirichletPi ? M_PI : 0.0;
  }

  // Mass weight relative to node i (keeps the Gaussian factor bounded).
  double rel_weight(double x, double ri) const {
    double m = std::pow(x / ri, d_ - 1);
    if (cfg_.frame == Frame::SelfSimilar)
      m *= std::exp((x * x - ri * ri) / 4.0);
    return m;
  }

  void build_operator() {
    const auto& r = grid_->r;
    std::size_t n = r.size();
    lo_.assign(n, 0.0);
    up_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double rm = 0.5 * (r[i - 1] + r[i]);
      double rp = 0.5 * (r[i] + r[i + 1]);
      double bm = rel_weight(rm, r[i]) / (r[i] - r[i - 1]);
      double bp = rel_weight(rp, r[i]) / (r[i + 1] - r[i]);
      double vol = rp - rm;  // midpoint rule, point value at r_i
      lo_[i] = bm / vol;
      up_[i] = bp / vol;
    }
    // Zero-flux origin cell, used by FreeSingular only.
    {
      double rp = 0.5 * r[1];
      double bp = std::pow(rp, d_ - 1) / r[1];
      double vol = std::pow(rp, d_) / d_;
      if (cfg_.frame == Frame::SelfSimilar) bp *= std::exp(rp * rp / 4.0);
      up_[0] = bp / vol;
    }
  }

  void apply_operator(const std::vector<double>& h,
                      std::vector<double>& out) const {
    // Difference form vanishes exactly on constants.
    std::size_t n = h.size();
    for (std::size_t i = 1; i + 1 < n; ++i)
      out[i] = lo_[i] * (h[i - 1] - h[i]) + up_[i] * (h[i + 1] - h[i]);
    out[0] = up_[0] * (h[1] - h[0]);
    out[n - 1] = 0.0;
  }

  void reaction(const std::vector<double>& h, OriginBc origin_bc,
                std::vector<double>& N, std::vector<double>& Np) const {
    const auto& r = grid_->r;
    std::size_t n = r.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double rr = r[i] * r[i];
      if (cfg_.perturbation_form) {
        double psi = psi_[i];
        double u = h[i];
        if (cfg_.nonlinearity == Nonlinearity::LinearizedValpha) {
          double V = (d_ - 1) * std::cos(2 * psi) / rr;
          N[i] = V * u;
          Np[i] = V;
        } else {
          // sin(2(psi+u)) - sin(2 psi) = 2 cos(2 psi + u) sin(u)
          N[i] = (d_ - 1) * std::cos(2 * psi + u) * std::sin(u) / rr;
          Np[i] = (d_ - 1) * std::cos(2 * (psi + u)) / rr;
        }
      } else if (cfg_.nonlinearity == Nonlinearity::LinearizedValpha) {
        double V = (d_ - 1) * std::cos(2 * psi_[i]) / rr;
        N[i] = V * h[i];
        Np[i] = V;
      } else {
        N[i] = (d_ - 1) / rr * h[i] * sinc2(h[i]);
        Np[i] = (d_ - 1) * std::cos(2 * h[i]) / rr;
      }
    }
    if (origin_bc == OriginBc::FreeSingular) {
      double reff = 0.5 * r[1];  // sanity mode only
      N[0] = (d_ - 1) / (reff * reff) * h[0] * sinc2(h[0]);
      Np[0] = (d_ - 1) * std::cos(2 * h[0]) / (reff * reff);
    }
  }

  int d_;
  std::shared_ptr<const RadialGrid> grid_;
  SimConfig cfg_;
  std::vector<double> lo_, up_;
  std::vector<double> psi_;
  double outer_initial_ = 0.0;
  double outer_base_ = 0.0;
  double outer_pert0_ = 0.0;
  double t_begin_ = 0.0;
};

double weight_value(const VariationSolution& w, double rho) {
  const Trajectory& traj = w.trajectory;
  if (rho <= traj.front()) return traj.state(0, 0);
  if (rho >= traj.back()) return w.limit.value_or(traj.state(traj.size() - 1, 0));
  return traj.eval1(rho, 0);
}

SnapshotDiag snapshot_diag(const RadialField& f, int d, const SimConfig& cfg,
                           const std::vector<double>& psi_grid,
                           const VariationSolution* weight,
                           double newton_residual) {
  SnapshotDiag out;
  out.time = f.time;
  out.newton_residual = newton_residual;
  out.min_value = out.max_value = f.values[0];
  for (double v : f.values) {
    out.sup_abs = std::max(out.sup_abs, std::fabs(v));
    out.min_value = std::min(out.min_value, v);
    out.max_value = std::max(out.max_value, v);
  }
  if (cfg.profile) {
    const auto& r = f.grid->r;
    double worst = 0.0, worst_w = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      double ref;
      if (cfg.frame == Frame::Physical) {
        double rho = f.time > 0 ? r[i] / std::sqrt(f.time) : 0.0;
        ref = i == 0 ? (cfg.profile->params.pole == Pole::South ? M_PI : 0.0)
                     : cfg.profile->psi(rho);
      } else {
        ref = cfg.perturbation_form ? 0.0 : psi_grid[i];
      }
      double err = std::fabs(f.values[i] - ref);
      worst = std::max(worst, err);
      if (weight && i > 0)
        worst_w = std::max(worst_w, err / weight_value(*weight, r[i]));
    }
    out.tracking_error = worst;
    if (weight) out.weighted_norm = worst_w;
  }
  return out;
}

}  // namespace

RadialField pde_step(const RadialField& state, int d, const SimConfig& config) {
  require(state.grid != nullptr, "field has no grid");
  require(state.values.size() == state.grid->nodes(), "field/grid mismatch");
  Stepper stepper(d, state.grid, config);
  stepper.capture_boundary(state, config.t_begin);
  return stepper.advance(state, config.dt, nullptr);
}

namespace {

Evolution run_evolution(const RadialField& initial, int d, SimConfig config,
                        const VariationSolution* weight) {
  require(initial.grid != nullptr, "field has no grid");
  require(initial.values.size() == initial.grid->nodes(),
          "field/grid mismatch");
  require(config.t_end > config.t_begin, "empty time span");
  require(config.snapshot_count >= 2, "need at least two snapshots");

  Stepper stepper(d, initial.grid, config);
  stepper.capture_boundary(initial, config.t_begin);

  Evolution evo;
  evo.d = d;
  evo.config = config;

  RadialField state = initial;
  state.time = config.t_begin;
  double newton = 0.0;
  evo.snapshots.push_back(state);
  evo.diag.push_back(snapshot_diag(state, d, config, stepper.psi_on_grid(),
                                   weight, 0.0));

  int ns = config.snapshot_count;
  for (int k = 1; k < ns; ++k) {
    double t_target = config.t_begin +
                      (config.t_end - config.t_begin) * k / (ns - 1);
    double span = t_target - state.time;
    int steps = std::max(1, static_cast<int>(std::ceil(span / config.dt - 1e-12)));
    double dt = span / steps;
    double worst_newton = 0.0;
    for (int s = 0; s < steps; ++s) {
      state = stepper.advance(state, dt, &newton);
      worst_newton = std::max(worst_newton, newton);
    }
    state.time = t_target;  // guard against roundoff drift
    evo.snapshots.push_back(state);
    evo.diag.push_back(snapshot_diag(state, d, config, stepper.psi_on_grid(),
                                     weight, worst_newton));
  }
  return evo;
}

}  // namespace

Evolution evolve(const RadialField& initial, int d, const SimConfig& config,
                 const VariationSolution* weight) {
  require(config.frame == Frame::Physical, "evolve runs in physical frame");
  return run_evolution(initial, d, config, weight);
}

RadialField make_branch_data(const Profile& branch_profile, double ell,
                             const DataFn& h0, double delta,
                             std::shared_ptr<const RadialGrid> grid) {
  require(delta > 0, "delta must be positive");
  require(grid != nullptr, "grid required");
  double origin = h0(0.0);
  require(std::fabs(origin - ell) < 1e-9, "far-field data must have h0(0) = ell");

  RadialField f;
  f.time = delta;
  f.grid = grid;
  f.origin_bc = branch_profile.params.pole == Pole::South
                    ? OriginBc::DirichletPi
                    : OriginBc::DirichletZero;
  f.values.resize(grid->nodes());
  double sq = std::sqrt(delta);
  for (std::size_t i = 0; i < grid->nodes(); ++i) {
    double r = grid->r[i];
    double base = i == 0 ? (f.origin_bc == OriginBc::DirichletPi ? M_PI : 0.0)
                         : branch_profile.psi(r / sq);
    f.values[i] = base + (h0(r) - ell) * branch_cutoff(r);
  }
  return f;
}

RadialField make_branch_data(int d, double ell, Pole branch, const DataFn& h0,
                             double delta,
                             std::shared_ptr<const RadialGrid> grid,
                             Profile* profile_out) {
  Profile prof;
  if (branch == Pole::North) {
    ShootResult shot = shoot_for_limit(d, ell, 0, 1e-9);
    ProfileParams p;
    p.d = d;
    p.alpha = shot.alpha;
    prof = solve_profile(p);
  } else {
    try {
      prof = south_profile(d, ell, 1e-9);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NoBracket)
        fail(ErrorKind::RangeError, "ell outside the south branch range");
      throw;
    }
  }
  RadialField f = make_branch_data(prof, ell, h0, delta, std::move(grid));
  if (profile_out) *profile_out = std::move(prof);
  return f;
}

double closeness_zeta(const Evolution& run, const Profile& profile,
                      double eps) {
  double zeta = run.snapshots.back().time + run.snapshots.back().grid->extent();
  for (const auto& snap : run.snapshots) {
    const auto& r = snap.grid->r;
    for (std::size_t i = 0; i < r.size(); ++i) {
      double rho = snap.time > 0 ? r[i] / std::sqrt(snap.time) : 0.0;
      double ref = i == 0 ? (profile.params.pole == Pole::South ? M_PI : 0.0)
                          : profile.psi(rho);
      if (std::fabs(snap.values[i] - ref) >= eps)
        zeta = std::min(zeta, snap.time + r[i]);
    }
  }
  return zeta;
}

PairResult nonuniqueness_pair(int d, double ell, const DataFn& h0,
                              const SimConfig& config,
                              std::shared_ptr<const RadialGrid> grid,
                              double zeta_epsilon) {
  require(d >= 3 && d <= 6, "pair experiment needs 3 <= d <= 6");
  CriticalParams crit = critical_params(d, 1e-8);
  require(ell >= M_PI / 2 - crit.delta_star && ell < M_PI / 2,
          "ell outside [pi/2 - delta*, pi/2)");

  PairResult out;
  out.zeta_epsilon = zeta_epsilon;

  ShootResult shot = shoot_for_limit(d, ell, 0, 1e-9);
  ProfileParams p;
  p.d = d;
  p.alpha = shot.alpha;
  out.north_profile = std::make_shared<Profile>(solve_profile(p));
  out.south_profile = std::make_shared<Profile>(south_profile(d, ell, 1e-9));

  double delta = config.delta_start;
  RadialField north0 = make_branch_data(*out.north_profile, ell, h0, delta, grid);
  RadialField south0 = make_branch_data(*out.south_profile, ell, h0, delta, grid);

  SimConfig cn = config;
  cn.t_begin = delta;
  cn.profile = out.north_profile;
  SimConfig cs = config;
  cs.t_begin = delta;
  cs.profile = out.south_profile;

  Evolution runs[2];
  const RadialField* data[2] = {&north0, &south0};
  const SimConfig* cfgs[2] = {&cn, &cs};
  parallel_for(2, [&](std::size_t i) {
    runs[i] = run_evolution(*data[i], d, *cfgs[i], nullptr);
  });
  out.north = std::move(runs[0]);
  out.south = std::move(runs[1]);

  out.min_sup_diff = 1e300;
  for (std::size_t j = 0; j < out.north.snapshots.size(); ++j) {
    double sup = 0.0;
    const auto& a = out.north.snapshots[j].values;
    const auto& b = out.south.snapshots[j].values;
    for (std::size_t i = 0; i < a.size(); ++i)
      sup = std::max(sup, std::fabs(a[i] - b[i]));
    out.sup_diff.push_back(sup);
    out.min_sup_diff = std::min(out.min_sup_diff, sup);
  }
  out.zeta_north = closeness_zeta(out.north, *out.north_profile, zeta_epsilon);
  out.zeta_south = closeness_zeta(out.south, *out.south_profile, zeta_epsilon);
  return out;
}

Evolution evolve_selfsimilar(const RadialField& initial, double s_begin,
                             double s_end,
                             std::shared_ptr<const Profile> profile,
                             SimConfig config,
                             const VariationSolution* weight) {
  require(profile != nullptr, "self-similar runs need the base profile");
  int d = profile->params.d;
  config.frame = Frame::SelfSimilar;
  config.t_begin = s_begin;
  config.t_end = s_end;
  config.profile = std::move(profile);
  return run_evolution(initial, d, config, weight);
}

DecayExperiment selfsim_decay_experiment(
    std::shared_ptr<const Profile> profile, const DataFn& g,
    const SimConfig& config, std::shared_ptr<const RadialGrid> grid,
    double fit_lo, double fit_hi) {
  require(profile != nullptr && grid != nullptr, "profile and grid required");
  int d = profile->params.d;

  RadialField pert, ref;
  pert.grid = ref.grid = grid;
  pert.origin_bc = ref.origin_bc = OriginBc::DirichletZero;
  pert.values.resize(grid->nodes());
  ref.values.resize(grid->nodes());
  for (std::size_t i = 0; i < grid->nodes(); ++i) {
    double rho = grid->r[i];
    double psi = i == 0 ? 0.0 : profile->psi(rho);
    ref.values[i] = psi;
    pert.values[i] = psi + g(rho);
  }

  SimConfig cfg = config;
  cfg.frame = Frame::SelfSimilar;
  cfg.outer_bc = OuterBc::DecayingPerturbation;
  cfg.profile = profile;

  DecayExperiment out;
  Evolution runs[2];
  const RadialField* data[2] = {&pert, &ref};
  parallel_for(2, [&](std::size_t i) {
    SimConfig c = cfg;
    runs[i] = run_evolution(*data[i], d, c, nullptr);
  });
  out.perturbed = std::move(runs[0]);
  out.reference = std::move(runs[1]);

  for (std::size_t j = 0; j < out.perturbed.snapshots.size(); ++j) {
    double sup = 0.0;
    const auto& a = out.perturbed.snapshots[j].values;
    const auto& b = out.reference.snapshots[j].values;
    for (std::size_t i = 0; i < a.size(); ++i)
      sup = std::max(sup, std::fabs(a[i] - b[i]));
    out.s.push_back(out.perturbed.snapshots[j].time);
    out.sup_diff.push_back(sup);
  }

  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < out.s.size(); ++j) {
    double rel = out.s[j] - config.t_begin;
    if (rel >= fit_lo && rel <= fit_hi && out.sup_diff[j] > 0) {
      xs.push_back(out.s[j]);
      ys.push_back(std::log(out.sup_diff[j]));
    }
  }
  require(xs.size() >= 4, "decay fit window too small");
  LinearFit fit = linear_fit(xs, ys);
  out.fitted_rate = -fit.slope;
  return out;
}

}  // namespace xlab
