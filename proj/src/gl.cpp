#include "expanderlab/gl.hpp"

#include <algorithm>
#include <cmath>

#include "expanderlab/parallel.hpp"

namespace xlab {

namespace {

struct Band {
  std::vector<double> lower, diag, upper;
};

// Implicit Euler for u_t = (1/r^{d-1})(r^{d-1} u_r)_r - extra(r) u with
// zero-flux at the origin (v) or Dirichlet 0 (w), frozen outer value.
class Diffuser {
public:
  Diffuser(int d, std::shared_ptr<const RadialGrid> grid, bool dirichlet_origin,
           bool centrifugal)
      : grid_(std::move(grid)), dirichlet_origin_(dirichlet_origin) {
    const auto& r = grid_->r;
    std::size_t n = r.size();
    lo_.assign(n, 0.0);
    up_.assign(n, 0.0);
    extra_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double rm = 0.5 * (r[i - 1] + r[i]);
      double rp = 0.5 * (r[i] + r[i + 1]);
      double vol = (std::pow(rp, d) - std::pow(rm, d)) / d /
                   std::pow(r[i], d - 1);
      lo_[i] = std::pow(rm / r[i], d - 1) / (r[i] - r[i - 1]) / vol;
      up_[i] = std::pow(rp / r[i], d - 1) / (r[i + 1] - r[i]) / vol;
      if (centrifugal) extra_[i] = (d - 1) / (r[i] * r[i]);
    }
    double rp = 0.5 * r[1];
    up_[0] = std::pow(rp, d - 1) / r[1] / (std::pow(rp, d) / d);
  }

  void advance(std::vector<double>& u, double dt) const {
    const std::size_t n = u.size();
    Band band;
    band.lower.assign(n, 0.0);
    band.diag.assign(n, 0.0);
    band.upper.assign(n, 0.0);
    std::vector<double> rhs(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      band.lower[i] = -dt * lo_[i];
      band.diag[i] = 1 + dt * (lo_[i] + up_[i] + extra_[i]);
      band.upper[i] = -dt * up_[i];
      rhs[i] = u[i];
    }
    if (dirichlet_origin_) {
      band.diag[0] = 1;
      rhs[0] = 0.0;
    } else {
      band.diag[0] = 1 + dt * up_[0];
      band.upper[0] = -dt * up_[0];
      rhs[0] = u[0];
    }
    band.diag[n - 1] = 1;
    rhs[n - 1] = u[n - 1];

    // Thomas
    std::vector<double> c(n), dd(n);
    c[0] = band.upper[0] / band.diag[0];
    dd[0] = rhs[0] / band.diag[0];
    for (std::size_t i = 1; i < n; ++i) {
      double den = band.diag[i] - band.lower[i] * c[i - 1];
      if (den == 0.0)
        fail(ErrorKind::LinearSolveFailure, "zero pivot in GL diffusion");
      c[i] = band.upper[i] / den;
      dd[i] = (rhs[i] - band.lower[i] * dd[i - 1]) / den;
    }
    u[n - 1] = dd[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) u[i] = dd[i] - c[i] * u[i + 1];
  }

private:
  std::shared_ptr<const RadialGrid> grid_;
  bool dirichlet_origin_;
  std::vector<double> lo_, up_, extra_;
};

// m + lambda (m^2 - 1) m = target, the positive root.
double penalization_modulus(double target, double lambda) {
  double m = std::max(target, 0.5);
  for (int it = 0; it < 100; ++it) {
    double g = lambda * m * m * m + (1 - lambda) * m - target;
    double gp = 3 * lambda * m * m + 1 - lambda;
    if (gp <= 0) break;
    double step = g / gp;
    m -= step;
    if (m < 0.05) m = 0.05;
    if (std::fabs(step) < 1e-15 * std::max(1.0, m)) return m;
  }
  // Bisection fallback on [0, max(target, 1) + 1].
  double lo = 0.0, hi = std::max(target, 1.0) + 1.0;
  auto g = [&](double x) { return lambda * x * x * x + (1 - lambda) * x - target; };
  if (g(lo) > 0 || g(hi) < 0)
    fail(ErrorKind::NewtonDivergence, "penalization solve failed");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

EquivariantPair gl_step(const EquivariantPair& state, double dt, int d) {
  check_dimension(d);
  require(state.grid != nullptr, "state has no grid");
  require(state.epsilon > 0, "epsilon must be positive");

  EquivariantPair next = state;
  Diffuser dv(d, state.grid, false, false);
  Diffuser dw(d, state.grid, true, true);

  dv.advance(next.v, dt / 2);
  dw.advance(next.w, dt / 2);

  double lambda = dt / (state.epsilon * state.epsilon);
  for (std::size_t i = 0; i < next.v.size(); ++i) {
    double m = std::hypot(next.v[i], next.w[i]);
    if (m == 0.0) continue;
    double mn = penalization_modulus(m, lambda);
    next.v[i] *= mn / m;
    next.w[i] *= mn / m;
  }

  dv.advance(next.v, dt / 2);
  dw.advance(next.w, dt / 2);

  for (std::size_t i = 0; i < next.v.size(); ++i)
    if (!std::isfinite(next.v[i]) || !std::isfinite(next.w[i]))
      fail(ErrorKind::NonFiniteState, "GL state became non-finite");
  next.time = state.time + dt;
  return next;
}

double gl_energy(const EquivariantPair& state, int d) {
  const auto& r = state.grid->r;
  std::size_t n = r.size();
  double acc = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double dm = r[i] - r[i - 1], dp = r[i + 1] - r[i];
    double vr = ((state.v[i] - state.v[i - 1]) / dm * dp +
                 (state.v[i + 1] - state.v[i]) / dp * dm) /
                (dm + dp);
    double wr = ((state.w[i] - state.w[i - 1]) / dm * dp +
                 (state.w[i + 1] - state.w[i]) / dp * dm) /
                (dm + dp);
    double mod2 = state.v[i] * state.v[i] + state.w[i] * state.w[i];
    double dens = vr * vr + wr * wr +
                  (d - 1) * state.w[i] * state.w[i] / (r[i] * r[i]) +
                  (1 - mod2) * (1 - mod2) /
                      (2 * state.epsilon * state.epsilon);
    acc += dens * std::pow(r[i], d - 1) * 0.5 * (r[i + 1] - r[i - 1]);
  }
  return acc;
}

GLEvolution gl_evolve(const EquivariantPair& initial, int d, double dt,
                      double t_end, int snapshot_count) {
  require(snapshot_count >= 2, "need at least two snapshots");
  require(t_end > initial.time, "empty time span");

  GLEvolution evo;
  EquivariantPair state = initial;
  evo.snapshots.push_back(state);
  evo.energy.push_back(gl_energy(state, d));

  for (int k = 1; k < snapshot_count; ++k) {
    double t_target = initial.time +
                      (t_end - initial.time) * k / (snapshot_count - 1);
    double span = t_target - state.time;
    int steps = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-12)));
    double h = span / steps;
    for (int s = 0; s < steps; ++s) {
      state = gl_step(state, h, d);
      for (std::size_t i = 0; i < state.v.size(); ++i) {
        double excess =
            state.v[i] * state.v[i] + state.w[i] * state.w[i] - 1.0;
        evo.max_modulus_excess = std::max(evo.max_modulus_excess, excess);
      }
    }
    state.time = t_target;
    evo.snapshots.push_back(state);
    evo.energy.push_back(gl_energy(state, d));
  }
  return evo;
}

EquivariantPair gl_data(const DataFn& h0, double epsilon,
                        std::shared_ptr<const RadialGrid> grid) {
  require(grid != nullptr, "grid required");
  require(epsilon > grid->r[1],
          "epsilon not resolvable on this grid near the origin");
  EquivariantPair out;
  out.grid = grid;
  out.epsilon = epsilon;
  out.v.resize(grid->nodes());
  out.w.resize(grid->nodes());
  double h_eps = h0(epsilon);
  for (std::size_t i = 0; i < grid->nodes(); ++i) {
    double r = grid->r[i];
    double h = r <= epsilon ? r * h_eps / epsilon : h0(r);
    out.v[i] = std::cos(h);
    out.w[i] = std::sin(h);
  }
  return out;
}

double gl_reconstruct_h(double v, double w) { return std::atan2(w, v); }

GLSelectReport gl_select(int d, double ell, const DataFn& h0,
                         const GLConfig& config,
                         std::shared_ptr<const RadialGrid> grid) {
  check_dimension(d);
  require(!config.epsilon_sequence.empty(), "epsilon sequence empty");
  for (std::size_t i = 1; i < config.epsilon_sequence.size(); ++i)
    require(config.epsilon_sequence[i] < config.epsilon_sequence[i - 1],
            "epsilon sequence must decrease");
  require(h0(0.0) < M_PI / 2, "selection needs h0(0) < pi/2");

  GLSelectReport report;
  report.epsilons = config.epsilon_sequence;

  // Reference: the north run from the same data, launched at t = delta.
  {
    Profile prof;
    RadialField data = make_branch_data(d, ell, Pole::North, h0,
                                        config.reference_delta, grid, &prof);
    SimConfig sim;
    sim.dt = config.dt;
    sim.t_begin = config.reference_delta;
    sim.t_end = config.t_end;
    sim.snapshot_count = config.snapshot_count;
    sim.profile = std::make_shared<Profile>(std::move(prof));
    report.reference = evolve(data, d, sim);
  }
  const auto& href = report.reference.snapshots.back().values;

  std::size_t ne = config.epsilon_sequence.size();
  report.runs.resize(ne);
  report.distance.resize(ne);
  report.min_v_origin.resize(ne);
  report.modulus_excess.resize(ne);
  report.dt_h_l2.resize(ne);

  parallel_for(ne, [&](std::size_t k) {
    double eps = config.epsilon_sequence[k];
    EquivariantPair init = gl_data(h0, eps, grid);
    GLEvolution evo = gl_evolve(init, d, config.dt, config.t_end,
                                config.snapshot_count);

    const auto& last = evo.snapshots.back();
    double dist = 0.0;
    for (std::size_t i = 0; i < last.v.size(); ++i)
      dist = std::max(dist, std::fabs(gl_reconstruct_h(last.v[i], last.w[i]) -
                                      href[i]));

    double minv = 1e300;
    for (const auto& snap : evo.snapshots)
      for (std::size_t i = 0; i < snap.v.size(); ++i)
        if (grid->r[i] <= 0.5) minv = std::min(minv, snap.v[i]);

    // Discrete space-time sum of |dt h|^2 on 0.2 <= r <= 1.5.
    double dt_l2 = 0.0;
    for (std::size_t j = 0; j + 1 < evo.snapshots.size(); ++j) {
      const auto& A = evo.snapshots[j];
      const auto& B = evo.snapshots[j + 1];
      double dt = B.time - A.time;
      for (std::size_t i = 1; i + 1 < grid->nodes(); ++i) {
        double r = grid->r[i];
        if (r < 0.2 || r > 1.5) continue;
        double ha = gl_reconstruct_h(A.v[i], A.w[i]);
        double hb = gl_reconstruct_h(B.v[i], B.w[i]);
        double ht = (hb - ha) / dt;
        dt_l2 += ht * ht * std::pow(r, d - 1) * 0.5 *
                 (grid->r[i + 1] - grid->r[i - 1]) * dt;
      }
    }

    report.distance[k] = dist;
    report.min_v_origin[k] = minv;
    report.modulus_excess[k] = evo.max_modulus_excess;
    report.dt_h_l2[k] = dt_l2;
    report.runs[k] = std::move(evo);
  });

  report.monotone = true;
  for (std::size_t k = 1; k < ne; ++k)
    if (report.distance[k] > report.distance[k - 1]) report.monotone = false;
  return report;
}

}  // namespace xlab
