#include "expanderlab/checks.hpp"

#include <algorithm>
#include <cmath>

namespace xlab {

double hardy_ratio(int d) {
  check_dimension(d);
  return 4.0 * (d - 1) / ((d - 2.0) * (d - 2.0));
}

// --------------------------------------------------------------------------
// Barriers
// --------------------------------------------------------------------------

namespace {

double smoothstep5(double t) { return t * t * t * (t * (6 * t - 15) + 10); }
double smoothstep5_d1(double t) { return 30 * t * t * (t - 1) * (t - 1); }
double smoothstep5_d2(double t) { return 60 * t * (2 * t - 1) * (t - 1); }

}  // namespace

double barrier_cutoff(double r, double R) {
  if (r <= R) return 0.0;
  if (r >= 2 * R) return 1.0;
  return smoothstep5((r - R) / R);
}

double barrier_cutoff_d1(double r, double R) {
  if (r <= R || r >= 2 * R) return 0.0;
  return smoothstep5_d1((r - R) / R) / R;
}

double barrier_cutoff_d2(double r, double R) {
  if (r <= R || r >= 2 * R) return 0.0;
  return smoothstep5_d2((r - R) / R) / (R * R);
}

namespace {

double perturbation_j(int d, double psi, double u) {
  return (d - 1) / 2.0 *
         (std::sin(2 * (psi + u)) - std::sin(2 * psi) -
          2 * std::cos(2 * psi) * u);
}

}  // namespace

ResidualStats supersolution_residual(const SupersolutionParams& params,
                                     const Profile& profile,
                                     const VariationSolution& w,
                                     std::span<const double> s_grid,
                                     std::span<const double> rho_grid,
                                     int sign) {
  require(sign == 1 || sign == -1, "sign must be +-1");
  for (double s : s_grid)
    require(s <= params.s0, "residual probes must satisfy s <= s0");

  int d = profile.params.d;
  double kappa = params.kappa;

  ResidualStats stats;
  bool first = true;
  for (double s : s_grid) {
    double es = std::exp(s / 2);
    for (double rho : rho_grid) {
      double psi = profile.psi(rho);
      double V = (d - 1) / (rho * rho) * std::cos(2 * psi);
      double wv = rho <= w.trajectory.back() && rho >= w.trajectory.front()
                      ? w.trajectory.eval1(rho, 0)
                      : w.limit.value_or(0.0);

      double r = es * rho;
      double g = params.M + params.A / (rho * rho);
      double gp = -2 * params.A / (rho * rho * rho);
      double gpp = 6 * params.A / (rho * rho * rho * rho);
      double ph = barrier_cutoff(r, params.R);
      double php = barrier_cutoff_d1(r, params.R);
      double phpp = barrier_cutoff_d2(r, params.R);

      // u2 = g(rho) phi(e^{s/2} rho)
      double u2_s = g * php * r / 2;
      double u2_r = gp * ph + g * php * es;
      double u2_rr = gpp * ph + 2 * gp * php * es + g * phpp * es * es;
      double Hu2 = -u2_rr - ((d - 1) / rho + rho / 2) * u2_r + V * g * ph;

      // eta H_alpha w = eta kappa w / Z exactly, by the equation for w.
      double lead = params.eta * kappa * wv / weight_z(rho) + u2_s + Hu2;

      double u = sign * (params.eta * wv + g * ph);
      double res = sign * lead + perturbation_j(d, psi, u) / (rho * rho);

      if (first || res < stats.min) {
        stats.min = res;
        stats.argmin_rho = rho;
        stats.argmin_s = s;
      }
      if (first || res > stats.max) stats.max = res;
      first = false;
    }
  }
  return stats;
}

SupersolutionParams find_supersolution_params(const Profile& profile,
                                              const VariationSolution& w,
                                              double M, double R, double tol) {
  require(w.parameter.has_value(), "weight must carry its kappa");

  double rho_hi = 0.95 * profile.params.rho_max;
  std::vector<double> rho_grid;
  for (int i = 0; i < 3000; ++i)
    rho_grid.push_back(std::exp(std::log(1e-3) +
                                (std::log(rho_hi) - std::log(1e-3)) * i / 2999.0));

  for (double eta : {0.5, 0.8, 1.0, 1.5, 0.25}) {
    for (double A : {5e3, 1e4, 2e4, 4e4, 8e4, 1.6e5}) {
      double s0 = std::log(M * R * R / A);
      std::vector<double> s_grid;
      for (int i = 0; i < 13; ++i) s_grid.push_back(s0 - 6.0 + 6.0 * i / 12.0);
      s_grid.push_back(s0 - 12.0);
      s_grid.push_back(s0 - 20.0);

      SupersolutionParams p;
      p.eta = eta;
      p.M = M;
      p.A = A;
      p.R = R;
      p.s0 = s0;
      p.kappa = *w.parameter;

      ResidualStats plus =
          supersolution_residual(p, profile, w, s_grid, rho_grid, +1);
      if (plus.min < -tol) continue;
      ResidualStats minus =
          supersolution_residual(p, profile, w, s_grid, rho_grid, -1);
      if (minus.max > tol) continue;
      return p;
    }
  }
  fail(ErrorKind::NoBracket, "no barrier parameters found");
}

// --------------------------------------------------------------------------
// Run-level checks
// --------------------------------------------------------------------------

double check_comparison(const Evolution& sub, const Evolution& super_run) {
  require(sub.snapshots.size() == super_run.snapshots.size(),
          "runs must share snapshot times");
  double worst = 0.0;
  for (std::size_t j = 0; j < sub.snapshots.size(); ++j) {
    const auto& a = sub.snapshots[j].values;
    const auto& b = super_run.snapshots[j].values;
    require(a.size() == b.size(), "runs must share the grid");
    for (std::size_t i = 0; i < a.size(); ++i)
      worst = std::max(worst, a[i] - b[i]);
  }
  return std::max(worst, 0.0);
}

namespace {

// C^2 plateau bump: up on [lo, lo+w], 1 in the middle, down on [hi-w, hi].
struct Bump {
  double lo, hi, w;
  double operator()(double r) const {
    if (r <= lo || r >= hi) return 0.0;
    if (r < lo + w) return smoothstep5((r - lo) / w);
    if (r > hi - w) return smoothstep5((hi - r) / w);
    return 1.0;
  }
  double deriv(double r) const {
    if (r <= lo || r >= hi) return 0.0;
    if (r < lo + w) return smoothstep5_d1((r - lo) / w) / w;
    if (r > hi - w) return -smoothstep5_d1((hi - r) / w) / w;
    return 0.0;
  }
};

}  // namespace

TestFunctionPair TestFunctionPair::bumps(double r_lo, double r_hi,
                                         double t_begin, double t_end,
                                         double b_amplitude) {
  require(r_lo > 0 && r_hi > r_lo, "bad bump support");
  double w = 0.25 * (r_hi - r_lo);
  Bump rb{r_lo, r_hi, w};
  // Ramp equals 1 at t_begin and reaches 0 before t_end, so no boundary
  // term survives at the final time.
  double t1 = t_begin + 0.5 * (t_end - t_begin);
  double t2 = t_begin + 0.9 * (t_end - t_begin);
  auto ramp = [t1, t2](double t) {
    if (t <= t1) return 1.0;
    if (t >= t2) return 0.0;
    return smoothstep5((t2 - t) / (t2 - t1));
  };
  auto ramp_t = [t1, t2](double t) {
    if (t <= t1 || t >= t2) return 0.0;
    return -smoothstep5_d1((t2 - t) / (t2 - t1)) / (t2 - t1);
  };

  TestFunctionPair out;
  out.support_lo = r_lo;
  out.support_hi = r_hi;
  out.tau = [rb, ramp](double t, double r) { return rb(r) * ramp(t); };
  out.tau_t = [rb, ramp_t](double t, double r) { return rb(r) * ramp_t(t); };
  out.tau_r = [rb, ramp](double t, double r) { return rb.deriv(r) * ramp(t); };
  out.b = [rb, ramp, b_amplitude](double t, double r) {
    return b_amplitude * rb(r) * ramp(t);
  };
  out.b_r = [rb, ramp, b_amplitude](double t, double r) {
    return b_amplitude * rb.deriv(r) * ramp(t);
  };
  return out;
}

namespace {

// Nonuniform second-order gradient at the nodes.
std::vector<double> radial_gradient(const std::vector<double>& r,
                                    const std::vector<double>& h) {
  std::size_t n = r.size();
  std::vector<double> g(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double dm = r[i] - r[i - 1], dp = r[i + 1] - r[i];
    double sl = (h[i] - h[i - 1]) / dm, sr = (h[i + 1] - h[i]) / dp;
    g[i] = (sl * dp + sr * dm) / (dm + dp);
  }
  g[0] = (h[1] - h[0]) / (r[1] - r[0]);
  g[n - 1] = (h[n - 1] - h[n - 2]) / (r[n - 1] - r[n - 2]);
  return g;
}

double surface_measure(int d) {
  // |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)
  return 2 * std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0);
}

}  // namespace

double energy_inequality_margin(const Evolution& run,
                                const TestFunctionPair& tests) {
  require(run.snapshots.size() >= 3, "run too short for the energy check");
  require(run.config.frame == Frame::Physical,
          "energy check runs in physical variables");
  const auto& grid = *run.snapshots.front().grid;
  const auto& r = grid.r;
  std::size_t n = r.size();
  if (tests.support_lo < r[1])
    fail(ErrorKind::UnresolvedRegion,
         "test support touches the unresolved origin cell");

  int d = run.d;
  double omega = surface_measure(d);

  auto grad_energy = [&](const std::vector<double>& h,
                         const std::vector<double>& hr, std::size_t i) {
    double s = std::sin(h[i]);
    double rr = r[i] * r[i];
    return hr[i] * hr[i] + (i > 0 ? (d - 1) * s * s / rr : 0.0);
  };

  // LHS: (1/2) int tau(t0) |grad u_0|^2
  double t0 = run.snapshots.front().time;
  const auto& h0 = run.snapshots.front().values;
  std::vector<double> h0r = radial_gradient(r, h0);
  double lhs = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double wq = 0.5 * (r[i + 1] - r[i - 1]) * std::pow(r[i], d - 1);
    lhs += 0.5 * tests.tau(t0, r[i]) * grad_energy(h0, h0r, i) * wq;
  }
  lhs *= omega;

  // RHS: space-time quadrature at snapshot midpoints.
  double rhs = 0.0;
  for (std::size_t j = 0; j + 1 < run.snapshots.size(); ++j) {
    const auto& A = run.snapshots[j];
    const auto& B = run.snapshots[j + 1];
    double dt = B.time - A.time;
    double tm = 0.5 * (A.time + B.time);
    std::vector<double> hm(n), ht(n);
    for (std::size_t i = 0; i < n; ++i) {
      hm[i] = 0.5 * (A.values[i] + B.values[i]);
      ht[i] = (B.values[i] - A.values[i]) / dt;
    }
    std::vector<double> hr = radial_gradient(r, hm);
    double slice = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double ri = r[i];
      double tau = tests.tau(tm, ri);
      double tau_t = tests.tau_t(tm, ri);
      double tau_r = tests.tau_r(tm, ri);
      double b = tests.b(tm, ri);
      double b_r = tests.b_r(tm, ri);
      if (tau == 0 && tau_t == 0 && tau_r == 0 && b == 0 && b_r == 0) continue;
      double e = grad_energy(hm, hr, i);
      double s = std::sin(hm[i]);
      double integrand =
          tau * ht[i] * ht[i] -
          0.5 * (tau_t + b_r + (d - 1) * b / ri) * e +
          tau_r * hr[i] * ht[i] + b * ht[i] * hr[i] + b_r * hr[i] * hr[i] +
          b * (d - 1) * s * s / (ri * ri * ri);
      double wq = 0.5 * (r[i + 1] - r[i - 1]) * std::pow(ri, d - 1);
      slice += integrand * wq;
    }
    rhs += slice * dt;
  }
  rhs *= omega;
  return lhs - rhs;
}

RegularityReport regularity_monitors(const Evolution& run) {
  RegularityReport rep;
  const auto& snaps = run.snapshots;
  require(snaps.size() >= 3, "run too short for monitors");
  const auto& r = snaps.front().grid->r;
  std::size_t n = r.size();

  std::vector<double> series_rdh, series_scaled;
  for (std::size_t j = 0; j < snaps.size(); ++j) {
    std::vector<double> hr = radial_gradient(r, snaps[j].values);
    double t = snaps[j].time;
    double sq = std::sqrt(std::max(t, 0.0));
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double a = std::fabs(hr[i]);
      m1 = std::max(m1, r[i] * a);
      double logf = 1.0;
      if (sq > 0 && r[i] < sq) {
        double y = std::log(r[i] / sq);
        logf = 1.0 + std::sqrt(1 + y * y);
      }
      m2 = std::max(m2, (r[i] + sq) * a / logf);
    }
    series_rdh.push_back(m1);
    series_scaled.push_back(m2);
    rep.sup_r_dh = std::max(rep.sup_r_dh, m1);
    rep.sup_scaled_dh = std::max(rep.sup_scaled_dh, m2);

    // Windowed Hoelder seminorm, exponent 1/2.
    double window = 0.1 * r.back();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      for (std::size_t k = i + 1; k < n && r[k] - r[i] <= window; ++k) {
        double dr = r[k] - r[i];
        if (dr <= 0) continue;
        rep.holder_seminorm =
            std::max(rep.holder_seminorm,
                     std::fabs(snaps[j].values[k] - snaps[j].values[i]) /
                         std::sqrt(dr));
      }
    }
  }

  for (std::size_t j = 0; j + 1 < snaps.size(); ++j) {
    double dt = snaps[j + 1].time - snaps[j].time;
    double tm = 0.5 * (snaps[j + 1].time + snaps[j].time);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double ht = (snaps[j + 1].values[i] - snaps[j].values[i]) / dt;
      rep.sup_scaled_dt =
          std::max(rep.sup_scaled_dt, (tm + r[i] * r[i]) * std::fabs(ht));
    }
  }

  auto half_ratio = [](const std::vector<double>& v) {
    std::size_t h = v.size() / 2;
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < h; ++i) a = std::max(a, v[i]);
    for (std::size_t i = h; i < v.size(); ++i) b = std::max(b, v[i]);
    return a > 0 ? b / a : 0.0;
  };
  rep.trend_r_dh = half_ratio(series_rdh);
  rep.trend_scaled_dh = half_ratio(series_scaled);
  return rep;
}

ThetaSeries theta_stability(const Evolution& run1, const Evolution& run2,
                            double delta) {
  require(run1.snapshots.size() == run2.snapshots.size(),
          "runs must share snapshot times");
  double cap = M_PI / 2 - delta;
  ThetaSeries out;
  for (std::size_t j = 0; j < run1.snapshots.size(); ++j) {
    const auto& a = run1.snapshots[j].values;
    const auto& b = run2.snapshots[j].values;
    require(a.size() == b.size(), "runs must share the grid");
    double sup = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] < -1e-12 || a[i] > cap + 1e-12 || b[i] < -1e-12 ||
          b[i] > cap + 1e-12)
        fail(ErrorKind::DomainViolation,
             "run left [0, pi/2 - delta] during theta check");
      double th = (1 - std::cos(a[i] - b[i])) / (std::cos(a[i]) * std::cos(b[i]));
      sup = std::max(sup, th);
    }
    out.time.push_back(run1.snapshots[j].time);
    out.sup_theta.push_back(sup);
  }
  double th0 = out.sup_theta.front();
  double worst = 0.0;
  for (double v : out.sup_theta) worst = std::max(worst, v);
  out.growth_constant = th0 > 0 ? worst / th0 : 0.0;
  return out;
}

}  // namespace xlab
