#include "expanderlab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "expanderlab/asymptotics.hpp"
#include "expanderlab/parallel.hpp"
#include "expanderlab/variation.hpp"

namespace xlab {

namespace {

constexpr double kHalfPi = M_PI / 2;

// Order 5 launches once the cubic coefficient gets large.
int launch_order(double alpha) { return std::fabs(alpha) > 5.0 ? 5 : 3; }

double tail_window_start(double rho_max) {
  return std::max(10.0, 0.62 * rho_max);
}

}  // namespace

double Profile::psi(double rho) const {
  if (rho <= params.rho0) {
    SeriesLaunch s = series_launch(params.d, params.alpha, params.pole,
                                   std::max(rho, 1e-300), launch_order(params.alpha));
    return s.value;
  }
  if (rho >= params.rho_max) return psi_inf + tail_coeff / (rho * rho);
  return trajectory.eval1(rho, 0);
}

double Profile::dpsi(double rho) const {
  if (rho <= params.rho0) {
    SeriesLaunch s = series_launch(params.d, params.alpha, params.pole,
                                   std::max(rho, 1e-300), launch_order(params.alpha));
    return s.derivative;
  }
  if (rho >= params.rho_max) return -2 * tail_coeff / (rho * rho * rho);
  return trajectory.eval1(rho, 1);
}

Profile solve_profile(const ProfileParams& params) {
  check_dimension(params.d);
  require(params.alpha >= 0, "shooting slope must be nonnegative");
  require(params.rho_max >= 10, "rho_max must be at least 10");
  require(params.tol > 0 && params.tol <= 1e-6, "tol outside (0, 1e-6]");

  Profile out;
  out.params = params;

  SeriesLaunch launch = series_launch(params.d, params.alpha, params.pole,
                                      params.rho0, launch_order(params.alpha));
  double y0[2] = {launch.value, launch.derivative};
  out.trajectory = integrate_adaptive(expander_field(params.d), y0,
                                      params.rho0, params.rho_max, params.tol);

  const Trajectory& traj = out.trajectory;
  out.psi_end = traj.state(traj.size() - 1, 0);

  if (params.alpha == 0.0) {
    out.psi_inf = (params.pole == Pole::North) ? 0.0 : M_PI;
    out.psi_inf_error = 0.0;
    out.tail_coeff = 0.0;
  } else {
    TailFit fit = tail_extrapolate(traj, 0, tail_window_start(params.rho_max),
                                   params.rho_max, 2);
    out.psi_inf = fit.limit;
    out.psi_inf_error = fit.error;
    out.tail_coeff = fit.coeff;
  }

  // Crossings of the equator: sign changes of psi - pi/2, root polished
  // on the dense output.
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    double a = traj.state(i, 0) - kHalfPi;
    double b = traj.state(i + 1, 0) - kHalfPi;
    if (a == 0.0) continue;
    if ((a < 0) != (b < 0)) {
      double lo = traj.node(i), hi = traj.node(i + 1);
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        double v = traj.eval1(mid, 0) - kHalfPi;
        if ((v < 0) == (a < 0))
          lo = mid;
        else
          hi = mid;
      }
      out.crossing_locations.push_back(0.5 * (lo + hi));
    }
  }
  out.crossings_of_equator = static_cast<int>(out.crossing_locations.size());
  return out;
}

BranchScan scan_branches(int d, double lo, double hi, int n,
                         const ScanOptions& opts) {
  check_dimension(d);
  require(lo >= 0 && lo < hi, "scan range must satisfy 0 <= lo < hi");
  require(n >= 2, "scan needs at least two samples");
  require(lo > 0, "log-spaced scan needs lo > 0");

  BranchScan scan;
  scan.d = d;
  scan.alphas.resize(n);
  scan.limits.resize(n);
  scan.crossings.resize(n);
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    scan.alphas[i] = std::exp(llo + (lhi - llo) * i / (n - 1));

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    ProfileParams p;
    p.d = d;
    p.alpha = scan.alphas[i];
    p.rho_max = opts.rho_max;
    p.tol = opts.tol;
    Profile prof = solve_profile(p);
    scan.limits[i] = prof.psi_inf;
    scan.crossings[i] = prof.crossings_of_equator;
  });
  return scan;
}

namespace {

struct LimitSample {
  double limit;
  int crossings;
};

LimitSample limit_at(int d, double alpha, const ScanOptions& opts) {
  ProfileParams p;
  p.d = d;
  p.alpha = alpha;
  p.rho_max = opts.rho_max;
  p.tol = opts.tol;
  Profile prof = solve_profile(p);
  return {prof.psi_inf, prof.crossings_of_equator};
}

}  // namespace

ShootResult shoot_for_limit(int d, double ell, int branch, double tol,
                            const ScanOptions& opts) {
  check_dimension(d);
  require(ell > 0 && ell < M_PI, "target limit must lie in (0, pi)");
  require(branch == 0 || branch == 1, "branch must be 0 or 1");
  require(tol > 0, "tol must be positive");

  ShootResult result;
  result.target_ell = ell;
  result.branch = branch;

  for (int n : {61, 241}) {
    BranchScan scan = scan_branches(d, 1e-3, 1e3, n, opts);
    for (int i = 0; i + 1 < n; ++i) {
      double ga = scan.limits[i] - ell;
      double gb = scan.limits[i + 1] - ell;
      if ((ga < 0) == (gb < 0)) continue;
      if (scan.crossings[i] != branch && scan.crossings[i + 1] != branch)
        continue;

      double lo = scan.alphas[i], hi = scan.alphas[i + 1];
      double glo = ga;
      result.bracket_history.push_back({lo, hi});
      double best_alpha = std::numeric_limits<double>::quiet_NaN();
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        LimitSample s = limit_at(d, mid, opts);
        ++result.iterations;
        double g = s.limit - ell;
        if (std::fabs(g) <= tol && s.crossings == branch) {
          best_alpha = mid;
          break;
        }
        if ((g < 0) == (glo < 0))
          lo = mid;
        else
          hi = mid;
        result.bracket_history.push_back({lo, hi});
        if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
      }
      if (std::isnan(best_alpha)) {
        // Converged onto a family boundary; take the side on the
        // requested family if it meets the tolerance.
        for (double cand : {lo, hi}) {
          LimitSample s = limit_at(d, cand, opts);
          if (std::fabs(s.limit - ell) <= tol && s.crossings == branch) {
            best_alpha = cand;
            break;
          }
        }
      }
      if (!std::isnan(best_alpha)) {
        result.alpha = best_alpha;
        return result;
      }
    }
  }
  fail(ErrorKind::NoBracket,
       "no alpha bracket attains the requested limit on branch " +
           std::to_string(branch));
}

Profile south_profile(int d, double ell, double tol, const ScanOptions& opts) {
  check_dimension(d);
  require(ell > 0 && ell < kHalfPi, "south limits lie in (0, pi/2)");

  ShootResult shot;
  try {
    shot = shoot_for_limit(d, M_PI - ell, 1, tol, opts);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NoBracket)
      fail(ErrorKind::NoBracket,
           "ell outside [pi/2 - delta*, pi/2) for south profiles");
    throw;
  }

  ProfileParams p;
  p.d = d;
  p.alpha = shot.alpha;
  p.rho_max = opts.rho_max;
  p.tol = opts.tol;
  Profile north = solve_profile(p);

  // psi -> pi - psi maps the branch-1 north profile to the south one.
  Profile south;
  south.params = north.params;
  south.params.pole = Pole::South;
  Trajectory traj(2, north.trajectory.tolerance_used());
  for (std::size_t i = 0; i < north.trajectory.size(); ++i) {
    double y[2] = {M_PI - north.trajectory.state(i, 0),
                   -north.trajectory.state(i, 1)};
    double dy[2] = {-north.trajectory.deriv(i, 0),
                    -north.trajectory.deriv(i, 1)};
    traj.push(north.trajectory.node(i), y, dy);
  }
  south.trajectory = std::move(traj);
  south.psi_inf = M_PI - north.psi_inf;
  south.psi_inf_error = north.psi_inf_error;
  south.psi_end = M_PI - north.psi_end;
  south.tail_coeff = -north.tail_coeff;
  south.crossings_of_equator = north.crossings_of_equator;
  south.crossing_locations = north.crossing_locations;
  return south;
}

bool CriticalParams::finite() const { return std::isfinite(alpha_star); }

namespace {

bool phi_positive(int d, double alpha, const ScanOptions& opts,
                  double* phi_inf_out = nullptr) {
  ProfileParams p;
  p.d = d;
  p.alpha = alpha;
  p.rho_max = opts.rho_max;
  p.tol = opts.tol;
  Profile prof = solve_profile(p);
  VariationSolution phi = solve_variation_phi(prof);
  if (phi_inf_out) *phi_inf_out = phi.limit.value_or(0.0);
  return phi.positive && phi.limit.value_or(-1.0) > 0.0;
}

}  // namespace

CriticalParams critical_params(int d, double tol, const ScanOptions& opts) {
  check_dimension(d);
  require(tol > 0, "tol must be positive");

  CriticalParams out;
  if (d >= 7) {
    out.alpha0 = std::numeric_limits<double>::infinity();
    out.alpha_star = std::numeric_limits<double>::infinity();
    out.ell_star = std::numeric_limits<double>::quiet_NaN();
    out.delta_star = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  // alpha0: the branch-0 limit attains pi/2 exactly there. Bisection on
  // the extrapolated limit keeps the answer stable under rho_max changes.
  auto limit_above = [&](double alpha) {
    return limit_at(d, alpha, opts).limit > kHalfPi;
  };
  double lo = 0.5, hi = 0.5;
  while (!limit_above(hi)) {
    lo = hi;
    hi *= 2;
    require(hi < 1e6, "alpha0 bracket not found");
  }
  while (hi - lo > tol * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    (limit_above(mid) ? hi : lo) = mid;
  }
  out.alpha0 = 0.5 * (lo + hi);

  // alpha*: first loss of positivity of phi_alpha.
  lo = out.alpha0 * (1 + 1e-4);
  hi = lo;
  while (phi_positive(d, hi, opts)) {
    lo = hi;
    hi *= 1.15;
    require(hi < 1e6, "alpha* bracket not found");
  }
  while (hi - lo > tol * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    (phi_positive(d, mid, opts) ? lo : hi) = mid;
  }
  out.alpha_star = 0.5 * (lo + hi);

  // Candidates where phi_alpha(inf) changes sign inside (alpha0, alpha*).
  {
    int m = 16;
    double prev = 0.0;
    for (int i = 0; i < m; ++i) {
      double a = out.alpha0 * (1 + 1e-3) +
                 (out.alpha_star * (1 - 1e-3) - out.alpha0 * (1 + 1e-3)) * i /
                     (m - 1);
      double phi_inf = 0.0;
      phi_positive(d, a, opts, &phi_inf);
      if (i > 0 && (phi_inf < 0) != (prev < 0))
        out.phi_inf_sign_changes.push_back(a);
      prev = phi_inf;
    }
  }

  ProfileParams p;
  p.d = d;
  p.alpha = out.alpha_star;
  p.rho_max = opts.rho_max;
  p.tol = opts.tol;
  out.ell_star = solve_profile(p).psi_inf;
  out.delta_star = out.ell_star - kHalfPi;
  return out;
}

}  // namespace xlab
