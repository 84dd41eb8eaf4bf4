#include "expanderlab/variation.hpp"

#include <cmath>

#include "expanderlab/asymptotics.hpp"
#include "expanderlab/profile.hpp"

namespace xlab {

double weight_z(double rho) {
  if (rho <= 1.0) return rho;
  if (rho >= 2.0) return rho * rho;
  double t = rho - 1.0;  // cubic with Z(1)=1, Z'(1)=1, Z(2)=4, Z'(2)=4
  return 1 + t + 3 * t * t - t * t * t;
}

double weight_z_deriv(double rho) {
  if (rho <= 1.0) return 1.0;
  if (rho >= 2.0) return 2 * rho;
  double t = rho - 1.0;
  return 1 + 6 * t - 3 * t * t;
}

namespace {

double tail_window_start(double rho_max) {
  return std::max(10.0, 0.62 * rho_max);
}

// u'' + ((d-1)/rho + rho/2) u' - (d-1)/rho^2 cos(2 psi) u + extra(rho) u = 0
VectorField variation_field(const Profile& profile,
                            const std::function<double(double)>& extra) {
  int d = profile.params.d;
  VectorField f;
  f.dimension = 2;
  f.eval = [d, &profile, extra](double rho, std::span<const double> y,
                                std::span<double> dy) {
    double V = (d - 1) / (rho * rho) * std::cos(2 * profile.psi(rho));
    dy[0] = y[1];
    dy[1] = -((d - 1) / rho + rho / 2) * y[1] + (V - extra(rho)) * y[0];
  };
  return f;
}

struct LaunchCubic {
  double beta = 0.0;   // rho^2 coefficient
  double gamma = 0.0;  // rho^3 coefficient
};

VariationSolution integrate_variation(const Profile& profile,
                                      VariationKind kind,
                                      const std::function<double(double)>& extra,
                                      const LaunchCubic& c) {
  const ProfileParams& p = profile.params;
  double rho0 = p.rho0;
  double y0[2] = {rho0 + c.beta * rho0 * rho0 + c.gamma * rho0 * rho0 * rho0,
                  1 + 2 * c.beta * rho0 + 3 * c.gamma * rho0 * rho0};

  VariationSolution out;
  out.kind = kind;
  VectorField field = variation_field(profile, extra);
  out.trajectory =
      integrate_adaptive(field, y0, rho0, p.rho_max, p.tol);

  const Trajectory& traj = out.trajectory;
  out.min_value = traj.state(0, 0);
  out.min_location = traj.node(0);
  out.positive = true;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    double v = traj.state(i, 0);
    double rho = traj.node(i);
    if (i + 1 < traj.size()) {  // interval midpoint, via dense output
      double mid = 0.5 * (rho + traj.node(i + 1));
      double vm = traj.eval1(mid, 0);
      if (vm < out.min_value) {
        out.min_value = vm;
        out.min_location = mid;
      }
    }
    if (v < out.min_value) {
      out.min_value = v;
      out.min_location = rho;
    }
  }
  if (out.min_value <= 0.0) out.positive = false;
  return out;
}

}  // namespace

VariationSolution solve_variation_phi(const Profile& profile) {
  const ProfileParams& p = profile.params;
  double alpha = p.alpha;
  LaunchCubic c;
  c.gamma = -(0.5 + 2 * (p.d - 1) * alpha * alpha) / (2 * p.d + 4);
  VariationSolution out = integrate_variation(
      profile, VariationKind::PhiAlpha, [](double) { return 0.0; }, c);
  TailFit fit = tail_extrapolate(out.trajectory, 0,
                                 tail_window_start(p.rho_max), p.rho_max, 2);
  out.limit = fit.limit;
  out.limit_error = fit.error;
  return out;
}

VariationSolution solve_variation_underline(const Profile& profile) {
  const ProfileParams& p = profile.params;
  require(p.alpha != 0.0, "underline-phi undefined at alpha = 0");
  int d = p.d;

  VariationSolution out;
  out.kind = VariationKind::UnderlinePhi;
  Trajectory traj(2, profile.trajectory.tolerance_used());
  double max_rel = 0.0;
  for (std::size_t i = 0; i < profile.trajectory.size(); ++i) {
    double rho = profile.trajectory.node(i);
    double psi = profile.trajectory.state(i, 0);
    double dpsi = profile.trajectory.state(i, 1);
    double ddpsi = -((d - 1) / rho + rho / 2) * dpsi +
                   (d - 1) / (2 * rho * rho) * std::sin(2 * psi);
    double u = rho * dpsi / p.alpha;
    double du = (dpsi + rho * ddpsi) / p.alpha;
    double y[2] = {u, du};
    double dy[2] = {du, (2 * ddpsi + rho * expander_d3(d, rho, psi, dpsi)) /
                            p.alpha};
    traj.push(rho, y, dy);

    // Defect in:  u'' + P u' - V u = -u
    double V = (d - 1) / (rho * rho) * std::cos(2 * psi);
    double P = (d - 1) / rho + rho / 2;
    double r = dy[1] + P * du - V * u + u;
    double scale = std::fabs(dy[1]) + std::fabs(P * du) + std::fabs(V * u) +
                   std::fabs(u) + 1e-300;
    max_rel = std::max(max_rel, std::fabs(r) / scale);
  }
  out.trajectory = std::move(traj);
  out.max_ode_residual = max_rel;

  out.min_value = out.trajectory.state(0, 0);
  out.min_location = out.trajectory.node(0);
  for (std::size_t i = 0; i < out.trajectory.size(); ++i) {
    double v = out.trajectory.state(i, 0);
    if (v < out.min_value) {
      out.min_value = v;
      out.min_location = out.trajectory.node(i);
    }
  }
  out.positive = out.min_value > 0.0;

  TailFit fit = tail_extrapolate(out.trajectory, 0,
                                 tail_window_start(p.rho_max), p.rho_max, 2);
  out.limit = fit.limit;
  out.limit_error = fit.error;
  return out;
}

VariationSolution solve_w(const Profile& profile, double kappa) {
  require(kappa >= 0, "kappa must be nonnegative");
  const ProfileParams& p = profile.params;
  double alpha = p.alpha;
  LaunchCubic c;
  c.beta = -kappa / (p.d + 1);
  c.gamma = -(0.5 + 2 * (p.d - 1) * alpha * alpha - kappa * kappa / (p.d + 1)) /
            (2 * p.d + 4);
  VariationSolution out = integrate_variation(
      profile, VariationKind::W, [kappa](double rho) { return kappa / weight_z(rho); },
      c);
  out.parameter = kappa;
  if (!out.positive)
    fail(ErrorKind::PositivityLost,
         "w vanished at rho=" + std::to_string(out.min_location) +
             " (kappa above threshold)");
  TailFit fit = tail_extrapolate(out.trajectory, 0,
                                 tail_window_start(p.rho_max), p.rho_max, 2);
  out.limit = fit.limit;
  out.limit_error = fit.error;
  if (fit.limit <= 0.0)
    fail(ErrorKind::PositivityLost, "w limit not positive");
  return out;
}

VariationSolution solve_y(const Profile& profile) {
  const ProfileParams& p = profile.params;
  double alpha = p.alpha;
  LaunchCubic c;
  c.gamma = -(1.0 + 2 * (p.d - 1) * alpha * alpha) / (2 * p.d + 4);
  VariationSolution out = integrate_variation(
      profile, VariationKind::Y, [](double) { return 0.5; }, c);

  // rho * y has a limit; fit it on the tail window.
  std::vector<double> nodes(out.trajectory.nodes());
  std::vector<double> ry(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    ry[i] = nodes[i] * out.trajectory.state(i, 0);
  TailFit fit = tail_extrapolate(nodes, ry, tail_window_start(p.rho_max),
                                 p.rho_max, 2);
  out.limit = fit.limit;
  out.limit_error = fit.error;
  return out;
}

KappaBracket kappa_threshold(const Profile& profile, double tol) {
  auto positive = [&](double kappa) {
    try {
      solve_w(profile, kappa);
      return true;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::PositivityLost) return false;
      throw;
    }
  };

  double lo = 0.0, hi = 1.0;
  while (positive(hi)) {
    lo = hi;
    hi *= 2;
    require(hi < 1e8, "kappa threshold bracket not found");
  }
  while (hi - lo > tol * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    (positive(mid) ? lo : hi) = mid;
  }
  return {lo, hi};
}

}  // namespace xlab
