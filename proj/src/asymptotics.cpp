#include "expanderlab/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "expanderlab/parallel.hpp"
#include "expanderlab/profile.hpp"

namespace xlab {

namespace {

// Small least-squares y ~ sum_k c_k basis_k(x) via normal equations.
// Returns coefficients and the RMS residual.
template <int K>
std::pair<std::array<double, K>, double> least_squares(
    std::span<const double> x, std::span<const double> y,
    const std::function<double(double, int)>& basis) {
  std::array<std::array<double, K>, K> ata{};
  std::array<double, K> atb{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::array<double, K> row;
    for (int k = 0; k < K; ++k) row[k] = basis(x[i], k);
    for (int a = 0; a < K; ++a) {
      atb[a] += row[a] * y[i];
      for (int b = 0; b < K; ++b) ata[a][b] += row[a] * row[b];
    }
  }
  // Gaussian elimination with partial pivoting.
  std::array<double, K> sol{};
  std::array<std::array<double, K + 1>, K> m{};
  for (int a = 0; a < K; ++a) {
    for (int b = 0; b < K; ++b) m[a][b] = ata[a][b];
    m[a][K] = atb[a];
  }
  for (int col = 0; col < K; ++col) {
    int piv = col;
    for (int r = col + 1; r < K; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    if (m[col][col] == 0.0)
      fail(ErrorKind::BadFit, "singular normal equations in tail fit");
    for (int r = 0; r < K; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      for (int c = col; c <= K; ++c) m[r][c] -= f * m[col][c];
    }
  }
  for (int a = 0; a < K; ++a) sol[a] = m[a][K] / m[a][a];

  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double fit = 0.0;
    for (int k = 0; k < K; ++k) fit += sol[k] * basis(x[i], k);
    rss += (y[i] - fit) * (y[i] - fit);
  }
  return {sol, std::sqrt(rss / x.size())};
}

TailFit fit_tail(std::span<const double> rho, std::span<const double> values,
                 int order) {
  // Scale u = 1/rho^2 by its largest sample to condition the normal
  // equations.
  double umax = 0.0;
  std::vector<double> u(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    u[i] = 1.0 / (rho[i] * rho[i]);
    umax = std::max(umax, u[i]);
  }
  for (auto& v : u) v /= umax;

  TailFit out;
  if (order >= 2) {
    auto [sol, rms] = least_squares<3>(
        u, values, [](double x, int k) { return k == 0 ? 1.0 : (k == 1 ? x : x * x); });
    out.limit = sol[0];
    out.coeff = sol[1] / umax;
    out.error = rms;
  } else {
    auto [sol, rms] = least_squares<2>(
        u, values, [](double x, int k) { return k == 0 ? 1.0 : x; });
    out.limit = sol[0];
    out.coeff = sol[1] / umax;
    out.error = rms;
  }
  return out;
}

}  // namespace

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "linear fit needs data");
  auto [sol, rms] = least_squares<2>(
      x, y, [](double v, int k) { return k == 0 ? 1.0 : v; });
  return {sol[0], sol[1], rms};
}

TailFit tail_extrapolate(std::span<const double> nodes,
                         std::span<const double> values, double rho_a,
                         double rho_b, int order) {
  require(nodes.size() == values.size(), "node/value size mismatch");
  require(rho_a >= 10.0, "tail window must start at rho >= 10");
  require(rho_a < rho_b, "tail window must be increasing");
  require(order == 1 || order == 2, "tail fit order must be 1 or 2");

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] >= rho_a && nodes[i] <= rho_b) {
      xs.push_back(nodes[i]);
      ys.push_back(values[i]);
    }
  }
  if (xs.size() < static_cast<std::size_t>(order + 4))
    fail(ErrorKind::BadFit, "too few samples in tail window");

  TailFit fit = fit_tail(xs, ys, order);
  if (fit.error > 1e-3 * std::max(1.0, std::fabs(fit.limit)))
    fail(ErrorKind::BadFit, "tail fit residual too large");
  return fit;
}

TailFit tail_extrapolate(const Trajectory& traj, int component, double rho_a,
                         double rho_b, int order) {
  rho_a = std::max(rho_a, traj.front());
  rho_b = std::min(rho_b, traj.back());
  require(rho_a >= 10.0, "tail window must start at rho >= 10");
  require(rho_a < rho_b, "tail window must be increasing");

  constexpr int kSamples = 80;
  std::vector<double> xs(kSamples), ys(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    xs[i] = rho_a + (rho_b - rho_a) * i / (kSamples - 1);
    ys[i] = traj.eval1(xs[i], component);
  }
  TailFit fit = fit_tail(xs, ys, order);
  if (fit.error > 1e-3 * std::max(1.0, std::fabs(fit.limit)))
    fail(ErrorKind::BadFit, "tail fit residual too large");
  return fit;
}

DecayFit fit_decay(std::span<const double> nodes,
                   std::span<const double> values, DecayModel model, int d) {
  require(nodes.size() == values.size(), "node/value size mismatch");
  require(nodes.size() >= 10, "decay fit needs at least 10 nodes");
  require(nodes.back() >= 3 * nodes.front(),
          "decay fit window must span a factor of 3 in rho");
  if (model == DecayModel::GaussianWeighted)
    require(d >= 3, "gaussian-weighted fit needs the dimension");

  std::vector<double> lx, ly;
  double sign_acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    double v = values[i];
    if (model == DecayModel::GaussianWeighted) {
      double m = std::pow(nodes[i], 1 - d) * std::exp(-nodes[i] * nodes[i] / 4);
      v /= m;
    }
    if (v == 0.0 || !std::isfinite(v)) continue;
    sign_acc += (v > 0) ? 1.0 : -1.0;
    lx.push_back(std::log(nodes[i]));
    ly.push_back(std::log(std::fabs(v)));
  }
  if (lx.size() < 10) fail(ErrorKind::BadFit, "too few usable samples");

  auto [sol, rms] = least_squares<2>(
      lx, ly, [](double x, int k) { return k == 0 ? 1.0 : x; });
  DecayFit out;
  out.exponent = sol[1];
  out.prefactor = (sign_acc >= 0 ? 1.0 : -1.0) * std::exp(sol[0]);
  out.residual = rms;
  if (out.residual >= 0.1)
    fail(ErrorKind::BadFit, "log-log fit residual above 0.1");
  return out;
}

Potential profile_potential(const Profile& profile) {
  int d = profile.params.d;
  Potential pot;
  pot.eval = [d, profile](double rho) {
    return (d - 1) / (rho * rho) * std::cos(2 * profile.psi(rho));
  };
  double c0 = 0.0;
  for (int i = 0; i < 100; ++i) {
    double rho = std::exp(std::log(1e-3) +
                          (std::log(profile.params.rho_max) - std::log(1e-3)) *
                              i / 99.0);
    double psi = profile.psi(rho);
    double dpsi = profile.dpsi(rho);
    double V = (d - 1) / (rho * rho) * std::cos(2 * psi);
    double dV = (d - 1) * (-2 * std::cos(2 * psi) / (rho * rho * rho) -
                           2 * std::sin(2 * psi) * dpsi / (rho * rho));
    c0 = std::max({c0, std::fabs(V) * rho * rho,
                   std::fabs(dV) * rho * rho * rho});
  }
  pot.bound_C0 = c0;
  return pot;
}

namespace {

VectorField linear_field(const Potential& potential, int d) {
  VectorField f;
  f.dimension = 2;
  f.eval = [&potential, d](double rho, std::span<const double> y,
                           std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -((d - 1) / rho + rho / 2) * y[1] + potential.eval(rho) * y[0];
  };
  return f;
}

// Defect against a reference run at tol/100, relative to the solution
// scale; this is what "satisfies the equation to 100*tol" means here.
double reference_defect(const VectorField& field, const Trajectory& traj,
                        double tol) {
  double y0[2] = {traj.state(0, 0), traj.state(0, 1)};
  Trajectory ref = integrate_adaptive(field, y0, traj.front(), traj.back(),
                                      tol * 1e-2);
  double worst = 0.0;
  for (int i = 0; i < 64; ++i) {
    double rho = traj.front() +
                 (traj.back() - traj.front()) * (i + 0.5) / 64.0;
    double u = traj.eval1(rho, 0);
    double ur = ref.eval1(rho, 0);
    double scale = std::max({std::fabs(u), std::fabs(ur), 1e-30});
    worst = std::max(worst, std::fabs(u - ur) / scale);
  }
  return worst;
}

}  // namespace

BasisPair basis_at_infinity(const Potential& potential, int d, double R,
                            double rho_max, double tol) {
  check_dimension(d);
  require(R > 0 && R < rho_max, "basis launch radius outside (0, rho_max)");

  BasisPair out;

  // phi2: forward from (1, 0) at R, rescaled so phi2 -> 1.
  {
    VectorField field = linear_field(potential, d);
    double y0[2] = {1.0, 0.0};
    Trajectory traj = integrate_adaptive(field, y0, R, rho_max, tol);
    TailFit fit = tail_extrapolate(traj, 0, std::max(10.0, 0.62 * rho_max),
                                   rho_max, 2);
    if (std::fabs(fit.limit) < 1e-12)
      fail(ErrorKind::IntegrationFailure, "phi2 limit vanished");
    out.phi2.max_ode_residual = reference_defect(field, traj, tol);
    traj.scale(1.0 / fit.limit);
    out.phi2.kind = VariationKind::Phi2;
    out.phi2.trajectory = std::move(traj);
    out.phi2.limit = 1.0;
    out.phi2.limit_error = fit.error / std::fabs(fit.limit);
  }

  // phi1: gauge out the Gaussian, g = phi1 rho^d e^{rho^2/4}, and march the
  // g equation backward (that direction makes phi1 the dominant mode):
  //   g'' - ((d+1)/rho + rho/2) g' + (2d/rho^2 - V) g = 0.
  {
    VectorField back;
    back.dimension = 2;
    back.eval = [&potential, d](double sigma, std::span<const double> y,
                                std::span<double> dy) {
      double rho = -sigma;
      dy[0] = -y[1];
      dy[1] = -(((d + 1) / rho + rho / 2) * y[1] -
                (2.0 * d / (rho * rho) - potential.eval(rho)) * y[0]);
    };
    double y0[2] = {1.0, 0.0};
    Trajectory gtraj = integrate_adaptive(back, y0, -rho_max, -R, tol);
    out.phi1.max_ode_residual = reference_defect(back, gtraj, tol);

    Trajectory traj(2, tol);
    // Nodes arrive with sigma increasing, i.e. rho decreasing; rebuild in
    // increasing rho with phi1 = m g, phi1' = m (g' + m'/m g).
    std::vector<std::size_t> order(gtraj.size());
    for (std::size_t i = 0; i < gtraj.size(); ++i)
      order[i] = gtraj.size() - 1 - i;
    for (std::size_t idx : order) {
      double rho = -gtraj.node(idx);
      double g = gtraj.state(idx, 0);
      double dg = gtraj.state(idx, 1);
      double m = std::pow(rho, -d) * std::exp(-rho * rho / 4);
      double mp_over_m = -d / rho - rho / 2;
      double phi = m * g;
      double dphi = m * (dg + mp_over_m * g);
      double ddphi = -((d - 1) / rho + rho / 2) * dphi +
                     potential.eval(rho) * phi;
      double y[2] = {phi, dphi};
      double dy[2] = {dphi, ddphi};
      traj.push(rho, y, dy);
    }
    out.phi1.kind = VariationKind::Phi1;
    out.phi1.trajectory = std::move(traj);
    out.phi1.limit = 0.0;
  }
  return out;
}

double estimate_r0(const Potential& potential, int d, double rho_max,
                   double tol) {
  check_dimension(d);
  constexpr int kProbes = 20;
  double lo = 0.5, hi = std::min(15.0, rho_max / 2);
  std::vector<double> radii(kProbes);
  for (int i = 0; i < kProbes; ++i)
    radii[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i /
                                           (kProbes - 1));

  std::vector<bool> pass(kProbes, false);
  parallel_for(kProbes, [&](std::size_t i) {
    double R = radii[i];
    double y0[2] = {0.0, 1.0};
    Trajectory traj =
        integrate_adaptive(linear_field(potential, d), y0, R, rho_max, tol);
    double maxabs = 0.0, minval = 1e300;
    for (std::size_t k = 1; k < traj.size(); ++k) {
      double v = traj.state(k, 0);
      maxabs = std::max(maxabs, std::fabs(v));
      minval = std::min(minval, v);
      if (k + 1 < traj.size()) {
        double mid = 0.5 * (traj.node(k) + traj.node(k + 1));
        minval = std::min(minval, traj.eval1(mid, 0));
      }
    }
    bool positive = minval > 0.0;
    bool nonzero_limit = false;
    try {
      TailFit fit = tail_extrapolate(traj, 0, std::max(10.0, 0.62 * rho_max),
                                     rho_max, 1);
      nonzero_limit = std::fabs(fit.limit) > 1e-6 * std::max(1.0, maxabs);
    } catch (const Error&) {
      nonzero_limit = false;
    }
    pass[i] = positive && nonzero_limit;
  });

  for (int i = 0; i < kProbes; ++i) {
    bool all = true;
    for (int k = i; k < kProbes; ++k) all = all && pass[k];
    if (all) return radii[i];
  }
  fail(ErrorKind::NoBracket, "no launch radius satisfied the crossing rule");
}

}  // namespace xlab
