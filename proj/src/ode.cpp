#include "expanderlab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xlab {

void Trajectory::push(double rho, std::span<const double> y,
                      std::span<const double> dy) {
  if (!nodes_.empty() && rho <= nodes_.back())
    fail(ErrorKind::InvalidArgument, "trajectory nodes must increase");
  nodes_.push_back(rho);
  states_.insert(states_.end(), y.begin(), y.end());
  derivs_.insert(derivs_.end(), dy.begin(), dy.end());
}

std::size_t Trajectory::locate(double rho) const {
  if (nodes_.size() < 2 || rho < nodes_.front() - 1e-12 ||
      rho > nodes_.back() + 1e-12)
    fail(ErrorKind::InvalidArgument, "dense output query outside trajectory");
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), rho);
  std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
  if (i == 0) return 0;
  if (i >= nodes_.size()) return nodes_.size() - 2;
  return i - 1;
}

void Trajectory::eval(double rho, std::span<double> out) const {
  std::size_t i = locate(rho);
  double h = nodes_[i + 1] - nodes_[i];
  double t = (rho - nodes_[i]) / h;
  double t2 = t * t, t3 = t2 * t;
  double h00 = 2 * t3 - 3 * t2 + 1;
  double h10 = t3 - 2 * t2 + t;
  double h01 = -2 * t3 + 3 * t2;
  double h11 = t3 - t2;
  for (int k = 0; k < dim_; ++k) {
    out[k] = h00 * states_[i * dim_ + k] + h10 * h * derivs_[i * dim_ + k] +
             h01 * states_[(i + 1) * dim_ + k] +
             h11 * h * derivs_[(i + 1) * dim_ + k];
  }
}

double Trajectory::eval1(double rho, int k) const {
  std::size_t i = locate(rho);
  double h = nodes_[i + 1] - nodes_[i];
  double t = (rho - nodes_[i]) / h;
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * states_[i * dim_ + k] +
         (t3 - 2 * t2 + t) * h * derivs_[i * dim_ + k] +
         (-2 * t3 + 3 * t2) * states_[(i + 1) * dim_ + k] +
         (t3 - t2) * h * derivs_[(i + 1) * dim_ + k];
}

std::vector<double> Trajectory::component(int k) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = state(i, k);
  return out;
}

void Trajectory::scale(double factor) {
  for (auto& v : states_) v *= factor;
  for (auto& v : derivs_) v *= factor;
}

void Trajectory::reverse() {
  std::size_t n = size();
  std::vector<double> nodes(n), states(states_.size()), derivs(derivs_.size());
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = nodes_[n - 1 - i];
    for (int k = 0; k < dim_; ++k) {
      states[i * dim_ + k] = states_[(n - 1 - i) * dim_ + k];
      derivs[i * dim_ + k] = derivs_[(n - 1 - i) * dim_ + k];
    }
  }
  nodes_ = std::move(nodes);
  states_ = std::move(states);
  derivs_ = std::move(derivs);
}

// --------------------------------------------------------------------------
// Dormand-Prince 4(5)
// --------------------------------------------------------------------------

namespace {

constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                 kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                 kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
// Difference between the 5th order weights and the embedded 4th order ones.
constexpr double kE1 = kB1 - 5179.0 / 57600;
constexpr double kE3 = kB3 - 7571.0 / 16695;
constexpr double kE4 = kB4 - 393.0 / 640;
constexpr double kE5 = kB5 + 92097.0 / 339200;
constexpr double kE6 = kB6 - 187.0 / 2100;
constexpr double kE7 = -1.0 / 40;

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

Trajectory integrate_adaptive(const VectorField& field,
                              std::span<const double> state0, double rho_a,
                              double rho_b, double tol,
                              const IntegrateOptions& opts) {
  require(field.dimension > 0 && field.eval, "vector field not set");
  require(static_cast<int>(state0.size()) == field.dimension,
          "state size mismatch");
  require(rho_a < rho_b, "integration span must be increasing");
  require(tol > 0, "tolerance must be positive");

  const int n = field.dimension;
  std::vector<double> y(state0.begin(), state0.end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  std::vector<double> ytmp(n), ynew(n), err(n);

  double rho = rho_a;
  field.eval(rho, y, k1);
  if (!all_finite(y) || !all_finite(k1))
    fail(ErrorKind::NonFiniteState, "non-finite state at launch");

  Trajectory traj(n, tol);
  traj.push(rho, y, k1);

  double h = opts.initial_step > 0 ? opts.initial_step
                                   : std::min(opts.max_step, (rho_b - rho_a) / 10);
  if (rho_a > 0) h = std::min(h, rho_a);  // singular-origin launches start small
  h = std::min(h, rho_b - rho_a);
  double err_prev = 1.0;
  std::size_t steps = 0;

  while (rho < rho_b) {
    if (++steps > opts.max_steps)
      fail(ErrorKind::IntegrationFailure, "step budget exhausted");
    h = std::min(h, rho_b - rho);
    if (h < 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, rho))
      fail(ErrorKind::StepUnderflow, "step size underflow at rho=" +
                                         std::to_string(rho));

    auto stage = [&](double c, auto&&... aks) {
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        ((acc += aks.first * aks.second[i]), ...);
        ytmp[i] = y[i] + h * acc;
      }
      (void)c;
    };

    stage(0.2, std::pair{kA21, k1.data()});
    field.eval(rho + 0.2 * h, ytmp, k2);
    stage(0.3, std::pair{kA31, k1.data()}, std::pair{kA32, k2.data()});
    field.eval(rho + 0.3 * h, ytmp, k3);
    stage(0.8, std::pair{kA41, k1.data()}, std::pair{kA42, k2.data()},
          std::pair{kA43, k3.data()});
    field.eval(rho + 0.8 * h, ytmp, k4);
    stage(8.0 / 9, std::pair{kA51, k1.data()}, std::pair{kA52, k2.data()},
          std::pair{kA53, k3.data()}, std::pair{kA54, k4.data()});
    field.eval(rho + 8.0 / 9 * h, ytmp, k5);
    stage(1.0, std::pair{kA61, k1.data()}, std::pair{kA62, k2.data()},
          std::pair{kA63, k3.data()}, std::pair{kA64, k4.data()},
          std::pair{kA65, k5.data()});
    field.eval(rho + h, ytmp, k6);
    for (int i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (kB1 * k1[i] + kB3 * k3[i] + kB4 * k4[i] +
                            kB5 * k5[i] + kB6 * k6[i]);
    field.eval(rho + h, ynew, k7);

    if (!all_finite(ynew) || !all_finite(k7))
      fail(ErrorKind::NonFiniteState,
           "non-finite state at rho=" + std::to_string(rho + h));

    double errnorm = 0.0;
    for (int i = 0; i < n; ++i) {
      double e = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] + kE5 * k5[i] +
                      kE6 * k6[i] + kE7 * k7[i]);
      double sc = opts.abs_floor +
                  tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
      errnorm += (e / sc) * (e / sc);
    }
    errnorm = std::sqrt(errnorm / n);

    if (errnorm <= 1.0) {
      rho += h;
      y = ynew;
      k1 = k7;  // FSAL
      traj.push(rho, y, k1);
      double fac = 0.9 * std::pow(std::max(errnorm, 1e-10), -0.7 / 5.0) *
                   std::pow(err_prev, 0.4 / 5.0);
      h *= std::clamp(fac, 0.2, 5.0);
      h = std::min(h, opts.max_step);
      err_prev = std::max(errnorm, 1e-10);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(errnorm, -0.7 / 5.0));
    }
  }
  return traj;
}

// --------------------------------------------------------------------------
// Expander equation
// --------------------------------------------------------------------------

void check_dimension(int d) {
  require(d >= 3, "dimension must be at least 3");
}

VectorField expander_field(int d) {
  check_dimension(d);
  VectorField f;
  f.dimension = 2;
  f.eval = [d](double rho, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -((d - 1) / rho + rho / 2) * y[1] +
            (d - 1) / (2 * rho * rho) * std::sin(2 * y[0]);
  };
  return f;
}

double expander_residual(int d, double rho, double psi, double dpsi,
                         double ddpsi) {
  return ddpsi + ((d - 1) / rho + rho / 2) * dpsi -
         (d - 1) / (2 * rho * rho) * std::sin(2 * psi);
}

double expander_d3(int d, double rho, double psi, double dpsi) {
  double s = std::sin(2 * psi), c = std::cos(2 * psi);
  double p = (d - 1) / rho + rho / 2;
  double ddpsi = -p * dpsi + (d - 1) / (2 * rho * rho) * s;
  return -p * ddpsi - (-(d - 1) / (rho * rho) + 0.5) * dpsi -
         (d - 1) / (rho * rho * rho) * s + (d - 1) / (rho * rho) * c * dpsi;
}

double series_a3(int d, double alpha) {
  return -(alpha / 2 + (2.0 / 3) * (d - 1) * alpha * alpha * alpha) /
         (2 * d + 4);
}

double series_b5(int d, double alpha) {
  double a = series_a3(d, alpha);
  double a5 = std::pow(alpha, 5);
  return (-(1.5 + 2 * (d - 1) * alpha * alpha) * a +
          (2.0 / 15) * (d - 1) * a5) /
         (4 * d + 16);
}

SeriesLaunch series_launch(int d, double alpha, Pole pole, double rho0,
                           int order) {
  check_dimension(d);
  require(rho0 > 0 && rho0 <= 0.1, "launch radius outside (0, 0.1]");
  require(order == 3 || order == 5, "series order must be 3 or 5");
  require(std::isfinite(alpha), "alpha must be finite");

  double a = series_a3(d, alpha);
  double value = alpha * rho0 + a * rho0 * rho0 * rho0;
  double deriv = alpha + 3 * a * rho0 * rho0;
  if (order == 5) {
    double b = series_b5(d, alpha);
    value += b * std::pow(rho0, 5);
    deriv += 5 * b * std::pow(rho0, 4);
  }
  SeriesLaunch out{rho0, order, value, deriv};
  if (pole == Pole::South) {
    out.value = M_PI - out.value;
    out.derivative = -out.derivative;
  }
  return out;
}

}  // namespace xlab
