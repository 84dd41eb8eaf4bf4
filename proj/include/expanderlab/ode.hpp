#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "expanderlab/errors.hpp"

namespace xlab {

// Right-hand side of a first-order system y' = f(rho, y) on the half line.
struct VectorField {
  int dimension = 0;
  std::function<void(double rho, std::span<const double> y,
                     std::span<double> dy)>
      eval;
};

// Accepted nodes of an adaptive integration together with the state and its
// derivative at each node. Dense output is cubic Hermite on each interval.
class Trajectory {
public:
  Trajectory() = default;
  Trajectory(int dim, double tol) : dim_(dim), tolerance_used_(tol) {}

  int dim() const { return dim_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  double tolerance_used() const { return tolerance_used_; }

  const std::vector<double>& nodes() const { return nodes_; }
  double node(std::size_t i) const { return nodes_[i]; }
  double front() const { return nodes_.front(); }
  double back() const { return nodes_.back(); }

  double state(std::size_t i, int k) const { return states_[i * dim_ + k]; }
  double deriv(std::size_t i, int k) const { return derivs_[i * dim_ + k]; }

  void push(double rho, std::span<const double> y, std::span<const double> dy);

  // Hermite interpolation of the state; rho must lie inside [front, back].
  void eval(double rho, std::span<double> out) const;
  double eval1(double rho, int k = 0) const;

  // Componentwise series extracted for fitting.
  std::vector<double> component(int k) const;

  void scale(double factor);
  void reverse();

private:
  std::size_t locate(double rho) const;

  int dim_ = 0;
  double tolerance_used_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> states_;
  std::vector<double> derivs_;
};

struct IntegrateOptions {
  double max_step = 1.0;
  double initial_step = 0.0;  // 0 = automatic
  double abs_floor = 1e-14;
  std::size_t max_steps = 2000000;
};

// Embedded Dormand-Prince 4(5) with PI step control and mixed
// absolute/relative error weighting.
Trajectory integrate_adaptive(const VectorField& field,
                              std::span<const double> state0,
                              double rho_a, double rho_b, double tol,
                              const IntegrateOptions& opts = {});

// --------------------------------------------------------------------------
// The expander equation and its launch at the regular singular origin.
// --------------------------------------------------------------------------

enum class Pole { North, South };

void check_dimension(int d);

// psi'' + ((d-1)/rho + rho/2) psi' - (d-1)/(2 rho^2) sin(2 psi) = 0
VectorField expander_field(int d);

// Residual of (psi, psi', psi'') in the expander equation at rho.
double expander_residual(int d, double rho, double psi, double dpsi,
                         double ddpsi);

// Third derivative from the equation, used for residual checks of
// companion linear equations.
double expander_d3(int d, double rho, double psi, double dpsi);

// Cubic and quintic coefficients of psi = alpha rho + a rho^3 + b rho^5 + ...
double series_a3(int d, double alpha);
double series_b5(int d, double alpha);

struct SeriesLaunch {
  double rho0 = 0.0;
  int order = 3;
  double value = 0.0;
  double derivative = 0.0;
};

SeriesLaunch series_launch(int d, double alpha, Pole pole, double rho0,
                           int order);

}  // namespace xlab
