#pragma once

#include <functional>
#include <span>

#include "expanderlab/ode.hpp"
#include "expanderlab/variation.hpp"

namespace xlab {

struct Profile;

// Potential V with |V| <= C0/rho^2 and |V'| <= C0/rho^3 on the working
// range; bound_C0 is fitted by sampling at 100 log-spaced points.
struct Potential {
  std::function<double(double)> eval;
  double bound_C0 = 0.0;
};

// V_alpha = (d-1)/rho^2 cos(2 psi_alpha) along a solved profile.
Potential profile_potential(const Profile& profile);

struct TailFit {
  double limit = 0.0;
  double error = 0.0;  // RMS fit residual
  double coeff = 0.0;  // coefficient of 1/rho^2
};

// Least squares of f = L + c/rho^2 over the window [rho_a, rho_b].
// `order` adds higher Richardson terms in 1/rho^2 (order 2 fits an
// additional 1/rho^4 term).
TailFit tail_extrapolate(std::span<const double> nodes,
                         std::span<const double> values, double rho_a,
                         double rho_b, int order = 1);

TailFit tail_extrapolate(const Trajectory& traj, int component, double rho_a,
                         double rho_b, int order = 1);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rms = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

enum class DecayModel { Power, GaussianWeighted };

struct DecayFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;  // RMS of the log-log fit
};

// Log-log slope fit; GaussianWeighted divides by rho^{1-d} e^{-rho^2/4}
// before fitting.
DecayFit fit_decay(std::span<const double> nodes,
                   std::span<const double> values, DecayModel model,
                   int d = 0);

struct BasisPair {
  VariationSolution phi1;  // ~ rho^{-d} e^{-rho^2/4}
  VariationSolution phi2;  // ~ 1 + O(1/rho^2)
};

// Basis of solutions of  phi'' + ((d-1)/rho + rho/2) phi' - V phi = 0
// at large rho. phi2 by forward integration from (1, 0) at R, rescaled so
// phi2 -> 1; phi1 by backward integration of the Gaussian-gauged equation.
BasisPair basis_at_infinity(const Potential& potential, int d, double R,
                            double rho_max, double tol);

// Smallest launch radius from which a solution vanishing with positive
// slope stays positive and keeps a nonzero limit, probed on a family of
// 20 launch radii.
double estimate_r0(const Potential& potential, int d, double rho_max,
                   double tol);

}  // namespace xlab
