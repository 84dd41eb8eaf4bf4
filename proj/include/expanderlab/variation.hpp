#pragma once

#include <optional>

#include "expanderlab/ode.hpp"

namespace xlab {

struct Profile;

enum class VariationKind {
  PhiAlpha,
  UnderlinePhi,
  W,
  Y,
  VUpper,
  WUpper,
  Phi1,
  Phi2,
};

// Solution of a linear second-order equation along a profile.
struct VariationSolution {
  VariationKind kind = VariationKind::PhiAlpha;
  Trajectory trajectory;  // (u, u')
  std::optional<double> limit;
  double limit_error = 0.0;
  std::optional<double> parameter;  // kappa for kind W
  double min_value = 0.0;
  double min_location = 0.0;
  bool positive = false;          // u > 0 at all nodes past the launch
  double max_ode_residual = 0.0;  // relative, where applicable
};

// Smooth increasing weight: rho below 1, rho^2 above 2, the monotone
// cubic matching values and slopes in between.
double weight_z(double rho);
double weight_z_deriv(double rho);

// phi'' + ((d-1)/rho + rho/2) phi' - (d-1)/rho^2 cos(2 psi) phi = 0,
// phi(0) = 0, phi'(0) = 1.
VariationSolution solve_variation_phi(const Profile& profile);

// underline-phi = rho psi' / alpha, taken directly from the profile;
// max_ode_residual records its defect in the companion equation.
VariationSolution solve_variation_underline(const Profile& profile);

// The phi equation with an extra + kappa/Z(rho) u term. Throws
// PositivityLost if u vanishes at some rho or its limit is not positive.
VariationSolution solve_w(const Profile& profile, double kappa);

// The phi equation with an extra + u/2 term; limit holds lim rho*u.
VariationSolution solve_y(const Profile& profile);

// Largest kappa (within resolution) for which solve_w stays positive;
// bracketed empirically via the PositivityLost signal.
struct KappaBracket {
  double lo = 0.0;  // positive here
  double hi = 0.0;  // positivity lost here
};
KappaBracket kappa_threshold(const Profile& profile, double tol = 1e-6);

}  // namespace xlab
