#pragma once

#include <functional>
#include <vector>

#include "expanderlab/pde.hpp"
#include "expanderlab/profile.hpp"
#include "expanderlab/variation.hpp"

namespace xlab {

// Uniqueness-mechanism constant 4(d-1)/(d-2)^2; below 1 exactly when the
// Hardy term wins.
double hardy_ratio(int d);

// --------------------------------------------------------------------------
// Super/subsolution barriers in self-similar variables
// --------------------------------------------------------------------------

struct SupersolutionParams {
  double eta = 0.0;
  double M = 1.0;
  double A = 0.0;
  double R = 1.0;
  double s0 = 0.0;
  double kappa = 0.0;  // the kappa the weight w was built with
};

// Smooth nondecreasing cutoff, 0 on [0,R], 1 on [2R, inf).
double barrier_cutoff(double r, double R);
double barrier_cutoff_d1(double r, double R);
double barrier_cutoff_d2(double r, double R);

struct ResidualStats {
  double min = 0.0;
  double max = 0.0;
  double argmin_rho = 0.0;
  double argmin_s = 0.0;
};

// Pointwise residual of u_+ = eta w + (M + A/rho^2) phi(e^{s/2} rho) in
// the perturbation equation (sign -1 evaluates u_- = -u_+).
ResidualStats supersolution_residual(const SupersolutionParams& params,
                                     const Profile& profile,
                                     const VariationSolution& w,
                                     std::span<const double> s_grid,
                                     std::span<const double> rho_grid,
                                     int sign = +1);

// Searches (eta, A, s0) with M, R fixed so that the residual of u_+ is
// >= -tol and that of u_- is <= +tol on the probe grid.
SupersolutionParams find_supersolution_params(const Profile& profile,
                                              const VariationSolution& w,
                                              double M, double R,
                                              double tol = 1e-8);

// --------------------------------------------------------------------------
// Run-level checks
// --------------------------------------------------------------------------

// Max over common snapshots and nodes of (sub - super)_+.
double check_comparison(const Evolution& sub, const Evolution& super_run);

// Radial reduction of the localized dissipation inequality. tau is scalar,
// the vector test field is b(t,r) x/r; both with analytic derivatives.
struct TestFunctionPair {
  std::function<double(double t, double r)> tau, tau_t, tau_r;
  std::function<double(double t, double r)> b, b_r;
  double support_lo = 0.0;  // radial support, for resolution checks
  double support_hi = 0.0;

  // Smooth bumps in r times a ramp in t that vanishes before t_end.
  static TestFunctionPair bumps(double r_lo, double r_hi, double t_begin,
                                double t_end, double b_amplitude);
};

// LHS - RHS of the local energy inequality for the run; nonnegative up to
// quadrature error for admissible solutions.
double energy_inequality_margin(const Evolution& run,
                                const TestFunctionPair& tests);

struct RegularityReport {
  double sup_r_dh = 0.0;        // r |h_r|
  double sup_scaled_dh = 0.0;   // (r + sqrt t)|h_r| / (1 + <log(r/sqrt t)>)
  double sup_scaled_dt = 0.0;   // (t + r^2)|h_t|
  double holder_seminorm = 0.0; // windowed, exponent 1/2
  double trend_r_dh = 0.0;      // second-half / first-half ratios
  double trend_scaled_dh = 0.0;
};

RegularityReport regularity_monitors(const Evolution& run);

struct ThetaSeries {
  std::vector<double> time;
  std::vector<double> sup_theta;
  double growth_constant = 0.0;  // max_t sup theta(t) / sup theta(0)
};

// theta = (1 - cos(h1 - h2)) / (cos h1 cos h2); both runs must stay in
// [0, pi/2 - delta].
ThetaSeries theta_stability(const Evolution& run1, const Evolution& run2,
                            double delta);

}  // namespace xlab
