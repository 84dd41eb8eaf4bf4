#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "expanderlab/ode.hpp"

namespace xlab {

struct ProfileParams {
  int d = 3;
  double alpha = 0.0;
  Pole pole = Pole::North;
  double rho_max = 30.0;
  double tol = 1e-10;
  double rho0 = 1e-4;
};

// A solved expander trajectory with its limit estimate and diagnostics.
struct Profile {
  ProfileParams params;
  Trajectory trajectory;  // (psi, psi')
  double psi_inf = 0.0;
  double psi_inf_error = 0.0;
  double psi_end = 0.0;    // raw endpoint, kept for diagnostics
  double tail_coeff = 0.0; // c in psi ~ psi_inf + c/rho^2
  int crossings_of_equator = 0;
  std::vector<double> crossing_locations;

  // Dense evaluation; beyond rho_max the fitted tail model is used,
  // below rho0 the origin series.
  double psi(double rho) const;
  double dpsi(double rho) const;
};

Profile solve_profile(const ProfileParams& params);

struct ScanOptions {
  double rho_max = 30.0;
  double tol = 1e-10;
};

struct BranchScan {
  int d = 0;
  std::vector<double> alphas;
  std::vector<double> limits;
  std::vector<int> crossings;
};

// Limits sampled on a uniform-in-log alpha grid; profiles for distinct
// alpha are evaluated concurrently and merged by index.
BranchScan scan_branches(int d, double lo, double hi, int n,
                         const ScanOptions& opts = {});

struct ShootResult {
  double alpha = 0.0;
  double target_ell = 0.0;
  int branch = 0;
  std::vector<std::pair<double, double>> bracket_history;
  int iterations = 0;
};

// Bisection on a bracket found by a coarse scan, restricted to the
// crossing-count family requested. Throws NoBracket when ell is outside
// the attainable range of the branch.
ShootResult shoot_for_limit(int d, double ell, int branch, double tol,
                            const ScanOptions& opts = {});

// Branch-1 north profile at limit pi - ell, reflected through the equator.
Profile south_profile(int d, double ell, double tol,
                      const ScanOptions& opts = {});

struct CriticalParams {
  double alpha0 = 0.0;
  double alpha_star = 0.0;
  double ell_star = 0.0;
  double delta_star = 0.0;
  // alpha values below alpha_star where phi_alpha(inf) changed sign along
  // the scan; candidates only, nothing is asserted about them.
  std::vector<double> phi_inf_sign_changes;
  bool finite() const;
};

// alpha0 and alpha* by bisection; infinity sentinels for d >= 7.
CriticalParams critical_params(int d, double tol, const ScanOptions& opts = {});

}  // namespace xlab
