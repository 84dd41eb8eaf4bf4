#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "expanderlab/profile.hpp"
#include "expanderlab/variation.hpp"
#include "support.hpp"

using namespace xlab;

namespace {

Profile profile_of(int d, double alpha, double rho_max = 30.0) {
  ProfileParams p;
  p.d = d;
  p.alpha = alpha;
  p.rho_max = rho_max;
  return solve_profile(p);
}

double fd_derivative(int d, double alpha, double rho, double eps) {
  Profile up = profile_of(d, alpha + eps);
  Profile dn = profile_of(d, alpha - eps);
  return (up.psi(rho) - dn.psi(rho)) / (2 * eps);
}

}  // namespace

TEST_CASE("phi stays positive below alpha0 and matches finite differences") {
  Profile prof = profile_of(3, 0.1);
  VariationSolution phi = solve_variation_phi(prof);
  CHECK(phi.positive);

  for (double rho : {1.0, 5.0, 20.0}) {
    double fd = fd_derivative(3, 0.1, rho, 1e-5);
    double val = phi.trajectory.eval1(rho, 0);
    CHECK(std::fabs(val - fd) / std::fabs(fd) <= 1e-4);
  }
}

TEST_CASE("phi finite-difference consistency on random (d, alpha) pairs") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ua(0.1, 1.5);
  std::uniform_int_distribution<int> ud(3, 7);
  for (int k = 0; k < 5; ++k) {
    int d = ud(rng);
    double alpha = ua(rng);
    Profile prof = profile_of(d, alpha);
    VariationSolution phi = solve_variation_phi(prof);
    for (double rho : {1.0, 5.0, 20.0}) {
      double fd = fd_derivative(d, alpha, rho, 1e-5);
      double val = phi.trajectory.eval1(rho, 0);
      CHECK(std::fabs(val - fd) / std::max(1e-12, std::fabs(fd)) <= 1e-4);
    }
  }
}

TEST_CASE("phi limit stays positive for d = 7") {
  Profile prof = profile_of(7, 2.0);
  VariationSolution phi = solve_variation_phi(prof);
  CHECK(phi.limit.value() > 0);
}

TEST_CASE("underline-phi: launch slope, positivity, comparison, residual") {
  Profile prof = profile_of(3, 1.0);
  VariationSolution u = solve_variation_underline(prof);

  double rho0 = u.trajectory.node(0);
  CHECK(u.trajectory.state(0, 0) / rho0 == doctest::Approx(1.0).epsilon(1e-6));

  VariationSolution phi = solve_variation_phi(prof);
  for (std::size_t i = 0; i < u.trajectory.size(); ++i) {
    double rho = u.trajectory.node(i);
    double psi = prof.psi(rho);
    if (psi >= M_PI / 2) break;
    CHECK(u.trajectory.state(i, 0) > 0);
    CHECK(phi.trajectory.eval1(rho, 0) >= u.trajectory.state(i, 0) - 1e-9);
  }
  CHECK(u.max_ode_residual <= 100 * prof.params.tol);
}

TEST_CASE("underline-phi needs alpha != 0") {
  Profile prof = profile_of(3, 0.0);
  CHECK_THROWS_AS(solve_variation_underline(prof), Error);
}

TEST_CASE("weight Z: plateau values and monotonicity") {
  CHECK(weight_z(0.5) == 0.5);
  CHECK(weight_z(3.0) == 9.0);
  double prev = weight_z(1e-3);
  for (double rho = 0.01; rho < 4.0; rho += 0.01) {
    double z = weight_z(rho);
    CHECK(z > prev);
    prev = z;
  }
}

TEST_CASE("w at kappa = 0 coincides with phi") {
  Profile prof = profile_of(3, 0.5);
  VariationSolution phi = solve_variation_phi(prof);
  VariationSolution w = solve_w(prof, 0.0);
  for (double rho : {0.5, 2.0, 10.0, 25.0})
    CHECK(std::fabs(w.trajectory.eval1(rho, 0) - phi.trajectory.eval1(rho, 0)) <
          1e-8);
}

TEST_CASE("kappa threshold brackets the positivity loss") {
  Profile prof = profile_of(3, 0.5, 100.0);
  KappaBracket kb = kappa_threshold(prof, 1e-4);
  CHECK(kb.lo > 0);
  CHECK(kb.hi > kb.lo);

  VariationSolution w = solve_w(prof, kb.lo / 2);
  CHECK(w.positive);
  CHECK(w.limit.value() > 0);

  CHECK_THROWS_AS(solve_w(prof, kb.hi * 1.5), Error);
  try {
    solve_w(prof, kb.hi * 1.5);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PositivityLost);
  }
}

TEST_CASE("y is positive with a positive limit of rho y") {
  Profile prof = profile_of(3, 0.5);
  VariationSolution y = solve_y(prof);
  double rho0 = y.trajectory.node(0);
  CHECK(y.trajectory.state(0, 0) / rho0 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(y.positive);
  CHECK(y.limit.value() > 0);  // lim rho * y

  VariationSolution u = solve_variation_underline(prof);
  for (std::size_t i = 0; i < u.trajectory.size(); ++i) {
    double rho = u.trajectory.node(i);
    CHECK(y.trajectory.eval1(rho, 0) >= u.trajectory.state(i, 0) - 1e-9);
  }
}
