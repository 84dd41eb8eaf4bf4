#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "expanderlab/profile.hpp"
#include "expanderlab/variation.hpp"
#include "support.hpp"

using namespace xlab;

namespace {
constexpr double kHalfPi = M_PI / 2;
}

TEST_CASE("alpha = 0 stays on the pole") {
  ProfileParams p;
  p.d = 3;
  p.alpha = 0.0;
  Profile prof = solve_profile(p);
  CHECK(prof.psi_inf == 0.0);
  CHECK(prof.crossings_of_equator == 0);
  for (std::size_t i = 0; i < prof.trajectory.size(); ++i)
    CHECK(std::fabs(prof.trajectory.state(i, 0)) <= 1e-10);
}

TEST_CASE("d = 7 profiles are increasing and sub-equator") {
  for (double alpha : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    ProfileParams p;
    p.d = 7;
    p.alpha = alpha;
    Profile prof = solve_profile(p);
    CHECK(prof.psi_inf < kHalfPi);
    for (std::size_t i = 1; i < prof.trajectory.size(); ++i)
      CHECK(prof.trajectory.state(i, 0) > prof.trajectory.state(i - 1, 0));
  }
}

TEST_CASE("regression: alpha_hat(ell=1.0) reproduces the limit") {
  auto constants = load_constants();
  double alpha_hat = constants["d3"]["alpha_hat_ell_1"];
  ProfileParams p;
  p.d = 3;
  p.alpha = alpha_hat;
  Profile prof = solve_profile(p);
  CHECK(std::fabs(prof.psi_inf - 1.0) < 1e-6);
}

TEST_CASE("profiles remain in [0, pi] and crossings sit beyond nothing twice") {
  std::mt19937_64 rng(412);
  std::uniform_real_distribution<double> ua(0.05, 10.0);
  std::uniform_int_distribution<int> ud(3, 8);
  for (int k = 0; k < 12; ++k) {
    ProfileParams p;
    p.d = ud(rng);
    p.alpha = ua(rng);
    Profile prof = solve_profile(p);
    for (std::size_t i = 0; i < prof.trajectory.size(); ++i) {
      double psi = prof.trajectory.state(i, 0);
      CHECK(psi >= -1e-9);
      CHECK(psi <= M_PI + 1e-9);
    }
  }
}

TEST_CASE("scan: oscillation for d = 3, monotone approach for d = 7") {
  ScanOptions opts;
  BranchScan s3 = scan_branches(3, 0.01, 100.0, 120, opts);
  int changes = 0;
  for (std::size_t i = 1; i < s3.limits.size(); ++i)
    if ((s3.limits[i] - kHalfPi < 0) != (s3.limits[i - 1] - kHalfPi < 0))
      ++changes;
  CHECK(changes >= 2);
  for (double lim : s3.limits) {
    CHECK(lim >= 0.0);
    CHECK(lim <= M_PI);
  }

  BranchScan s7 = scan_branches(7, 0.01, 100.0, 120, opts);
  double max_lim = 0;
  for (std::size_t i = 0; i < s7.limits.size(); ++i) {
    max_lim = std::max(max_lim, s7.limits[i]);
    CHECK(s7.limits[i] < kHalfPi);
    if (i > 0) CHECK(s7.limits[i] > s7.limits[i - 1]);
    CHECK(s7.crossings[i] == 0);
  }
  CHECK(max_lim > kHalfPi - 0.05);
}

TEST_CASE("crossing rule: at most one crossing beyond the far region") {
  // Empirical single-crossing radius for these potentials; crossings at
  // larger rho would contradict the one-vanishing property of the tail.
  constexpr double kR0 = 5.0;
  ScanOptions opts;
  BranchScan s = scan_branches(3, 0.01, 100.0, 60, opts);
  for (double alpha : s.alphas) {
    ProfileParams p;
    p.d = 3;
    p.alpha = alpha;
    Profile prof = solve_profile(p);
    int beyond = 0;
    for (double loc : prof.crossing_locations)
      if (loc > kR0) ++beyond;
    CHECK(beyond <= 1);
  }
}

TEST_CASE("shoot_for_limit hits the target and is a right inverse") {
  ShootResult shot = shoot_for_limit(3, 1.0, 0, 1e-8);
  ProfileParams p;
  p.d = 3;
  p.alpha = shot.alpha;
  Profile prof = solve_profile(p);
  CHECK(std::fabs(prof.psi_inf - 1.0) <= 1e-8);
  CHECK(prof.crossings_of_equator == 0);
  CHECK(!shot.bracket_history.empty());
}

TEST_CASE("shoot at the equator converges to alpha0") {
  auto constants = load_constants();
  double alpha0 = constants["d4"]["alpha0"];
  ShootResult shot = shoot_for_limit(4, kHalfPi, 0, 1e-9);
  CHECK(std::fabs(shot.alpha - alpha0) < 1e-5);
}

TEST_CASE("shoot range limits signal NoBracket") {
  CHECK_THROWS_AS(shoot_for_limit(7, kHalfPi, 0, 1e-8), Error);
  try {
    shoot_for_limit(7, kHalfPi, 0, 1e-8);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoBracket);
  }
}

TEST_CASE("branch-1 shooting lands between alpha0 and alpha*") {
  auto constants = load_constants();
  double alpha0 = constants["d3"]["alpha0"];
  double alpha_star = constants["d3"]["alpha_star"];
  ShootResult shot = shoot_for_limit(3, kHalfPi + 0.05, 1, 1e-8);
  CHECK(shot.alpha > alpha0);
  CHECK(shot.alpha < alpha_star);
}

TEST_CASE("south profiles reflect the branch-1 north family") {
  double ell = kHalfPi - 0.05;
  Profile south = south_profile(3, ell, 1e-8);
  CHECK(south.trajectory.state(0, 0) == doctest::Approx(M_PI).epsilon(1e-3));
  CHECK(std::fabs(south.psi_inf - ell) <= 1e-8);
  CHECK(south.crossings_of_equator == 1);

  ShootResult shot = shoot_for_limit(3, M_PI - ell, 1, 1e-8);
  ProfileParams p;
  p.d = 3;
  p.alpha = shot.alpha;
  Profile north = solve_profile(p);
  for (double rho : {0.5, 1.0, 3.0, 10.0, 25.0})
    CHECK(std::fabs(south.psi(rho) - (M_PI - north.psi(rho))) < 1e-12);
}

TEST_CASE("south range error below pi/2 - delta*") {
  auto constants = load_constants();
  double delta_star = constants["d3"]["delta_star"];
  CHECK_THROWS_AS(south_profile(3, kHalfPi - 2 * delta_star, 1e-8), Error);
}

TEST_CASE("critical params: sentinels for d = 7, structure for d <= 6") {
  CriticalParams c7 = critical_params(7, 1e-8);
  CHECK(!c7.finite());
  CHECK(std::isinf(c7.alpha0));
  CHECK(std::isinf(c7.alpha_star));

  auto constants = load_constants();
  CriticalParams c3 = critical_params(3, 1e-9);
  CHECK(c3.alpha0 < c3.alpha_star);
  CHECK(c3.ell_star > kHalfPi);
  CHECK(c3.delta_star > 0);
  CHECK(std::fabs(c3.alpha0 - constants["d3"]["alpha0"].get<double>()) < 1e-6);
  CHECK(std::fabs(c3.alpha_star - constants["d3"]["alpha_star"].get<double>()) <
        1e-6);
  CHECK(std::fabs(c3.ell_star - constants["d3"]["ell_star"].get<double>()) <
        1e-6);
}

TEST_CASE("prefix positivity: psi' > 0 and phi > 0 while below the equator") {
  ProfileParams p;
  p.d = 3;
  p.alpha = 1.2;
  Profile prof = solve_profile(p);
  VariationSolution phi = solve_variation_phi(prof);
  for (std::size_t i = 1; i < prof.trajectory.size(); ++i) {
    if (prof.trajectory.state(i, 0) >= kHalfPi) break;
    CHECK(prof.trajectory.state(i, 1) > 0);
  }
  CHECK(phi.positive);
}

TEST_CASE("d >= 7 grid of alphas: increasing and sub-equator") {
  for (int k = 0; k < 20; ++k) {
    double alpha = 0.1 * std::pow(10.0, 3.0 * k / 19.0);  // 0.1 .. 100
    ProfileParams p;
    p.d = 7;
    p.alpha = alpha;
    Profile prof = solve_profile(p);
    CHECK(prof.psi_inf < kHalfPi);
    for (std::size_t i = 1; i < prof.trajectory.size(); ++i)
      CHECK(prof.trajectory.state(i, 0) > prof.trajectory.state(i - 1, 0));
  }
}
