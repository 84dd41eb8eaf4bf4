#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "expanderlab/asymptotics.hpp"
#include "expanderlab/ode.hpp"
#include "expanderlab/profile.hpp"
#include "support.hpp"

using namespace xlab;

TEST_CASE("zero field keeps the state constant") {
  VectorField f;
  f.dimension = 2;
  f.eval = [](double, std::span<const double>, std::span<double> dy) {
    dy[0] = 0;
    dy[1] = 0;
  };
  double y0[2] = {0.7, -1.3};
  Trajectory t = integrate_adaptive(f, y0, 0.1, 20.0, 1e-10);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.state(i, 0) == 0.7);
    CHECK(t.state(i, 1) == -1.3);
  }
}

TEST_CASE("linear damped equation matches the quadrature oracle") {
  // psi'' + (2/rho + rho/2) psi' = 0 with psi(1)=0, psi'(1)=1 has
  // psi(rho) = int_1^rho s^-2 e^{-s^2/4 + 1/4} ds.
  int d = 3;
  VectorField f;
  f.dimension = 2;
  f.eval = [d](double rho, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -((d - 1) / rho + rho / 2) * y[1];
  };
  double y0[2] = {0.0, 1.0};
  Trajectory t = integrate_adaptive(f, y0, 1.0, 12.0, 1e-10);
  auto exact = [](double rho) {
    return simpson_adaptive(
        [](double s) { return std::exp(-s * s / 4 + 0.25) / (s * s); }, 1.0,
        rho, 1e-12);
  };
  for (double rho : {1.5, 2.0, 3.0, 5.0, 8.0, 12.0})
    CHECK(std::fabs(t.eval1(rho, 0) - exact(rho)) < 1e-8);
}

TEST_CASE("expander derivative obeys the C/rho^3 tail at rho = 30") {
  // The sine source sustains an algebraic tail psi' ~ (d-1)sin(2 psi_inf)
  // / rho^3, so the endpoint derivative is small like 1/rho^3, not
  // Gaussian-small. Fit C on [5, 30] and check the endpoint against it.
  SeriesLaunch s = series_launch(3, 1.0, Pole::North, 1e-4, 3);
  double y0[2] = {s.value, s.derivative};
  Trajectory t = integrate_adaptive(expander_field(3), y0, 1e-4, 30.0, 1e-10);
  double C = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double rho = t.node(i);
    if (rho >= 5.0)
      C = std::max(C, std::fabs(t.state(i, 1)) * rho * rho * rho);
  }
  CHECK(C < 10.0);
  double end_dpsi = std::fabs(t.state(t.size() - 1, 1));
  CHECK(end_dpsi <= C / (30.0 * 30.0 * 30.0) * (1 + 1e-9));
  CHECK(end_dpsi < 1e-3);
}

TEST_CASE("series launch closed forms") {
  SeriesLaunch n0 = series_launch(4, 0.0, Pole::North, 1e-3, 3);
  CHECK(n0.value == 0.0);
  CHECK(n0.derivative == 0.0);
  SeriesLaunch s0 = series_launch(4, 0.0, Pole::South, 1e-3, 3);
  CHECK(s0.value == doctest::Approx(M_PI).epsilon(1e-15));
  CHECK(s0.derivative == 0.0);

  // d=3, alpha=1: cubic coefficient -(1/2 + 4/3)/10 = -11/60.
  CHECK(series_a3(3, 1.0) == doctest::Approx(-11.0 / 60).epsilon(1e-14));
  double rho0 = 1e-3;
  SeriesLaunch n1 = series_launch(3, 1.0, Pole::North, rho0, 3);
  CHECK(n1.value ==
        doctest::Approx(rho0 - 11.0 / 60 * rho0 * rho0 * rho0).epsilon(1e-14));
  CHECK(n1.derivative ==
        doctest::Approx(1 - 3 * 11.0 / 60 * rho0 * rho0).epsilon(1e-14));
}

TEST_CASE("series residual scales like rho0^order") {
  for (int order : {3, 5}) {
    std::vector<double> lx, ly;
    for (double rho0 : {1e-1, 1e-2, 1e-3, 1e-4}) {
      SeriesLaunch s = series_launch(3, 1.2, Pole::North, rho0, order);
      double a = series_a3(3, 1.2);
      double dd = 6 * a * rho0;
      if (order == 5) dd += 20 * series_b5(3, 1.2) * rho0 * rho0 * rho0;
      double res = expander_residual(3, rho0, s.value, s.derivative, dd);
      lx.push_back(std::log(rho0));
      ly.push_back(std::log(std::fabs(res)));
    }
    LinearFit fit = linear_fit(lx, ly);
    CHECK(fit.slope == doctest::Approx(order).epsilon(0.1));  // +-0.3 absolute
    CHECK(std::fabs(fit.slope - order) < 0.3);
  }
}

TEST_CASE("halving tol improves the endpoint monotonically") {
  SeriesLaunch s = series_launch(3, 2.0, Pole::North, 1e-4, 3);
  double y0[2] = {s.value, s.derivative};
  Trajectory ref =
      integrate_adaptive(expander_field(3), y0, 1e-4, 30.0, 1e-12);
  double ref_end = ref.state(ref.size() - 1, 0);
  double prev = 1e300;
  for (double tol : {1e-6, 1e-8, 1e-10}) {
    Trajectory t = integrate_adaptive(expander_field(3), y0, 1e-4, 30.0, tol);
    double err = std::fabs(t.state(t.size() - 1, 0) - ref_end);
    CHECK(err <= prev);
    prev = err;
  }
}

TEST_CASE("H(rho) is nonincreasing along computed trajectories") {
  std::mt19937_64 rng(913);
  std::uniform_real_distribution<double> ua(0.05, 10.0);
  std::uniform_int_distribution<int> ud(3, 8);
  for (int k = 0; k < 20; ++k) {
    int d = ud(rng);
    double alpha = ua(rng);
    double tol = 1e-10;
    ProfileParams p;
    p.d = d;
    p.alpha = alpha;
    Profile prof = solve_profile(p);
    const Trajectory& t = prof.trajectory;
    double prev = 1e300;
    for (std::size_t i = 0; i < t.size(); ++i) {
      double rho = t.node(i), psi = t.state(i, 0), dpsi = t.state(i, 1);
      double H = rho * rho * dpsi * dpsi -
                 (d - 1) * std::sin(psi) * std::sin(psi);
      CHECK(H <= prev + 10 * tol);
      prev = H;
    }
  }
}

TEST_CASE("launch preconditions are enforced") {
  CHECK_THROWS_AS(series_launch(2, 1.0, Pole::North, 1e-3, 3), Error);
  CHECK_THROWS_AS(series_launch(3, 1.0, Pole::North, 0.5, 3), Error);
  CHECK_THROWS_AS(series_launch(3, 1.0, Pole::North, 1e-3, 4), Error);
  double y0[2] = {0, 0};
  VectorField f = expander_field(3);
  CHECK_THROWS_AS(integrate_adaptive(f, y0, 2.0, 1.0, 1e-10), Error);
}
