#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

// Checked-in regression constants produced by `expanderlab calibrate`.
inline nlohmann::json load_constants() {
  std::ifstream in(EXPANDERLAB_CONSTANTS_JSON);
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

// Adaptive Simpson quadrature, used as an independent oracle.
inline double simpson_adaptive(const std::function<double(double)>& f,
                               double a, double b, double tol, int depth = 30) {
  auto simpson = [&](double lo, double hi) {
    double mid = 0.5 * (lo + hi);
    return (hi - lo) / 6.0 * (f(lo) + 4 * f(mid) + f(hi));
  };
  std::function<double(double, double, double, double, int)> rec =
      [&](double lo, double hi, double whole, double eps, int d) -> double {
    double mid = 0.5 * (lo + hi);
    double left = simpson(lo, mid), right = simpson(mid, hi);
    if (d <= 0 || std::fabs(left + right - whole) < 15 * eps)
      return left + right + (left + right - whole) / 15.0;
    return rec(lo, mid, left, eps / 2, d - 1) +
           rec(mid, hi, right, eps / 2, d - 1);
  };
  return rec(a, b, simpson(a, b), tol, depth);
}
