#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "grid_function.hpp"
#include "radial.hpp"

namespace rearrange::fixtures {

inline double tent(double x, double c, double w, double h) { return h * std::max(0.0, 1.0 - std::fabs(x - c) / w); }

inline double smooth_bump(double x, double c, double w, double h) {
  double u = (x - c) / w;
  double q = 1.0 - u * u;
  return q > 0.0 ? h * q * q * q : 0.0;
}

inline GridFunction triangle(const Axis& ax, double center = 0.0, double halfwidth = 1.0, double height = 1.0) {
  return GridFunction::sample1d(ax, [=](double x) { return tent(x, center, halfwidth, height); });
}

// Two smooth bumps on opposite sides of the origin with disjoint supports.
inline GridFunction two_bump(const Axis& ax) {
  return GridFunction::sample1d(ax, [](double x) { return smooth_bump(x, -1.1, 0.6, 1.0) + smooth_bump(x, 0.9, 0.5, 0.7); });
}

// Two tents whose supports touch at a valley.
inline GridFunction two_tent(const Axis& ax) {
  return GridFunction::sample1d(ax, [](double x) { return tent(x, -0.8, 0.7, 1.0) + tent(x, 0.6, 0.7, 0.6); });
}

// Indicator of (a, b); nodes sitting exactly on an endpoint get 1/2.
inline GridFunction indicator(const Axis& ax, double a, double b) {
  return GridFunction::sample1d(ax, [=](double x) {
    double tol = 1e-12 * ax.step();
    if (std::fabs(x - a) < tol || std::fabs(x - b) < tol) return 0.5;
    return (x > a && x < b) ? 1.0 : 0.0;
  });
}

// Cone of slope 1 at (0,2) with height 1 and cone of slope 2 at (0,-2) with height 2.
inline double example_4_6(double x, double y) {
  double up = 1.0 - std::hypot(x, y - 2.0);
  double dn = 2.0 - 2.0 * std::hypot(x, y + 2.0);
  return std::max({0.0, up, dn});
}

inline GridFunction example_4_6_grid(std::size_t nx, std::size_t ny) {
  return GridFunction::sample({{-1.5, 1.5, nx}, {-3.5, 3.5, ny}}, example_4_6);
}

// Unit-mass radial profiles on [0, r_max]; 4001 samples on 1.25 put r = 1 on a node.
inline RadialProfile triangle_profile(int n, double r_max = 1.25, std::size_t count = 4001) {
  double a = n == 1 ? 1.0 : 3.0 / M_PI;
  return RadialProfile::sample(n, r_max, count, [a](double r) { return a * std::max(0.0, 1.0 - r); });
}

inline RadialProfile parabola_profile(int n, double r_max = 1.25, std::size_t count = 4001) {
  double a = n == 1 ? 0.75 : 2.0 / M_PI;
  return RadialProfile::sample(n, r_max, count, [a](double r) { return r < 1.0 ? a * (1.0 - r * r) : 0.0; });
}

inline RadialProfile wide_tent_profile() {
  return RadialProfile::sample(1, 2.5, 4001, [](double r) { return 0.5 * std::max(0.0, 1.0 - 0.5 * r); });
}

inline RadialProfile quartic_profile() {
  return RadialProfile::sample(1, 2.5, 4001, [](double r) { return r < 1.0 ? 15.0 / 16.0 * std::pow(1.0 - r * r, 2) : 0.0; });
}

}  // namespace rearrange::fixtures
