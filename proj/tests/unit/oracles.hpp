#pragma once

// Closed forms computed independently of the library, for cross-checks.

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

// b_k by the two-step recurrence b_k = 2 pi / k * b_{k-2}
inline double unit_ball_volume(int k) {
  if (k == 0) return 1.0;
  if (k == 1) return 2.0;
  return 2.0 * pi / k * unit_ball_volume(k - 2);
}

inline double choose(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// intrinsic volumes of an axis box: elementary symmetric functions of the sides
inline std::vector<double> box_intrinsic_volumes(const std::vector<double>& sides) {
  std::vector<double> e(sides.size() + 1, 0.0);
  e[0] = 1.0;
  for (double s : sides)
    for (std::size_t k = e.size() - 1; k >= 1; --k) e[k] += s * e[k - 1];
  return e;
}

// V_k of the radius-r ball in R^n
inline double ball_intrinsic_volume(int n, int k, double r) {
  return choose(n, k) * unit_ball_volume(n) / unit_ball_volume(n - k) * std::pow(r, k);
}

// Steiner polynomial of a box in R^3: vol(K + eps B)
inline double box_dilation_volume(const std::vector<double>& sides, double eps) {
  const auto v = box_intrinsic_volumes(sides);
  double total = 0.0;
  const int n = static_cast<int>(sides.size());
  for (int k = 0; k <= n; ++k) total += v[static_cast<std::size_t>(k)] * unit_ball_volume(n - k) * std::pow(eps, n - k);
  return total;
}

// Ramanujan's second approximation, relative error below 1e-9 for mild eccentricity
inline double ellipse_perimeter(double a, double b) {
  const double h = (a - b) * (a - b) / ((a + b) * (a + b));
  return pi * (a + b) * (1.0 + 3.0 * h / (10.0 + std::sqrt(4.0 - 3.0 * h)));
}

// area of a spherical triangle from its side arcs (L'Huilier)
inline double spherical_triangle_area(double a, double b, double c) {
  const double s = 0.5 * (a + b + c);
  const double t = std::tan(s / 2) * std::tan((s - a) / 2) * std::tan((s - b) / 2) * std::tan((s - c) / 2);
  return 4.0 * std::atan(std::sqrt(std::max(0.0, t)));
}

}  // namespace oracle
