#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace biofilm {

/// Composite trapezoid rule for samples on a uniform grid with spacing dx.
inline double trapezoid(std::span<const double> f, double dx) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * dx;
}

/// Running trapezoid integral from the left end: out[i] = int_0^{x_i} f.
inline std::vector<double> cumulative_trapezoid(std::span<const double> f, double dx) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) out[i] = out[i - 1] + 0.5 * dx * (f[i - 1] + f[i]);
  return out;
}

/// Running trapezoid integral from the right end: out[i] = int_{x_i}^{x_n} f.
inline std::vector<double> reverse_cumulative_trapezoid(std::span<const double> f, double dx) {
  std::vector<double> out(f.size(), 0.0);
  if (f.empty()) return out;
  for (std::size_t i = f.size() - 1; i-- > 0;) out[i] = out[i + 1] + 0.5 * dx * (f[i] + f[i + 1]);
  return out;
}

/// Discrete L2 norm on [0,1] with trapezoid weights.
inline double l2_norm_trapezoid(std::span<const double> f) {
  if (f.size() < 2) return 0.0;
  std::vector<double> sq(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) sq[i] = f[i] * f[i];
  const double dx = 1.0 / static_cast<double>(f.size() - 1);
  return std::sqrt(trapezoid(sq, dx));
}

} // namespace biofilm
