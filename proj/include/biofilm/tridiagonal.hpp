#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "biofilm/errors.hpp"

namespace biofilm {

/// Tridiagonal system: lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i].
/// lower[0] and upper[n-1] are ignored.
struct TridiagonalSystem {
  std::vector<double> lower, diag, upper, rhs;

  explicit TridiagonalSystem(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0) {}
  std::size_t size() const { return diag.size(); }

  /// Thomas algorithm; no pivoting, so the matrix should be diagonally dominant
  /// or otherwise safe for elimination in order.
  std::vector<double> solve() const {
    const std::size_t n = diag.size();
    std::vector<double> c(n), d(n), x(n);
    double beta = diag[0];
    if (beta == 0.0) throw Error("tridiagonal solve: zero pivot");
    c[0] = n > 1 ? upper[0] / beta : 0.0;
    d[0] = rhs[0] / beta;
    for (std::size_t i = 1; i < n; ++i) {
      beta = diag[i] - lower[i] * c[i - 1];
      if (beta == 0.0 || !std::isfinite(beta)) throw Error("tridiagonal solve: zero pivot");
      c[i] = i + 1 < n ? upper[i] / beta : 0.0;
      d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
  }
};

} // namespace biofilm
