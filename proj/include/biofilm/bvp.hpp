#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biofilm/errors.hpp"
#include "biofilm/model.hpp"
#include "biofilm/quadrature.hpp"
#include "biofilm/tridiagonal.hpp"

namespace biofilm {

// The fixed-height sub-problem
//
//   (kappa/h^2) u'' = r(u) on (0,1),  u'(0) = 0,  u(1) + (L kappa/(kappa_L h)) u'(1) = c*,
//
// is solved through its integral form u = T(u) with
//
//   T(u)(y) = c* - (L h/kappa_L) int_0^1 r(u) - (h^2/kappa) int_y^1 int_0^eta r(u) d rho d eta,
//
// both integrals taken by cumulative trapezoid sums on the uniform grid.

enum class BvpMethod { Picard, Newton };

inline const char *to_string(BvpMethod m) { return m == BvpMethod::Picard ? "picard" : "newton"; }

struct BvpOptions {
  int n = 256;                  ///< number of cells
  double tol = 1e-12;           ///< max-norm fixed-point defect, relative to c*
  int max_picard = 200;
  int max_newton = 60;
  double damping = 1.0;         ///< initial Picard relaxation factor
  int stall_window = 50;        ///< Picard iterations allowed without a 10x residual drop
  bool allow_newton = true;
  bool newton_only = false;     ///< skip Picard entirely (continuation runs)
  std::optional<double> initial_constant; ///< u0 == constant (default c*)
  const std::vector<double> *warm_start = nullptr; ///< previous solution, resampled if needed
};

struct BvpSolution {
  double h = 0.0;
  Profile u;
  std::vector<double> u_y;   ///< (h^2/kappa) int_0^y r(u), from the integral form
  std::vector<double> u_yy;  ///< (h^2/kappa) r(u)
  double residual = 0.0;     ///< max |u - T(u)|
  int iterations = 0;        ///< Picard plus Newton iterations
  BvpMethod method = BvpMethod::Picard;
};

namespace detail {

struct FixedPointMap {
  const Model &model;
  double h;
  double dy;
  double a; // L h / kappa_L
  double b; // h^2 / kappa

  FixedPointMap(const Model &m, double h_, int n)
      : model(m), h(h_), dy(1.0 / n), a(m.params.L * h_ / m.params.kappa_L),
        b(h_ * h_ / m.params.kappa) {}

  std::vector<double> rates(std::span<const double> u) const {
    std::vector<double> q(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) q[i] = model.r(u[i]);
    return q;
  }

  std::vector<double> apply(std::span<const double> u) const {
    const auto q = rates(u);
    const auto inner = cumulative_trapezoid(q, dy);
    const auto outer = reverse_cumulative_trapezoid(inner, dy);
    const double cs = model.c_star();
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = cs - a * inner.back() - b * outer[i];
    return out;
  }

  double defect(std::span<const double> u) const {
    const auto tu = apply(u);
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, std::abs(u[i] - tu[i]));
    return std::isfinite(d) ? d : std::numeric_limits<double>::infinity();
  }

  // Differencing T twice and eliminating the global integral with the last row gives
  // a tridiagonal system with the same solution set as u = T(u).
  TridiagonalSystem newton_system(std::span<const double> u) const {
    const std::size_t n1 = u.size();
    const std::size_t n = n1 - 1;
    const double beta = 0.25 * b * dy * dy;
    const double cs = model.c_star();
    std::vector<double> q(n1), dq(n1);
    for (std::size_t i = 0; i < n1; ++i) {
      q[i] = model.r(u[i]);
      dq[i] = model.dr(u[i]);
    }
    TridiagonalSystem sys(n1);
    // row 0: u1 - u0 - beta (q0 + q1) = 0
    sys.diag[0] = -1.0 - beta * dq[0];
    sys.upper[0] = 1.0 - beta * dq[1];
    sys.rhs[0] = -(u[1] - u[0] - beta * (q[0] + q[1]));
    for (std::size_t i = 1; i < n; ++i) {
      sys.lower[i] = 1.0 - beta * dq[i - 1];
      sys.diag[i] = -2.0 - 2.0 * beta * dq[i];
      sys.upper[i] = 1.0 - beta * dq[i + 1];
      sys.rhs[i] = -(u[i + 1] - 2.0 * u[i] + u[i - 1] - beta * (q[i + 1] + 2.0 * q[i] + q[i - 1]));
    }
    // row n: u_n + (a/(b dy)) (u_n - u_{n-1}) + (a dy/4)(q_{n-1} + q_n) - c* = 0
    const double s = a / (b * dy);
    const double w = 0.25 * a * dy;
    sys.lower[n] = -s + w * dq[n - 1];
    sys.diag[n] = 1.0 + s + w * dq[n];
    sys.rhs[n] = -(u[n] + s * (u[n] - u[n - 1]) + w * (q[n - 1] + q[n]) - cs);
    return sys;
  }
};

inline std::vector<double> resample(const std::vector<double> &src, int n) {
  const std::size_t m = src.size() - 1;
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n * static_cast<double>(m);
    const std::size_t k = std::min(static_cast<std::size_t>(x), m - 1);
    const double t = x - static_cast<double>(k);
    out[static_cast<std::size_t>(i)] = (1.0 - t) * src[k] + t * src[k + 1];
  }
  return out;
}

} // namespace detail

/// Solves the fixed-height elliptic problem for u[h].
///
/// Damped Picard iteration on the integral map; the relaxation factor is halved
/// whenever the defect grows. When Picard stalls (no tenfold drop within
/// `stall_window` iterations, or the budget is exhausted) the solve continues
/// with a globalised Newton iteration.
inline BvpSolution solve_bvp(double h, const Model &model, const BvpOptions &opt = {}) {
  if (!std::isfinite(h) || !(h > 0.0)) throw InvalidInput("solve_bvp: height must be positive");
  model.params.check();
  if (opt.n < Profile::min_cells) throw InvalidInput("solve_bvp: need at least 8 cells");

  // A warm start is close to the solution, where Newton converges fastest; a cold
  // Picard/Newton solve remains the fallback.
  if (opt.warm_start && opt.warm_start->size() >= 2 && opt.allow_newton && !opt.newton_only) {
    BvpOptions direct = opt;
    direct.newton_only = true;
    try {
      return solve_bvp(h, model, direct);
    } catch (const IterationFailure &) {
      BvpOptions cold = opt;
      cold.warm_start = nullptr;
      return solve_bvp(h, model, cold);
    }
  }

  const int n = opt.n;
  const double cs = model.c_star();
  const double tol = opt.tol * cs;
  detail::FixedPointMap map(model, h, n);

  std::vector<double> u;
  if (opt.warm_start && opt.warm_start->size() >= 2)
    u = opt.warm_start->size() == static_cast<std::size_t>(n) + 1 ? *opt.warm_start
                                                                   : detail::resample(*opt.warm_start, n);
  else
    u.assign(static_cast<std::size_t>(n) + 1, opt.initial_constant.value_or(cs));

  BvpSolution sol;
  sol.h = h;
  int iterations = 0;
  double res = map.defect(u);
  bool converged = res <= tol;

  if (!converged && !opt.newton_only) {
    double theta = std::clamp(opt.damping, 1e-6, 1.0);
    double window_start = res;
    int window_iter = 0;
    for (int k = 0; k < opt.max_picard && !converged; ++k) {
      const auto tu = map.apply(u);
      std::vector<double> next(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) next[i] = (1.0 - theta) * u[i] + theta * tu[i];
      const double next_res = map.defect(next);
      ++iterations;
      if (next_res > res) {
        theta *= 0.5;
      } else {
        u = std::move(next);
        res = next_res;
      }
      converged = res <= tol;
      ++window_iter;
      // A rate that cannot give a 10x drop over the window counts as a stall early.
      if (!converged && window_iter >= 5 &&
          std::pow(res / window_start, static_cast<double>(opt.stall_window) / window_iter) > 0.1)
        break;
      if (window_iter >= opt.stall_window) {
        if (res > 0.1 * window_start) break;
        window_start = res;
        window_iter = 0;
      }
      if (theta < 1e-4) break;
    }
    sol.method = BvpMethod::Picard;
  }

  if (!converged) {
    if (!opt.allow_newton)
      throw IterationFailure("solve_bvp: Picard iteration did not converge", res, iterations);
    sol.method = BvpMethod::Newton;
    for (int k = 0; k < opt.max_newton && !converged; ++k) {
      const auto delta = map.newton_system(u).solve();
      double lambda = 1.0;
      std::vector<double> trial(u.size());
      double trial_res = res;
      for (int ls = 0; ls < 30; ++ls) {
        for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + lambda * delta[i];
        trial_res = map.defect(trial);
        if (trial_res < res || trial_res <= tol) break;
        lambda *= 0.5;
      }
      ++iterations;
      if (!(trial_res < res) && !(trial_res <= tol)) {
        // Newton direction no longer reduces the defect: round-off floor reached.
        if (res <= 1e3 * tol) {
          converged = true;
          break;
        }
        throw IterationFailure("solve_bvp: Newton iteration stalled", res, iterations);
      }
      u = trial;
      res = trial_res;
      converged = res <= tol;
    }
    if (!converged)
      throw IterationFailure("solve_bvp: Newton iteration did not converge", res, iterations);
  }

  const auto q = map.rates(u);
  const auto inner = cumulative_trapezoid(q, map.dy);
  sol.u_y.resize(u.size());
  sol.u_yy.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    sol.u_y[i] = map.b * inner[i];
    sol.u_yy[i] = map.b * q[i];
  }
  sol.u = Profile(std::move(u));
  sol.residual = res;
  sol.iterations = iterations;
  return sol;
}

/// max |u - T(u)| of an arbitrary grid function, for consistency checks.
inline double fixed_point_defect(std::span<const double> u, double h, const Model &model) {
  detail::FixedPointMap map(model, h, static_cast<int>(u.size()) - 1);
  return map.defect(u);
}

/// max_y | h^2 int_0^y r(u) - kappa u_y(y) |, u_y by finite differences of the profile.
inline double flux_identity_defect(const BvpSolution &sol, const Model &model) {
  const auto &u = sol.u;
  std::vector<double> q(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) q[i] = model.r(u[i]);
  const auto inner = cumulative_trapezoid(q, u.spacing());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    d = std::max(d, std::abs(sol.h * sol.h * inner[i] - model.params.kappa * u.first_difference(i)));
  return d;
}

/// f(h) = h int_0^1 g(r(u[h])) for an already solved u[h].
inline double growth_rate(const BvpSolution &sol, const Model &model) {
  std::vector<double> gv(sol.u.size());
  for (std::size_t i = 0; i < sol.u.size(); ++i) gv[i] = model.net_growth(sol.u[i]);
  return sol.h * trapezoid(gv, sol.u.spacing());
}

/// f(h) = h int_0^1 g(r(u[h](y))) dy.
inline double growth_rate_f(double h, const Model &model, const BvpOptions &opt = {}) {
  return growth_rate(solve_bvp(h, model, opt), model);
}

/// Discrete bounds satisfied by u[h]: ordering and range of u, u_y and u_yy.
struct BvpBoundsReport {
  int violations = 0;
  double max_excess = 0.0; ///< largest amount by which any bound is exceeded
  std::vector<std::string> messages;
};

inline BvpBoundsReport check_bvp_bounds(const BvpSolution &sol, const Model &model, double slack) {
  BvpBoundsReport rep;
  const auto &u = sol.u;
  const std::size_t n = u.size() - 1;
  const double cs = model.c_star();
  const double h = sol.h;
  auto flag = [&](bool ok, double excess, const std::string &msg) {
    if (ok) return;
    ++rep.violations;
    rep.max_excess = std::max(rep.max_excess, excess);
    if (rep.messages.size() < 8) rep.messages.push_back(msg);
  };
  flag(u[0] > -slack, -u[0], "u(0) <= 0");
  flag(u[n] < cs, u[n] - cs, "u(1) >= c*");
  const double uy1 = model.params.kappa_L / (model.params.L * model.params.kappa) * h * (cs - u[n]);
  const double uyy_max = model.r_max() * h * h / model.params.kappa;
  flag(std::abs(sol.u_y[n] - uy1) <= slack * std::max(1.0, uy1), std::abs(sol.u_y[n] - uy1),
       "u_y(1) differs from (kappa_L/(L kappa)) h (c* - u(1))");
  for (std::size_t i = 0; i <= n; ++i) {
    flag(u[i] >= u[0] - slack, u[0] - u[i], "u(y) < u(0)");
    flag(u[i] <= u[n] + slack, u[i] - u[n], "u(y) > u(1)");
    flag(sol.u_y[i] >= -slack, -sol.u_y[i], "u_y < 0");
    flag(sol.u_y[i] <= uy1 + slack * std::max(1.0, uy1), sol.u_y[i] - uy1, "u_y > u_y(1)");
    flag(sol.u_yy[i] >= -slack, -sol.u_yy[i], "u_yy < 0");
    flag(sol.u_yy[i] <= uyy_max + slack * std::max(1.0, uyy_max), sol.u_yy[i] - uyy_max,
         "u_yy > r(c*) h^2 / kappa");
  }
  return rep;
}

} // namespace biofilm
