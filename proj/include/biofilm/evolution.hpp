#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "biofilm/errors.hpp"
#include "biofilm/model.hpp"
#include "biofilm/quadrature.hpp"
#include "biofilm/tridiagonal.hpp"

namespace biofilm {

// Method of lines for the problem on the fixed domain y = z/h(t) in [0,1] with
// substrate deficit v = c* - c:
//
//   v_t = (1/eps) [ (kappa/h^2) v_yy + r(c* - v) ] + G(v) y v_y,
//   v_y(t,0) = 0,   v(t,1) + (L kappa/(kappa_L h)) v_y(t,1) = 0,
//   h_t = h G(v),   G(v) = int_0^1 g(r(c* - v)) dy.
//
// Diffusion is implicit (tridiagonal, ghost nodes at both ends); advection and reaction
// are explicit. h is advanced with the exponential of the time-averaged growth rate,
// so e^{-Mt} h0 <= h <= e^{Mt} h0 holds exactly in the discrete scheme.

enum class TimeScheme {
  ImexEuler,         ///< backward Euler diffusion, forward Euler explicit terms (order 1)
  CrankNicolsonAB2,  ///< Crank-Nicolson diffusion, Adams-Bashforth 2 explicit terms (order 2)
};

inline const char *to_string(TimeScheme s) { return s == TimeScheme::ImexEuler ? "imex-euler" : "cn-ab2"; }

struct EvolutionOptions {
  int n = 128;
  double dt = 1e-3;              ///< requested step; the caps below may shorten it
  TimeScheme scheme = TimeScheme::ImexEuler;
  double cfl = 0.5;              ///< dt <= cfl dy / |G|
  double reaction_cap = 0.5;     ///< dt <= reaction_cap eps / max r'
  double dt_min = 1e-12;
  double tol_v = -1.0;           ///< bound slack; negative selects 5 c* / n^2
  double output_interval = 0.0;  ///< 0 stores every step
  double h_floor = 1e-12;
  int startup_steps = 2;         ///< backward Euler steps before CN-AB2
};

struct EvolutionState {
  double t = 0.0;
  double h = 0.0;
  Profile v;
};

struct EvolutionDiagnostics {
  double G = 0.0;               ///< growth integral G(v)
  double max_abs_vy = 0.0;      ///< max |v_y| from one-sided/centred differences
  double boundary_defect = 0.0; ///< |v(1) + (L kappa/(kappa_L h)) v_y(1)| with a one-sided v_y
  double flux_ratio = 0.0;      ///< u_y(t,1)/h^2 = kappa_L v(t,1) / (L kappa h)
  double l2_norm = 0.0;         ///< trapezoid L2 norm of v
};

/// Extremes over every accepted step, not only the stored ones.
struct StepExtremes {
  double min_v = std::numeric_limits<double>::infinity();
  double max_v = -std::numeric_limits<double>::infinity();
  double max_gradient_ratio = 0.0;  ///< max_i |v_{i+1} - v_i| / (dy h)
  double max_positive_slope = -std::numeric_limits<double>::infinity(); ///< max_i (v_{i+1} - v_i)/dy
  double max_envelope_excess = 0.0; ///< max(|ln(h/h0)| - M t, 0)
  double min_dt = std::numeric_limits<double>::infinity();
  double max_dt = 0.0;
  long steps = 0;
};

struct EvolutionTrajectory {
  std::vector<EvolutionState> states;
  std::vector<EvolutionDiagnostics> diagnostics;
  StepExtremes extremes;
  double growth_bound = 0.0; ///< M
  double h0 = 0.0;
  bool extinct = false;
};

inline EvolutionDiagnostics evolution_diagnostics(const EvolutionState &s, const Model &model) {
  EvolutionDiagnostics d;
  const auto &p = model.params;
  const std::size_t n = s.v.size() - 1;
  d.G = growth_integral(s.v, model);
  d.max_abs_vy = 0.0;
  for (std::size_t i = 0; i <= n; ++i) d.max_abs_vy = std::max(d.max_abs_vy, std::abs(s.v.first_difference(i)));
  d.boundary_defect = std::abs(s.v[n] + p.L * p.kappa / (p.kappa_L * s.h) * s.v.first_difference(n));
  d.flux_ratio = p.kappa_L * s.v[n] / (p.L * p.kappa * s.h);
  d.l2_norm = l2_norm_trapezoid(s.v.values());
  return d;
}

namespace detail {

class EvolutionStepper {
public:
  EvolutionStepper(const Model &model, const EvolutionOptions &opt, int n)
      : model_(model), opt_(opt), n_(n), dy_(1.0 / n) {
    double m = 0.0;
    for (int i = 0; i <= 1000; ++i) m = std::max(m, model.rate.derivative(model.c_star() * i / 1000.0));
    max_dr_ = m;
  }

  double max_rate_derivative() const { return max_dr_; }

  /// Largest admissible step for the explicit terms at growth rate G and height h.
  /// At y = 1 and G > 0 the advection term is G times the Robin slope -gamma v, a
  /// linear damping of rate G gamma.
  double step_cap(double G, double h) const {
    double cap = std::numeric_limits<double>::infinity();
    const auto &p = model_.params;
    const double gamma = p.kappa_L * h / (p.L * p.kappa);
    if (G != 0.0) cap = opt_.cfl * std::min(dy_, 1.0 / gamma) / std::abs(G);
    if (max_dr_ > 0.0) cap = std::min(cap, opt_.reaction_cap * model_.params.eps / max_dr_);
    return cap;
  }

  /// Advection plus reaction: G y v_y + r(c* - v)/eps, Robin value of v_y at y = 1.
  std::vector<double> explicit_terms(const std::vector<double> &v, double h, double G) const {
    const auto &p = model_.params;
    const std::size_t n = v.size() - 1;
    std::vector<double> e(v.size());
    const double gamma = p.kappa_L * h / (p.L * p.kappa);
    for (std::size_t i = 0; i <= n; ++i) {
      const double y = static_cast<double>(i) * dy_;
      double vy = 0.0;
      // Upwind at y = 1: for G < 0 the characteristics leave through the surface.
      if (i == n) vy = G < 0.0 ? (v[n] - v[n - 1]) / dy_ : -gamma * v[n];
      else if (i > 0) vy = (v[i + 1] - v[i - 1]) / (2.0 * dy_);
      e[i] = G * y * vy + model_.r(model_.c_star() - v[i]) / p.eps;
    }
    return e;
  }

  /// Row coefficients of D(h) v = (kappa/(eps h^2)) v_yy with both ghost nodes eliminated.
  void diffusion_rows(double h, std::vector<double> &lo, std::vector<double> &di, std::vector<double> &up) const {
    const auto &p = model_.params;
    const std::size_t n = static_cast<std::size_t>(n_);
    const double k = p.kappa / (p.eps * h * h * dy_ * dy_);
    const double gamma = p.kappa_L * h / (p.L * p.kappa);
    lo.assign(n + 1, 0.0);
    di.assign(n + 1, 0.0);
    up.assign(n + 1, 0.0);
    di[0] = -2.0 * k;
    up[0] = 2.0 * k;
    for (std::size_t i = 1; i < n; ++i) {
      lo[i] = k;
      di[i] = -2.0 * k;
      up[i] = k;
    }
    lo[n] = 2.0 * k;
    di[n] = -2.0 * k * (1.0 + dy_ * gamma);
  }

  /// Solves (I - a D(h_new)) x = rhs.
  std::vector<double> implicit_solve(double a, double h_new, const std::vector<double> &rhs) const {
    std::vector<double> lo, di, up;
    diffusion_rows(h_new, lo, di, up);
    TridiagonalSystem sys(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      sys.lower[i] = -a * lo[i];
      sys.diag[i] = 1.0 - a * di[i];
      sys.upper[i] = -a * up[i];
      sys.rhs[i] = rhs[i];
    }
    return sys.solve();
  }

  std::vector<double> apply_diffusion(double h, const std::vector<double> &v) const {
    std::vector<double> lo, di, up;
    diffusion_rows(h, lo, di, up);
    std::vector<double> out(v.size());
    const std::size_t n = v.size() - 1;
    for (std::size_t i = 0; i <= n; ++i) {
      double s = di[i] * v[i];
      if (i > 0) s += lo[i] * v[i - 1];
      if (i < n) s += up[i] * v[i + 1];
      out[i] = s;
    }
    return out;
  }

  double G(const std::vector<double> &v) const {
    std::vector<double> f(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) f[i] = model_.net_growth(model_.c_star() - v[i]);
    return trapezoid(f, dy_);
  }

private:
  const Model &model_;
  EvolutionOptions opt_;
  int n_;
  double dy_;
  double max_dr_ = 0.0;
};

} // namespace detail

/// Advances (v, h) from (v0, h0) to t_end.
///
/// Throws InvariantViolation if v leaves [-tol_v, c* + tol_v] and IterationFailure if
/// the admissible step falls below dt_min. Reaching h_floor stops the run with
/// `extinct` set.
inline EvolutionTrajectory evolve(const Profile &v0, double h0, double t_end, const Model &model,
                                  const EvolutionOptions &opt = {}) {
  model.params.check();
  if (!std::isfinite(h0) || !(h0 > 0.0)) throw InvalidInput("evolve: h0 must be positive");
  if (!std::isfinite(t_end) || !(t_end > 0.0)) throw InvalidInput("evolve: t_end must be positive");
  if (!(opt.dt > 0.0)) throw InvalidInput("evolve: dt must be positive");
  const double cs = model.c_star();
  const int n = v0.cells();
  const double tol_v = opt.tol_v >= 0.0 ? opt.tol_v : 5.0 * cs / (static_cast<double>(n) * n);
  for (std::size_t i = 0; i < v0.size(); ++i)
    if (!(v0[i] >= -tol_v && v0[i] <= cs + tol_v)) throw InvalidInput("evolve: v0 must lie in [0, c*]");

  detail::EvolutionStepper stepper(model, opt, n);
  const double dy = 1.0 / n;
  const double M = model.growth_bound();

  EvolutionTrajectory traj;
  traj.growth_bound = M;
  traj.h0 = h0;
  auto &ex = traj.extremes;

  std::vector<double> v(v0.values().begin(), v0.values().end());
  double h = h0, t = 0.0;
  double G = stepper.G(v);
  std::vector<double> e_prev;
  double G_prev = G, dt_prev = 0.0;

  auto track = [&]() {
    for (std::size_t i = 0; i < v.size(); ++i) {
      ex.min_v = std::min(ex.min_v, v[i]);
      ex.max_v = std::max(ex.max_v, v[i]);
      if (i + 1 < v.size()) {
        const double s = (v[i + 1] - v[i]) / dy;
        ex.max_gradient_ratio = std::max(ex.max_gradient_ratio, std::abs(s) / h);
        ex.max_positive_slope = std::max(ex.max_positive_slope, s);
      }
    }
    ex.max_envelope_excess = std::max(ex.max_envelope_excess, std::abs(std::log(h / h0)) - M * t);
  };
  auto store = [&]() {
    EvolutionState s{t, h, Profile(v)};
    traj.diagnostics.push_back(evolution_diagnostics(s, model));
    traj.states.push_back(std::move(s));
  };

  track();
  store();
  double next_output = opt.output_interval > 0.0 ? std::min(opt.output_interval, t_end) : t_end;

  while (t < t_end) {
    double dt = std::min(opt.dt, stepper.step_cap(G, h));
    if (dt < opt.dt_min) throw IterationFailure("evolve: step size underflow", dt, static_cast<int>(ex.steps));
    bool hit_output = false;
    if (t + dt >= next_output * (1.0 - 1e-14)) {
      dt = next_output - t;
      hit_output = true;
    }

    const auto e = stepper.explicit_terms(v, h, G);
    std::vector<double> v_new;
    double h_new;
    const bool cn = opt.scheme == TimeScheme::CrankNicolsonAB2 && ex.steps >= opt.startup_steps;
    if (!cn) {
      h_new = h * std::exp(dt * G);
      std::vector<double> rhs(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) rhs[i] = v[i] + dt * e[i];
      v_new = stepper.implicit_solve(dt, h_new, rhs);
    } else {
      // Variable-step AB2 extrapolation of the explicit terms and of G to t + dt/2.
      const double w = 0.5 * dt / dt_prev;
      const double G_half = G + w * (G - G_prev);
      const double h_pred = h * std::exp(dt * G_half);
      const auto Dv = stepper.apply_diffusion(h, v);
      std::vector<double> rhs(v.size());
      for (std::size_t i = 0; i < v.size(); ++i)
        rhs[i] = v[i] + 0.5 * dt * Dv[i] + dt * (e[i] + w * (e[i] - e_prev[i]));
      v_new = stepper.implicit_solve(0.5 * dt, h_pred, rhs);
      h_new = h * std::exp(0.5 * dt * (G + stepper.G(v_new)));
    }

    for (std::size_t i = 0; i < v_new.size(); ++i) {
      if (!(v_new[i] >= -tol_v && v_new[i] <= cs + tol_v))
        throw InvariantViolation("evolve: v left [0, c*] at t = " + detail::format_number(t + dt) +
                                 ", node " + std::to_string(i) + ", v = " + detail::format_number(v_new[i]));
    }

    e_prev = e;
    G_prev = G;
    dt_prev = dt;
    v = std::move(v_new);
    h = h_new;
    t = hit_output ? next_output : t + dt;
    G = stepper.G(v);
    ++ex.steps;
    ex.min_dt = std::min(ex.min_dt, dt);
    ex.max_dt = std::max(ex.max_dt, dt);
    track();

    if (!(h > opt.h_floor)) {
      traj.extinct = true;
      store();
      break;
    }
    if (hit_output || opt.output_interval <= 0.0) {
      store();
      if (hit_output) next_output = std::min(next_output + opt.output_interval, t_end);
      if (opt.output_interval <= 0.0) next_output = t_end;
    }
  }
  if (traj.states.back().t != t) store();
  return traj;
}

/// Gradient bounds along an evolution.
struct GradientReport {
  double max_ratio = 0.0;          ///< max over steps of max_y |v_y| / h
  double bound = 0.0;              ///< max{ ||v0_y||/h0, c* kappa_L/(kappa L) }
  double bound_alt = 0.0;          ///< same with c* kappa/(kappa L) = c*/L
  bool within_bound = false;
  bool v0_nonincreasing = false;
  double max_positive_slope = 0.0; ///< max over steps of max_y v_y
  bool monotonicity_preserved = false;
};

/// v0_grad_bound is ||v0_y||_inf in the y variable.
inline GradientReport gradient_diagnostics(const EvolutionTrajectory &traj, const Model &model,
                                           double v0_grad_bound, double slack = -1.0) {
  const auto &p = model.params;
  GradientReport rep;
  const auto &v0 = traj.states.front().v;
  const int n = v0.cells();
  if (slack < 0.0) slack = 5.0 * p.c_star / (static_cast<double>(n) * n);
  const double c0_grad = v0_grad_bound / traj.h0;
  rep.bound = std::max(c0_grad, p.c_star * p.kappa_L / (p.kappa * p.L));
  rep.bound_alt = std::max(c0_grad, p.c_star / p.L);
  rep.max_ratio = traj.extremes.max_gradient_ratio;
  rep.within_bound = rep.max_ratio <= rep.bound * (1.0 + 1e-3) + slack;
  rep.v0_nonincreasing = true;
  for (std::size_t i = 0; i + 1 < v0.size(); ++i)
    if (v0[i + 1] > v0[i]) rep.v0_nonincreasing = false;
  rep.max_positive_slope = traj.extremes.max_positive_slope;
  rep.monotonicity_preserved = !rep.v0_nonincreasing || rep.max_positive_slope <= slack;
  return rep;
}

/// Max-norm of the one-sided/centred discrete derivative of v0.
inline double discrete_gradient_bound(const Profile &v0) {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < v0.size(); ++i) m = std::max(m, std::abs(v0[i + 1] - v0[i]) / v0.spacing());
  return m;
}

struct ExtinctionReport {
  double h_end = 0.0;
  double l2_end = 0.0;
  double h_decay_rate = 0.0;  ///< least-squares slope of -ln h over the second half of the run
  double v_decay_rate = 0.0;  ///< same for -ln ||v||_L2
  bool h_decreasing = false;  ///< strictly decreasing over stored states
};

namespace detail {
inline double fitted_log_slope(const std::vector<double> &t, const std::vector<double> &y) {
  double st = 0, sy = 0, stt = 0, sty = 0;
  int m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(y[i] > 0.0)) continue;
    const double ly = std::log(y[i]);
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
    ++m;
  }
  if (m < 2) return 0.0;
  const double den = m * stt - st * st;
  return den != 0.0 ? -(m * sty - st * sy) / den : 0.0;
}
} // namespace detail

inline ExtinctionReport extinction_diagnostics(const EvolutionTrajectory &traj) {
  ExtinctionReport rep;
  rep.h_end = traj.states.back().h;
  rep.l2_end = traj.diagnostics.back().l2_norm;
  rep.h_decreasing = true;
  for (std::size_t i = 1; i < traj.states.size(); ++i)
    if (!(traj.states[i].h < traj.states[i - 1].h)) rep.h_decreasing = false;
  std::vector<double> t, hs, vs;
  const double t_mid = 0.5 * traj.states.back().t;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    if (traj.states[i].t < t_mid) continue;
    t.push_back(traj.states[i].t);
    hs.push_back(traj.states[i].h);
    vs.push_back(traj.diagnostics[i].l2_norm);
  }
  rep.h_decay_rate = detail::fitted_log_slope(t, hs);
  rep.v_decay_rate = detail::fitted_log_slope(t, vs);
  return rep;
}

} // namespace biofilm
