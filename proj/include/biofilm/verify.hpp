#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "biofilm/bvp.hpp"
#include "biofilm/errors.hpp"
#include "biofilm/evolution.hpp"
#include "biofilm/model.hpp"
#include "biofilm/quasisteady.hpp"
#include "biofilm/roots.hpp"
#include "biofilm/shooting.hpp"

namespace biofilm {

/// Where a target value comes from.
enum class Provenance {
  Oracle,      ///< recomputed at run time from an independent formula or solve
  ClosedForm,  ///< exact formula for a special case
  Qualitative, ///< a property (sign, monotonicity, count) rather than a number
  Exact,       ///< holds exactly in the discrete scheme
};

inline const char *to_string(Provenance p) {
  switch (p) {
  case Provenance::Oracle: return "oracle";
  case Provenance::ClosedForm: return "closed-form";
  case Provenance::Qualitative: return "qualitative";
  case Provenance::Exact: return "exact";
  }
  return "?";
}

/// How value is compared against target.
enum class Relation {
  AbsClose, ///< |value - target| <= tolerance
  RelClose, ///< |value - target| <= tolerance |target|
  AtMost,   ///< value <= target + tolerance
  AtLeast,  ///< value >= target - tolerance
};

inline const char *to_string(Relation r) {
  switch (r) {
  case Relation::AbsClose: return "abs";
  case Relation::RelClose: return "rel";
  case Relation::AtMost: return "<=";
  case Relation::AtLeast: return ">=";
  }
  return "?";
}

struct Measurement {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  Relation relation = Relation::AbsClose;
  Provenance provenance = Provenance::Oracle;
  bool pass = false;
};

struct CheckReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<Measurement> measurements;
  std::vector<std::string> notes;
  bool pass = true;

  void parameter(const std::string &key, const std::string &value) { parameters.emplace_back(key, value); }
  void parameter(const std::string &key, double value) { parameters.emplace_back(key, detail::format_number(value)); }

  const Measurement &measure(const std::string &what, double value, double target, double tol, Relation rel,
                             Provenance prov) {
    Measurement m{what, value, target, tol, rel, prov, false};
    if (std::isfinite(value)) {
      switch (rel) {
      case Relation::AbsClose: m.pass = std::abs(value - target) <= tol; break;
      case Relation::RelClose: m.pass = std::abs(value - target) <= tol * std::abs(target); break;
      case Relation::AtMost: m.pass = value <= target + tol; break;
      case Relation::AtLeast: m.pass = value >= target - tol; break;
      }
    }
    pass = pass && m.pass;
    measurements.push_back(m);
    return measurements.back();
  }

  /// A pass/fail property recorded as a count of violations.
  const Measurement &require_zero(const std::string &what, long violations) {
    return measure(what, static_cast<double>(violations), 0.0, 0.0, Relation::AtMost, Provenance::Qualitative);
  }

  const Measurement *find(const std::string &what) const {
    for (const auto &m : measurements)
      if (m.name == what) return &m;
    return nullptr;
  }

  double value(const std::string &what) const {
    const auto *m = find(what);
    if (!m) throw Error("CheckReport: no measurement named " + what);
    return m->value;
  }

  std::string text() const {
    std::ostringstream os;
    os << "check " << name << ": " << (pass ? "PASS" : "FAIL") << "\n";
    for (const auto &[k, v] : parameters) os << "  param " << k << " = " << v << "\n";
    for (const auto &m : measurements)
      os << "  " << (m.pass ? "ok   " : "FAIL ") << m.name << " = " << detail::format_number(m.value) << " (target "
         << to_string(m.relation) << " " << detail::format_number(m.target) << ", tol "
         << detail::format_number(m.tolerance) << ", " << to_string(m.provenance) << ")\n";
    for (const auto &n : notes) os << "  note: " << n << "\n";
    return os.str();
  }
};

namespace detail {

/// Sign changes of x_i - ref, ignoring entries within `dead` of ref.
inline int count_sign_changes(const std::vector<double> &x, double ref, double dead) {
  int changes = 0, last = 0;
  for (double v : x) {
    const double d = v - ref;
    if (std::abs(d) <= dead) continue;
    const int s = d > 0.0 ? 1 : -1;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

/// Number of direction reversals of a sequence, ignoring steps smaller than `dead`.
inline int count_reversals(const std::vector<double> &x, double dead) {
  int reversals = 0, last = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double d = x[i] - x[i - 1];
    if (std::abs(d) <= dead) continue;
    const int s = d > 0.0 ? 1 : -1;
    if (last != 0 && s != last) ++reversals;
    last = s;
  }
  return reversals;
}

} // namespace detail

// ---------------------------------------------------------------------------------------
// h -> 0

struct SmallHOptions {
  std::vector<double> heights{1.0, 1e-1, 1e-2, 1e-3, 1e-4};
  int n = 512;
  double ratio_tol = 0.01;    ///< relative, for u_y(1)/h^2 -> r(c*)/kappa
  double deviation_tol = 1e-3; ///< relative to c*, for max |u - c*| at the smallest h
};

inline CheckReport check_small_h_limit(const Model &model, const SmallHOptions &opt = {}) {
  const auto &p = model.params;
  CheckReport rep;
  rep.name = "small_h_limit";
  rep.parameter("rate", model.rate.spec());
  rep.parameter("growth", model.growth.spec());
  rep.parameter("n", static_cast<double>(opt.n));
  for (std::size_t i = 0; i < opt.heights.size(); ++i) {
    if (!(opt.heights[i] > 0.0) || (i > 0 && !(opt.heights[i] < opt.heights[i - 1])))
      throw InvalidInput("check_small_h_limit: heights must be positive and decreasing");
  }

  const double target = model.r_max() / p.kappa;
  BvpOptions bo;
  bo.n = opt.n;
  std::vector<double> dev, ratio_err;
  double boundary_defect = 0.0, ratio = 0.0;
  for (double h : opt.heights) {
    const auto sol = solve_bvp(h, model, bo);
    const std::size_t n = sol.u.size() - 1;
    double d = 0.0;
    for (std::size_t i = 0; i <= n; ++i) d = std::max(d, std::abs(sol.u[i] - p.c_star));
    dev.push_back(d);
    ratio = sol.u_y[n] / (h * h);
    ratio_err.push_back(std::abs(ratio - target) / target);
    // c* - u(1) = (L kappa / kappa_L) u_y(1) / h holds for every h.
    const double lhs = p.c_star - sol.u[n];
    const double rhs = p.L * p.kappa / p.kappa_L * sol.u_y[n] / h;
    boundary_defect = std::max(boundary_defect, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
  }

  int dev_increases = 0, err_increases = 0;
  for (std::size_t i = 1; i < dev.size(); ++i) {
    if (!(dev[i] < dev[i - 1])) ++dev_increases;
    if (!(ratio_err[i] <= ratio_err[i - 1])) ++err_increases;
  }
  rep.measure("max_abs_u_minus_cstar_at_min_h", dev.back(), 0.0, opt.deviation_tol * p.c_star, Relation::AbsClose,
              Provenance::Qualitative);
  rep.require_zero("deviation_nondecreasing_steps", dev_increases);
  rep.measure("flux_ratio_at_min_h", ratio, target, opt.ratio_tol, Relation::RelClose, Provenance::Oracle);
  rep.require_zero("flux_ratio_error_nondecreasing_steps", err_increases);
  rep.measure("boundary_identity_rel_defect", boundary_defect, 0.0, 1e-8, Relation::AtMost, Provenance::Exact);

  if (model.rate.kind() == RateModel::Kind::Linear) {
    // u = A cosh(mu y), mu = h sqrt(lambda/kappa), so u_y(1) = A mu sinh(mu).
    const double lambda = model.rate.coefficients()[0];
    const double h = opt.heights.back();
    const double mu = h * std::sqrt(lambda / p.kappa);
    const double A = p.c_star / (std::cosh(mu) + p.L * p.kappa * mu / (p.kappa_L * h) * std::sinh(mu));
    const double exact = A * mu * std::sinh(mu) / (h * h);
    rep.measure("linear_flux_ratio_closed_form", ratio, exact, 1e-4, Relation::RelClose, Provenance::ClosedForm);
    rep.measure("linear_limit", target, lambda * p.c_star / p.kappa, 1e-14, Relation::RelClose,
                Provenance::ClosedForm);
  }
  return rep;
}

// ---------------------------------------------------------------------------------------
// h -> infinity

struct LargeHOptions {
  std::vector<double> heights{10.0, 30.0, 100.0, 300.0};
  double delta = 0.1;
  int n = 4096;
  double interior_tol = 1e-6; ///< relative to c*, for sup_[0,1-delta] u at the largest h
};

/// Upper envelope for the scaled gradient u_y/h, from comparing p = u_y with the solution of
/// p'' = (h^2 alpha/kappa) p, p(0) = 0 that matches p at y = 1 (alpha = min r' on [0, c*]).
inline double gradient_envelope(double y, double h, double surface_deficit, const Model &model, double alpha) {
  const auto &p = model.params;
  const double k = std::sqrt(alpha / p.kappa);
  const double amp = p.kappa_L / (p.L * p.kappa) * surface_deficit;
  // sinh(khy)/sinh(kh) written to avoid overflow for large kh.
  const double x = k * h;
  const double ratio = std::exp(x * (y - 1.0)) * (1.0 - std::exp(-2.0 * x * y)) / (1.0 - std::exp(-2.0 * x));
  return amp * (y > 0.0 ? ratio : 0.0);
}

inline CheckReport check_large_h_limit(const Model &model, const LargeHOptions &opt = {}) {
  require(model, Requirement::StrictlyMonotone, "check_large_h_limit");
  if (!(opt.delta > 0.0 && opt.delta < 1.0)) throw InvalidInput("check_large_h_limit: delta must lie in (0, 1)");
  for (std::size_t i = 1; i < opt.heights.size(); ++i)
    if (!(opt.heights[i] > opt.heights[i - 1])) throw InvalidInput("check_large_h_limit: heights must increase");

  const auto &p = model.params;
  CheckReport rep;
  rep.name = "large_h_limit";
  rep.parameter("rate", model.rate.spec());
  rep.parameter("delta", opt.delta);
  rep.parameter("n", static_cast<double>(opt.n));

  double alpha = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 1000; ++i) alpha = std::min(alpha, model.rate.derivative(p.c_star * i / 1000.0));
  rep.parameter("alpha_min", alpha);

  BvpOptions bo;
  bo.n = opt.n;
  std::vector<double> sup_interior;
  std::vector<std::vector<double>> profiles;
  double envelope_excess = 0.0, u0_last = 0.0;
  const std::size_t cut = static_cast<std::size_t>(std::floor((1.0 - opt.delta) * opt.n + 1e-9));
  std::vector<double> warm;
  for (double h : opt.heights) {
    if (!warm.empty()) bo.warm_start = &warm;
    const auto sol = solve_bvp(h, model, bo);
    warm.assign(sol.u.values().begin(), sol.u.values().end());
    const std::size_t n = sol.u.size() - 1;
    double s = 0.0;
    for (std::size_t i = 0; i <= cut; ++i) s = std::max(s, sol.u[i]);
    sup_interior.push_back(s);
    u0_last = sol.u[0];
    const double deficit = p.c_star - sol.u[n];
    const double slack = 5.0 / (static_cast<double>(n) * n) * (p.kappa_L / (p.L * p.kappa)) * deficit;
    for (std::size_t i = 0; i <= n; ++i) {
      const double env = gradient_envelope(sol.u.node(i), h, deficit, model, alpha);
      envelope_excess = std::max(envelope_excess, sol.u_y[i] / h - env - slack);
    }
    profiles.push_back(warm);
  }

  int sup_increases = 0;
  for (std::size_t i = 1; i < sup_interior.size(); ++i)
    if (!(sup_interior[i] < sup_interior[i - 1])) ++sup_increases;
  long pointwise = 0;
  for (std::size_t k = 1; k < profiles.size(); ++k)
    for (std::size_t i = 0; i <= cut; ++i)
      if (profiles[k][i] > profiles[k - 1][i] + 1e-13 * p.c_star) ++pointwise;

  rep.measure("sup_interior_u_at_max_h", sup_interior.back(), 0.0, opt.interior_tol * p.c_star, Relation::AtMost,
              Provenance::Qualitative);
  rep.measure("u0_at_max_h", u0_last, 0.0, opt.interior_tol * p.c_star, Relation::AtMost, Provenance::Qualitative);
  rep.require_zero("sup_interior_nondecreasing_steps", sup_increases);
  rep.require_zero("pointwise_interior_increase", pointwise);
  rep.measure("gradient_envelope_excess", envelope_excess, 0.0, 0.0, Relation::AtMost, Provenance::Oracle);

  if (model.rate.kind() == RateModel::Kind::Linear) {
    const double lambda = model.rate.coefficients()[0];
    // u(0) = c*/(cosh mu + c sinh mu), written without overflow.
    double worst = 0.0;
    for (std::size_t k = 0; k < profiles.size(); ++k) {
      const double h = opt.heights[k];
      const double mu = h * std::sqrt(lambda / p.kappa);
      const double c = p.L * p.kappa * mu / (p.kappa_L * h);
      const double e2 = std::exp(-2.0 * mu);
      const double exact = 2.0 * p.c_star * std::exp(-mu) / (1.0 + e2 + c * (1.0 - e2));
      // Values below the solver tolerance (1e-12 c*) are not resolved.
      worst = std::max(worst, std::abs(profiles[k][0] - exact) / (exact + bo.tol * p.c_star));
      if (k == 0) rep.parameter("linear_u0_exact_at_min_h", exact);
    }
    rep.measure("linear_u0_closed_form_max_rel_error", worst, 0.0, 1e-3, Relation::AtMost, Provenance::ClosedForm);
  }
  return rep;
}

// ---------------------------------------------------------------------------------------
// extinction

struct ExtinctionOptions {
  double h0 = 1.0;
  double t_end = 40.0;
  double ratio_tol = 0.01;
  double l2_tol = 1e-3;
  double threshold = 1e-3; ///< h(t_end) below threshold h0
  QuasiSteadyOptions quasi;
  EvolutionOptions evolution = [] {
    EvolutionOptions o;
    o.output_interval = 0.05;
    return o;
  }();
  bool run_evolution = true;
};

inline CheckReport check_extinction(const Model &model, const ExtinctionOptions &opt = {}) {
  require(model, Requirement::ExtinctionRegime, "check_extinction");
  const auto &p = model.params;
  CheckReport rep;
  rep.name = "extinction";
  rep.parameter("rate", model.rate.spec());
  rep.parameter("growth", model.growth.spec());
  rep.parameter("h0", opt.h0);
  rep.parameter("t_end", opt.t_end);

  const double flux_target = model.r_max() / p.kappa;
  const double deficit_target = p.L * model.r_max() / p.kappa_L;

  const auto qs = integrate_quasisteady(opt.h0, opt.t_end, model, opt.quasi);
  int qs_nondecreasing = 0;
  for (std::size_t i = 1; i < qs.heights.size(); ++i)
    if (!(qs.heights[i] < qs.heights[i - 1])) ++qs_nondecreasing;
  rep.measure("quasisteady_h_end_over_h0", qs.heights.back() / opt.h0, 0.0, opt.threshold, Relation::AtMost,
              Provenance::Qualitative);
  rep.require_zero("quasisteady_h_nondecreasing_steps", qs_nondecreasing);
  // Ratios are read at the last solved state; an extinct record carries the limits themselves.
  std::size_t k = qs.heights.size() - 1;
  if (qs.status == TrajectoryStatus::Extinct && k > 0) --k;
  rep.parameter("quasisteady_status", to_string(qs.status));
  rep.parameter("quasisteady_ratio_height", qs.heights[k]);
  rep.measure("quasisteady_flux_ratio", qs.flux_ratio[k], flux_target, opt.ratio_tol, Relation::RelClose,
              Provenance::Oracle);
  rep.measure("quasisteady_surface_deficit_ratio", qs.surface_deficit[k], deficit_target, opt.ratio_tol,
              Relation::RelClose, Provenance::Oracle);

  if (opt.run_evolution) {
    const int n = opt.evolution.n;
    const auto v0 = Profile::from_function(n, [&](double y) {
      const double c = std::cos(2.0 * M_PI * y);
      return p.c_star * (1.0 - c * c);
    });
    const auto ev = evolve(v0, opt.h0, opt.t_end, model, opt.evolution);
    const auto er = extinction_diagnostics(ev);
    rep.measure("evolution_h_end_over_h0", er.h_end / opt.h0, 0.0, opt.threshold, Relation::AtMost,
                Provenance::Qualitative);
    rep.measure("evolution_l2_end", er.l2_end, 0.0, opt.l2_tol, Relation::AtMost, Provenance::Qualitative);
    int ev_nondecreasing = 0;
    for (std::size_t i = 1; i < ev.states.size(); ++i)
      if (!(ev.states[i].h < ev.states[i - 1].h)) ++ev_nondecreasing;
    rep.require_zero("evolution_h_nondecreasing_steps", ev_nondecreasing);
    const std::size_t j = ev.states.size() - 1;
    const auto &s = ev.states[j];
    rep.parameter("evolution_ratio_height", s.h);
    rep.measure("evolution_flux_ratio", ev.diagnostics[j].flux_ratio, flux_target, opt.ratio_tol,
                Relation::RelClose, Provenance::Oracle);
    rep.measure("evolution_surface_deficit_ratio", s.v[s.v.size() - 1] / s.h, deficit_target, opt.ratio_tol,
                Relation::RelClose, Provenance::Oracle);
  }
  return rep;
}

// ---------------------------------------------------------------------------------------
// convergence to the equilibrium

struct ConvergenceOptions {
  std::vector<double> h0_factors{0.5, 2.0}; ///< initial heights as multiples of h_e
  double t_end = 60.0;
  double h_tol = 1e-4;  ///< relative to h_e
  double u_tol = 1e-4;  ///< relative to c*
  int persistence_samples = 16;
  QuasiSteadyOptions quasi;
};

/// Height below which u[h] >= c_low everywhere, i.e. the root of u[h](0) = c_low.
inline double persistence_height(const Model &model, double c_low, double h_hi, const BvpOptions &bo) {
  auto f = [&](double h) { return solve_bvp(h, model, bo).u[0] - c_low; };
  double lo = 1e-3 * h_hi;
  double f_lo = f(lo);
  while (f_lo <= 0.0 && lo > 1e-12) f_lo = f(lo *= 0.1);
  const double f_hi = f(h_hi);
  if (!(f_lo > 0.0 && f_hi < 0.0)) throw IterationFailure("persistence_height: no bracket", f_hi, 0);
  BrentOptions o;
  o.rel_tol = 1e-10;
  o.x_tol = 1e-14 * h_hi;
  return brent(f, lo, h_hi, f_lo, f_hi, o).root;
}

inline CheckReport check_convergence_to_equilibrium(const Model &model, const ConvergenceOptions &opt = {}) {
  require(model, Requirement::EquilibriumRegime, "check_convergence_to_equilibrium");
  const auto &p = model.params;
  CheckReport rep;
  rep.name = "convergence_to_equilibrium";
  rep.parameter("rate", model.rate.spec());
  rep.parameter("growth", model.growth.spec());
  rep.parameter("t_end", opt.t_end);

  ShootingEquilibriumOptions so;
  so.with_certificate = false;
  const auto eq = find_equilibrium_shooting(model, so);
  if (eq.status != EquilibriumStatus::Found) throw DomainError("check_convergence_to_equilibrium: no equilibrium");
  rep.parameter("h_e", eq.h_e);
  rep.parameter("c0_e", eq.c0_e);
  const int n = opt.quasi.bvp.n;
  const auto u_e = equilibrium_profile_on_grid(eq, model, n);

  std::vector<double> h_ends;
  for (double factor : opt.h0_factors) {
    const double h0 = factor * eq.h_e;
    const auto tr = integrate_quasisteady(h0, opt.t_end, model, opt.quasi);
    const std::string tag = "h0=" + detail::format_number(factor) + "h_e";
    const double h_end = tr.heights.back();
    h_ends.push_back(h_end);
    rep.measure(tag + ":h_end", h_end, eq.h_e, opt.h_tol, Relation::RelClose, Provenance::Oracle);
    BvpOptions bo = opt.quasi.bvp;
    const auto sol = solve_bvp(h_end, model, bo);
    double du = 0.0;
    for (std::size_t i = 0; i < u_e.size(); ++i) du = std::max(du, std::abs(sol.u[i] - u_e[i]));
    rep.measure(tag + ":max_abs_u_minus_u_e", du, 0.0, opt.u_tol * p.c_star, Relation::AtMost, Provenance::Oracle);
    // Steps below the integrator's relative tolerance are unresolved and ignored.
    rep.require_zero(tag + ":h_reversals", detail::count_reversals(tr.heights, opt.quasi.rtol * eq.h_e));
  }
  if (h_ends.size() > 1) {
    const auto [mn, mx] = std::minmax_element(h_ends.begin(), h_ends.end());
    rep.measure("cross_run_spread", *mx - *mn, 0.0, 2.0 * opt.h_tol * eq.h_e, Relation::AtMost, Provenance::Oracle);
  }

  // Below the persistence height u >= c_low, hence g(r(u)) >= 0 and f(h) > 0.
  const double c_low = subsistence_concentration(model);
  const double delta = persistence_height(model, c_low, eq.h_e, opt.quasi.bvp);
  rep.parameter("c_low", c_low);
  rep.parameter("persistence_height", delta);
  GrowthRateEvaluator f(model, opt.quasi.bvp);
  long nonpositive = 0;
  for (int k = 0; k < opt.persistence_samples; ++k) {
    const double h = delta * std::pow(1e-4, static_cast<double>(k) / (opt.persistence_samples - 1));
    if (!(f(h) > 0.0)) ++nonpositive;
  }
  rep.require_zero("persistence_nonpositive_f", nonpositive);
  rep.measure("persistence_height_below_h_e", delta, eq.h_e, 0.0, Relation::AtMost, Provenance::Qualitative);
  return rep;
}

// ---------------------------------------------------------------------------------------
// the oscillatory relaxation experiment

/// The experiment's configuration: r = 2 tanh, g(s) = s - 1/2, unit parameters.
inline Model figure1_model() {
  Model m;
  m.params = PhysicalParams{};
  m.rate = RateModel::tanh(2.0);
  m.growth = GrowthModel::affine(1.0, 0.5);
  return m;
}

struct Figure1Options {
  double h0 = 3.5;
  double t_end = 60.0;
  int min_sign_changes = 2;
  double dead_band = 1e-8; ///< relative to h(t_end); smaller deviations are not counted
  EvolutionOptions evolution = [] {
    EvolutionOptions o;
    o.output_interval = 0.01;
    return o;
  }();
};

/// u0 = c* cos^2(2 pi y), as a deficit.
inline Profile figure1_initial_deficit(int n, double c_star) {
  return Profile::from_function(n, [c_star](double y) {
    const double c = std::cos(2.0 * M_PI * y);
    return c_star * (1.0 - c * c);
  });
}

/// Time after which every stored profile has u nondecreasing in y (v_y <= slack).
inline double smoothing_time(const EvolutionTrajectory &traj, double slack) {
  double t_s = 0.0;
  for (const auto &s : traj.states) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < s.v.size(); ++i) m = std::max(m, (s.v[i + 1] - s.v[i]) / s.v.spacing());
    if (m > slack) t_s = s.t;
  }
  return t_s;
}

inline CheckReport check_figure1(const Model &model = figure1_model(), const Figure1Options &opt = {}) {
  const auto &p = model.params;
  CheckReport rep;
  rep.name = "figure1";
  rep.parameter("rate", model.rate.spec());
  rep.parameter("growth", model.growth.spec());
  rep.parameter("kappa", p.kappa);
  rep.parameter("kappa_L", p.kappa_L);
  rep.parameter("L", p.L);
  rep.parameter("eps", p.eps);
  rep.parameter("h0", opt.h0);
  rep.parameter("t_end", opt.t_end);
  rep.parameter("n", static_cast<double>(opt.evolution.n));
  rep.parameter("dt", opt.evolution.dt);

  const int n = opt.evolution.n;
  const auto v0 = figure1_initial_deficit(n, p.c_star);
  const auto tr = evolve(v0, opt.h0, opt.t_end, model, opt.evolution);
  const double h_end = tr.states.back().h;
  rep.parameter("h_end", h_end);

  std::vector<double> hs;
  for (const auto &s : tr.states) hs.push_back(s.h);
  const int changes = detail::count_sign_changes(hs, h_end, opt.dead_band * h_end);
  rep.measure("sign_changes", changes, opt.min_sign_changes, 0.0, Relation::AtLeast, Provenance::Qualitative);

  const double slack = 5.0 * p.c_star / (static_cast<double>(n) * n);
  rep.measure("smoothing_time", smoothing_time(tr, slack), opt.t_end / 10.0, 0.0, Relation::AtMost,
              Provenance::Qualitative);
  rep.measure("min_v", tr.extremes.min_v, 0.0, slack, Relation::AtLeast, Provenance::Qualitative);
  rep.measure("max_v", tr.extremes.max_v, p.c_star, slack, Relation::AtMost, Provenance::Qualitative);
  rep.measure("growth_envelope_excess", tr.extremes.max_envelope_excess, 0.0, 1e-12, Relation::AtMost,
              Provenance::Exact);
  const auto gr = gradient_diagnostics(tr, model, discrete_gradient_bound(v0), slack);
  rep.measure("gradient_ratio", gr.max_ratio, gr.bound, slack, Relation::AtMost, Provenance::Oracle);
  rep.parameter("gradient_bound_alt", gr.bound_alt);
  if (changes < opt.min_sign_changes)
    rep.notes.push_back("h(t) relaxes without overshoot for these parameters; oscillation needs slower "
                        "diffusion in the film (e.g. kappa <= 0.3 with kappa_L = L = 1)");
  return rep;
}

// ---------------------------------------------------------------------------------------

/// Names accepted by run_checks.
inline const std::vector<std::string> &check_names() {
  static const std::vector<std::string> names{"small_h", "large_h", "extinction", "convergence", "figure1"};
  return names;
}

/// Default model bundle used by each named check.
inline Model default_check_model(const std::string &name) {
  Model m = figure1_model();
  if (name == "extinction") m.growth = GrowthModel::affine(1.0, 2.0);
  return m;
}

inline CheckReport run_check(const std::string &name, const Model &model) {
  if (name == "small_h") return check_small_h_limit(model);
  if (name == "large_h") return check_large_h_limit(model);
  if (name == "extinction") return check_extinction(model);
  if (name == "convergence") return check_convergence_to_equilibrium(model);
  if (name == "figure1") return check_figure1(model);
  throw InvalidInput("unknown check '" + name + "'");
}

/// Runs the named checks concurrently (each task owns its solvers). Failures inside a
/// check are reported as a failed CheckReport carrying the error text.
inline std::vector<CheckReport> run_checks(const std::vector<std::string> &names,
                                           const std::function<Model(const std::string &)> &model_for =
                                               default_check_model) {
  for (const auto &nm : names)
    if (std::find(check_names().begin(), check_names().end(), nm) == check_names().end())
      throw InvalidInput("unknown check '" + nm + "'");
  std::vector<std::future<CheckReport>> jobs;
  for (const auto &nm : names)
    jobs.push_back(std::async(std::launch::async, [nm, model = model_for(nm)] {
      try {
        return run_check(nm, model);
      } catch (const std::exception &e) {
        CheckReport r;
        r.name = nm;
        r.pass = false;
        r.notes.push_back(std::string("error: ") + e.what());
        return r;
      }
    }));
  std::vector<CheckReport> out;
  for (auto &j : jobs) out.push_back(j.get());
  return out;
}

} // namespace biofilm
