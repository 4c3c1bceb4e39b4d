#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "biofilm/bvp.hpp"
#include "biofilm/errors.hpp"
#include "biofilm/model.hpp"
#include "biofilm/ode.hpp"
#include "biofilm/roots.hpp"

namespace biofilm {

/// Evaluates f(h) repeatedly, warm-starting each BVP solve from the previous profile.
class GrowthRateEvaluator {
public:
  GrowthRateEvaluator(const Model &model, BvpOptions opt) : model_(model), opt_(opt) {}

  /// f(h); for h <= 0 the linear extension g(r(c*)) h is returned.
  double operator()(double h) {
    if (!(h > 0.0)) return model_.net_growth(model_.c_star()) * h;
    return growth_rate(solve(h), model_);
  }

  BvpSolution solve(double h) {
    BvpOptions o = opt_;
    if (!last_.empty()) o.warm_start = &last_;
    auto sol = solve_bvp(h, model_, o);
    last_.assign(sol.u.values().begin(), sol.u.values().end());
    ++solves_;
    return sol;
  }

  long solves() const { return solves_; }

private:
  const Model &model_;
  BvpOptions opt_;
  std::vector<double> last_;
  long solves_ = 0;
};

enum class TrajectoryStatus { Completed, Extinct };

inline const char *to_string(TrajectoryStatus s) {
  return s == TrajectoryStatus::Completed ? "completed" : "extinct";
}

/// Quasi-steady time series; all vectors are aligned with `times`.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> heights;
  std::vector<double> growth;          ///< h'/h = int_0^1 g(r(u))
  std::vector<double> flux_ratio;      ///< u_y(t,1) / h(t)^2
  std::vector<double> surface_deficit; ///< (c* - u(t,1)) / h(t)
  std::vector<Profile> profiles;       ///< u[h(t)] when requested
  double growth_bound = 0.0;           ///< M = sup |g| on [0, r(c*)]
  TrajectoryStatus status = TrajectoryStatus::Completed;
};

struct QuasiSteadyOptions {
  double rtol = 1e-8;
  double atol = 1e-15;
  double h_floor = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  bool store_profiles = false;
  BvpOptions bvp = [] {
    BvpOptions o;
    o.n = 512;
    return o;
  }();
};

/// Integrates h' = f(h), h(0) = h0 with the Dormand-Prince 5(4) pair. Every accepted
/// step is recorded. Falling below h_floor ends the run with status Extinct.
inline Trajectory integrate_quasisteady(double h0, double t_end, const Model &model,
                                        const QuasiSteadyOptions &opt = {}) {
  if (!std::isfinite(h0) || !(h0 > 0.0)) throw InvalidInput("integrate_quasisteady: h0 must be positive");
  if (!std::isfinite(t_end) || !(t_end > 0.0))
    throw InvalidInput("integrate_quasisteady: t_end must be positive");
  model.params.check();

  GrowthRateEvaluator f(model, opt.bvp);
  Trajectory traj;
  traj.growth_bound = model.growth_bound();

  auto record = [&](double t, double h) {
    const auto sol = f.solve(h);
    const std::size_t n = sol.u.size() - 1;
    traj.times.push_back(t);
    traj.heights.push_back(h);
    traj.growth.push_back(growth_rate(sol, model) / h);
    traj.flux_ratio.push_back(sol.u_y[n] / (h * h));
    traj.surface_deficit.push_back((model.c_star() - sol.u[n]) / h);
    if (opt.store_profiles) traj.profiles.push_back(sol.u);
  };

  OdeOptions o;
  o.rtol = opt.rtol;
  o.atol = opt.atol;
  o.max_step = opt.max_step;
  DormandPrince<1> ode([&f](double, const std::array<double, 1> &y) { return std::array<double, 1>{f(y[0])}; },
                       0.0, {h0}, o);
  record(0.0, h0);
  while (ode.time() < t_end) {
    ode.step(t_end);
    const double h = ode.state()[0];
    if (!(h > opt.h_floor)) {
      traj.times.push_back(ode.time());
      traj.heights.push_back(h);
      traj.growth.push_back(model.net_growth(model.c_star()));
      traj.flux_ratio.push_back(model.r_max() / model.params.kappa);
      traj.surface_deficit.push_back(model.params.L * model.r_max() / model.params.kappa_L);
      if (opt.store_profiles) traj.profiles.push_back(Profile::constant(opt.bvp.n, model.c_star()));
      traj.status = TrajectoryStatus::Extinct;
      return traj;
    }
    record(ode.time(), h);
  }
  return traj;
}

struct OdeEquilibrium {
  bool found = false;
  double h_e = 0.0;
  double f_at_root = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  int evaluations = 0;
};

struct OdeEquilibriumOptions {
  std::optional<std::pair<double, double>> bracket; ///< f(lo) f(hi) < 0 expected
  double h_floor = 1e-8;
  double h_max = 1e4;
  double rel_tol = 1e-12;
  BvpOptions bvp = [] {
    BvpOptions o;
    o.n = 4096;
    return o;
  }();
};

/// Root of f by Brent's method; the bracket is expanded geometrically when missing or
/// when it does not show a sign change. found == false signals that f keeps one sign
/// on [h_floor, h_max].
inline OdeEquilibrium find_equilibrium_ode(const Model &model, const OdeEquilibriumOptions &opt = {}) {
  model.params.check();
  GrowthRateEvaluator f(model, opt.bvp);
  double lo, hi;
  if (opt.bracket) {
    lo = opt.bracket->first;
    hi = opt.bracket->second;
    if (!(lo > 0.0 && hi > lo)) throw InvalidInput("find_equilibrium_ode: bracket must satisfy 0 < lo < hi");
  } else if (model.growth.is_affine() && model.growth.b() > 0.0) {
    // f(h) <= alpha kappa_L c*/L - alpha b h, so every root lies below kappa_L c*/(L b).
    hi = model.params.kappa_L * model.c_star() / (model.params.L * model.growth.b());
    lo = 0.25 * hi;
  } else {
    lo = 0.25;
    hi = 4.0;
  }
  const auto br = expand_bracket(f, lo, hi, opt.h_floor, opt.h_max);
  OdeEquilibrium res;
  if (!br) return res;

  const double M = std::max(model.growth_bound(), std::numeric_limits<double>::min());
  BrentOptions bo;
  bo.rel_tol = opt.rel_tol;
  bo.x_tol = 1e-3 * opt.rel_tol * br->lo;
  bo.f_tol = 1e-3 * opt.rel_tol * M * br->lo;
  const auto root = brent(f, br->lo, br->hi, br->f_lo, br->f_hi, bo);
  res.found = true;
  res.h_e = root.root;
  res.f_at_root = root.value;
  res.bracket_lo = root.lo;
  res.bracket_hi = root.hi;
  res.evaluations = root.evaluations + static_cast<int>(f.solves());
  return res;
}

} // namespace biofilm
