// One line per acceptance criterion; exit status is nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "biofilm/bvp.hpp"
#include "biofilm/evolution.hpp"
#include "biofilm/quasisteady.hpp"
#include "biofilm/shooting.hpp"
#include "biofilm/verify.hpp"
#include "../oracles.hpp"

using namespace biofilm;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Model linear_model(double b = 0.25) {
  Model m;
  m.rate = RateModel::linear(1.0);
  m.growth = GrowthModel::affine(1.0, b);
  return m;
}

// ---------------------------------------------------------------------------------------

Outcome closed_form_bvp() {
  const auto t0 = Clock::now();
  const Model m = linear_model();
  double worst = 0.0, min_order = 1e9, max_order = -1e9;
  for (double h : {0.5, 1.0, 2.0}) {
    const oracle::LinearBvp ex(h, 1.0, 1.0, 1.0, 1.0, 1.0);
    auto err = [&](int n) {
      BvpOptions o;
      o.n = n;
      const auto sol = solve_bvp(h, m, o);
      double e = 0.0;
      for (std::size_t i = 0; i < sol.u.size(); ++i) e = std::max(e, std::abs(sol.u[i] - ex.u(sol.u.node(i))));
      return e;
    };
    const double e512 = err(512), e1024 = err(1024);
    worst = std::max(worst, e1024);
    const double order = std::log2(e512 / e1024);
    min_order = std::min(min_order, order);
    max_order = std::max(max_order, order);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && min_order >= 1.8 && max_order <= 2.2 && secs < 1.0,
          "max error " + num(worst) + ", order in [" + num(min_order) + ", " + num(max_order) + "], " + num(secs) +
              " s"};
}

struct SweepCase {
  std::string label;
  Model model;
  double h;
};

std::vector<SweepCase> bound_sweep() {
  const std::vector<double> heights{0.1, 0.5, 2.0, 10.0, 50.0};
  const std::vector<RateModel> rates{RateModel::tanh(2.0), RateModel::monod(1.0, 0.5), RateModel::linear(1.0),
                                     RateModel::tabulated({0.0, 0.25, 0.5, 1.0, 2.0}, {0.0, 0.6, 0.9, 1.2, 1.5}),
                                     RateModel::monod(3.0, 0.05)};
  std::vector<PhysicalParams> params(5);
  params[1].kappa = 0.3;
  params[2].kappa_L = 3.0;
  params[3].L = 0.2;
  params[4].c_star = 2.0;
  std::vector<SweepCase> out;
  for (double h : heights)
    for (const auto &r : rates)
      for (std::size_t k = 0; k < params.size(); ++k) {
        Model m;
        m.params = params[k];
        m.rate = r;
        out.push_back({r.spec() + " params#" + std::to_string(k) + " h=" + num(h), m, h});
      }
  return out;
}

constexpr int sweep_n = 512;

Outcome bound_suite(const std::vector<SweepCase> &cases, std::vector<BvpSolution> &sols) {
  BvpOptions o;
  o.n = sweep_n;
  long violations = 0, converged = 0, roundoff_u0 = 0;
  double min_u0 = std::numeric_limits<double>::infinity();
  std::string first;
  for (const auto &c : cases) {
    auto sol = solve_bvp(c.h, c.model, o);
    if (sol.residual <= o.tol * c.model.c_star()) ++converged;
    // Every bound, including 0 < u(0), is checked up to the invariant slack.
    const double slack = std::max(10.0 * o.tol, 5.0 / (double(sweep_n) * sweep_n)) * c.model.c_star();
    const auto rep = check_bvp_bounds(sol, c.model, slack);
    if (rep.violations && first.empty()) first = c.label + ": " + rep.messages[0];
    violations += rep.violations;
    if (!(sol.u[0] > 0.0)) ++roundoff_u0;
    min_u0 = std::min(min_u0, sol.u[0]);
    sols.push_back(std::move(sol));
  }
  return {violations == 0 && converged == static_cast<long>(cases.size()),
          std::to_string(cases.size()) + " solves, " + std::to_string(converged) + " converged, " +
              std::to_string(violations) + " violations" + (first.empty() ? "" : " (first: " + first + ")") +
              "; u(0) <= 0 at round-off level in " + std::to_string(roundoff_u0) + " cases, min u(0) " +
              num(min_u0)};
}

// The defect compares a trapezoid integral with a centred difference, both second order with
// leading error proportional to kappa u_yyy = h^2 r'(u) u_y.
Outcome flux_identity(const std::vector<SweepCase> &cases, const std::vector<BvpSolution> &sols) {
  double worst = 0.0;
  std::string where;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto &sol = sols[k];
    const Model &m = cases[k].model;
    double scale = 0.0;
    for (std::size_t i = 0; i < sol.u.size(); ++i) scale = std::max(scale, sol.h * sol.h * m.dr(sol.u[i]) * sol.u_y[i]);
    scale = std::max(scale, 1e-300);
    const double ratio = flux_identity_defect(sol, m) / (5.0 * scale / (double(sweep_n) * sweep_n));
    if (ratio > worst) {
      worst = ratio;
      where = cases[k].label;
    }
  }
  return {worst <= 1.0, "max defect / (5 n^-2 scale) = " + num(worst) + " at " + where};
}

Outcome equilibrium_cross_validation() {
  const auto t0 = Clock::now();
  const Model m = figure1_model();
  const auto eq = find_equilibrium_shooting(m);
  const auto ode = find_equilibrium_ode(m);
  const double delta = std::abs(eq.h_e - ode.h_e) / eq.h_e;
  const double fp = fixed_point_defect(equilibrium_profile_on_grid(eq, m, 8192), eq.h_e, m);

  const Model lin = linear_model();
  const oracle::LinearEquilibrium ex(0.25);
  const auto leq = find_equilibrium_shooting(lin);
  const auto lode = find_equilibrium_ode(lin);
  const double lin_sh = std::abs(leq.h_e - ex.h) / ex.h;
  const double lin_ode = std::abs(lode.h_e - ex.h) / ex.h;
  const double lin_c0 = std::abs(leq.c0_e - ex.c0);
  const double secs = seconds_since(t0);
  const bool ok = eq.status == EquilibriumStatus::Found && ode.found && delta <= 1e-8 && fp <= 1e-8 &&
                  lin_sh <= 1e-8 && lin_ode <= 1e-8 && lin_c0 <= 1e-8 && secs < 10.0;
  return {ok, "h_e " + num(eq.h_e) + ", rel delta " + num(delta) + ", fixed-point defect " + num(fp) +
                  ", linear rel errors " + num(lin_sh) + "/" + num(lin_ode) + ", c0 error " + num(lin_c0) + ", " +
                  num(secs) + " s"};
}

Outcome uniqueness_certificate() {
  long violations = 0;
  std::ostringstream os;
  for (const Model &m : {figure1_model(), linear_model()}) {
    const auto cert = monotonicity_certificate(m);
    long v = cert.shoot_violations + (cert.min_B_increment > 0.0 ? 0 : 1) + (cert.min_M_overall > 0.0 ? 0 : 1) +
             (cert.c0.size() == 64 ? 0 : 1);
    violations += v;
    os << m.rate.spec() << ": min dB " << num(cert.min_B_increment) << ", min M " << num(cert.min_M_overall)
       << ", shoot violations " << cert.shoot_violations << "; ";
  }
  return {violations == 0, os.str() + std::to_string(violations) + " violations"};
}

Outcome sensitivity() {
  const Model m = figure1_model();
  double worst = 0.0;
  int points = 0;
  for (double c0 : {0.05, 0.12, 0.2, 0.25, 0.5})
    for (double z : {0.3, 1.0}) {
      const double d = 1e-5;
      const std::vector<double> nodes{0.0, z};
      const double w = shoot_on_grid(c0, nodes, m).w[1];
      const double fd = (shoot_on_grid(c0 + d, nodes, m).c[1] - shoot_on_grid(c0 - d, nodes, m).c[1]) / (2 * d);
      worst = std::max(worst, std::abs(w - fd) / std::abs(fd));
      ++points;
    }
  return {worst <= 1e-6 && points == 10, std::to_string(points) + " points, max rel error " + num(worst)};
}

std::string failing(const CheckReport &r) {
  std::string s;
  for (const auto &m : r.measurements)
    if (!m.pass) s += (s.empty() ? "" : ", ") + m.name + "=" + num(m.value);
  for (const auto &n : r.notes) s += (s.empty() ? "" : "; ") + n;
  return s.empty() ? "" : " [" + s + "]";
}

Outcome extinction() {
  const auto t0 = Clock::now();
  Model m = figure1_model();
  m.growth = GrowthModel::affine(1.0, 2.0);
  const auto r = check_extinction(m);
  const double secs = seconds_since(t0);
  return {r.pass && secs < 30.0,
          "h_end/h0 qs " + num(r.value("quasisteady_h_end_over_h0")) + " evo " +
              num(r.value("evolution_h_end_over_h0")) + ", flux ratio qs " + num(r.value("quasisteady_flux_ratio")) +
              " evo " + num(r.value("evolution_flux_ratio")) + ", deficit ratio qs " +
              num(r.value("quasisteady_surface_deficit_ratio")) + " evo " +
              num(r.value("evolution_surface_deficit_ratio")) + " (targets " + num(m.r_max()) + ", " +
              num(m.r_max()) + "), " + num(secs) + " s" + failing(r)};
}

Outcome convergence() {
  const auto t0 = Clock::now();
  const auto r = check_convergence_to_equilibrium(figure1_model());
  const double secs = seconds_since(t0);
  const double e1 = std::abs(r.value("h0=0.5h_e:h_end") - r.value("h0=2h_e:h_end"));
  return {r.pass && secs < 30.0,
          "h_end(0.5 h_e) " + num(r.value("h0=0.5h_e:h_end")) + ", h_end(2 h_e) " + num(r.value("h0=2h_e:h_end")) +
              ", spread " + num(e1) + ", reversals " +
              num(r.value("h0=0.5h_e:h_reversals") + r.value("h0=2h_e:h_reversals")) + ", " + num(secs) + " s" +
              failing(r)};
}

Outcome evolution_invariants() {
  long violations = 0, runs = 0;
  std::string first;
  const int n = 128;
  const double slack = 5.0 / (double(n) * n);
  std::vector<std::pair<std::string, Profile>> initial{
      {"cos2", figure1_initial_deficit(n, 1.0)},
      {"ramp", Profile::from_function(n, [](double y) { return 1.0 - y; })},
      {"const", Profile::constant(n, 0.4)}};
  for (double b : {0.5, 2.0})
    for (double kappa : {1.0, 0.3})
      for (double h0 : {0.5, 3.5})
        for (const auto &[name, v0] : initial) {
          Model m = figure1_model();
          m.growth = GrowthModel::affine(1.0, b);
          m.params.kappa = kappa;
          EvolutionOptions o;
          o.n = n;
          o.output_interval = 0.05;
          const auto tr = evolve(v0, h0, 10.0, m, o);
          const auto gr = gradient_diagnostics(tr, m, discrete_gradient_bound(v0), slack);
          long v = (tr.extremes.min_v >= -slack ? 0 : 1) + (tr.extremes.max_v <= 1.0 + slack ? 0 : 1) +
                   (tr.extremes.max_envelope_excess <= 1e-12 ? 0 : 1) + (gr.within_bound ? 0 : 1) +
                   (gr.monotonicity_preserved ? 0 : 1);
          if (v && first.empty())
            first = name + " b=" + num(b) + " kappa=" + num(kappa) + " h0=" + num(h0) + ": v in [" +
                    num(tr.extremes.min_v) + ", " + num(tr.extremes.max_v) + "], gradient " + num(gr.max_ratio) +
                    "/" + num(gr.bound);
          violations += v;
          ++runs;
        }
  return {violations == 0,
          std::to_string(runs) + " runs, " + std::to_string(violations) + " violations" +
              (first.empty() ? "" : " (first: " + first + ")")};
}

Outcome figure1() {
  const auto r = check_figure1();
  return {r.pass, "sign changes " + num(r.value("sign_changes")) + " (need 2), smoothing time " +
                      num(r.value("smoothing_time")) + " (limit 6), gradient " + num(r.value("gradient_ratio")) +
                      failing(r)};
}

Outcome quasi_steady_limit() {
  const auto t0 = Clock::now();
  Model m = figure1_model();
  m.params.eps = 1e-3;
  const double t_end = 10.0, h0 = 3.5;
  QuasiSteadyOptions qo;
  qo.max_step = 0.05;
  const auto qs = integrate_quasisteady(h0, t_end, m, qo);
  EvolutionOptions eo;
  eo.output_interval = 0.0;
  const auto ev = evolve(figure1_initial_deficit(eo.n, 1.0), h0, t_end, m, eo);
  // Interpolate the densely stored evolution at the quasi-steady output times.
  double worst = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < qs.times.size(); ++i) {
    const double t = qs.times[i];
    while (j + 1 < ev.states.size() && ev.states[j + 1].t < t) ++j;
    const auto &a = ev.states[j];
    const auto &b = ev.states[std::min(j + 1, ev.states.size() - 1)];
    const double w = b.t > a.t ? std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0) : 0.0;
    const double h = (1 - w) * a.h + w * b.h;
    worst = std::max(worst, std::abs(h - qs.heights[i]) / qs.heights[i]);
  }
  const double secs = seconds_since(t0);
  return {worst <= 0.02 && secs < 60.0,
          "sup |h_evo - h_qs|/h_qs = " + num(worst) + " over t in [0, " + num(t_end) + "], " +
              std::to_string(ev.extremes.steps) + " steps, " + num(secs) + " s"};
}

} // namespace

int main() {
  struct Criterion {
    int id;
    std::string text;
    std::function<Outcome()> run;
  };
  const auto cases = bound_sweep();
  std::vector<BvpSolution> sols;
  const std::vector<Criterion> criteria{
      {1, "closed-form linear BVP", closed_form_bvp},
      {2, "bound suite over 5x5x5 sweep", [&] { return bound_suite(cases, sols); }},
      {3, "flux identity on the sweep", [&] { return flux_identity(cases, sols); }},
      {4, "equilibrium cross-validation", equilibrium_cross_validation},
      {5, "uniqueness certificate", uniqueness_certificate},
      {6, "sensitivity vs finite differences", sensitivity},
      {7, "extinction", extinction},
      {8, "convergence to equilibrium", convergence},
      {9, "evolution invariants on test matrix", evolution_invariants},
      {10, "oscillatory relaxation (defaults)", figure1},
      {11, "quasi-steady limit at eps = 1e-3", quasi_steady_limit},
  };
  int failures = 0;
  for (const auto &c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.id << ": " << c.text << " (" << o.detail << ")" << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
