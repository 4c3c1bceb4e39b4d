#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biofilm/errors.hpp"
#include "biofilm/model.hpp"
#include "biofilm/ode.hpp"
#include "biofilm/roots.hpp"

namespace biofilm {

// Shooting characterisation of the equilibrium for affine growth g(s) = alpha (s - b).
//
// The initial value problem kappa c'' = r(c), c(0) = c0, c'(0) = 0 is integrated
// together with its sensitivity w = dc/dc0 (kappa w'' = r'(c) w, w(0) = 1, w'(0) = 0).
// An equilibrium of height h is a c0 for which
//   A(h, c0) = c(h) + (L b/kappa_L) h - c* = 0   and   B(h, c0) = c'(h) - (b/kappa) h = 0.
// A(., c0) is increasing, giving a unique contact height h(c0); c0 -> B(h(c0), c0)
// is increasing on [0, c_low] with r(c_low) = b.

struct ShootOptions {
  double rtol = 1e-12;
  double atol = 1e-15;
  double max_step = 0.0; ///< 0: a fortieth of the c0 = 0 contact height (or of z_end)
};

/// Trajectory of the augmented IVP (c, c_z, w, w_z) on increasing nodes.
struct ShootState {
  double c0 = 0.0;
  std::vector<double> z, c, c_z, w, w_z;

  std::size_t size() const { return z.size(); }
};

/// State of the augmented system at a single abscissa.
struct ShootPoint {
  double z = 0.0, c = 0.0, c_z = 0.0, w = 0.0, w_z = 0.0;
};

namespace detail {

using Shoot4 = DormandPrince<4>;

inline Shoot4 make_shooter(double c0, const Model &model, const ShootOptions &opt, double z_scale) {
  const double kappa = model.params.kappa;
  OdeOptions o;
  o.rtol = opt.rtol;
  o.atol = opt.atol;
  o.max_step = opt.max_step > 0.0 ? opt.max_step : z_scale / 40.0;
  auto rhs = [&model, kappa](double, const Shoot4::State &y) {
    return Shoot4::State{y[1], model.r(y[0]) / kappa, y[3], model.dr(y[0]) * y[2] / kappa};
  };
  return Shoot4(rhs, 0.0, {c0, 0.0, 1.0, 0.0}, o);
}

inline void record(ShootState &s, double z, const Shoot4::State &y) {
  s.z.push_back(z);
  s.c.push_back(y[0]);
  s.c_z.push_back(y[1]);
  s.w.push_back(y[2]);
  s.w_z.push_back(y[3]);
}

inline ShootPoint to_point(double z, const Shoot4::State &y) { return {z, y[0], y[1], y[2], y[3]}; }

inline void check_c0(double c0) {
  if (!std::isfinite(c0) || c0 < 0.0) throw InvalidInput("shoot: c0 must be non-negative");
}

inline double affine_b(const Model &model) {
  if (!model.growth.is_affine()) throw DomainError("shooting requires affine growth alpha (s - b)");
  if (!(model.growth.b() > 0.0)) throw DomainError("shooting requires a positive subsistence level b");
  return model.growth.b();
}

} // namespace detail

/// Integrates the augmented IVP on [0, z_end], recording every accepted step.
inline ShootState shoot_to(double c0, double z_end, const Model &model, const ShootOptions &opt = {}) {
  detail::check_c0(c0);
  if (!(z_end > 0.0)) throw InvalidInput("shoot: z_end must be positive");
  auto ode = detail::make_shooter(c0, model, opt, z_end);
  ShootState s;
  s.c0 = c0;
  detail::record(s, 0.0, ode.state());
  while (ode.time() < z_end) {
    ode.step(z_end);
    detail::record(s, ode.time(), ode.state());
  }
  return s;
}

/// Integrates the augmented IVP landing exactly on the given increasing nodes (first node >= 0).
inline ShootState shoot_on_grid(double c0, std::span<const double> nodes, const Model &model,
                                const ShootOptions &opt = {}) {
  detail::check_c0(c0);
  if (nodes.empty()) return {};
  auto ode = detail::make_shooter(c0, model, opt, std::max(nodes.back(), 1e-300));
  ShootState s;
  s.c0 = c0;
  for (double z : nodes) {
    ode.advance_to(z);
    detail::record(s, z, ode.state());
  }
  return s;
}

/// Integrates until A(z, c0) > 0, i.e. past the contact height (affine growth only).
/// The integration window starts at the c0 = 0 contact height and doubles as needed.
inline ShootState shoot(double c0, const Model &model, const ShootOptions &opt = {}) {
  detail::check_c0(c0);
  const double b = detail::affine_b(model);
  const auto &p = model.params;
  const double slope = p.L * b / p.kappa_L;
  double z_max = p.kappa_L * p.c_star / (p.L * b);
  auto ode = detail::make_shooter(c0, model, opt, z_max);
  ShootState s;
  s.c0 = c0;
  detail::record(s, 0.0, ode.state());
  for (int doubling = 0; doubling < 60; ++doubling) {
    while (ode.time() < z_max) {
      ode.step(z_max);
      detail::record(s, ode.time(), ode.state());
      if (ode.state()[0] + slope * ode.time() - p.c_star > 0.0) return s;
    }
    z_max *= 2.0;
  }
  throw IterationFailure("shoot: A(z, c0) never became positive", 0.0, 60);
}

/// A(z, c0) = c(z, c0) + (L b / kappa_L) z - c*.
inline double contact_function(const ShootPoint &pt, const Model &model) {
  const auto &p = model.params;
  return pt.c + p.L * model.growth.b() / p.kappa_L * pt.z - p.c_star;
}

/// B(z, c0) = c_z(z, c0) - (b / kappa) z.
inline double balance_function(const ShootPoint &pt, const Model &model) {
  return pt.c_z - model.growth.b() / model.params.kappa * pt.z;
}

/// M(z, c0) = (L b/kappa_L + c_z) w_z - (r(c) - b) w / kappa.
inline double certificate_function(const ShootPoint &pt, const Model &model) {
  const auto &p = model.params;
  const double b = model.growth.b();
  return (p.L * b / p.kappa_L + pt.c_z) * pt.w_z - (model.r(pt.c) - b) / p.kappa * pt.w;
}

/// The unique root h(c0) of A(., c0), with the augmented state there.
inline ShootPoint contact_point(double c0, const Model &model, const ShootOptions &opt = {}) {
  const auto &p = model.params;
  if (!(c0 >= 0.0 && c0 < p.c_star)) throw InvalidInput("contact_height: c0 must lie in [0, c*)");
  const double b = detail::affine_b(model);
  const double slope = p.L * b / p.kappa_L;
  const auto traj = shoot(c0, model, opt);
  const std::size_t k = traj.size() - 1; // A > 0 at k, A <= 0 at k-1
  const double za = traj.z[k - 1];
  const ShootPoint start{za, traj.c[k - 1], traj.c_z[k - 1], traj.w[k - 1], traj.w_z[k - 1]};

  OdeOptions o;
  o.rtol = opt.rtol;
  o.atol = opt.atol;
  const double kappa = p.kappa;
  auto rhs = [&model, kappa](double, const detail::Shoot4::State &y) {
    return detail::Shoot4::State{y[1], model.r(y[0]) / kappa, y[3], model.dr(y[0]) * y[2] / kappa};
  };
  auto state_at = [&](double z) {
    if (z <= za) return start;
    detail::Shoot4 seg(rhs, za, {start.c, start.c_z, start.w, start.w_z}, o);
    seg.advance_to(z);
    return detail::to_point(z, seg.state());
  };
  auto A = [&](double z) { return state_at(z).c + slope * z - p.c_star; };

  const double fa = start.c + slope * za - p.c_star;
  const double fb = traj.c[k] + slope * traj.z[k] - p.c_star;
  BrentOptions bo;
  bo.x_tol = 1e-15 * std::max(1.0, traj.z[k]);
  bo.f_tol = 1e-13 * p.c_star;
  const auto root = brent(A, za, traj.z[k], fa, fb, bo);
  return state_at(root.root);
}

inline double contact_height(double c0, const Model &model, const ShootOptions &opt = {}) {
  return contact_point(c0, model, opt).z;
}

/// c_low in (0, c*) with r(c_low) = b.
inline double subsistence_concentration(const Model &model) {
  const double b = detail::affine_b(model);
  const double cs = model.c_star();
  if (!(model.r_max() > b)) throw DomainError("r(c*) <= b: no concentration with r(c) = b below c*");
  BrentOptions bo;
  bo.x_tol = 1e-16 * cs;
  return brent([&](double s) { return model.r(s) - b; }, 0.0, cs, bo).root;
}

/// B(h(c0), c0).
inline double equilibrium_residual(double c0, const Model &model, const ShootOptions &opt = {}) {
  detail::affine_b(model);
  if (!(model.r_max() > model.growth.b()))
    throw DomainError("equilibrium_residual: requires r(c*) > b");
  return balance_function(contact_point(c0, model, opt), model);
}

/// Violations of the monotonicity properties every shoot with c0 >= 0 must show.
struct ShootInvariantReport {
  int violations = 0;
  std::string first;
};

inline ShootInvariantReport check_shoot_invariants(const ShootState &s, double slack = 1e-12) {
  ShootInvariantReport rep;
  auto flag = [&](bool ok, const std::string &what, std::size_t i) {
    if (ok) return;
    if (rep.violations++ == 0) rep.first = what + " at node " + std::to_string(i);
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    flag(s.w[i] >= 1.0 - slack, "w < 1", i);
    flag(s.w_z[i] >= -slack, "w_z < 0", i);
    if (s.c0 == 0.0) flag(s.c[i] == 0.0 && s.c_z[i] == 0.0, "c not identically zero", i);
    if (i > 0) {
      flag(s.c[i] >= s.c[i - 1] - slack, "c decreasing", i);
      flag(s.c_z[i] >= s.c_z[i - 1] - slack, "c_z decreasing", i);
    }
  }
  return rep;
}

/// Sampled evidence that the equilibrium is unique.
struct MonotonicityCertificate {
  std::vector<double> c0;    ///< samples on [0, c_low]
  std::vector<double> h;     ///< contact heights h(c0)
  std::vector<double> B;     ///< B(h(c0), c0)
  std::vector<double> min_M; ///< min of M(z, c0) over sampled z in (0, h(c0)]
  double c_low = 0.0;
  double min_B_increment = std::numeric_limits<double>::infinity();
  double min_M_overall = std::numeric_limits<double>::infinity();
  int shoot_violations = 0;
  bool unique = false;
  std::string offending; ///< first failed check, empty when unique
};

struct CertificateOptions {
  int samples = 64;
  double slack_scale = 1e-12;
  ShootOptions shoot;
};

/// Samples B(h(c0), c0) and M(z, c0) on a uniform c0 grid of [0, c_low] and checks the
/// inequalities that make the equilibrium unique.
inline MonotonicityCertificate monotonicity_certificate(const Model &model,
                                                        const CertificateOptions &opt = {}) {
  const double b = detail::affine_b(model);
  if (!(model.r_max() > b)) throw DomainError("monotonicity_certificate: requires r(c*) > b");
  if (opt.samples < 2) throw InvalidInput("monotonicity_certificate: need at least two samples");
  const auto &p = model.params;
  const double scale = p.kappa_L * p.c_star / (p.L * p.kappa);
  const double slack = opt.slack_scale * scale;

  MonotonicityCertificate cert;
  cert.c_low = subsistence_concentration(model);
  auto fail = [&](const std::string &what) {
    if (cert.offending.empty()) cert.offending = what;
  };

  for (int k = 0; k < opt.samples; ++k) {
    const double c0 = cert.c_low * static_cast<double>(k) / (opt.samples - 1);
    const auto pt = contact_point(c0, model, opt.shoot);
    // Shoot with nodes landing on the contact height.
    auto s = shoot_to(c0, pt.z, model, opt.shoot);
    const auto inv = check_shoot_invariants(s);
    cert.shoot_violations += inv.violations;
    if (inv.violations) fail("shoot invariants (c0 = " + detail::format_number(c0) + "): " + inv.first);

    double prev_M = -std::numeric_limits<double>::infinity();
    double min_M = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const ShootPoint q{s.z[i], s.c[i], s.c_z[i], s.w[i], s.w_z[i]};
      const double M = certificate_function(q, model);
      if (i > 0) {
        min_M = std::min(min_M, M);
        if (!(M > 0.0)) fail("M <= 0 at c0 = " + detail::format_number(c0));
      }
      if (M < prev_M - slack) fail("M decreasing in z at c0 = " + detail::format_number(c0));
      prev_M = M;
    }
    cert.c0.push_back(c0);
    cert.h.push_back(pt.z);
    cert.B.push_back(balance_function(pt, model));
    cert.min_M.push_back(min_M);
    cert.min_M_overall = std::min(cert.min_M_overall, min_M);
    if (k > 0) {
      const double inc = cert.B[k] - cert.B[k - 1];
      cert.min_B_increment = std::min(cert.min_B_increment, inc);
      if (!(inc > slack)) fail("B(h(c0), c0) not increasing near c0 = " + detail::format_number(c0));
    }
  }
  cert.unique = cert.offending.empty();
  return cert;
}

enum class EquilibriumStatus { Found, NoEquilibrium };

inline const char *to_string(EquilibriumStatus s) {
  return s == EquilibriumStatus::Found ? "found" : "no-equilibrium";
}

struct EquilibriumResult {
  EquilibriumStatus status = EquilibriumStatus::NoEquilibrium;
  double h_e = 0.0;
  double c0_e = 0.0;
  double residual_B = 0.0;   ///< B(h_e, c0_e)
  double residual_A = 0.0;   ///< A(h_e, c0_e)
  ShootState profile;        ///< c(., c0_e) on [0, h_e]
  MonotonicityCertificate certificate;
  bool unique = false;
};

struct ShootingEquilibriumOptions {
  ShootOptions shoot;
  CertificateOptions certificate;
  bool with_certificate = true;
};

/// Locates the equilibrium by Brent's method on c0 -> B(h(c0), c0) over [0, c_low].
inline EquilibriumResult find_equilibrium_shooting(const Model &model,
                                                   const ShootingEquilibriumOptions &opt = {}) {
  model.params.check();
  const double b = detail::affine_b(model);
  EquilibriumResult res;
  if (!(model.r_max() > b)) return res; // no equilibrium
  require(model, Requirement::StrictlyMonotone, "find_equilibrium_shooting");

  const auto &p = model.params;
  const double scale = p.kappa_L * p.c_star / (p.L * p.kappa);
  const double c_low = subsistence_concentration(model);
  auto B = [&](double c0) { return equilibrium_residual(c0, model, opt.shoot); };
  const double B0 = B(0.0), B1 = B(c_low);
  if (!(B0 < 0.0 && B1 > 0.0))
    throw DomainError("find_equilibrium_shooting: B(h(c0), c0) does not change sign on [0, c_low]");

  BrentOptions bo;
  bo.x_tol = 1e-15 * p.c_star;
  bo.f_tol = 1e-14 * scale;
  const auto root = brent(B, 0.0, c_low, B0, B1, bo);

  res.status = EquilibriumStatus::Found;
  res.c0_e = root.root;
  const auto pt = contact_point(res.c0_e, model, opt.shoot);
  res.h_e = pt.z;
  res.residual_A = contact_function(pt, model);
  res.residual_B = balance_function(pt, model);
  res.profile = shoot_to(res.c0_e, res.h_e, model, opt.shoot);
  if (opt.with_certificate) {
    auto co = opt.certificate;
    co.shoot = opt.shoot;
    res.certificate = monotonicity_certificate(model, co);
    res.unique = res.certificate.unique;
  }
  return res;
}

/// Equilibrium concentration resampled on y_i = i/n, i.e. u_e(y) = c(y h_e, c0_e).
inline std::vector<double> equilibrium_profile_on_grid(const EquilibriumResult &eq, const Model &model,
                                                       int n, const ShootOptions &opt = {}) {
  std::vector<double> z(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) z[static_cast<std::size_t>(i)] = eq.h_e * i / n;
  z.back() = eq.h_e;
  return shoot_on_grid(eq.c0_e, z, model, opt).c;
}

} // namespace biofilm
