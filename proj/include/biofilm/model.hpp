#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "biofilm/errors.hpp"
#include "biofilm/quadrature.hpp"

namespace biofilm {

/// Dimensional constants of the reduced one-layer model.
///
/// kappa   diffusivity inside the biofilm
/// kappa_L diffusivity in the diffusive boundary layer
/// L       boundary-layer thickness
/// c_star  bulk substrate concentration
/// eps     time-scale factor of the substrate equation (eps c_t = ...)
struct PhysicalParams {
  double kappa = 1.0;
  double kappa_L = 1.0;
  double L = 1.0;
  double c_star = 1.0;
  double eps = 1.0;

  /// L kappa / kappa_L, the coefficient of c_z in the Robin condition at the film surface.
  double robin_coefficient() const { return L * kappa / kappa_L; }

  bool all_finite() const {
    return std::isfinite(kappa) && std::isfinite(kappa_L) && std::isfinite(L) &&
           std::isfinite(c_star) && std::isfinite(eps);
  }
  bool all_positive() const {
    return kappa > 0 && kappa_L > 0 && L > 0 && c_star > 0 && eps > 0;
  }

  /// Throws InvalidInput unless every field is finite and strictly positive.
  void check() const {
    if (!all_finite()) throw InvalidInput("physical parameters must be finite");
    if (!all_positive()) throw InvalidInput("physical parameters must be strictly positive");
  }

  bool operator==(const PhysicalParams &) const = default;
};

namespace detail {

// Piecewise-linear interpolation on strictly increasing abscissae; values beyond the
// table are held constant when `clamp` is set and linearly extrapolated otherwise.
inline double interpolate(const std::vector<double> &xs, const std::vector<double> &ys, double x,
                          bool clamp) {
  if (xs.size() == 1) return ys.front();
  if (x <= xs.front() && clamp) return ys.front();
  if (x >= xs.back() && clamp) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t k = static_cast<std::size_t>(std::distance(xs.begin(), it));
  k = std::clamp<std::size_t>(k, 1, xs.size() - 1);
  const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

inline void check_table(const std::vector<double> &xs, const std::vector<double> &ys,
                        const char *what) {
  if (xs.empty() || xs.size() != ys.size())
    throw InvalidInput(std::string(what) + ": table needs matching, non-empty columns");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
      throw InvalidInput(std::string(what) + ": table entries must be finite");
    if (i > 0 && !(xs[i] > xs[i - 1]))
      throw InvalidInput(std::string(what) + ": table abscissae must be strictly increasing");
  }
}

inline std::string format_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline std::string format_table(const std::vector<double> &xs, const std::vector<double> &ys) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += format_number(xs[i]) + '/' + format_number(ys[i]);
  }
  return s;
}

} // namespace detail

/// Substrate consumption rate r(s).
class RateModel {
public:
  enum class Kind { Tanh, Monod, Linear, Tabulated };

  /// r(s) = rho tanh(s)
  static RateModel tanh(double rho) { return checked(RateModel(Kind::Tanh, {rho})); }
  /// r(s) = r_max s / (K + s)
  static RateModel monod(double r_max, double K) {
    if (!(K > 0)) throw InvalidInput("monod rate: half-saturation K must be positive");
    return checked(RateModel(Kind::Monod, {r_max, K}));
  }
  /// r(s) = lambda s
  static RateModel linear(double lambda) { return checked(RateModel(Kind::Linear, {lambda})); }
  /// Piecewise-linear table (s_i, r_i), linearly extrapolated.
  static RateModel tabulated(std::vector<double> s, std::vector<double> r) {
    detail::check_table(s, r, "tabulated rate");
    RateModel m(Kind::Tabulated, {});
    m.xs_ = std::move(s);
    m.ys_ = std::move(r);
    return m;
  }

  Kind kind() const { return kind_; }
  const std::vector<double> &coefficients() const { return coef_; }

  /// False for tabulated rates, whose derivative is a centered finite difference.
  bool has_analytic_derivative() const { return kind_ != Kind::Tabulated; }

  double operator()(double s) const {
    switch (kind_) {
    case Kind::Tanh: return coef_[0] * std::tanh(s);
    case Kind::Monod: return coef_[0] * s / (coef_[1] + s);
    case Kind::Linear: return coef_[0] * s;
    case Kind::Tabulated: return detail::interpolate(xs_, ys_, s, false);
    }
    return 0.0;
  }

  double derivative(double s) const {
    switch (kind_) {
    case Kind::Tanh: {
      const double ch = std::cosh(s);
      return coef_[0] / (ch * ch);
    }
    case Kind::Monod: {
      const double d = coef_[1] + s;
      return coef_[0] * coef_[1] / (d * d);
    }
    case Kind::Linear: return coef_[0];
    case Kind::Tabulated: {
      const double h = 1e-7 * std::max(1.0, std::abs(s));
      return ((*this)(s + h) - (*this)(s - h)) / (2.0 * h);
    }
    }
    return 0.0;
  }

  /// r restricted to [0, c*] and extended by constants: 0 below, r(c*) above.
  double truncated(double s, double c_star) const {
    if (s < 0.0) return 0.0;
    if (s >= c_star) return (*this)(c_star);
    return (*this)(s);
  }

  double truncated_derivative(double s, double c_star) const {
    if (s < 0.0 || s >= c_star) return 0.0;
    return derivative(s);
  }

  /// Textual form accepted by cli::parse_rate.
  std::string spec() const {
    using detail::format_number;
    switch (kind_) {
    case Kind::Tanh: return "tanh:" + format_number(coef_[0]);
    case Kind::Monod: return "monod:" + format_number(coef_[0]) + ":" + format_number(coef_[1]);
    case Kind::Linear: return "linear:" + format_number(coef_[0]);
    case Kind::Tabulated: return "table:" + detail::format_table(xs_, ys_);
    }
    return {};
  }

private:
  RateModel(Kind k, std::vector<double> c) : kind_(k), coef_(std::move(c)) {}

  static RateModel checked(RateModel m) {
    for (double c : m.coef_)
      if (!std::isfinite(c)) throw InvalidInput("rate parameters must be finite");
    return m;
  }

  Kind kind_;
  std::vector<double> coef_;
  std::vector<double> xs_, ys_;
};

/// Growth law g applied to the consumption rate.
class GrowthModel {
public:
  enum class Kind { Affine, Tabulated };

  /// g(s) = alpha (s - b)
  static GrowthModel affine(double alpha, double b) {
    if (!std::isfinite(alpha) || !std::isfinite(b))
      throw InvalidInput("growth parameters must be finite");
    GrowthModel m(Kind::Affine);
    m.alpha_ = alpha;
    m.b_ = b;
    return m;
  }
  /// Piecewise-linear table (s_i, g_i), held constant outside the table.
  static GrowthModel tabulated(std::vector<double> s, std::vector<double> g) {
    detail::check_table(s, g, "tabulated growth");
    GrowthModel m(Kind::Tabulated);
    m.xs_ = std::move(s);
    m.ys_ = std::move(g);
    return m;
  }
  /// g == value; a one-row table.
  static GrowthModel constant(double value) { return tabulated({0.0}, {value}); }

  Kind kind() const { return kind_; }
  bool is_affine() const { return kind_ == Kind::Affine; }
  double alpha() const { return alpha_; }
  double b() const { return b_; }

  double operator()(double s) const {
    if (kind_ == Kind::Affine) return alpha_ * (s - b_);
    return detail::interpolate(xs_, ys_, s, true);
  }

  /// Lipschitz constant of g on [0, s_max].
  double lipschitz_constant(double s_max) const {
    if (kind_ == Kind::Affine) return std::abs(alpha_);
    double lip = 0.0;
    for (std::size_t i = 1; i < xs_.size(); ++i) {
      if (xs_[i] <= 0.0 || xs_[i - 1] >= s_max) continue;
      lip = std::max(lip, std::abs((ys_[i] - ys_[i - 1]) / (xs_[i] - xs_[i - 1])));
    }
    return lip;
  }

  /// sup |g| on [0, s_max]; g is piecewise linear so endpoints and table nodes suffice.
  double sup_norm(double s_max) const {
    double m = std::max(std::abs((*this)(0.0)), std::abs((*this)(s_max)));
    if (kind_ == Kind::Tabulated)
      for (std::size_t i = 0; i < xs_.size(); ++i)
        if (xs_[i] > 0.0 && xs_[i] < s_max) m = std::max(m, std::abs(ys_[i]));
    return m;
  }

  std::string spec() const {
    using detail::format_number;
    if (kind_ == Kind::Affine) return "affine:" + format_number(alpha_) + ":" + format_number(b_);
    if (xs_.size() == 1) return "const:" + format_number(ys_[0]);
    return "table:" + detail::format_table(xs_, ys_);
  }

private:
  explicit GrowthModel(Kind k) : kind_(k) {}

  Kind kind_;
  double alpha_ = 0.0, b_ = 0.0;
  std::vector<double> xs_, ys_;
};

/// Parameters, consumption rate and growth law travelling together.
/// Every solver evaluates the truncated rate through this bundle.
struct Model {
  PhysicalParams params;
  RateModel rate = RateModel::tanh(2.0);
  GrowthModel growth = GrowthModel::affine(1.0, 0.5);

  double c_star() const { return params.c_star; }
  double r(double s) const { return rate.truncated(s, params.c_star); }
  double dr(double s) const { return rate.truncated_derivative(s, params.c_star); }
  double r_max() const { return rate(params.c_star); }
  /// g(r~(s)).
  double net_growth(double s) const { return growth(r(s)); }
  /// M = sup |g| on [0, r(c*)].
  double growth_bound() const { return growth.sup_norm(r_max()); }
};

/// Concentration samples on the uniform grid y_i = i/n of [0,1].
class Profile {
public:
  static constexpr int min_cells = 8;

  Profile() = default;
  explicit Profile(std::vector<double> values) : v_(std::move(values)) {
    if (v_.size() < static_cast<std::size_t>(min_cells) + 1)
      throw InvalidInput("profile needs at least 8 cells");
  }

  template <class F> static Profile from_function(int n, F &&f) {
    if (n < min_cells) throw InvalidInput("profile needs at least 8 cells");
    std::vector<double> v(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) v[static_cast<std::size_t>(i)] = f(static_cast<double>(i) / n);
    return Profile(std::move(v));
  }
  static Profile constant(int n, double value) {
    return from_function(n, [value](double) { return value; });
  }

  int cells() const { return static_cast<int>(v_.size()) - 1; }
  std::size_t size() const { return v_.size(); }
  double spacing() const { return 1.0 / cells(); }
  double node(std::size_t i) const { return static_cast<double>(i) / cells(); }
  double operator[](std::size_t i) const { return v_[i]; }
  double &operator[](std::size_t i) { return v_[i]; }
  std::span<const double> values() const { return v_; }
  std::vector<double> &data() { return v_; }

  /// Second-order centred in the interior, second-order one-sided at the ends.
  double first_difference(std::size_t i) const {
    const double dy = spacing();
    const std::size_t n = v_.size() - 1;
    if (i == 0) return (-3.0 * v_[0] + 4.0 * v_[1] - v_[2]) / (2.0 * dy);
    if (i == n) return (3.0 * v_[n] - 4.0 * v_[n - 1] + v_[n - 2]) / (2.0 * dy);
    return (v_[i + 1] - v_[i - 1]) / (2.0 * dy);
  }

  double second_difference(std::size_t i) const {
    const double dy2 = spacing() * spacing();
    const std::size_t n = v_.size() - 1;
    if (i == 0) return (2.0 * v_[0] - 5.0 * v_[1] + 4.0 * v_[2] - v_[3]) / dy2;
    if (i == n) return (2.0 * v_[n] - 5.0 * v_[n - 1] + 4.0 * v_[n - 2] - v_[n - 3]) / dy2;
    return (v_[i + 1] - 2.0 * v_[i] + v_[i - 1]) / dy2;
  }

  std::vector<double> first_differences() const {
    std::vector<double> d(v_.size());
    for (std::size_t i = 0; i < v_.size(); ++i) d[i] = first_difference(i);
    return d;
  }
  std::vector<double> second_differences() const {
    std::vector<double> d(v_.size());
    for (std::size_t i = 0; i < v_.size(); ++i) d[i] = second_difference(i);
    return d;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

private:
  std::vector<double> v_;
};

/// Downstream operations and the model assumptions they rely on.
enum class Requirement {
  Basic,              ///< r(0)=0, s r(s) > 0, finite positive parameters
  MonotoneRate,       ///< additionally r' >= 0 on [0, c*] (BVP, quasi-steady, gradient bounds)
  StrictlyMonotone,   ///< additionally r' > 0 on [0, c*] (shooting, large-h limit)
  EquilibriumRegime,  ///< strictly monotone, affine g and r(c*) > b
  ExtinctionRegime,   ///< g(r(s)) < 0 on [0, c*]
};

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  double r_at_c_star = 0.0;
  double min_rate_derivative = 0.0;
  double growth_lipschitz = 0.0;
  double growth_bound = 0.0;
  bool rate_derivative_approximate = false;

  bool passed(const std::string &name) const {
    for (const auto &c : checks)
      if (c.name == name) return c.passed;
    return false;
  }

  bool satisfies(Requirement req) const {
    const bool basic = passed("positive_parameters") && passed("rate_vanishes_at_zero") &&
                       passed("sign_condition");
    switch (req) {
    case Requirement::Basic: return basic;
    case Requirement::MonotoneRate: return basic && passed("rate_nondecreasing");
    case Requirement::StrictlyMonotone: return basic && passed("rate_strictly_increasing");
    case Requirement::EquilibriumRegime:
      return basic && passed("rate_strictly_increasing") && passed("affine_growth") &&
             passed("rate_exceeds_subsistence");
    case Requirement::ExtinctionRegime: return basic && passed("growth_negative");
    }
    return false;
  }

  /// Names of failed checks, comma separated.
  std::string failures() const {
    std::string s;
    for (const auto &c : checks)
      if (!c.passed) s += (s.empty() ? "" : ", ") + c.name;
    return s;
  }
};

struct ValidationOptions {
  int samples = 1000;
};

/// Samples the standing assumptions on r and g over [0, c*].
inline ValidationReport validate(const PhysicalParams &params, const RateModel &rate,
                                 const GrowthModel &growth, ValidationOptions opt = {}) {
  if (!params.all_finite()) throw InvalidInput("physical parameters must be finite");
  if (opt.samples < 2) throw InvalidInput("validation needs at least two samples");

  ValidationReport rep;
  auto add = [&](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, std::move(detail)});
  };

  add("positive_parameters", params.all_positive(), "kappa, kappa_L, L, c*, eps > 0");
  const double cs = params.c_star;
  const int m = opt.samples;

  const double r0 = rate(0.0);
  add("rate_vanishes_at_zero", std::abs(r0) <= 1e-14, "r(0) = " + detail::format_number(r0));

  bool sign_ok = true;
  double min_dr = std::numeric_limits<double>::infinity();
  std::string sign_detail = "s r(s) > 0 on (0, c*]";
  for (int i = 0; i <= m; ++i) {
    const double s = cs * static_cast<double>(i) / m;
    const double rs = rate(s);
    if (!std::isfinite(rs)) throw InvalidInput("rate is not finite on [0, c*]");
    if (i > 0 && !(s * rs > 0.0) && sign_ok) {
      sign_ok = false;
      sign_detail = "violated at s = " + detail::format_number(s);
    }
    min_dr = std::min(min_dr, rate.derivative(s));
  }
  add("sign_condition", sign_ok, sign_detail);
  rep.min_rate_derivative = min_dr;
  rep.rate_derivative_approximate = !rate.has_analytic_derivative();
  add("rate_nondecreasing", min_dr >= 0.0, "min r' on [0,c*] = " + detail::format_number(min_dr));
  add("rate_strictly_increasing", min_dr > 0.0,
      "min r' on [0,c*] = " + detail::format_number(min_dr));

  const double rmax = rate(cs);
  rep.r_at_c_star = rmax;
  rep.growth_lipschitz = growth.lipschitz_constant(std::max(rmax, 0.0));
  rep.growth_bound = growth.sup_norm(std::max(rmax, 0.0));
  add("growth_lipschitz", std::isfinite(rep.growth_lipschitz),
      "Lipschitz constant on [0, r(c*)] = " + detail::format_number(rep.growth_lipschitz));
  add("affine_growth", growth.is_affine(), growth.spec());
  add("rate_exceeds_subsistence", growth.is_affine() && rmax > growth.b(),
      "r(c*) = " + detail::format_number(rmax));

  bool negative = true;
  for (int i = 0; i <= m && negative; ++i) {
    const double s = cs * static_cast<double>(i) / m;
    if (!(growth(rate.truncated(s, cs)) < 0.0)) negative = false;
  }
  add("growth_negative", negative, "g(r(s)) < 0 on [0, c*]");
  return rep;
}

inline ValidationReport validate(const Model &model, ValidationOptions opt = {}) {
  return validate(model.params, model.rate, model.growth, opt);
}

/// Throws DomainError when the model does not meet `req`.
inline void require(const Model &model, Requirement req, const char *operation) {
  model.params.check();
  const auto rep = validate(model);
  if (!rep.satisfies(req))
    throw DomainError(std::string(operation) + ": model assumptions violated (" + rep.failures() +
                      ")");
}

/// G(v) = int_0^1 g(r(c* - v(y))) dy by the composite trapezoid rule.
inline double growth_integral(const Profile &v, const Model &model) {
  std::vector<double> f(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw InvalidInput("growth_integral: profile is not finite");
    f[i] = model.net_growth(model.c_star() - v[i]);
  }
  return trapezoid(f, v.spacing());
}

} // namespace biofilm
