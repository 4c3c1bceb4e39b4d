#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

#include "biofilm/errors.hpp"

namespace biofilm {

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-12;
  double initial_step = 0.0; ///< 0 selects a step from the local derivative scale
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-14;   ///< relative to max(1, |t|)
  long max_steps = 10'000'000;
};

/// Embedded Runge-Kutta 5(4) pair of Dormand and Prince with FSAL and
/// standard step-size control. The state is a fixed-size array.
template <std::size_t N> class DormandPrince {
public:
  using State = std::array<double, N>;
  using Rhs = std::function<State(double, const State &)>;

  DormandPrince(Rhs rhs, double t0, const State &y0, OdeOptions opt = {})
      : rhs_(std::move(rhs)), opt_(opt), t_(t0), y_(y0) {
    k1_ = rhs_(t_, y_);
    ++evaluations_;
  }

  double time() const { return t_; }
  const State &state() const { return y_; }
  const State &derivative() const { return k1_; }
  double last_step() const { return last_h_; }
  long accepted_steps() const { return accepted_; }
  long rejected_steps() const { return rejected_; }
  long evaluations() const { return evaluations_; }

  /// Takes one accepted step toward t_limit (never beyond it). Returns the new time.
  double step(double t_limit) {
    const double span = t_limit - t_;
    if (span <= 0.0) return t_;
    if (h_ <= 0.0) h_ = opt_.initial_step > 0.0 ? opt_.initial_step : initial_step(span);

    while (true) {
      double h = std::min({h_, opt_.max_step, span});
      const bool last = h >= span * (1.0 - 1e-12);
      if (last) h = span;
      const double h_floor = opt_.min_step * std::max(1.0, std::abs(t_));
      if (h < h_floor && !last)
        throw IterationFailure("ode: step size underflow", h, static_cast<int>(accepted_));

      State y_new, k7, err;
      attempt(h, y_new, k7, err);
      const double e = error_norm(err, y_new);
      if (e <= 1.0) {
        t_ = last ? t_limit : t_ + h;
        y_ = y_new;
        k1_ = k7;
        last_h_ = h;
        ++accepted_;
        const double fac = e > 0.0 ? 0.9 * std::pow(e, -0.2) : 5.0;
        h_ = h * std::clamp(fac, 0.2, 5.0);
        if (last && h_ < h) h_ = h; // a clipped final step says nothing about the scale
        return t_;
      }
      ++rejected_;
      if (accepted_ + rejected_ > opt_.max_steps)
        throw IterationFailure("ode: too many steps", e, static_cast<int>(accepted_));
      const double fac = std::isfinite(e) ? 0.9 * std::pow(e, -0.2) : 0.2;
      h_ = h * std::clamp(fac, 0.1, 0.9);
    }
  }

  /// Integrates exactly to t_target.
  void advance_to(double t_target) {
    while (t_ < t_target) {
      step(t_target);
      if (accepted_ > opt_.max_steps)
        throw IterationFailure("ode: too many steps", 0.0, static_cast<int>(accepted_));
    }
  }

private:
  void attempt(double h, State &y_new, State &k7, State &err) {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    State tmp;
    const State &k1 = k1_;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * a21 * k1[i];
    const State k2 = rhs_(t_ + h / 5.0, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a31 * k1[i] + a32 * k2[i]);
    const State k3 = rhs_(t_ + 3.0 * h / 10.0, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y_[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const State k4 = rhs_(t_ + 4.0 * h / 5.0, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y_[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    const State k5 = rhs_(t_ + 8.0 * h / 9.0, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y_[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const State k6 = rhs_(t_ + h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      y_new[i] = y_[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    k7 = rhs_(t_ + h, y_new);
    evaluations_ += 6;
    for (std::size_t i = 0; i < N; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
  }

  double error_norm(const State &err, const State &y_new) const {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y_[i]), std::abs(y_new[i]));
      const double q = err[i] / sc;
      s += q * q;
    }
    return std::sqrt(s / static_cast<double>(N));
  }

  double initial_step(double span) const {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt_.atol + opt_.rtol * std::abs(y_[i]);
      d0 += (y_[i] / sc) * (y_[i] / sc);
      d1 += (k1_[i] / sc) * (k1_[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    return std::min({h, span, opt_.max_step});
  }

  Rhs rhs_;
  OdeOptions opt_;
  double t_;
  State y_;
  State k1_{};
  double h_ = 0.0;
  double last_h_ = 0.0;
  long accepted_ = 0, rejected_ = 0, evaluations_ = 0;
};

} // namespace biofilm
