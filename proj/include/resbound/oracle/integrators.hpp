#pragma once

// Reference integrators used to validate bounds.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "resbound/error.hpp"
#include "resbound/grid.hpp"

namespace resbound::oracle {

using State = std::vector<double>;
/// dy/dt = rhs(t, y), written into `dy`.
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

namespace detail {

inline void axpy(std::span<double> out, std::span<const double> y, double h, std::span<const double> k) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y[i] + h * k[i];
}

}  // namespace detail

/// Classical fixed-step RK4; one state per grid node.
inline std::vector<State> rk4_solve(const Rhs& rhs, const State& y0, const Grid& grid) {
  const std::size_t n = y0.size();
  std::vector<State> out;
  out.reserve(grid.size());
  out.push_back(y0);
  State k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double t = grid.node(k);
    const double h = grid.node(k + 1) - t;
    const State& y = out.back();
    rhs(t, y, k1);
    detail::axpy(tmp, y, 0.5 * h, k1);
    rhs(t + 0.5 * h, tmp, k2);
    detail::axpy(tmp, y, 0.5 * h, k2);
    rhs(t + 0.5 * h, tmp, k3);
    detail::axpy(tmp, y, h, k3);
    rhs(t + h, tmp, k4);
    State next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    out.push_back(std::move(next));
  }
  return out;
}

/// Accepted steps of an adaptive run with cubic Hermite dense output.
class DenseSolution {
 public:
  void push(double t, State y, State dy) {
    t_.push_back(t);
    y_.push_back(std::move(y));
    dy_.push_back(std::move(dy));
  }

  State at(double t) const {
    if (t < t_.front() || t > t_.back()) throw Error(ErrorKind::OutOfDomain, "dense output queried outside span");
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    if (it == t_.end()) return y_.back();
    const auto i = static_cast<std::size_t>(it - t_.begin()) - 1;
    const double h = t_[i + 1] - t_[i];
    const double s = (t - t_[i]) / h;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    State out(y_[i].size());
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[c] = h00 * y_[i][c] + h10 * h * dy_[i][c] + h01 * y_[i + 1][c] + h11 * h * dy_[i + 1][c];
    }
    return out;
  }

  std::size_t steps() const { return t_.empty() ? 0 : t_.size() - 1; }
  const std::vector<double>& times() const { return t_; }
  const std::vector<State>& states() const { return y_; }

 private:
  std::vector<double> t_;
  std::vector<State> y_;
  std::vector<State> dy_;
};

/// Adaptive Runge-Kutta-Fehlberg 4(5). The step is accepted when the
/// embedded error estimate is below tol * max(1, |y|) componentwise; the
/// fifth-order solution is carried forward. Steps are shortened to land on
/// every time in `stops` (sorted), so the solution there is a step value
/// rather than an interpolant.
inline DenseSolution rkf45_solve(const Rhs& rhs, const State& y0, double t0, double t1, double tol,
                                 std::span<const double> stops = {}) {
  if (!(tol >= 1e-12 && tol <= 1e-4)) throw Error(ErrorKind::InvalidDomain, "rkf45 tolerance must lie in [1e-12, 1e-4]");
  if (!(t1 > t0)) throw Error(ErrorKind::InvalidDomain, "rkf45 needs t1 > t0");

  static constexpr double c2 = 1.0 / 4, c3 = 3.0 / 8, c4 = 12.0 / 13, c6 = 1.0 / 2;
  static constexpr double a21 = 1.0 / 4;
  static constexpr double a31 = 3.0 / 32, a32 = 9.0 / 32;
  static constexpr double a41 = 1932.0 / 2197, a42 = -7200.0 / 2197, a43 = 7296.0 / 2197;
  static constexpr double a51 = 439.0 / 216, a52 = -8.0, a53 = 3680.0 / 513, a54 = -845.0 / 4104;
  static constexpr double a61 = -8.0 / 27, a62 = 2.0, a63 = -3544.0 / 2565, a64 = 1859.0 / 4104, a65 = -11.0 / 40;
  static constexpr double b1 = 16.0 / 135, b3 = 6656.0 / 12825, b4 = 28561.0 / 56430, b5 = -9.0 / 50, b6 = 2.0 / 55;
  static constexpr double e1 = b1 - 25.0 / 216, e3 = b3 - 1408.0 / 2565, e4 = b4 - 2197.0 / 4104,
                          e5 = b5 + 1.0 / 5, e6 = b6;

  const std::size_t n = y0.size();
  DenseSolution sol;
  State y = y0;
  State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), tmp(n), ynew(n);
  double t = t0;
  rhs(t, y, k1);
  sol.push(t, y, k1);
  // Hermite interpolation error is about h^4 |y^(4)| / 384; the cap keeps the
  // dense output as accurate as the steps for solutions of unit scale.
  const double h_max = std::min((t1 - t0) / 100.0, std::pow(384.0 * tol, 0.25));
  double h = std::min(1e-2, h_max);

  std::size_t next_stop = 0;
  while (t < t1) {
    while (next_stop < stops.size() && stops[next_stop] <= t) ++next_stop;
    const double target = next_stop < stops.size() ? std::min(stops[next_stop], t1) : t1;
    h = std::min(h, h_max);
    const double h_free = h;
    const bool landing = t + h >= target;
    if (landing) h = target - t;
    if (h < 1e-14 * (std::abs(t) + 1.0)) throw Error(ErrorKind::StepUnderflow, "rkf45 step size underflow");

    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + h, tmp, k5);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    rhs(t + c6 * h, tmp, k6);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i]);
      err = std::max(err, std::abs(e) / std::max(1.0, std::abs(y[i])));
    }
    if (!std::isfinite(err)) throw Error(ErrorKind::OverflowError, "rkf45 solution diverged");

    const double factor = std::clamp(err == 0.0 ? 5.0 : 0.9 * std::pow(tol / err, 0.2), 0.1, 5.0);
    if (err <= tol) {
      t = landing ? target : t + h;
      y = ynew;
      rhs(t, y, k1);
      sol.push(t, y, k1);
      // a step shortened to hit a stop says nothing about the next free step
      h = landing ? std::max(h * factor, h_free) : h * factor;
    } else {
      h *= factor;
    }
  }
  return sol;
}

}  // namespace resbound::oracle
