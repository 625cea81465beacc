#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "resbound/error.hpp"

namespace resbound {

/// Uniform grid 0 = t_0 < t_1 < ... < t_K = T.
class Grid {
 public:
  Grid(double t_end, std::size_t intervals) : t_end_(t_end), intervals_(intervals) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error(ErrorKind::InvalidDomain, "grid end must be positive");
    if (intervals < 2) throw Error(ErrorKind::InvalidDomain, "grid needs at least 2 intervals");
  }

  double t_end() const noexcept { return t_end_; }
  std::size_t intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return intervals_ + 1; }
  double step() const noexcept { return t_end_ / static_cast<double>(intervals_); }

  double node(std::size_t k) const noexcept {
    if (k >= intervals_) return t_end_;
    return t_end_ * static_cast<double>(k) / static_cast<double>(intervals_);
  }

  std::vector<double> nodes() const {
    std::vector<double> out(size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = node(k);
    return out;
  }

  bool contains(double t) const noexcept { return t >= 0.0 && t <= t_end_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double t_end_;
  std::size_t intervals_;
};

inline Grid linspace(double t_end, std::size_t intervals) { return Grid(t_end, intervals); }

/// Values of a scalar function at the nodes of a Grid.
template <class T>
class Sampled {
 public:
  using value_type = T;

  explicit Sampled(Grid grid) : grid_(grid), values_(grid.size(), T{}) {}

  Sampled(Grid grid, std::vector<T> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw Error(ErrorKind::InvalidDomain, "sample count " + std::to_string(values_.size()) +
                                                " does not match grid size " + std::to_string(grid_.size()));
    }
  }

  template <class F>
  static Sampled from_function(Grid grid, F&& f) {
    std::vector<T> v(grid.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(grid.node(k));
    return Sampled(grid, std::move(v));
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<T>& values() const noexcept { return values_; }
  std::vector<T>& values() noexcept { return values_; }
  std::span<const T> span() const noexcept { return values_; }

  T& operator[](std::size_t k) { return values_[k]; }
  const T& operator[](std::size_t k) const { return values_[k]; }

  Sampled& operator+=(const Sampled& o) {
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }

  Sampled& operator*=(T c) {
    for (auto& v : values_) v *= c;
    return *this;
  }

  friend Sampled operator+(Sampled a, const Sampled& b) { return a += b; }
  friend Sampled operator*(T c, Sampled a) { return a *= c; }

 private:
  Grid grid_;
  std::vector<T> values_;
};

using SampledFunction = Sampled<double>;
using ComplexSampled = Sampled<std::complex<double>>;

template <class T>
SampledFunction abs(const Sampled<T>& f) {
  std::vector<double> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = std::abs(f[k]);
  return SampledFunction(f.grid(), std::move(out));
}

/// max(f[k-1], f[k], f[k+1]) with the window clamped at both ends.
inline std::vector<double> neighbor_max(std::span<const double> f) {
  const std::size_t n = f.size();
  std::vector<double> out(f.begin(), f.end());
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) out[k] = std::max(out[k], f[k - 1]);
    if (k + 1 < n) out[k] = std::max(out[k], f[k + 1]);
  }
  return out;
}

/// Cumulative trapezoid integral from 0. With `safety` each node value is
/// replaced by the max over its neighbors before integrating, which keeps the
/// result above the plain trapezoid value for nonnegative integrands.
inline SampledFunction cumtrapz(const SampledFunction& f, bool safety) {
  const std::vector<double> v = safety ? neighbor_max(f.span()) : f.values();
  const double half_h = 0.5 * f.grid().step();
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t k = 0; k + 1 < v.size(); ++k) out[k + 1] = out[k] + half_h * (v[k] + v[k + 1]);
  return SampledFunction(f.grid(), std::move(out));
}

inline double interp_linear(const SampledFunction& f, double t) {
  const Grid& g = f.grid();
  if (!g.contains(t)) {
    throw Error(ErrorKind::OutOfDomain, "query point " + std::to_string(t) + " outside [0, " +
                                            std::to_string(g.t_end()) + "]");
  }
  const std::size_t last = g.intervals();
  auto i = static_cast<std::size_t>(std::floor(t / g.step()));
  i = std::min(i, last);
  while (i > 0 && g.node(i) > t) --i;
  while (i < last && g.node(i + 1) <= t) ++i;
  if (g.node(i) == t || i == last) return f[i];
  const double w = (t - g.node(i)) / (g.node(i + 1) - g.node(i));
  return f[i] + w * (f[i + 1] - f[i]);
}

inline std::vector<double> interp_linear(const SampledFunction& f, std::span<const double> query) {
  std::vector<double> out;
  out.reserve(query.size());
  for (double t : query) out.push_back(interp_linear(f, t));
  return out;
}

template <class T>
double max_abs(const Sampled<T>& f) {
  double m = 0.0;
  for (const auto& v : f.values()) m = std::max(m, static_cast<double>(std::abs(v)));
  return m;
}

}  // namespace resbound
