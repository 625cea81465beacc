#pragma once

// a(x,y) v_x + b(x,y) v_y + c(x,y) v = f on a rectangle, v = g on Gamma.
// Along a characteristic (x', y') = (a, b) the error obeys eta' + c eta = r
// with eta = 0 where the curve leaves Gamma.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "resbound/error.hpp"
#include "resbound/expr.hpp"
#include "resbound/grid.hpp"
#include "resbound/inverse_operator.hpp"
#include "resbound/residual.hpp"

namespace resbound {

struct Rectangle {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  double diagonal() const { return std::hypot(x_max - x_min, y_max - y_min); }
  bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
  bool degenerate() const { return !(x_max > x_min && y_max > y_min); }
};

enum class Edge { Left, Right, Bottom, Top };

inline const char* edge_name(Edge e) {
  switch (e) {
    case Edge::Left: return "left";
    case Edge::Right: return "right";
    case Edge::Bottom: return "bottom";
    case Edge::Top: return "top";
  }
  return "?";
}

inline std::optional<Edge> parse_edge(std::string_view name) {
  if (name == "left") return Edge::Left;
  if (name == "right") return Edge::Right;
  if (name == "bottom") return Edge::Bottom;
  if (name == "top") return Edge::Top;
  return std::nullopt;
}

/// Part of one rectangle edge; `lo`/`hi` run along the edge (y for left/right, x for bottom/top).
struct BoundarySegment {
  Edge edge = Edge::Left;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Residual sampled on a tensor mesh, read bilinearly.
class MeshSeries {
 public:
  MeshSeries(std::vector<double> xs, std::vector<double> ys, std::vector<double> values)
      : xs_(std::move(xs)), ys_(std::move(ys)), values_(std::move(values)) {
    if (xs_.size() < 2 || ys_.size() < 2 || values_.size() != xs_.size() * ys_.size()) {
      throw Error(ErrorKind::SchemaError, "residual mesh must be a full tensor grid with >= 2 points per axis");
    }
  }

  /// Rows `x,y,r` covering a tensor mesh, any order.
  static MeshSeries from_table(const CsvTable& table) {
    if (table.header.size() != 3 || table.header[0] != "x" || table.header[1] != "y") {
      throw Error(ErrorKind::SchemaError, "PDE residual CSV must have columns x,y,r");
    }
    std::vector<double> xs = table.columns[0];
    std::vector<double> ys = table.columns[1];
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    if (xs.size() * ys.size() != table.rows()) throw Error(ErrorKind::SchemaError, "PDE residual CSV is not a tensor mesh");
    std::vector<double> v(table.rows(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < table.rows(); ++i) {
      const auto ix = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), table.columns[0][i]) - xs.begin());
      const auto iy = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), table.columns[1][i]) - ys.begin());
      v[iy * xs.size() + ix] = table.columns[2][i];
    }
    for (double x : v) {
      if (std::isnan(x)) throw Error(ErrorKind::SchemaError, "PDE residual CSV has duplicate mesh points");
    }
    return MeshSeries(std::move(xs), std::move(ys), std::move(v));
  }

  double at(double x, double y) const {
    if (x < xs_.front() || x > xs_.back() || y < ys_.front() || y > ys_.back()) {
      throw Error(ErrorKind::OutOfDomain, "residual mesh does not cover the point");
    }
    const auto [ix, wx] = locate(xs_, x);
    const auto [iy, wy] = locate(ys_, y);
    const std::size_t nx = xs_.size();
    auto v = [&](std::size_t i, std::size_t j) { return values_[j * nx + i]; };
    const std::size_t ix1 = std::min(ix + 1, nx - 1);
    const std::size_t iy1 = std::min(iy + 1, ys_.size() - 1);
    const double bottom = v(ix, iy) + wx * (v(ix1, iy) - v(ix, iy));
    const double top = v(ix, iy1) + wx * (v(ix1, iy1) - v(ix, iy1));
    return bottom + wy * (top - bottom);
  }

 private:
  static std::pair<std::size_t, double> locate(const std::vector<double>& axis, double v) {
    auto it = std::upper_bound(axis.begin(), axis.end(), v);
    if (it == axis.end()) return {axis.size() - 1, 0.0};
    const auto i = static_cast<std::size_t>(it - axis.begin()) - 1;
    return {i, (v - axis[i]) / (axis[i + 1] - axis[i])};
  }

  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> values_;
};

class FieldResidual {
 public:
  using Function = std::function<double(double, double)>;

  FieldResidual() : source_(Expression::constant(0.0)) {}
  explicit FieldResidual(Expression e) : source_(std::move(e)) {}
  explicit FieldResidual(MeshSeries m) : source_(std::move(m)) {}
  explicit FieldResidual(Function f) : source_(std::move(f)) {}

  double at(double x, double y) const {
    return std::visit(
        [x, y](const auto& src) -> double {
          using S = std::decay_t<decltype(src)>;
          if constexpr (std::is_same_v<S, Expression>) {
            return src.eval(Bindings::at_xy(x, y));
          } else if constexpr (std::is_same_v<S, MeshSeries>) {
            return src.at(x, y);
          } else {
            return src(x, y);
          }
        },
        source_);
  }

 private:
  std::variant<Expression, MeshSeries, Function> source_;
};

struct PDEProblem {
  Expression a, b, c, f;
  Rectangle domain;
  std::vector<BoundarySegment> gamma;
  FieldResidual residual;
  std::optional<Expression> g;  // boundary data; only used by oracles

  double coef_a(double x, double y) const { return a.eval(Bindings::at_xy(x, y)); }
  double coef_b(double x, double y) const { return b.eval(Bindings::at_xy(x, y)); }
  double coef_c(double x, double y) const { return c.eval(Bindings::at_xy(x, y)); }
};

/// r = a u_x + b u_y + c u - f for a closed-form approximate solution u(x, y).
inline FieldResidual residual_from_surrogate(const PDEProblem& p, Expression u) {
  return FieldResidual(FieldResidual::Function([a = p.a, b = p.b, c = p.c, f = p.f, u = std::move(u)](double x,
                                                                                                      double y) {
    const auto at = Bindings::at_xy(x, y);
    const DualValue dx = u.eval_dual(Var::x, at, 1);
    const DualValue dy = u.eval_dual(Var::y, at, 1);
    return a.eval(at) * dx.derivatives[0] + b.eval(at) * dy.derivatives[0] + c.eval(at) * dx.value - f.eval(at);
  }));
}

inline void validate(const PDEProblem& p) {
  if (p.domain.degenerate()) throw Error(ErrorKind::InvalidDomain, "domain rectangle is degenerate");
  if (p.gamma.empty()) throw Error(ErrorKind::SchemaError, "Dirichlet boundary is empty");
}

inline constexpr double kMinCoefficient = 1e-9;
inline constexpr std::size_t kDefaultMesh = 512;

struct ConstantBoundReport {
  double bound = 0.0;  // max |r / c| over the mesh
  double x_at_max = 0.0;
  double y_at_max = 0.0;
  double min_abs_c = 0.0;
};

/// max |r/c| over an (nx+1) x (ny+1) node mesh. Requires c bounded away from
/// zero with one sign over the mesh.
inline ConstantBoundReport constant_bound(const PDEProblem& p, std::size_t nx = kDefaultMesh,
                                          std::size_t ny = kDefaultMesh) {
  validate(p);
  if (nx < 1 || ny < 1) throw Error(ErrorKind::InvalidDomain, "mesh needs at least one interval per axis");
  const Rectangle& d = p.domain;
  ConstantBoundReport rep;
  rep.min_abs_c = std::numeric_limits<double>::infinity();
  int sign = 0;
  for (std::size_t j = 0; j <= ny; ++j) {
    const double y = j == ny ? d.y_max : d.y_min + (d.y_max - d.y_min) * static_cast<double>(j) / static_cast<double>(ny);
    for (std::size_t i = 0; i <= nx; ++i) {
      const double x =
          i == nx ? d.x_max : d.x_min + (d.x_max - d.x_min) * static_cast<double>(i) / static_cast<double>(nx);
      const double c = p.coef_c(x, y);
      if (!(std::abs(c) > kMinCoefficient)) {
        throw Error(ErrorKind::CoefficientVanishes, "|c| <= 1e-9 at (" + std::to_string(x) + ", " + std::to_string(y) + ")");
      }
      const int s = c > 0.0 ? 1 : -1;
      if (sign == 0) {
        sign = s;
      } else if (s != sign) {
        throw Error(ErrorKind::CoefficientVanishes, "c changes sign near (" + std::to_string(x) + ", " + std::to_string(y) + ")");
      }
      rep.min_abs_c = std::min(rep.min_abs_c, std::abs(c));
      const double q = std::abs(p.residual.at(x, y) / c);
      if (q > rep.bound || (i == 0 && j == 0)) {
        rep.bound = q;
        rep.x_at_max = x;
        rep.y_at_max = y;
      }
    }
  }
  return rep;
}

/// Integral curve of (a, b) with s = 0 at its Gamma end.
struct CharCurve {
  std::vector<double> s;
  std::vector<double> x;
  std::vector<double> y;
  double s_star = 0.0;  // parameter of the query point (last node)

  std::size_t size() const { return s.size(); }
};

namespace detail {

using Point = std::array<double, 2>;

inline Point field(const PDEProblem& p, const Point& q, double sign) {
  const double a = p.coef_a(q[0], q[1]);
  const double b = p.coef_b(q[0], q[1]);
  if (!(std::hypot(a, b) > 1e-10)) {
    throw Error(ErrorKind::StagnationPoint, "vector field (a, b) vanishes at (" + std::to_string(q[0]) + ", " +
                                                std::to_string(q[1]) + ")");
  }
  return {sign * a, sign * b};
}

inline Point rk4_step(const PDEProblem& p, const Point& q, double h, double sign) {
  const Point k1 = field(p, q, sign);
  const Point k2 = field(p, {q[0] + 0.5 * h * k1[0], q[1] + 0.5 * h * k1[1]}, sign);
  const Point k3 = field(p, {q[0] + 0.5 * h * k2[0], q[1] + 0.5 * h * k2[1]}, sign);
  const Point k4 = field(p, {q[0] + h * k3[0], q[1] + h * k3[1]}, sign);
  return {q[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
          q[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
}

inline double boundary_distance(const Rectangle& d, const Point& q) {
  return std::min({q[0] - d.x_min, d.x_max - q[0], q[1] - d.y_min, d.y_max - q[1]});
}

// Moves a point lying within `tol` of an edge exactly onto it.
inline Point snap_to_boundary(const Rectangle& d, Point q, double tol) {
  if (std::abs(q[0] - d.x_min) <= tol) q[0] = d.x_min;
  if (std::abs(q[0] - d.x_max) <= tol) q[0] = d.x_max;
  if (std::abs(q[1] - d.y_min) <= tol) q[1] = d.y_min;
  if (std::abs(q[1] - d.y_max) <= tol) q[1] = d.y_max;
  return q;
}

inline bool on_gamma(const PDEProblem& p, const Point& q, double tol) {
  const Rectangle& d = p.domain;
  for (const auto& seg : p.gamma) {
    double normal_gap = 0.0;
    double along = 0.0;
    switch (seg.edge) {
      case Edge::Left: normal_gap = std::abs(q[0] - d.x_min); along = q[1]; break;
      case Edge::Right: normal_gap = std::abs(q[0] - d.x_max); along = q[1]; break;
      case Edge::Bottom: normal_gap = std::abs(q[1] - d.y_min); along = q[0]; break;
      case Edge::Top: normal_gap = std::abs(q[1] - d.y_max); along = q[0]; break;
    }
    if (normal_gap <= tol && along >= seg.lo - tol && along <= seg.hi + tol) return true;
  }
  return false;
}

}  // namespace detail

inline constexpr std::size_t kMaxTraceSteps = 1000000;
inline constexpr double kBoundaryTolerance = 1e-10;

inline double default_step(const PDEProblem& p) { return 1e-3 * p.domain.diagonal(); }

/// Traces the characteristic through `endpoint` backwards until it leaves the
/// domain, refines the exit by bisection and reparameterizes so that s = 0 at
/// the exit point. The exit must lie on Gamma.
inline CharCurve trace_characteristic(const PDEProblem& p, double x, double y, double step = 0.0) {
  validate(p);
  if (step <= 0.0) step = default_step(p);
  const Rectangle& d = p.domain;
  if (!d.contains(x, y)) throw Error(ErrorKind::OutOfDomain, "endpoint outside the domain");

  std::vector<detail::Point> pts{{x, y}};
  std::vector<double> sigma{0.0};  // backward parameter

  if (detail::boundary_distance(d, pts.back()) <= kBoundaryTolerance && detail::on_gamma(p, pts.back(), kBoundaryTolerance)) {
    return CharCurve{{0.0}, {x}, {y}, 0.0};
  }

  bool hit = false;
  for (std::size_t n = 0; n < kMaxTraceSteps; ++n) {
    const detail::Point cur = pts.back();
    const detail::Point next = detail::rk4_step(p, cur, step, -1.0);
    if (d.contains(next[0], next[1]) && detail::boundary_distance(d, next) > kBoundaryTolerance) {
      pts.push_back(next);
      sigma.push_back(sigma.back() + step);
      continue;
    }
    // Exit lies within this step: bisect on the step fraction.
    double lo = 0.0;
    double hi = 1.0;
    detail::Point inside = cur;
    if (d.contains(next[0], next[1])) {
      lo = 1.0;
      inside = next;
    }
    for (int it = 0; it < 200 && detail::boundary_distance(d, inside) > kBoundaryTolerance; ++it) {
      const double mid = 0.5 * (lo + hi);
      const detail::Point q = detail::rk4_step(p, cur, mid * step, -1.0);
      if (d.contains(q[0], q[1])) {
        lo = mid;
        inside = q;
      } else {
        hi = mid;
      }
    }
    const detail::Point exit = detail::snap_to_boundary(d, inside, kBoundaryTolerance);
    if (lo > 0.0) {
      pts.push_back(exit);
      sigma.push_back(sigma.back() + lo * step);
    } else {
      pts.back() = exit;
    }
    hit = true;
    break;
  }
  if (!hit) throw Error(ErrorKind::NoBoundaryHit, "characteristic did not reach the boundary within the step budget");
  if (!detail::on_gamma(p, pts.back(), kBoundaryTolerance)) {
    throw Error(ErrorKind::NotOnDirichletBoundary, "characteristic enters through (" + std::to_string(pts.back()[0]) +
                                                       ", " + std::to_string(pts.back()[1]) +
                                                       "), which is not on the Dirichlet boundary");
  }

  CharCurve out;
  out.s_star = sigma.back();
  for (std::size_t i = pts.size(); i-- > 0;) {
    out.s.push_back(out.s_star - sigma[i]);
    out.x.push_back(pts[i][0]);
    out.y.push_back(pts[i][1]);
  }
  out.s.front() = 0.0;
  out.s.back() = out.s_star;
  return out;
}

/// Forward integral curve from a point of Gamma, for `s_end` or until it
/// leaves the domain.
inline CharCurve trace_from_boundary(const PDEProblem& p, double x0, double y0, double s_end, double step = 0.0) {
  validate(p);
  if (step <= 0.0) step = default_step(p);
  if (!detail::on_gamma(p, {x0, y0}, kBoundaryTolerance)) {
    throw Error(ErrorKind::NotOnDirichletBoundary, "start point is not on the Dirichlet boundary");
  }
  CharCurve out{{0.0}, {x0}, {y0}, 0.0};
  const auto steps = static_cast<std::size_t>(std::ceil(s_end / step - 1e-9));
  if (steps > kMaxTraceSteps) throw Error(ErrorKind::NoBoundaryHit, "requested curve exceeds the step budget");
  const double h = s_end / static_cast<double>(steps);
  detail::Point cur{x0, y0};
  for (std::size_t n = 1; n <= steps; ++n) {
    const detail::Point next = detail::rk4_step(p, cur, h, 1.0);
    if (!p.domain.contains(next[0], next[1])) break;
    cur = next;
    out.s.push_back(static_cast<double>(n) * h);
    out.x.push_back(cur[0]);
    out.y.push_back(cur[1]);
  }
  out.s_star = out.s.back();
  return out;
}

/// Bound at every node of the curve:
///   B(s) = int_0^s |r| exp(-int_sigma^s c) dsigma.
inline std::vector<double> curve_bound_series(const PDEProblem& p, const CharCurve& curve, bool safety = true) {
  const std::size_t n = curve.size();
  std::vector<double> rate(n), psi(n);
  for (std::size_t i = 0; i < n; ++i) {
    rate[i] = -p.coef_c(curve.x[i], curve.y[i]);
    psi[i] = std::abs(p.residual.at(curve.x[i], curve.y[i]));
  }
  if (n == 1) return {0.0};
  return apply_I_variable(curve.s, rate, psi, safety);
}

inline double curve_bound(const PDEProblem& p, const CharCurve& curve, bool safety = true) {
  return curve_bound_series(p, curve, safety).back();
}

/// Trace-and-bound for each query point.
inline std::vector<double> characteristic_bounds(const PDEProblem& p, const std::vector<std::array<double, 2>>& points,
                                                 double step = 0.0) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& q : points) out.push_back(curve_bound(p, trace_characteristic(p, q[0], q[1], step)));
  return out;
}

}  // namespace resbound
