#pragma once

// L v + eps v^k = f solved through v = sum_j eps^j v_j, where
//   L v_0 = f,   L v_j + NL_j[v] = 0,   NL_j[v] = sum_{j_1+...+j_k = j-1} v_{j_1} ... v_{j_k}.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "resbound/error.hpp"
#include "resbound/expr.hpp"
#include "resbound/grid.hpp"
#include "resbound/ode_bounds.hpp"
#include "resbound/residual.hpp"
#include "resbound/roots.hpp"

namespace resbound {

/// All ordered tuples of `parts` nonnegative integers summing to `total`.
inline std::vector<std::vector<int>> compositions(int total, int parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int remaining, int slots) -> void {
    if (slots == 1) {
      cur.push_back(remaining);
      out.push_back(cur);
      cur.pop_back();
      return;
    }
    for (int first = 0; first <= remaining; ++first) {
      cur.push_back(first);
      self(self, remaining - first, slots - 1);
      cur.pop_back();
    }
  };
  if (parts >= 1 && total >= 0) rec(rec, total, parts);
  return out;
}

/// NL_j[u] nodewise; needs components 0..j-1.
inline SampledFunction nl_term(int j, int degree, const std::vector<SampledFunction>& components) {
  if (j < 1 || static_cast<std::size_t>(j) > components.size()) {
    throw Error(ErrorKind::InvalidDomain, "nl_term needs components 0..j-1");
  }
  const Grid g = components.front().grid();
  std::vector<double> out(g.size(), 0.0);
  for (const auto& tuple : compositions(j - 1, degree)) {
    for (std::size_t k = 0; k < out.size(); ++k) {
      double prod = 1.0;
      for (int idx : tuple) prod *= components[static_cast<std::size_t>(idx)][k];
      out[k] += prod;
    }
  }
  return SampledFunction(g, std::move(out));
}

/// Upper bound of |NL_j[u] - NL_j[v]| given |u_i - v_i| <= B_i:
/// sum over tuples of prod(|u| + B) - prod |u|.
inline SampledFunction nl_bound(int j, int degree, const std::vector<SampledFunction>& u,
                                const std::vector<SampledFunction>& bounds) {
  if (j < 1 || static_cast<std::size_t>(j) > u.size() || static_cast<std::size_t>(j) > bounds.size()) {
    throw Error(ErrorKind::InvalidDomain, "nl_bound needs components and bounds 0..j-1");
  }
  const Grid g = u.front().grid();
  std::vector<double> out(g.size(), 0.0);
  for (const auto& tuple : compositions(j - 1, degree)) {
    for (std::size_t k = 0; k < out.size(); ++k) {
      double widened = 1.0;
      double plain = 1.0;
      for (int idx : tuple) {
        const double a = std::abs(u[static_cast<std::size_t>(idx)][k]);
        widened *= a + bounds[static_cast<std::size_t>(idx)][k];
        plain *= a;
      }
      out[k] += widened - plain;
    }
  }
  return SampledFunction(g, std::move(out));
}

struct PerturbationProblem {
  std::vector<double> coefficients;     // linear operator a_0..a_{n-1}
  int degree = 2;                       // k in eps v^k
  std::vector<Expression> components;   // u_0..u_J
  std::vector<ResidualProvider> residuals;  // optional r_0..r_J; derived from components when empty
  Expression forcing = Expression::constant(0.0);
  double t_end = 1.0;
  std::size_t intervals = kDefaultGridIntervals;
  double eps_radius = 1.0;

  int order() const { return static_cast<int>(components.size()) - 1; }
  Grid grid() const { return Grid(t_end, intervals); }
};

struct PerturbationBounds {
  Grid grid;
  std::vector<SampledFunction> u;         // sampled components
  std::vector<SampledFunction> residual;  // r_j
  std::vector<SampledFunction> bound;     // B_j
};

namespace detail {

inline void validate(const PerturbationProblem& p) {
  if (p.degree < 2) throw Error(ErrorKind::SchemaError, "nonlinear degree must be >= 2");
  if (p.components.empty()) throw Error(ErrorKind::SchemaError, "need at least the component u_0");
  if (p.coefficients.empty()) throw Error(ErrorKind::SchemaError, "operator needs coefficients");
  if (!p.residuals.empty() && p.residuals.size() != p.components.size()) {
    throw Error(ErrorKind::SchemaError, "need one residual per component");
  }
  if (p.residuals.empty() && p.coefficients.size() > static_cast<std::size_t>(kMaxDualOrder)) {
    throw Error(ErrorKind::SchemaError, "derived residuals support operator order 1..4");
  }
}

// L u on the grid from the closed form of u.
inline SampledFunction apply_operator(const std::vector<double>& a, const Expression& u, const Grid& g) {
  const int n = static_cast<int>(a.size());
  return SampledFunction::from_function(g, [&](double t) {
    const DualValue d = u.eval_dual(Var::t, Bindings::at_t(t), n);
    double acc = d.derivative(n);
    for (int i = 0; i < n; ++i) acc += a[static_cast<std::size_t>(i)] * d.derivative(i);
    return acc;
  });
}

inline SampledFunction linear_bound(const CharacteristicRoots& roots, const SampledFunction& psi, BoundMethod m) {
  if (m == BoundMethod::Loose) {
    const auto rep = loose_bound_from_roots(roots, max_abs(psi), psi.grid().nodes());
    return SampledFunction(psi.grid(), rep.series.bound);
  }
  return tight_bound_sampled(roots, psi);
}

}  // namespace detail

/// B_0..B_J on the grid. Each B_j bounds L^{-1} r_j plus L^{-1} of the
/// propagated uncertainty of the lower components.
inline PerturbationBounds component_bounds(const PerturbationProblem& p, BoundMethod method = BoundMethod::Tight) {
  detail::validate(p);
  if (method == BoundMethod::Variable) throw Error(ErrorKind::MethodMismatch, "perturbation bounds use loose or tight");
  const CharacteristicRoots roots = char_roots(p.coefficients);
  PerturbationBounds out{p.grid(), {}, {}, {}};
  const Grid& g = out.grid;

  for (const auto& c : p.components) {
    out.u.push_back(SampledFunction::from_function(g, [&](double t) { return c.eval(Bindings::at_t(t)); }));
  }

  for (int j = 0; j <= p.order(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    SampledFunction r(g);
    if (!p.residuals.empty()) {
      r = p.residuals[ju].sample(g);
    } else {
      r = detail::apply_operator(p.coefficients, p.components[ju], g);
      if (j == 0) {
        for (std::size_t k = 0; k < r.size(); ++k) r[k] -= p.forcing.eval(Bindings::at_t(g.node(k)));
      } else {
        r += nl_term(j, p.degree, out.u);
      }
    }
    SampledFunction b = detail::linear_bound(roots, abs(r), method);
    if (j > 0) b += detail::linear_bound(roots, nl_bound(j, p.degree, out.u, out.bound), method);
    out.residual.push_back(std::move(r));
    out.bound.push_back(std::move(b));
  }
  return out;
}

struct EpsPoint {
  double t = 0.0;
  double eps = 0.0;
};

struct ReconstructedPoint {
  double t = 0.0;
  double eps = 0.0;
  double u = 0.0;  // sum eps^j u_j(t)
  double bound = 0.0;  // sum |eps|^j B_j(t)
  bool outside_validity = false;
};

/// Truncated series value and error bound at each (t, eps). The bound covers
/// the truncated components only; the series tail beyond order J is not controlled.
inline std::vector<ReconstructedPoint> reconstruct(const PerturbationProblem& p, const PerturbationBounds& b,
                                                   const std::vector<EpsPoint>& query) {
  std::vector<ReconstructedPoint> out;
  out.reserve(query.size());
  for (const auto& q : query) {
    if (!b.grid.contains(q.t)) throw Error(ErrorKind::OutOfDomain, "query time outside [0, T]");
    ReconstructedPoint pt{q.t, q.eps, 0.0, 0.0, std::abs(q.eps) > p.eps_radius};
    double eps_pow = 1.0;
    double abs_pow = 1.0;
    for (std::size_t j = 0; j < p.components.size(); ++j) {
      pt.u += eps_pow * p.components[j].eval(Bindings::at_t(q.t));
      pt.bound += abs_pow * interp_linear(b.bound[j], q.t);
      eps_pow *= q.eps;
      abs_pow *= std::abs(q.eps);
    }
    out.push_back(pt);
  }
  return out;
}

/// |eps|^{J+1} max_t |u_J|: a first-omitted-term estimate of the truncation tail.
inline double tail_estimate(const PerturbationBounds& b, double eps) {
  const double top = max_abs(b.u.back());
  return std::pow(std::abs(eps), static_cast<double>(b.u.size())) * top;
}

}  // namespace resbound
