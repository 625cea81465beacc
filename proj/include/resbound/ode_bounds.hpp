#pragma once

// Error bounds for L eta = r with zero initial data, where
// L = d^n/dt^n + a_{n-1} d^{n-1}/dt^{n-1} + ... + a_0.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "resbound/error.hpp"
#include "resbound/expr.hpp"
#include "resbound/grid.hpp"
#include "resbound/inverse_operator.hpp"
#include "resbound/residual.hpp"
#include "resbound/roots.hpp"

namespace resbound {

inline constexpr std::size_t kDefaultGridIntervals = 10000;

struct LinearODEProblem {
  std::vector<double> coefficients;  // a_0 .. a_{n-1}
  std::optional<Expression> a0;      // first-order operator d/dt + a0(t) instead
  ResidualProvider residual;
  double t_end = 1.0;
  std::size_t intervals = kDefaultGridIntervals;
  std::vector<double> query;  // empty: every grid node

  Grid grid() const { return Grid(t_end, intervals); }

  std::vector<double> query_points() const {
    if (query.empty()) return grid().nodes();
    for (double t : query) {
      if (!(t >= 0.0 && t <= t_end)) {
        throw Error(ErrorKind::OutOfDomain, "query point " + std::to_string(t) + " outside [0, T]");
      }
    }
    return query;
  }
};

enum class BoundMethod { Loose, Tight, Variable };

inline const char* method_name(BoundMethod m) {
  switch (m) {
    case BoundMethod::Loose: return "loose";
    case BoundMethod::Tight: return "tight";
    case BoundMethod::Variable: return "variable";
  }
  return "?";
}

struct BoundSeries {
  std::vector<double> t;
  std::vector<double> bound;
  BoundMethod method = BoundMethod::Tight;
  std::vector<std::string> warnings;
};

struct LooseBoundReport {
  int zero_roots = 0;        // Z
  double coefficient = 1.0;  // prod 1 / Re(-lambda_j) over roots off the imaginary axis
  double r_max = 0.0;
  BoundSeries series;
};

namespace detail {

inline std::vector<std::string> near_axis_warnings(const CharacteristicRoots& roots) {
  std::vector<std::string> out;
  for (const auto& l : roots.roots) {
    if (!has_zero_real_part(l) && std::abs(l.real()) < 1e-6) {
      out.push_back("root " + std::to_string(l.real()) + (l.imag() < 0 ? "" : "+") + std::to_string(l.imag()) +
                    "i lies close to the imaginary axis; loose bound coefficient is ill-conditioned");
    }
  }
  return out;
}

}  // namespace detail

/// C / Z! * R_max * t^Z evaluated at each t. Throws UnstableSystem if a root
/// has positive real part.
inline LooseBoundReport loose_bound_from_roots(const CharacteristicRoots& roots, double r_max,
                                               const std::vector<double>& t) {
  LooseBoundReport rep;
  rep.r_max = r_max;
  for (const auto& l : roots.roots) {
    if (has_zero_real_part(l)) {
      ++rep.zero_roots;
    } else if (l.real() > 0.0) {
      throw Error(ErrorKind::UnstableSystem, "characteristic root with real part " + std::to_string(l.real()) +
                                                 " > 0; use the tight bound");
    } else {
      rep.coefficient /= -l.real();
    }
  }
  double factorial = 1.0;
  for (int i = 2; i <= rep.zero_roots; ++i) factorial *= i;
  rep.series.method = BoundMethod::Loose;
  rep.series.t = t;
  rep.series.warnings = detail::near_axis_warnings(roots);
  rep.series.bound.reserve(t.size());
  for (double tl : t) rep.series.bound.push_back(rep.coefficient / factorial * r_max * std::pow(tl, rep.zero_roots));
  return rep;
}

inline LooseBoundReport loose_bound(const LinearODEProblem& p) {
  if (p.a0) throw Error(ErrorKind::MethodMismatch, "loose bound needs constant coefficients");
  const CharacteristicRoots roots = char_roots(p.coefficients);
  const std::vector<double> t = p.query_points();
  // Root check first so an unstable operator is reported before touching the residual.
  (void)loose_bound_from_roots(roots, 0.0, t);
  const double r_max = max_abs(p.residual.sample(p.grid()));
  return loose_bound_from_roots(roots, r_max, t);
}

/// (I_{Re l_n} o ... o I_{Re l_1}) psi on the grid of psi, roots taken in
/// ascending real part. The safety rule widens the sampled residual once, at
/// the first application; later stages integrate already-widened data and
/// widening them again would push the result above the closed-form loose bound.
inline SampledFunction tight_bound_sampled(const CharacteristicRoots& roots, SampledFunction psi, bool safety = true) {
  bool first = true;
  for (const auto& l : roots.roots) {
    psi = apply_I(l.real(), psi, 0.0, safety && first);
    first = false;
  }
  return psi;
}

inline BoundSeries tight_bound(const LinearODEProblem& p) {
  if (p.a0) throw Error(ErrorKind::MethodMismatch, "tight bound needs constant coefficients");
  const CharacteristicRoots roots = char_roots(p.coefficients);
  const SampledFunction b = tight_bound_sampled(roots, abs(p.residual.sample(p.grid())));
  BoundSeries out;
  out.method = BoundMethod::Tight;
  out.t = p.query_points();
  out.bound = interp_linear(b, out.t);
  out.warnings = detail::near_axis_warnings(roots);
  return out;
}

/// Bound for d eta/dt + a0(t) eta = r.
inline BoundSeries first_order_variable_bound(const LinearODEProblem& p) {
  if (!p.a0) throw Error(ErrorKind::MethodMismatch, "variable-coefficient bound needs an a0(t) expression");
  const Grid g = p.grid();
  const SampledFunction rate =
      SampledFunction::from_function(g, [&](double t) { return -p.a0->eval(Bindings::at_t(t)); });
  const SampledFunction b = apply_I_variable(rate, abs(p.residual.sample(g)));
  BoundSeries out;
  out.method = BoundMethod::Variable;
  out.t = p.query_points();
  out.bound = interp_linear(b, out.t);
  return out;
}

}  // namespace resbound
