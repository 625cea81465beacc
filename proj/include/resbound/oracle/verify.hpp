#pragma once

// End-to-end checks of every bound against manufactured problems whose true
// error is known, plus the operator property suites.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "resbound/error.hpp"
#include "resbound/expr.hpp"
#include "resbound/grid.hpp"
#include "resbound/inverse_operator.hpp"
#include "resbound/nonlinear_bounds.hpp"
#include "resbound/ode_bounds.hpp"
#include "resbound/oracle/catalog.hpp"
#include "resbound/oracle/integrators.hpp"
#include "resbound/pde_bounds.hpp"
#include "resbound/system_bounds.hpp"

namespace resbound::oracle {

struct VerifyOptions {
  std::uint64_t seed = kDefaultSeed;
  double scale = kDefaultPerturbation;
  std::size_t intervals = kDefaultGridIntervals;
};

/// One line of the case table: worst true error and worst slack B - |eta|.
struct CaseRow {
  CaseRow(std::string id, std::string m) : case_id(std::move(id)), method(std::move(m)) {}

  std::string case_id;
  std::string method;
  double max_error = 0.0;
  double min_slack = std::numeric_limits<double>::infinity();
  double seconds = 0.0;
  bool pass = true;
  std::string note;

  void observe(double error, double bound) {
    max_error = std::max(max_error, std::abs(error));
    // 0 <= 0 at the initial time or on the boundary says nothing about slack
    if (bound != 0.0 || error != 0.0) min_slack = std::min(min_slack, bound - std::abs(error));
    if (!(std::abs(error) <= bound)) pass = false;
  }
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  double limit_seconds = 0.0;
  std::string detail;
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline CriterionResult finish(int id, std::string name, double limit, const Stopwatch& sw, bool ok,
                              std::string detail) {
  CriterionResult r{id, std::move(name), false, sw.seconds(), limit, std::move(detail)};
  r.pass = ok && r.seconds < limit;
  if (ok && !r.pass) r.detail += "; exceeded time limit";
  return r;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Random smooth function c0 + c1 t + c2 sin(w t + phi).
template <class T, class Rng>
std::function<T(double)> random_smooth(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto draw = [&]() -> T {
    if constexpr (std::is_same_v<T, double>) {
      return u(rng);
    } else {
      return T(u(rng), u(rng));
    }
  };
  const T c0 = draw(), c1 = draw(), c2 = draw();
  const double w = 1.0 + 9.0 * std::abs(u(rng));
  const double phi = std::numbers::pi * u(rng);
  return [=](double t) { return c0 + c1 * t + c2 * std::sin(w * t + phi); };
}

inline std::vector<double> duffing_reference(double eps, const DuffingCase& c, const std::vector<double>& t) {
  const Rhs rhs = [&](double s, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = c.forcing.eval(Bindings::at_t(s)) - c.coefficients[1] * y[1] - c.coefficients[0] * y[0] -
            eps * std::pow(y[0], c.degree);
  };
  const DenseSolution sol = rkf45_solve(rhs, {c.v0, c.dv0}, 0.0, c.t_end, 1e-12, t);
  std::vector<double> out;
  out.reserve(t.size());
  for (double s : t) out.push_back(sol.at(s)[0]);
  return out;
}

inline std::vector<std::array<double, 2>> perimeter_starts(const Rectangle& d, std::size_t count) {
  const double w = d.x_max - d.x_min;
  const double h = d.y_max - d.y_min;
  const double perimeter = 2.0 * (w + h);
  std::vector<std::array<double, 2>> out;
  for (std::size_t i = 0; i < count; ++i) {
    // Offset by half a spacing so no start sits on a corner.
    double s = perimeter * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    if (s < w) {
      out.push_back({d.x_min + s, d.y_min});
      continue;
    }
    s -= w;
    if (s < h) {
      out.push_back({d.x_max, d.y_min + s});
      continue;
    }
    s -= h;
    if (s < w) {
      out.push_back({d.x_max - s, d.y_max});
      continue;
    }
    s -= w;
    out.push_back({d.x_min, d.y_max - s});
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------- case table

inline std::vector<CaseRow> verify_ode(const std::string& id, const OdeCase& c, std::size_t intervals) {
  std::vector<CaseRow> rows;
  const LinearODEProblem p = c.problem(intervals);
  const std::vector<double> t = p.grid().nodes();

  {
    detail::Stopwatch sw;
    CaseRow row{id, "loose"};
    try {
      const auto rep = loose_bound(p);
      for (std::size_t k = 0; k < t.size(); ++k) row.observe(exact_error(c, t[k]), rep.series.bound[k]);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnstableSystem) throw;
      row.note = "UnstableSystem (expected)";
      row.min_slack = std::numeric_limits<double>::quiet_NaN();
    }
    row.seconds = sw.seconds();
    rows.push_back(row);
  }
  {
    detail::Stopwatch sw;
    CaseRow row{id, "tight"};
    const auto b = tight_bound(p);
    for (std::size_t k = 0; k < t.size(); ++k) row.observe(exact_error(c, t[k]), b.bound[k]);
    row.seconds = sw.seconds();
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<CaseRow> verify_system(const std::string& id, const SystemCase& c, std::size_t intervals) {
  detail::Stopwatch sw;
  const SystemProblem p = c.problem(intervals);
  const Grid g = p.grid();
  const auto r_abs = resbound::detail::sample_abs_residual(p, g);
  const auto comp = componentwise_bound_sampled(p.jordan, r_abs);
  const double setup = sw.seconds();

  detail::Stopwatch sw_norm;
  const auto norm = norm_bound_sampled(p.jordan, r_abs);
  CaseRow cw{id, "componentwise"};
  CaseRow nm{id, "norm"};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto eta = exact_error(c, g.node(k));
    double sq = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
      cw.observe(eta[i], comp[i][k]);
      sq += eta[i] * eta[i];
    }
    nm.observe(std::sqrt(sq), norm[k]);
  }
  cw.seconds = setup;
  nm.seconds = sw_norm.seconds();
  return {cw, nm};
}

// Absolute resolution of comparing two double-precision solution values of
// size max(1, |ref|); bounds below this level cannot be checked numerically.
inline constexpr double kComparisonFloor = 16.0 * std::numeric_limits<double>::epsilon();

struct DuffingCheck {
  std::vector<CaseRow> rows;
  bool eps_zero_reduces = true;
  double max_tail = 0.0;
};

inline DuffingCheck verify_duffing(const std::string& id, const DuffingCase& c, std::size_t intervals,
                                   const std::vector<double>& eps_values = {-0.5, -0.25, 0.0, 0.25, 0.5}) {
  DuffingCheck out;
  detail::Stopwatch sw;
  const PerturbationProblem p = c.problem(intervals);
  const PerturbationBounds b = component_bounds(p);
  const double setup = sw.seconds();
  const std::vector<double> t = b.grid.nodes();

  for (double eps : eps_values) {
    detail::Stopwatch sw_eps;
    std::vector<EpsPoint> q;
    q.reserve(t.size());
    for (double s : t) q.push_back({s, eps});
    const auto rec = reconstruct(p, b, q);
    const auto ref = detail::duffing_reference(eps, c, t);
    const double tail = tail_estimate(b, eps);
    out.max_tail = std::max(out.max_tail, tail);
    CaseRow row{id, "tight eps=" + detail::fmt(eps)};
    for (std::size_t k = 0; k < t.size(); ++k) {
      row.observe(rec[k].u - ref[k], rec[k].bound + tail + kComparisonFloor * std::max(1.0, std::abs(ref[k])));
      if (eps == 0.0 && rec[k].bound != b.bound.front()[k]) out.eps_zero_reduces = false;
    }
    row.note = "tail " + detail::fmt(tail);
    row.seconds = sw_eps.seconds() + setup / static_cast<double>(eps_values.size());
    out.rows.push_back(row);
  }
  return out;
}

struct CurveCheck {
  std::vector<CharCurve> curves;
  double max_spiral_deviation = 0.0;
};

/// Forward curves from equidistant boundary starts, out to parameter s_end.
inline CurveCheck spiral_curves(const PdeCase& c, std::size_t count = 16, double s_end = 3.0) {
  CurveCheck out;
  for (const auto& start : detail::perimeter_starts(c.pde.domain, count)) {
    CharCurve curve = trace_from_boundary(c.pde, start[0], start[1], s_end);
    const double r0 = std::hypot(start[0], start[1]);
    const double th0 = std::atan2(start[1], start[0]);
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const double s = curve.s[i];
      const double dev = std::hypot(curve.x[i] - r0 * std::exp(-s) * std::cos(s + th0),
                                    curve.y[i] - r0 * std::exp(-s) * std::sin(s + th0));
      out.max_spiral_deviation = std::max(out.max_spiral_deviation, dev);
    }
    out.curves.push_back(std::move(curve));
  }
  return out;
}

inline std::vector<CaseRow> verify_pde(const std::string& id, const PdeCase& c) {
  detail::Stopwatch sw;
  if (id == "PDE-CONST") {
    CaseRow row{id, "const"};
    const auto rep = constant_bound(c.pde);
    const Rectangle& d = c.pde.domain;
    for (std::size_t j = 0; j <= kDefaultMesh; ++j) {
      const double y = d.y_min + (d.y_max - d.y_min) * static_cast<double>(j) / kDefaultMesh;
      for (std::size_t i = 0; i <= kDefaultMesh; ++i) {
        const double x = d.x_min + (d.x_max - d.x_min) * static_cast<double>(i) / kDefaultMesh;
        row.observe(exact_error(c, x, y), rep.bound);
      }
    }
    row.seconds = sw.seconds();
    return {row};
  }
  CaseRow row{id, "characteristic"};
  const CurveCheck cc = spiral_curves(c);
  for (const auto& curve : cc.curves) {
    const auto bound = curve_bound_series(c.pde, curve);
    for (std::size_t i = 0; i < curve.size(); ++i) row.observe(exact_error(c, curve.x[i], curve.y[i]), bound[i]);
  }
  row.note = "spiral deviation " + detail::fmt(cc.max_spiral_deviation);
  row.seconds = sw.seconds();
  return {row};
}

inline std::vector<CaseRow> verify_case(const ManufacturedCase& mc, const VerifyOptions& opt) {
  return std::visit(
      [&](const auto& c) -> std::vector<CaseRow> {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, OdeCase>) {
          return verify_ode(mc.id, c, opt.intervals);
        } else if constexpr (std::is_same_v<C, SystemCase>) {
          return verify_system(mc.id, c, opt.intervals);
        } else if constexpr (std::is_same_v<C, DuffingCase>) {
          return verify_duffing(mc.id, c, opt.intervals).rows;
        } else {
          return verify_pde(mc.id, c);
        }
      },
      mc.definition);
}

// ------------------------------------------------------------- criteria 1-10

inline CriterionResult criterion_operator_inequality(const VerifyOptions& opt) {
  detail::Stopwatch sw;
  std::mt19937_64 rng(opt.seed + 1);
  std::uniform_real_distribution<double> re(-5.0, 3.0);
  std::uniform_real_distribution<double> im(-20.0, 20.0);
  const Grid g(1.0, 10000);
  std::size_t violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 50; ++trial) {
    const std::complex<double> lambda(re(rng), im(rng));
    const auto f = detail::random_smooth<std::complex<double>>(rng);
    const ComplexSampled psi = ComplexSampled::from_function(g, f);
    const ComplexSampled lhs = apply_I(lambda, psi);
    const SampledFunction rhs = apply_I(lambda.real(), abs(psi));
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double gap = std::abs(lhs[k]) - rhs[k];
      worst = std::max(worst, gap);
      if (gap > 1e-9) ++violations;
    }
  }
  return detail::finish(1, "operator inequality |I_l psi| <= I_Re(l) |psi|", 5.0, sw, violations == 0,
                        std::to_string(violations) + " violations, worst excess " + detail::fmt(worst));
}

inline CriterionResult criterion_tight_vs_loose(const VerifyOptions& opt) {
  detail::Stopwatch sw;
  std::mt19937_64 rng(opt.seed + 2);
  std::uniform_real_distribution<double> mag(-1.0, 1.0);
  std::size_t dominance = 0, soundness = 0;
  for (const char* id : {"ODE-A", "ODE-B"}) {
    for (int trial = 0; trial < 10; ++trial) {
      // amplitudes spread over two decades around the configured scale, both signs
      const double alpha = opt.scale * std::copysign(std::pow(10.0, mag(rng)), mag(rng));
      const auto mc = make_case(id, opt.seed, alpha);
      const auto& c = std::get<OdeCase>(mc.definition);
      const LinearODEProblem p = c.problem(opt.intervals);
      const auto loose = loose_bound(p);
      const auto tight = tight_bound(p);
      for (std::size_t k = 0; k < tight.t.size(); ++k) {
        if (!(tight.bound[k] <= loose.series.bound[k] * (1.0 + 1e-9))) ++dominance;
        if (!(std::abs(exact_error(c, tight.t[k])) <= tight.bound[k])) ++soundness;
      }
    }
  }
  return detail::finish(2, "tight <= loose and |eta| <= tight on ODE-A, ODE-B", 10.0, sw,
                        dominance == 0 && soundness == 0,
                        std::to_string(dominance) + " dominance violations, " + std::to_string(soundness) +
                            " soundness violations");
}

inline CriterionResult criterion_unstable(const VerifyOptions& opt) {
  detail::Stopwatch sw;
  const auto mc = make_case("ODE-C", opt.seed, opt.scale);
  const auto& c = std::get<OdeCase>(mc.definition);
  const LinearODEProblem p = c.problem(opt.intervals);
  bool raised = false;
  try {
    (void)loose_bound(p);
  } catch (const Error& e) {
    raised = e.kind() == ErrorKind::UnstableSystem;
  }
  CaseRow row{mc.id, "tight"};
  const auto tight = tight_bound(p);
  for (std::size_t k = 0; k < tight.t.size(); ++k) row.observe(exact_error(c, tight.t[k]), tight.bound[k]);
  return detail::finish(3, "ODE-C: loose raises UnstableSystem, tight is sound", 5.0, sw, raised && row.pass,
                        std::string(raised ? "UnstableSystem raised" : "loose did not raise") + ", min slack " +
                            detail::fmt(row.min_slack));
}

inline CriterionResult criterion_system(const VerifyOptions& opt) {
  detail::Stopwatch sw;
  bool ok = true;
  double slack = std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 0; i < 10; ++i) {
    const SystemCase c = make_system_case(opt.seed + 100 + i, opt.scale);
    for (const auto& row : verify_system("SYS-6", c, opt.intervals)) {
      ok = ok && row.pass;
      slack = std::min(slack, row.min_slack);
    }
  }
  return detail::finish(4, "SYS-6 componentwise and norm bounds over 10 orthogonal P", 60.0, sw, ok,
                        "min slack " + detail::fmt(slack));
}

inline CriterionResult criterion_jordan_chain(const VerifyOptions&) {
  detail::Stopwatch sw;
  const Grid g(1.0, 10000);
  const std::vector<SampledFunction> q = {
      SampledFunction::from_function(g, [](double t) { return 1.0 + t; }),
      SampledFunction::from_function(g, [](double t) { return t * t; }),
      SampledFunction::from_function(g, [](double t) { return 2.0 - t + 0.5 * t * t * t; }),
  };
  const double rate = -4.0;
  // I^m with the residual widened once, as in the production operator
  auto power = [&](const SampledFunction& f, int m) {
    SampledFunction out = apply_I(rate, f, 0.0, true);
    for (int i = 1; i < m; ++i) out = apply_I(rate, out, 0.0, false);
    return out;
  };
  const std::vector<SampledFunction> hand = {
      [&] {
        SampledFunction r = power(q[0], 1);
        r += power(q[1], 2);
        r += power(q[2], 3);
        return r;
      }(),
      [&] {
        SampledFunction r = power(q[1], 1);
        r += power(q[2], 2);
        return r;
      }(),
      power(q[2], 1),
  };
  const auto block = operator_block_apply({4.0, 0.0}, q);
  double worst = 0.0;
  for (std::size_t l = 0; l < 3; ++l) {
    for (std::size_t k = 1; k < g.size(); ++k) {
      worst = std::max(worst, std::abs(block[l][k] - hand[l][k]) / std::abs(hand[l][k]));
    }
  }
  return detail::finish(5, "3x3 Jordan block at 4 vs hand-composed I, I^2, I^3", 5.0, sw, worst <= 1e-8,
                        "max relative deviation " + detail::fmt(worst));
}

inline CriterionResult criterion_duffing(const VerifyOptions& opt) {
  detail::Stopwatch sw;
  const DuffingCase c = make_duffing_case(0.0);
  const DuffingCheck chk = verify_duffing("DUFF", c, opt.intervals);
  bool ok = chk.eps_zero_reduces;
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& row : chk.rows) {
    ok = ok && row.pass;
    slack = std::min(slack, row.min_slack);
  }
  return detail::finish(6, "Duffing reconstruction vs RKF45 reference, eps in [-0.5, 0.5]", 120.0, sw, ok,
                        "min slack " + detail::fmt(slack) + ", max tail " + detail::fmt(chk.max_tail) +
                            ", comparison floor " + detail::fmt(kComparisonFloor) +
                            (chk.eps_zero_reduces ? ", eps=0 reduces to B_0" : ", eps=0 does NOT reduce to B_0"));
}

inline CriterionResult criterion_nl_containment(const VerifyOptions& opt) {
  detail::Stopwatch sw;
  std::mt19937_64 rng(opt.seed + 7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int degree = 3;
  const Grid g(1.0, 40);
  std::vector<SampledFunction> u, bounds;
  for (int i = 0; i < 3; ++i) {
    u.push_back(SampledFunction::from_function(g, detail::random_smooth<double>(rng)));
    bounds.push_back(SampledFunction::from_function(g, [&](double) { return 0.3 * std::abs(unit(rng)); }));
  }
  std::vector<SampledFunction> nl_bounds, nl_u;
  for (int j = 1; j <= 3; ++j) {
    nl_bounds.push_back(nl_bound(j, degree, u, bounds));
    nl_u.push_back(nl_term(j, degree, u));
  }
  std::size_t violations = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    std::vector<SampledFunction> v;
    for (int i = 0; i < 3; ++i) {
      std::vector<double> vals(g.size());
      for (std::size_t k = 0; k < g.size(); ++k) {
        // every fourth draw sits on the interval ends, where the bound is tightest
        const double w = draw % 4 == 0 ? (unit(rng) < 0.0 ? -1.0 : 1.0) : unit(rng);
        vals[k] = u[static_cast<std::size_t>(i)][k] + w * bounds[static_cast<std::size_t>(i)][k];
      }
      v.emplace_back(g, std::move(vals));
    }
    for (int j = 1; j <= 3; ++j) {
      const auto nl_v = nl_term(j, degree, v);
      const auto ju = static_cast<std::size_t>(j - 1);
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double diff = std::abs(nl_v[k] - nl_u[ju][k]);
        if (diff > nl_bounds[ju][k] * (1.0 + 1e-12) + 1e-15) ++violations;
      }
    }
  }
  return detail::finish(7, "NL-bound containment over 1000 draws (k=3, j<=3)", 10.0, sw, violations == 0,
                        std::to_string(violations) + " violations");
}

inline CriterionResult criterion_spiral(const VerifyOptions& opt) {
  detail::Stopwatch sw;
  const PdeCase c = make_spiral_case(opt.scale);
  const CurveCheck cc = spiral_curves(c);
  CaseRow row{"PDE-SPIRAL", "characteristic"};
  std::size_t samples = 0;
  for (const auto& curve : cc.curves) {
    const auto bound = curve_bound_series(c.pde, curve);
    for (std::size_t i = 0; i < curve.size(); ++i, ++samples) {
      row.observe(exact_error(c, curve.x[i], curve.y[i]), bound[i]);
    }
  }
  // Backward tracing from interior points must land on the spiral through its exit point.
  double backward = 0.0;
  for (const auto& q : std::vector<std::array<double, 2>>{{0.3, 0.2}, {-0.5, 0.1}, {0.05, -0.7}, {0.8, 0.8}}) {
    const CharCurve curve = trace_characteristic(c.pde, q[0], q[1]);
    const double r0 = std::hypot(curve.x.front(), curve.y.front());
    const double th0 = std::atan2(curve.y.front(), curve.x.front());
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const double s = curve.s[i];
      backward = std::max(backward, std::hypot(curve.x[i] - r0 * std::exp(-s) * std::cos(s + th0),
                                               curve.y[i] - r0 * std::exp(-s) * std::sin(s + th0)));
    }
  }
  const double dev = std::max(cc.max_spiral_deviation, backward);
  return detail::finish(8, "PDE-SPIRAL: traced curves match the spiral, |eta| <= curve bound", 60.0, sw,
                        dev <= 1e-6 && row.pass,
                        "spiral deviation " + detail::fmt(dev) + ", " + std::to_string(samples) +
                            " samples, min slack " + detail::fmt(row.min_slack));
}

inline CriterionResult criterion_const(const VerifyOptions& opt) {
  detail::Stopwatch sw;
  std::mt19937_64 rng(opt.seed + 9);
  std::uniform_real_distribution<double> mag(-1.0, 1.0);
  bool sound = true;
  for (int trial = 0; trial < 10; ++trial) {
    const double alpha = opt.scale * std::copysign(std::pow(10.0, mag(rng)), mag(rng));
    const PdeCase c = make_const_case(alpha);
    for (const auto& row : verify_pde("PDE-CONST", c)) sound = sound && row.pass;
  }

  const PdeCase c = make_const_case(opt.scale);
  const double coarse = constant_bound(c.pde).bound;
  // Independent refinement: 2049 x 2049 nodes, evaluated directly.
  const std::size_t n = 2048;
  const Rectangle& d = c.pde.domain;
  double fine = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    const double y = d.y_min + (d.y_max - d.y_min) * static_cast<double>(j) / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) {
      const double x = d.x_min + (d.x_max - d.x_min) * static_cast<double>(i) / static_cast<double>(n);
      fine = std::max(fine, std::abs(c.pde.residual.at(x, y) / c.pde.coef_c(x, y)));
    }
  }
  const double rel = fine > 0.0 ? std::abs(coarse - fine) / fine : std::abs(coarse);
  return detail::finish(9, "PDE-CONST: B >= max |eta|, mesh refinement agrees within 1%", 30.0, sw,
                        sound && rel <= 0.01,
                        std::string(sound ? "sound for 10 amplitudes" : "UNSOUND") + ", B=" + detail::fmt(coarse) +
                            " vs 2049^2 mesh " + detail::fmt(fine) + " (rel " + detail::fmt(rel) + ")");
}

inline CriterionResult criterion_operator_properties(const VerifyOptions& opt) {
  detail::Stopwatch sw;
  std::mt19937_64 rng(opt.seed + 10);
  std::uniform_real_distribution<double> lam(-3.0, 3.0);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  const Grid g(1.0, 10000);
  const Grid fine(1.0, 100000);
  double lin_worst = 0.0, comm_worst = 0.0;
  bool monotone = true;
  for (int trial = 0; trial < 20; ++trial) {
    const double l1 = lam(rng), l2 = lam(rng);
    const double c1 = coef(rng), c2 = coef(rng);
    const SampledFunction p1 = SampledFunction::from_function(g, detail::random_smooth<double>(rng));
    const SampledFunction p2 = SampledFunction::from_function(g, detail::random_smooth<double>(rng));

    SampledFunction combo = p1;
    combo *= c1;
    SampledFunction scaled2 = p2;
    scaled2 *= c2;
    combo += scaled2;
    const SampledFunction lhs = apply_I(l1, combo, 0.0, false);
    SampledFunction rhs = apply_I(l1, p1, 0.0, false);
    rhs *= c1;
    SampledFunction rhs2 = apply_I(l1, p2, 0.0, false);
    rhs2 *= c2;
    double scale = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) scale = std::max(scale, std::abs(rhs[k]) + std::abs(rhs2[k]));
    rhs += rhs2;
    for (std::size_t k = 0; k < g.size(); ++k) lin_worst = std::max(lin_worst, std::abs(lhs[k] - rhs[k]) / scale);

    // Commutation error of the trapezoid recursion is O(h^2) psi(0) against the
    // sup norm (and O(h) per node right after t = 0), so it is measured
    // against the sup norm on a finer grid.
    const SampledFunction a1 = abs(SampledFunction::from_function(fine, detail::random_smooth<double>(rng)));
    const SampledFunction ab = apply_I(l2, apply_I(l1, a1, 0.0, false), 0.0, false);
    const SampledFunction ba = apply_I(l1, apply_I(l2, a1, 0.0, false), 0.0, false);
    double sup = 0.0;
    for (std::size_t k = 0; k < fine.size(); ++k) sup = std::max({sup, std::abs(ab[k]), std::abs(ba[k])});
    for (std::size_t k = 0; k < fine.size(); ++k) comm_worst = std::max(comm_worst, std::abs(ab[k] - ba[k]) / sup);

    const SampledFunction small = abs(p1);
    SampledFunction bigger = small;
    bigger += abs(p2);
    const SampledFunction lo = apply_I(l1, small, 0.0, false);
    const SampledFunction hi = apply_I(l1, bigger, 0.0, false);
    for (std::size_t k = 0; k < g.size(); ++k) monotone = monotone && lo[k] <= hi[k];
  }
  return detail::finish(10, "apply_I linearity, commutativity, monotonicity", 5.0, sw,
                        lin_worst <= 1e-12 && comm_worst <= 1e-8 && monotone,
                        "linearity " + detail::fmt(lin_worst) + ", commutativity " + detail::fmt(comm_worst) +
                            (monotone ? ", monotone" : ", NOT monotone"));
}

inline std::vector<CriterionResult> run_criteria(const VerifyOptions& opt) {
  std::vector<CriterionResult> out;
  const std::vector<std::function<CriterionResult(const VerifyOptions&)>> all = {
      criterion_operator_inequality, criterion_tight_vs_loose, criterion_unstable,   criterion_system,
      criterion_jordan_chain,        criterion_duffing,        criterion_nl_containment, criterion_spiral,
      criterion_const,               criterion_operator_properties,
  };
  for (const auto& f : all) {
    try {
      out.push_back(f(opt));
    } catch (const Error& e) {
      out.push_back({static_cast<int>(out.size()) + 1, "criterion", false, 0.0, 0.0,
                     "raised " + std::string(e.name()) + ": " + e.what()});
    }
  }
  return out;
}

}  // namespace resbound::oracle
