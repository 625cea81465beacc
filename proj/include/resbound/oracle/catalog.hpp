#pragma once

// Manufactured problems with known exact solutions. Each surrogate is
// u = v + p where p vanishes with the initial / Dirichlet data, so the true
// error eta = u - v = p is known in closed form.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "resbound/error.hpp"
#include "resbound/expr.hpp"
#include "resbound/nonlinear_bounds.hpp"
#include "resbound/ode_bounds.hpp"
#include "resbound/oracle/integrators.hpp"
#include "resbound/pde_bounds.hpp"
#include "resbound/residual.hpp"
#include "resbound/system_bounds.hpp"

namespace resbound::oracle {

inline constexpr std::uint64_t kDefaultSeed = 20240611;
inline constexpr double kDefaultPerturbation = 1e-2;

namespace detail {

inline Expression sum(const Expression& a, const Expression& b) {
  return Expression::parse(a.to_string() + "+" + b.to_string());
}

inline std::string num(double v) { return format_number(v); }

}  // namespace detail

struct OdeCase {
  std::vector<double> coefficients;  // a_0 .. a_{n-1}
  Expression forcing;
  Expression exact;
  Expression perturbation;
  double t_end = 1.0;

  Expression surrogate() const { return detail::sum(exact, perturbation); }

  LinearODEProblem problem(std::size_t intervals = kDefaultGridIntervals) const {
    LinearODEProblem p;
    p.coefficients = coefficients;
    p.residual = residual_from_surrogate(coefficients, surrogate(), forcing);
    p.t_end = t_end;
    p.intervals = intervals;
    return p;
  }
};

struct SystemCase {
  JordanSpec jordan;
  Eigen::MatrixXd A;
  std::vector<Expression> exact;
  std::vector<Expression> perturbation;
  double t_end = 1.0;

  std::vector<Expression> surrogate() const {
    std::vector<Expression> out;
    for (std::size_t i = 0; i < exact.size(); ++i) out.push_back(detail::sum(exact[i], perturbation[i]));
    return out;
  }

  SystemProblem problem(std::size_t intervals = kDefaultGridIntervals) const {
    SystemProblem p;
    p.jordan = jordan;
    p.residual = system_residual_from_surrogate(A, surrogate(), system_forcing_from_exact(A, exact));
    p.t_end = t_end;
    p.intervals = intervals;
    return p;
  }
};

struct DuffingCase {
  std::vector<double> coefficients{2.0, 3.0};
  int degree = 3;
  Expression forcing = Expression::parse("cos(t)");
  double v0 = 1.0;
  double dv0 = 1.0;
  double t_end = 2.0;
  double eps_radius = 0.5;
  std::vector<Expression> components;  // fitted u_0 .. u_J

  int order() const { return static_cast<int>(components.size()) - 1; }

  PerturbationProblem problem(std::size_t intervals = kDefaultGridIntervals) const {
    PerturbationProblem p;
    p.coefficients = coefficients;
    p.degree = degree;
    p.components = components;
    p.forcing = forcing;
    p.t_end = t_end;
    p.intervals = intervals;
    p.eps_radius = eps_radius;
    return p;
  }
};

struct PdeCase {
  PDEProblem pde;  // residual already derived from the surrogate
  Expression exact;
  Expression perturbation;

  Expression surrogate() const { return detail::sum(exact, perturbation); }
};

struct ManufacturedCase {
  std::string id;
  std::variant<OdeCase, SystemCase, DuffingCase, PdeCase> definition;
};

/// Haar-distributed orthogonal matrix: QR of a seeded Gaussian matrix with
/// the signs of R's diagonal folded into Q.
inline Eigen::MatrixXd random_orthogonal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd G(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) G(i, j) = gauss(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < m; ++j) {
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  }
  return Q;
}

inline OdeCase make_ode_case(std::vector<double> coefficients, std::string_view forcing, double scale) {
  OdeCase c;
  c.coefficients = std::move(coefficients);
  c.forcing = Expression::parse(forcing);
  c.exact = Expression::parse("t^2+t+1");
  const int n = static_cast<int>(c.coefficients.size());
  c.perturbation = Expression::parse(detail::num(scale) + "*t^" + std::to_string(n) + "*exp(-t)");
  return c;
}

inline SystemCase make_system_case(std::uint64_t seed, double scale) {
  SystemCase c;
  const Eigen::MatrixXd P = random_orthogonal(6, seed);
  c.jordan.P = P.cast<std::complex<double>>();
  c.jordan.blocks = {{4.0, 3}, {3.0, 2}, {2.0, 1}};
  c.A = c.jordan.reassemble().real();

  static const char* const kBasis[] = {"sin(t)", "ln(t+1)", "t+1", "t^2", "exp(t)", "cos(t)"};
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> amp(0.5, 1.5);
  std::uniform_real_distribution<double> freq(0.5, 3.0);
  for (Eigen::Index i = 0; i < 6; ++i) {
    std::string v;
    for (Eigen::Index j = 0; j < 6; ++j) {
      if (j > 0) v += "+";
      v += detail::num(P(i, j)) + "*" + kBasis[j];
    }
    c.exact.push_back(Expression::parse(v));
    const double ci = amp(rng);
    const double wi = freq(rng);
    c.perturbation.push_back(Expression::parse(detail::num(scale * ci) + "*t*exp(-t)*cos(" + detail::num(wi) + "*t)"));
  }
  return c;
}

/// Solves L u_0 = f, L u_j = -NL_j[u] with RK4 and fits each u_j by a
/// degree-12 polynomial in t/T that keeps u_j(0), u_j'(0) exact.
inline std::vector<Expression> duffing_components(const DuffingCase& c, int order, int fit_degree = 12,
                                                  std::size_t steps = 4000) {
  const auto J = static_cast<std::size_t>(order);
  std::vector<std::vector<std::vector<int>>> tuples(J + 1);
  for (std::size_t j = 1; j <= J; ++j) tuples[j] = compositions(static_cast<int>(j) - 1, c.degree);
  const double a0 = c.coefficients[0];
  const double a1 = c.coefficients[1];

  const Rhs rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    for (std::size_t j = 0; j <= J; ++j) {
      double src = 0.0;
      if (j == 0) {
        src = c.forcing.eval(Bindings::at_t(t));
      } else {
        for (const auto& tup : tuples[j]) {
          double prod = 1.0;
          for (int idx : tup) prod *= y[2 * static_cast<std::size_t>(idx)];
          src -= prod;
        }
      }
      dy[2 * j] = y[2 * j + 1];
      dy[2 * j + 1] = src - a1 * y[2 * j + 1] - a0 * y[2 * j];
    }
  };
  State y0(2 * (J + 1), 0.0);
  y0[0] = c.v0;
  y0[1] = c.dv0;
  const Grid grid(c.t_end, steps);
  const auto traj = rk4_solve(rhs, y0, grid);

  const auto rows = static_cast<Eigen::Index>(grid.size());
  const Eigen::Index cols = fit_degree - 1;  // monomials 2..fit_degree
  Eigen::MatrixXd V(rows, cols);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const double s = grid.node(static_cast<std::size_t>(k)) / c.t_end;
    double pw = s * s;
    for (Eigen::Index m = 0; m < cols; ++m, pw *= s) V(k, m) = pw;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);

  std::vector<Expression> out;
  const std::string s = "(t/" + detail::num(c.t_end) + ")";
  for (std::size_t j = 0; j <= J; ++j) {
    const double c0 = y0[2 * j];
    const double c1 = y0[2 * j + 1];
    Eigen::VectorXd rhs_v(rows);
    for (Eigen::Index k = 0; k < rows; ++k) {
      const double t = grid.node(static_cast<std::size_t>(k));
      rhs_v(k) = traj[static_cast<std::size_t>(k)][2 * j] - c0 - c1 * t;
    }
    const Eigen::VectorXd coef = qr.solve(rhs_v);
    std::string text = detail::num(c0) + "+" + detail::num(c1) + "*t";
    for (Eigen::Index m = 0; m < cols; ++m) text += "+" + detail::num(coef(m)) + "*" + s + "^" + std::to_string(m + 2);
    out.push_back(Expression::parse(text));
  }
  return out;
}

inline DuffingCase make_duffing_case(double scale, int order = 6) {
  DuffingCase c;
  const auto fitted = duffing_components(c, order);
  for (std::size_t j = 0; j < fitted.size(); ++j) {
    if (scale == 0.0) {
      c.components.push_back(fitted[j]);
    } else {
      const Expression p =
          Expression::parse(detail::num(scale / static_cast<double>(j + 1)) + "*t^2*exp(-t)");
      c.components.push_back(detail::sum(fitted[j], p));
    }
  }
  return c;
}

inline PdeCase make_spiral_case(double scale) {
  PdeCase c;
  PDEProblem& p = c.pde;
  p.a = Expression::parse("-x-y");
  p.b = Expression::parse("x-y");
  p.c = Expression::parse("1");
  p.f = Expression::parse("3*x-2*y");
  p.domain = Rectangle{-1.0, 1.0, -1.0, 1.0};
  p.gamma = {{Edge::Left, -1.0, 1.0}, {Edge::Right, -1.0, 1.0}, {Edge::Bottom, -1.0, 1.0}, {Edge::Top, -1.0, 1.0}};
  c.exact = Expression::parse("2*x+3*y");
  p.g = c.exact;
  c.perturbation = Expression::parse(detail::num(scale) + "*(1-x^2)*(1-y^2)*sin(3*x+2*y)");
  p.residual = residual_from_surrogate(p, c.surrogate());
  return c;
}

// Inflow edges are left and bottom: a > 0 and b > 0 throughout the square.
inline PdeCase make_const_case(double scale) {
  PdeCase c;
  PDEProblem& p = c.pde;
  p.a = Expression::parse("x^2+y^2+1");
  p.b = Expression::parse("x^2-y^2+2");
  p.c = Expression::parse("3-2*x");
  p.f = Expression::parse("6-4*x");
  p.domain = Rectangle{-1.0, 1.0, -1.0, 1.0};
  p.gamma = {{Edge::Left, -1.0, 1.0}, {Edge::Bottom, -1.0, 1.0}};
  c.exact = Expression::parse("2");
  p.g = c.exact;
  c.perturbation = Expression::parse(detail::num(scale) + "*(x+1)*(y+1)*sin(3*x+2*y)");
  p.residual = residual_from_surrogate(p, c.surrogate());
  return c;
}

inline const std::vector<std::string>& case_ids() {
  static const std::vector<std::string> ids = {"ODE-A", "ODE-B", "ODE-C", "SYS-6", "DUFF", "PDE-SPIRAL", "PDE-CONST"};
  return ids;
}

inline ManufacturedCase make_case(std::string_view id, std::uint64_t seed = kDefaultSeed,
                                  double scale = kDefaultPerturbation) {
  if (id == "ODE-A") return {std::string(id), make_ode_case({2.0, 3.0}, "2*t^2+8*t+7", scale)};
  if (id == "ODE-B") return {std::string(id), make_ode_case({1.0, 0.0}, "t^2+t+3", scale)};
  if (id == "ODE-C") return {std::string(id), make_ode_case({0.0, -1.0}, "1-2*t", scale)};
  if (id == "SYS-6") return {std::string(id), make_system_case(seed, scale)};
  if (id == "DUFF") return {std::string(id), make_duffing_case(scale)};
  if (id == "PDE-SPIRAL") return {std::string(id), make_spiral_case(scale)};
  if (id == "PDE-CONST") return {std::string(id), make_const_case(scale)};
  throw Error(ErrorKind::SchemaError, "unknown case '" + std::string(id) + "'");
}

inline std::vector<ManufacturedCase> catalog(std::uint64_t seed = kDefaultSeed, double scale = kDefaultPerturbation) {
  std::vector<ManufacturedCase> out;
  for (const auto& id : case_ids()) out.push_back(make_case(id, seed, scale));
  return out;
}

inline double exact_error(const OdeCase& c, double t) { return c.perturbation.eval(Bindings::at_t(t)); }

inline std::vector<double> exact_error(const SystemCase& c, double t) {
  std::vector<double> out;
  for (const auto& p : c.perturbation) out.push_back(p.eval(Bindings::at_t(t)));
  return out;
}

inline double exact_error(const PdeCase& c, double x, double y) { return c.perturbation.eval(Bindings::at_xy(x, y)); }

}  // namespace resbound::oracle
