#pragma once

// Bounds for d eta/dt + A eta = r, eta(0) = 0, through A = P J P^{-1}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resbound/error.hpp"
#include "resbound/grid.hpp"
#include "resbound/inverse_operator.hpp"
#include "resbound/ode_bounds.hpp"
#include "resbound/residual.hpp"

namespace resbound {

inline constexpr std::size_t kMaxSystemDimension = 10;

struct JordanBlock {
  std::complex<double> lambda;
  std::size_t size = 1;
};

struct JordanSpec {
  Eigen::MatrixXcd P;
  std::vector<JordanBlock> blocks;

  std::size_t dimension() const {
    return std::accumulate(blocks.begin(), blocks.end(), std::size_t{0},
                           [](std::size_t acc, const JordanBlock& b) { return acc + b.size; });
  }

  Eigen::MatrixXcd jordan_matrix() const {
    const auto n = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(n, n);
    Eigen::Index offset = 0;
    for (const auto& b : blocks) {
      for (std::size_t i = 0; i < b.size; ++i) {
        const auto r = offset + static_cast<Eigen::Index>(i);
        J(r, r) = b.lambda;
        if (i + 1 < b.size) J(r, r + 1) = 1.0;
      }
      offset += static_cast<Eigen::Index>(b.size);
    }
    return J;
  }

  /// P J P^{-1}
  Eigen::MatrixXcd reassemble() const { return P * jordan_matrix() * P.inverse(); }
};

/// Ratio of extreme singular values.
inline double cond2(const Eigen::MatrixXcd& P) {
  if (P.rows() != P.cols() || P.rows() == 0) throw Error(ErrorKind::InvalidDomain, "cond2 needs a square matrix");
  if (static_cast<std::size_t>(P.rows()) > kMaxSystemDimension) {
    throw Error(ErrorKind::DegreeTooLarge, "matrix dimension exceeds 10");
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(P);
  const auto& s = svd.singularValues();
  const double largest = s(0);
  const double smallest = s(s.size() - 1);
  if (!(largest > 0.0) || smallest < 1e-12 * largest) throw Error(ErrorKind::SingularMatrix, "matrix is singular");
  return largest / smallest;
}

inline double cond2(const Eigen::MatrixXd& P) { return cond2(Eigen::MatrixXcd(P.cast<std::complex<double>>())); }

inline void validate(const JordanSpec& j) {
  if (j.blocks.empty()) throw Error(ErrorKind::SchemaError, "Jordan spec has no blocks");
  for (const auto& b : j.blocks) {
    if (b.size == 0) throw Error(ErrorKind::SchemaError, "Jordan block of size 0");
  }
  const std::size_t n = j.dimension();
  if (static_cast<std::size_t>(j.P.rows()) != n || static_cast<std::size_t>(j.P.cols()) != n) {
    throw Error(ErrorKind::SchemaError, "P must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  (void)cond2(j.P);
}

/// Diagonalizable case only: eigenvalues pairwise farther apart than `tol`.
inline JordanSpec jordan_from_matrix(const Eigen::MatrixXd& A, double tol = 1e-6) {
  if (A.rows() != A.cols() || A.rows() == 0) throw Error(ErrorKind::InvalidDomain, "matrix must be square");
  if (static_cast<std::size_t>(A.rows()) > kMaxSystemDimension) {
    throw Error(ErrorKind::DegreeTooLarge, "matrix dimension exceeds 10");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(A, true);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::NeedExplicitJordan, "eigen decomposition failed");
  const Eigen::VectorXcd ev = solver.eigenvalues();
  const Eigen::MatrixXcd vecs = solver.eigenvectors();
  const auto n = ev.size();

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      if (std::abs(ev(i) - ev(k)) <= tol) {
        throw Error(ErrorKind::NeedExplicitJordan, "eigenvalues cluster within tolerance; supply P and blocks explicitly");
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
    return ev(a).imag() < ev(b).imag();
  });

  JordanSpec out;
  out.P.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Eigen::Index src = order[static_cast<std::size_t>(c)];
    out.P.col(c) = vecs.col(src);
    out.blocks.push_back({ev(src), 1});
  }

  const double scale = std::max(1.0, A.norm());
  if (!((out.reassemble() - A.cast<std::complex<double>>()).norm() <= 1e-8 * scale)) {
    throw Error(ErrorKind::NeedExplicitJordan, "eigenvector basis does not reproduce the matrix");
  }
  return out;
}

/// Row l of the block is sum_{j >= 0} I^{j+1} q[l + j] with I = I_{-Re lambda}.
/// Powers I^m(q_i) are built incrementally and reused across rows; the safety
/// rule applies to q at the first power only.
inline std::vector<SampledFunction> operator_block_apply(std::complex<double> lambda,
                                                          const std::vector<SampledFunction>& q_abs,
                                                          bool safety = true) {
  const std::size_t nk = q_abs.size();
  const double rate = -lambda.real();
  // powers[i][m - 1] = I^m q_i, needed for m <= i + 1
  std::vector<std::vector<SampledFunction>> powers(nk);
  for (std::size_t i = 0; i < nk; ++i) {
    SampledFunction cur = q_abs[i];
    for (std::size_t m = 1; m <= i + 1; ++m) {
      cur = apply_I(rate, cur, 0.0, safety && m == 1);
      powers[i].push_back(cur);
    }
  }
  std::vector<SampledFunction> out;
  out.reserve(nk);
  for (std::size_t l = 0; l < nk; ++l) {
    SampledFunction row = powers[l][0];
    for (std::size_t j = 1; l + j < nk; ++j) row += powers[l + j][j];
    out.push_back(std::move(row));
  }
  return out;
}

/// Block-diagonal operator matrix applied to n sampled functions.
inline std::vector<SampledFunction> operator_matrix_apply(const JordanSpec& jordan,
                                                           const std::vector<SampledFunction>& q_abs,
                                                           bool safety = true) {
  std::vector<SampledFunction> out;
  out.reserve(q_abs.size());
  std::size_t offset = 0;
  for (const auto& b : jordan.blocks) {
    std::vector<SampledFunction> chunk(q_abs.begin() + static_cast<std::ptrdiff_t>(offset),
                                       q_abs.begin() + static_cast<std::ptrdiff_t>(offset + b.size));
    for (auto& row : operator_block_apply(b.lambda, chunk, safety)) out.push_back(std::move(row));
    offset += b.size;
  }
  return out;
}

using VectorFunction = std::vector<ScalarFunction>;

/// f = v' + A v for a manufactured exact solution v.
inline VectorFunction system_forcing_from_exact(const Eigen::MatrixXd& A, const std::vector<Expression>& v) {
  if (static_cast<std::size_t>(A.rows()) != v.size() || A.rows() != A.cols()) {
    throw Error(ErrorKind::SchemaError, "matrix and exact solution dimensions differ");
  }
  VectorFunction out;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    out.push_back([A, v, i](double t) {
      const auto at = Bindings::at_t(t);
      double acc = v[static_cast<std::size_t>(i)].eval_dual(Var::t, at, 1).derivatives[0];
      for (Eigen::Index j = 0; j < A.cols(); ++j) acc += A(i, j) * v[static_cast<std::size_t>(j)].eval(at);
      return acc;
    });
  }
  return out;
}

/// r = u' + A u - f, one provider per component.
inline std::vector<ResidualProvider> system_residual_from_surrogate(const Eigen::MatrixXd& A,
                                                                    const std::vector<Expression>& u,
                                                                    const VectorFunction& forcing) {
  if (static_cast<std::size_t>(A.rows()) != u.size() || forcing.size() != u.size() || A.rows() != A.cols()) {
    throw Error(ErrorKind::SchemaError, "matrix, surrogate and forcing dimensions differ");
  }
  std::vector<ResidualProvider> out;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    out.emplace_back(ResidualProvider::Function([A, u, f = forcing[static_cast<std::size_t>(i)], i](double t) {
      const auto at = Bindings::at_t(t);
      double acc = u[static_cast<std::size_t>(i)].eval_dual(Var::t, at, 1).derivatives[0] - f(t);
      for (Eigen::Index j = 0; j < A.cols(); ++j) acc += A(i, j) * u[static_cast<std::size_t>(j)].eval(at);
      return acc;
    }));
  }
  return out;
}

struct SystemProblem {
  JordanSpec jordan;
  std::vector<ResidualProvider> residual;
  double t_end = 1.0;
  std::size_t intervals = kDefaultGridIntervals;
  std::vector<double> query;

  Grid grid() const { return Grid(t_end, intervals); }

  std::vector<double> query_points() const {
    if (query.empty()) return grid().nodes();
    for (double t : query) {
      if (!(t >= 0.0 && t <= t_end)) throw Error(ErrorKind::OutOfDomain, "query point outside [0, T]");
    }
    return query;
  }
};

struct VectorBoundSeries {
  std::vector<double> t;
  std::vector<std::vector<double>> componentwise;  // [query][component]
  std::vector<double> norm;
};

/// Componentwise and norm bounds sampled on the grid, before interpolation.
struct SystemGridBounds {
  std::vector<SampledFunction> componentwise;
  SampledFunction norm;
};

namespace detail {

inline std::vector<SampledFunction> sample_abs_residual(const SystemProblem& p, const Grid& g) {
  const std::size_t n = p.jordan.dimension();
  if (p.residual.size() != n) {
    throw Error(ErrorKind::SchemaError, "residual has " + std::to_string(p.residual.size()) +
                                            " components, system dimension is " + std::to_string(n));
  }
  std::vector<SampledFunction> out;
  for (const auto& r : p.residual) out.push_back(abs(r.sample(g)));
  return out;
}

inline Eigen::MatrixXd elementwise_modulus(const Eigen::MatrixXcd& M) { return M.cwiseAbs(); }

inline std::vector<SampledFunction> mat_apply(const Eigen::MatrixXd& M, const std::vector<SampledFunction>& v) {
  std::vector<SampledFunction> out;
  const Grid g = v.front().grid();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    std::vector<double> acc(g.size(), 0.0);
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      const double m = M(i, j);
      const auto& vj = v[static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += m * vj[k];
    }
    out.emplace_back(g, std::move(acc));
  }
  return out;
}

}  // namespace detail

inline std::vector<SampledFunction> componentwise_bound_sampled(const JordanSpec& jordan,
                                                                const std::vector<SampledFunction>& r_abs) {
  const Eigen::MatrixXd p_abs = detail::elementwise_modulus(jordan.P);
  const Eigen::MatrixXd pinv_abs = detail::elementwise_modulus(jordan.P.inverse());
  return detail::mat_apply(p_abs, operator_matrix_apply(jordan, detail::mat_apply(pinv_abs, r_abs)));
}

inline SampledFunction norm_bound_sampled(const JordanSpec& jordan, const std::vector<SampledFunction>& r_abs) {
  const Grid g = r_abs.front().grid();
  std::vector<double> rnorm(g.size(), 0.0);
  for (const auto& c : r_abs) {
    for (std::size_t k = 0; k < rnorm.size(); ++k) rnorm[k] += c[k] * c[k];
  }
  for (auto& v : rnorm) v = std::sqrt(v);
  const SampledFunction rho(g, std::move(rnorm));
  const std::vector<SampledFunction> w =
      operator_matrix_apply(jordan, std::vector<SampledFunction>(jordan.dimension(), rho));
  const double kappa = cond2(jordan.P);
  std::vector<double> out(g.size(), 0.0);
  for (const auto& c : w) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += c[k] * c[k];
  }
  for (auto& v : out) v = kappa * std::sqrt(v);
  return SampledFunction(g, std::move(out));
}

inline VectorBoundSeries componentwise_bound(const SystemProblem& p) {
  validate(p.jordan);
  const Grid g = p.grid();
  const auto b = componentwise_bound_sampled(p.jordan, detail::sample_abs_residual(p, g));
  VectorBoundSeries out;
  out.t = p.query_points();
  for (double t : out.t) {
    std::vector<double> row;
    for (const auto& c : b) row.push_back(interp_linear(c, t));
    out.componentwise.push_back(std::move(row));
  }
  return out;
}

inline VectorBoundSeries norm_bound(const SystemProblem& p) {
  validate(p.jordan);
  const Grid g = p.grid();
  const SampledFunction b = norm_bound_sampled(p.jordan, detail::sample_abs_residual(p, g));
  VectorBoundSeries out;
  out.t = p.query_points();
  out.norm = interp_linear(b, out.t);
  return out;
}

}  // namespace resbound
