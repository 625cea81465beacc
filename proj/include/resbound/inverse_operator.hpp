#pragma once

// The inverse of d/dt - lambda with zero initial value:
//
//   I_lambda psi(t) = int_0^t exp(lambda (t - tau)) psi(tau) dtau
//
// accumulated interval by interval in the kernel form exp(lambda (t_k - tau)),
// which stays finite for lambda > 0 on long horizons as long as the result
// itself is representable.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "resbound/error.hpp"
#include "resbound/expr.hpp"
#include "resbound/grid.hpp"

namespace resbound {

namespace detail {

template <class T, class L>
std::vector<T> accumulate_constant_kernel(L lambda, std::span<const T> psi, double h) {
  using std::exp;
  const auto decay = exp(lambda * h);
  const double half_h = 0.5 * h;
  std::vector<T> out(psi.size(), T{});
  for (std::size_t k = 0; k + 1 < psi.size(); ++k) {
    out[k + 1] = decay * out[k] + half_h * (decay * psi[k] + psi[k + 1]);
  }
  return out;
}

inline void check_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorKind::OverflowError, "operator application overflowed");
  }
}

}  // namespace detail

/// I_{lambda, delta} psi on the grid of `psi`. `delta` adds delta * exp(lambda t),
/// the contribution of a nonzero initial error.
inline SampledFunction apply_I(double lambda, const SampledFunction& psi, double delta = 0.0, bool safety = true) {
  const std::vector<double> in = safety ? neighbor_max(psi.span()) : psi.values();
  std::vector<double> out = detail::accumulate_constant_kernel<double>(lambda, in, psi.grid().step());
  if (delta != 0.0) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += delta * std::exp(lambda * psi.grid().node(k));
  }
  detail::check_finite(out);
  return SampledFunction(psi.grid(), std::move(out));
}

/// Complex I_lambda with the same quadrature weights as apply_I (no safety rule).
inline ComplexSampled apply_I(std::complex<double> lambda, const ComplexSampled& psi) {
  std::vector<std::complex<double>> out =
      detail::accumulate_constant_kernel<std::complex<double>>(lambda, psi.span(), psi.grid().step());
  for (const auto& z : out) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw Error(ErrorKind::OverflowError, "operator application overflowed");
    }
  }
  return ComplexSampled(psi.grid(), std::move(out));
}

/// m-fold application of apply_I.
inline SampledFunction apply_I_power(double lambda, const SampledFunction& psi, int m, bool safety = true) {
  SampledFunction out = psi;
  for (int i = 0; i < m; ++i) out = apply_I(lambda, out, 0.0, safety);
  return out;
}

/// int_0^{s_k} exp(int_tau^{s_k} lambda) psi(tau) dtau on arbitrary increasing
/// nodes. The exponent is the trapezoid integral of `lambda`.
inline std::vector<double> apply_I_variable(std::span<const double> nodes, std::span<const double> lambda,
                                            std::span<const double> psi, bool safety = true) {
  const std::size_t n = nodes.size();
  if (lambda.size() != n || psi.size() != n) {
    throw Error(ErrorKind::InvalidDomain, "apply_I_variable: mismatched sample counts");
  }
  const std::vector<double> in = safety ? neighbor_max(psi) : std::vector<double>(psi.begin(), psi.end());
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double h = nodes[k + 1] - nodes[k];
    const double growth = std::exp(0.5 * h * (lambda[k] + lambda[k + 1]));
    out[k + 1] = growth * out[k] + 0.5 * h * (growth * in[k] + in[k + 1]);
  }
  detail::check_finite(out);
  return out;
}

inline SampledFunction apply_I_variable(const SampledFunction& lambda, const SampledFunction& psi, bool safety = true) {
  const std::vector<double> nodes = psi.grid().nodes();
  return SampledFunction(psi.grid(), apply_I_variable(nodes, lambda.span(), psi.span(), safety));
}

/// Variable-rate operator with lambda(t) given as an expression in t.
inline SampledFunction apply_I_variable(const Expression& lambda_fn, const SampledFunction& psi, bool safety = true) {
  const SampledFunction lambda = SampledFunction::from_function(
      psi.grid(), [&](double t) { return lambda_fn.eval(Bindings::at_t(t)); });
  return apply_I_variable(lambda, psi, safety);
}

}  // namespace resbound
