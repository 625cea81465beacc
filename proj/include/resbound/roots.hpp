#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "resbound/error.hpp"

namespace resbound {

inline constexpr std::size_t kMaxPolynomialDegree = 10;

/// Roots of lambda^n + a_{n-1} lambda^{n-1} + ... + a_0.
struct CharacteristicRoots {
  std::vector<std::complex<double>> roots;  // sorted by (real, imag)
  std::vector<double> coefficients;         // a_0 .. a_{n-1}

  std::size_t degree() const noexcept { return coefficients.size(); }
};

/// Real part treated as zero when |Re| <= 1e-9 max(1, |lambda|).
inline bool has_zero_real_part(std::complex<double> lambda) {
  return std::abs(lambda.real()) <= 1e-9 * std::max(1.0, std::abs(lambda));
}

/// Coefficients a_0..a_{n-1} of the monic polynomial prod (lambda - root).
inline std::vector<std::complex<double>> monic_from_roots(std::span<const std::complex<double>> roots) {
  std::vector<std::complex<double>> poly{1.0};  // highest degree last
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] += poly[i];
      next[i] -= r * poly[i];
    }
    poly = std::move(next);
  }
  poly.pop_back();
  return poly;
}

/// Eigenvalues of the companion matrix (Hessenberg QR inside Eigen).
inline CharacteristicRoots char_roots(std::span<const double> coefficients) {
  const std::size_t n = coefficients.size();
  if (n == 0) throw Error(ErrorKind::InvalidDomain, "operator order must be at least 1");
  if (n > kMaxPolynomialDegree) throw Error(ErrorKind::DegreeTooLarge, "degree " + std::to_string(n) + " exceeds 10");
  for (double a : coefficients) {
    if (!std::isfinite(a)) throw Error(ErrorKind::InvalidDomain, "non-finite coefficient");
  }

  CharacteristicRoots out;
  out.coefficients.assign(coefficients.begin(), coefficients.end());

  if (n == 1) {
    out.roots.push_back({-coefficients[0], 0.0});
    return out;
  }

  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 1; i < dim; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < dim; ++i) companion(i, dim - 1) = -coefficients[static_cast<std::size_t>(i)];

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::DomainError, "companion QR did not converge");
  const Eigen::VectorXcd ev = solver.eigenvalues();

  // EigenSolver emits complex roots as adjacent conjugate pairs; make the
  // pairing exact so downstream real parts agree bit for bit.
  for (Eigen::Index i = 0; i < dim; ++i) {
    std::complex<double> z = ev(i);
    if (z.imag() != 0.0 && i + 1 < dim && std::abs(ev(i + 1) - std::conj(z)) <= 1e-12 * std::max(1.0, std::abs(z))) {
      const double re = 0.5 * (z.real() + ev(i + 1).real());
      const double im = 0.5 * (std::abs(z.imag()) + std::abs(ev(i + 1).imag()));
      out.roots.push_back({re, im});
      out.roots.push_back({re, -im});
      ++i;
    } else {
      out.roots.push_back(z);
    }
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

}  // namespace resbound
