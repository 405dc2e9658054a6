#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "armax/errors.hpp"

namespace armax {

/// Polynomial in the delay operator z^-1.
///
/// Monic form:           1 + p_1 z^-1 + ... + p_d z^-d
/// Strictly causal form:     p_1 z^-1 + ... + p_d z^-d
///
/// Only the coefficients p_1..p_d are stored; an empty list is the
/// constant 1 (monic) or 0 (strictly causal).
struct DelayPolynomial {
  enum class Kind { monic, strictly_causal };

  std::vector<double> coeffs;
  Kind kind = Kind::monic;

  DelayPolynomial() = default;
  DelayPolynomial(std::vector<double> c, Kind k) : coeffs(std::move(c)), kind(k) {}

  static DelayPolynomial monic(std::vector<double> c) {
    return DelayPolynomial(std::move(c), Kind::monic);
  }
  static DelayPolynomial strictly_causal(std::vector<double> c) {
    return DelayPolynomial(std::move(c), Kind::strictly_causal);
  }

  std::size_t degree() const { return coeffs.size(); }

  /// Coefficient p_i for i = 1..d; 0 outside that range (and p_0 by kind).
  double at(std::size_t i) const {
    if (i == 0) return kind == Kind::monic ? 1.0 : 0.0;
    return i <= coeffs.size() ? coeffs[i - 1] : 0.0;
  }

  bool is_finite() const {
    for (double v : coeffs)
      if (!std::isfinite(v)) return false;
    return true;
  }

  /// Applies the polynomial as a causal FIR filter with zero initial state:
  /// out_k = p_0 x_k + p_1 x_{k-1} + ... + p_d x_{k-d}.
  std::vector<double> filter(const std::vector<double>& x) const {
    std::vector<double> out(x.size(), 0.0);
    const double p0 = kind == Kind::monic ? 1.0 : 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      double acc = p0 * x[k];
      for (std::size_t i = 1; i <= coeffs.size() && i <= k; ++i)
        acc += coeffs[i - 1] * x[k - i];
      out[k] = acc;
    }
    return out;
  }
};

/// Roots of z^d + p_1 z^{d-1} + ... + p_d (the numerator of a monic delay
/// polynomial), via companion-matrix eigenvalues.
inline Eigen::VectorXcd polynomial_roots(const DelayPolynomial& poly) {
  const auto d = static_cast<Eigen::Index>(poly.degree());
  if (d == 0) return Eigen::VectorXcd(0);
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) companion(i, d - 1) = -poly.coeffs[d - 1 - i];
  return Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();
}

/// True iff every root of z^d + p_1 z^{d-1} + ... + p_d has modulus
/// strictly below 1 - tolerance.
inline bool polynomial_is_stable(const DelayPolynomial& poly,
                                 double tolerance = 1e-9) {
  const Eigen::VectorXcd roots = polynomial_roots(poly);
  for (Eigen::Index i = 0; i < roots.size(); ++i)
    if (std::abs(roots[i]) >= 1.0 - tolerance) return false;
  return true;
}

}  // namespace armax
