#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

#include "armax/errors.hpp"
#include "armax/polynomial.hpp"

namespace armax {

/// Exact autocovariances of the MA(p) process y_k = w_k + c_1 w_{k-1} +
/// ... + c_p w_{k-p}:  r(i) = sigma2 * sum_j c_j c_{j+i} with c_0 = 1.
inline std::vector<double> ma_autocovariance(const std::vector<double>& c,
                                             double sigma2,
                                             std::size_t max_lag) {
  std::vector<double> cc;
  cc.reserve(c.size() + 1);
  cc.push_back(1.0);
  cc.insert(cc.end(), c.begin(), c.end());
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t i = 0; i <= max_lag; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j + i < cc.size(); ++j) acc += cc[j] * cc[j + i];
    r[i] = sigma2 * acc;
  }
  return r;
}

/// Autocovariances of the stationary ARMA process a(z) y_k = c(z) w_k with
/// stable a, computed from the impulse response h of c/a:
/// r(i) = sigma2 * sum_j h_j h_{j+i}. The tail is truncated once the
/// geometric decay makes further terms vanish in double precision, so the
/// result is exact to roundoff. This route is independent of both the
/// simulator and the identification code.
inline std::vector<double> arma_autocovariance(const std::vector<double>& a,
                                               const std::vector<double>& c,
                                               double sigma2,
                                               std::size_t max_lag,
                                               std::size_t max_terms = 100000) {
  if (!polynomial_is_stable(DelayPolynomial::monic(a), 1e-12))
    throw PreconditionError("arma_autocovariance: a(z) must be stable");
  // h solves a(z) h = c(z) delta_k.
  std::vector<double> h;
  h.reserve(1024);
  double tail = 1.0;
  for (std::size_t k = 0; k < max_terms; ++k) {
    double acc = k == 0 ? 1.0 : (k <= c.size() ? c[k - 1] : 0.0);
    for (std::size_t i = 1; i <= a.size() && i <= k; ++i)
      acc -= a[i - 1] * h[k - i];
    h.push_back(acc);
    if (k > a.size() + c.size() + max_lag) {
      tail = 0.0;
      for (std::size_t i = 0; i < a.size() && i < h.size(); ++i)
        tail += std::abs(h[h.size() - 1 - i]);
      if (tail < 1e-18) break;
    }
  }
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t i = 0; i <= max_lag; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j + i < h.size(); ++j) acc += h[j] * h[j + i];
    r[i] = sigma2 * acc;
  }
  return r;
}

/// Coefficients [1, q_1, ..., q_n] of det(zI - M) = z^n + q_1 z^{n-1} +
/// ... + q_n via the Faddeev-LeVerrier recursion. Small n only; used as an
/// independent route when checking companion-structure identities.
inline std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& M) {
  const Eigen::Index n = M.rows();
  std::vector<double> q(static_cast<std::size_t>(n) + 1, 0.0);
  q[0] = 1.0;
  Eigen::MatrixXd Mk = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    Mk = M * Mk;
    const double ck = -Mk.trace() / static_cast<double>(k);
    q[static_cast<std::size_t>(k)] = ck;
    Mk += ck * Eigen::MatrixXd::Identity(n, n);
  }
  return q;
}

}  // namespace armax
