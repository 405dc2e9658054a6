#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "armax/errors.hpp"
#include "armax/polynomial.hpp"

namespace armax {

/// ARMAX parameter set for
///   a(z) y_k = b(z) u_k + c(z) w_k,   w_k ~ N(0, sigma2),
/// with a, c monic and b strictly causal.
struct ArmaxParams {
  DelayPolynomial a;  ///< monic, degree n
  DelayPolynomial b;  ///< strictly causal, degree m
  DelayPolynomial c;  ///< monic, degree p
  double sigma2 = 0.0;

  ArmaxParams() = default;
  ArmaxParams(std::vector<double> a_coeffs, std::vector<double> b_coeffs,
              std::vector<double> c_coeffs, double noise_variance)
      : a(DelayPolynomial::monic(std::move(a_coeffs))),
        b(DelayPolynomial::strictly_causal(std::move(b_coeffs))),
        c(DelayPolynomial::monic(std::move(c_coeffs))),
        sigma2(noise_variance) {}

  std::size_t n() const { return a.degree(); }
  std::size_t m() const { return b.degree(); }
  std::size_t p() const { return c.degree(); }

  bool is_finite() const {
    return a.is_finite() && b.is_finite() && c.is_finite() &&
           std::isfinite(sigma2);
  }

  /// Stacked parameter vector [a_1..a_n  b_1..b_m  c_1..c_p].
  Eigen::VectorXd theta() const {
    Eigen::VectorXd t(static_cast<Eigen::Index>(n() + m() + p()));
    Eigen::Index k = 0;
    for (double v : a.coeffs) t[k++] = v;
    for (double v : b.coeffs) t[k++] = v;
    for (double v : c.coeffs) t[k++] = v;
    return t;
  }
};

/// Realization x_{k+1} = A x_k + B1 u_k + B2 w_k, y_k = C x_k + w_k.
struct StateSpaceModel {
  Eigen::MatrixXd A;     ///< n x n
  Eigen::VectorXd B1;    ///< n x 1, input channel
  Eigen::VectorXd B2;    ///< n x 1, noise channel
  Eigen::RowVectorXd C;  ///< 1 x n

  Eigen::Index order() const { return A.rows(); }
};

/// Observable-canonical realization built directly from coefficient
/// vectors (a of length n, b of length m <= n, c of length p <= n):
///
///       [ 0 ... 0  -a_n   ]        [ 0   ]        [ c~_n ]
///   A = [ 1      .  ...   ],  B1 = [ b_m ],  B2 = [ ...  ],  C = [0 ... 0 1]
///       [    .   0  -a_2  ]        [ ... ]        [ c~_1 ]
///       [ 0 ... 1  -a_1   ]        [ b_1 ]
///
/// with c~_i = c_i - a_i and c, a zero-extended to length n.
inline StateSpaceModel observable_canonical(const Eigen::VectorXd& a,
                                            const Eigen::VectorXd& b,
                                            const Eigen::VectorXd& c) {
  const Eigen::Index n = a.size();
  if (b.size() > n || c.size() > n)
    throw DimensionError("observable_canonical: requires n >= m and n >= p");
  StateSpaceModel ss;
  ss.A = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) ss.A(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) ss.A(i, n - 1) = -a[n - 1 - i];
  ss.B1 = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < b.size(); ++i) ss.B1[n - 1 - i] = b[i];
  ss.B2 = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ci = i < c.size() ? c[i] : 0.0;
    ss.B2[n - 1 - i] = ci - a[i];
  }
  ss.C = Eigen::RowVectorXd::Zero(n);
  if (n > 0) ss.C[n - 1] = 1.0;
  return ss;
}

/// Observable-canonical realization of an ARMAX parameter set.
/// Requires n >= m and n >= p.
inline StateSpaceModel to_observable_canonical(const ArmaxParams& params) {
  if (params.n() < params.m() || params.n() < params.p())
    throw DimensionError("to_observable_canonical: requires n >= m and n >= p (n=" +
                         std::to_string(params.n()) + ", m=" + std::to_string(params.m()) +
                         ", p=" + std::to_string(params.p()) + ")");
  const auto vec = [](const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                             static_cast<Eigen::Index>(v.size()));
  };
  return observable_canonical(vec(params.a.coeffs), vec(params.b.coeffs),
                              vec(params.c.coeffs));
}

enum class Channel { input, noise };

/// Markov parameters of the chosen channel, including the direct term:
/// h_0 = 0 for the input channel and 1 for the noise channel (the noise
/// feeds through in y_k = C x_k + w_k), and h_s = C A^{s-1} B for s >= 1.
inline std::vector<double> impulse_response(const StateSpaceModel& model,
                                            Channel channel, std::size_t steps) {
  std::vector<double> h(steps, 0.0);
  if (steps == 0) return h;
  h[0] = channel == Channel::noise ? 1.0 : 0.0;
  Eigen::VectorXd v = channel == Channel::noise ? model.B2 : model.B1;
  for (std::size_t s = 1; s < steps; ++s) {
    h[s] = model.C.size() > 0 ? model.C.dot(v) : 0.0;
    v = model.A * v;
  }
  return h;
}

}  // namespace armax
