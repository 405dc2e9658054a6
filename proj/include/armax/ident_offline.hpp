#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "armax/errors.hpp"
#include "armax/model.hpp"
#include "armax/polynomial.hpp"
#include "armax/stats.hpp"
#include "armax/trajectory.hpp"

namespace armax {

/// Variance guard for the zero branch of the MA update: a past prediction
/// error power at or below this is treated as zero.
inline constexpr double kEps2Min = 1e-12;

/// Reciprocal-condition threshold below which a Gram matrix is declared
/// numerically singular (insufficient excitation).
inline constexpr double kRcondMin = 1e-10;

/// Iterate-to-iterate tolerance that declares the MA value iteration
/// converged.
inline constexpr double kMaViTol = 1e-10;

/// Trace of the moving-average value iteration: one entry per iterate.
struct MaViTrace {
  std::vector<Eigen::VectorXd> c_estimates;
  std::vector<double> eps2;
  Eigen::VectorXd rho;  ///< rho vector of the last iterate
  bool converged = false;

  const Eigen::VectorXd& final_c() const { return c_estimates.back(); }
  double final_eps2() const { return eps2.back(); }
};

/// Back-substitution of the unit-upper-triangular system tying rho(i) =
/// E[y_k e_{k-i}] to the output autocovariances:
///
///   rho(i) + sum_{j=1}^{p-i} c_j^{(k-i)} rho(i+j) = r(i),   i = 1..p,
///
/// where row i draws on the estimate from i steps back. `c_history` is
/// ordered most recent first (c^{(k-1)}, c^{(k-2)}, ...); missing entries
/// count as zero. `r_tail` holds r(1)..r(p).
inline Eigen::VectorXd solve_rho_system(
    const std::vector<Eigen::VectorXd>& c_history,
    const Eigen::VectorXd& r_tail) {
  const Eigen::Index p = r_tail.size();
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(p);
  const auto hist = [&](Eigen::Index age, Eigen::Index j) -> double {
    // c_j^{(k-age)}, 1-based j
    if (age - 1 >= static_cast<Eigen::Index>(c_history.size())) return 0.0;
    const Eigen::VectorXd& c = c_history[static_cast<std::size_t>(age - 1)];
    return j - 1 < c.size() ? c[j - 1] : 0.0;
  };
  for (Eigen::Index i = p; i >= 1; --i) {
    double acc = r_tail[i - 1];
    for (Eigen::Index j = 1; j <= p - i; ++j) acc -= hist(i, j) * rho[i + j - 1];
    rho[i - 1] = acc;
  }
  return rho;
}

struct MaViUpdate {
  Eigen::VectorXd rho;
  Eigen::VectorXd c;
  double eps2 = 0.0;
};

/// One sweep of the MA value-iteration arithmetic shared by the offline
/// and online paths: solve for rho, form c_i = rho(i) / eps2_{k-i} (zero
/// branch when the denominator is not positive), then update the
/// prediction-error power
///   eps2_k = r(0) - sum_i c_i^2 eps2_{k-i}
/// clamped at zero so the recursion stays total on empirical data.
/// `eps2_history` is ordered most recent first, like `c_history`.
inline MaViUpdate ma_vi_update(double r0, const Eigen::VectorXd& r_tail,
                               const std::vector<double>& eps2_history,
                               const std::vector<Eigen::VectorXd>& c_history) {
  const Eigen::Index p = r_tail.size();
  MaViUpdate out;
  out.rho = solve_rho_system(c_history, r_tail);
  out.c = Eigen::VectorXd::Zero(p);
  double eps2 = r0;
  for (Eigen::Index i = 1; i <= p; ++i) {
    const double past =
        i - 1 < static_cast<Eigen::Index>(eps2_history.size())
            ? eps2_history[static_cast<std::size_t>(i - 1)]
            : 0.0;
    const double ci = past > kEps2Min ? out.rho[i - 1] / past : 0.0;
    out.c[i - 1] = ci;
    eps2 -= ci * ci * past;
  }
  out.eps2 = std::max(eps2, 0.0);
  return out;
}

/// Offline MA identification by value iteration from the autocovariances
/// r_y(0)..r_y(p). Iterates from the all-zero initialization until the c
/// iterate settles (infinity norm below kMaViTol) or the budget runs out;
/// the full trace is returned either way.
inline MaViTrace ma_identify_offline(const std::vector<double>& r_y,
                                     std::size_t p, std::size_t iterations) {
  if (iterations == 0)
    throw DimensionError("ma_identify_offline: iterations must be >= 1");
  if (r_y.size() < p + 1)
    throw DimensionError("ma_identify_offline: need r_y(0..p)");
  for (double v : r_y)
    if (!std::isfinite(v))
      throw PreconditionError("ma_identify_offline: nonfinite autocorrelation");

  const Eigen::VectorXd r_tail = Eigen::Map<const Eigen::VectorXd>(
      r_y.data() + 1, static_cast<Eigen::Index>(p));
  MaViTrace trace;
  std::vector<Eigen::VectorXd> c_history;  // most recent first
  std::vector<double> eps2_history;
  for (std::size_t k = 0; k < iterations; ++k) {
    const MaViUpdate step = ma_vi_update(r_y[0], r_tail, eps2_history, c_history);
    trace.c_estimates.push_back(step.c);
    trace.eps2.push_back(step.eps2);
    trace.rho = step.rho;
    c_history.insert(c_history.begin(), step.c);
    eps2_history.insert(eps2_history.begin(), step.eps2);
    if (k >= 1) {
      const double diff =
          (trace.c_estimates[k] - trace.c_estimates[k - 1]).lpNorm<Eigen::Infinity>();
      if (diff < kMaViTol) {
        trace.converged = true;
        break;
      }
    }
  }
  return trace;
}

/// Instrumental-variable estimate of the ARX part col{a, b}.
struct IvEstimate {
  Eigen::VectorXd theta_tilde;  ///< col{a_1..a_n, b_1..b_m}
  Eigen::MatrixXd R;            ///< E[zeta phi~^T], empirical
  Eigen::VectorXd r;            ///< E[zeta y], empirical
  double condition = 0.0;       ///< 2-norm condition number of R
  std::size_t n = 0, m = 0;

  Eigen::VectorXd a() const { return theta_tilde.head(static_cast<Eigen::Index>(n)); }
  Eigen::VectorXd b() const { return theta_tilde.tail(static_cast<Eigen::Index>(m)); }
};

namespace detail {

inline double lag(const std::vector<double>& x, std::size_t k, std::size_t i) {
  return i <= k ? x[k - i] : 0.0;
}

/// Lagged regressor phi~_k = [-y_{k-1}..-y_{k-n}  u_{k-1}..u_{k-m}].
inline Eigen::VectorXd arx_regressor(const std::vector<double>& y,
                                     const std::vector<double>& u,
                                     std::size_t k, std::size_t n,
                                     std::size_t m) {
  Eigen::VectorXd phi(static_cast<Eigen::Index>(n + m));
  for (std::size_t i = 1; i <= n; ++i) phi[i - 1] = -lag(y, k, i);
  for (std::size_t i = 1; i <= m; ++i) phi[n + i - 1] = lag(u, k, i);
  return phi;
}

}  // namespace detail

/// Instrumental-variable solve of the ARX part from one trajectory. The
/// instrument is the extra-lagged output block
///   zeta_k = F(z) [-y_{k-p-1} .. -y_{k-p-n}  u_{k-1} .. u_{k-m}]^T,
/// uncorrelated with the moving-average equation noise, so the empirical
/// normal equations R theta~ = r estimate col{a, b} consistently. F
/// defaults to 1; it must be monic with a stable inverse.
inline IvEstimate iv_estimate_arx(const Trajectory& traj, std::size_t n,
                                  std::size_t m, std::size_t p,
                                  const DelayPolynomial& filter =
                                      DelayPolynomial::monic({})) {
  const std::size_t d = n + m;
  if (d == 0) throw DimensionError("iv_estimate_arx: n + m must be positive");
  const std::size_t T = traj.length();
  if (T <= p + n)
    throw DimensionError("iv_estimate_arx: trajectory too short for lags up to p+n");
  if (filter.kind != DelayPolynomial::Kind::monic)
    throw PreconditionError("iv_estimate_arx: filter must be monic");
  if (!polynomial_is_stable(filter, 1e-9))
    throw PreconditionError("iv_estimate_arx: filter inverse must be stable");

  // Instrument entries as whole sequences so the filter can run as a
  // causal recursion with zero initial state.
  std::vector<std::vector<double>> zeta_rows(d);
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> base(T, 0.0);
    for (std::size_t k = 0; k < T; ++k)
      base[k] = j < n ? -detail::lag(traj.y, k, p + 1 + j)
                      : detail::lag(traj.u, k, j - n + 1);
    zeta_rows[j] = filter.degree() > 0 ? filter.filter(base) : std::move(base);
  }

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                            static_cast<Eigen::Index>(d));
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  Eigen::VectorXd zeta(static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < T; ++k) {
    for (std::size_t j = 0; j < d; ++j) zeta[static_cast<Eigen::Index>(j)] = zeta_rows[j][k];
    const Eigen::VectorXd phi = detail::arx_regressor(traj.y, traj.u, k, n, m);
    R.noalias() += zeta * phi.transpose();
    r.noalias() += zeta * traj.y[k];
  }
  R /= static_cast<double>(T);
  r /= static_cast<double>(T);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()[0];
  const double smin = svd.singularValues()[svd.singularValues().size() - 1];
  if (!(smax > 0.0) || smin / smax < kRcondMin)
    throw ExcitationError("iv_estimate_arx: instrument Gram matrix numerically singular");
  IvEstimate est;
  est.theta_tilde = svd.solve(r);
  est.R = std::move(R);
  est.r = std::move(r);
  est.condition = smax / smin;
  est.n = n;
  est.m = m;
  return est;
}

/// Assembles R_y = E[zeta_k zeta_{k+p}^T] for the ARMA case (b = 0) from
/// autocovariances: entry (i, j) = r_y(p + i - j), i, j = 0..n-1, reading
/// r(-l) as r(l). Returns the matrix and a nonsingularity flag from the
/// kRcondMin condition check.
inline std::pair<Eigen::MatrixXd, bool> arma_instrument_gram(
    const std::vector<double>& r_y, std::size_t n, std::size_t p) {
  if (n == 0) throw DimensionError("arma_instrument_gram: n must be >= 1");
  if (r_y.size() < p + n)
    throw DimensionError("arma_instrument_gram: need lags up to p+n-1, got " +
                         std::to_string(r_y.size() ? r_y.size() - 1 : 0));
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd Ry(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i)
    for (Eigen::Index j = 0; j < ni; ++j) {
      const auto lagidx = std::abs(static_cast<long>(p) + i - j);
      Ry(i, j) = r_y[static_cast<std::size_t>(lagidx)];
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ry);
  const double smax = svd.singularValues()[0];
  const double smin = svd.singularValues()[svd.singularValues().size() - 1];
  const bool nonsingular = smax > 0.0 && smin / smax >= kRcondMin;
  return {Ry, nonsingular};
}

/// Residuals y~_k = y_k - phi~_k^T theta~ with zero pre-samples. For the
/// true theta~ these follow the pure MA process c(z) w_k.
inline std::vector<double> residual_series(const Trajectory& traj,
                                           const Eigen::VectorXd& theta_tilde,
                                           std::size_t n, std::size_t m) {
  if (theta_tilde.size() != static_cast<Eigen::Index>(n + m))
    throw DimensionError("residual_series: theta_tilde size != n + m");
  std::vector<double> out(traj.length(), 0.0);
  for (std::size_t k = 0; k < traj.length(); ++k)
    out[k] = traj.y[k] -
             detail::arx_regressor(traj.y, traj.u, k, n, m).dot(theta_tilde);
  return out;
}

inline std::vector<double> residual_series(const Trajectory& traj,
                                           const IvEstimate& est) {
  return residual_series(traj, est.theta_tilde, est.n, est.m);
}

/// Pseudo-linear-regression bootstrapping baseline: each sweep regenerates
/// the residual sequence from the previous estimate and re-solves the
/// least-squares normal equations. Policy iteration in contrast to the
/// value-iteration MA scheme; kept as a comparison baseline, with no
/// convergence guarantee.
inline Eigen::VectorXd plr_bootstrap(const Trajectory& traj, std::size_t n,
                                     std::size_t m, std::size_t p,
                                     std::size_t sweeps) {
  if (sweeps == 0) throw DimensionError("plr_bootstrap: sweeps must be >= 1");
  const std::size_t d = n + m + p;
  if (d == 0) throw DimensionError("plr_bootstrap: n + m + p must be positive");
  const std::size_t T = traj.length();
  const auto di = static_cast<Eigen::Index>(d);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(di);

  std::vector<double> e(T, 0.0);
  Eigen::VectorXd phi(di);
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(di, di);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(di);
    for (std::size_t k = 0; k < T; ++k) {
      for (std::size_t i = 1; i <= n; ++i) phi[i - 1] = -detail::lag(traj.y, k, i);
      for (std::size_t i = 1; i <= m; ++i) phi[n + i - 1] = detail::lag(traj.u, k, i);
      for (std::size_t i = 1; i <= p; ++i) phi[n + m + i - 1] = detail::lag(e, k, i);
      e[k] = traj.y[k] - phi.dot(theta);  // residual under the previous estimate
      M.noalias() += phi * phi.transpose();
      v.noalias() += phi * traj.y[k];
    }
    M /= static_cast<double>(T);
    v /= static_cast<double>(T);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()[0];
    const double smin = svd.singularValues()[svd.singularValues().size() - 1];
    if (!(smax > 0.0) || smin / smax < kRcondMin)
      throw ExcitationError("plr_bootstrap: normal equations numerically singular");
    theta = svd.solve(v);
  }
  return theta;
}

/// Full offline ARMAX identification with the trace retained.
struct OfflineIdentification {
  ArmaxParams params;
  Eigen::VectorXd theta_tilde;
  double condition = 0.0;
  MaViTrace ma_trace;  ///< empty when p = 0
};

/// Offline pipeline: instrumental variables for the ARX part, residual
/// formation, autocovariance of the residuals, then MA value iteration.
/// The noise variance estimate is the final prediction-error power (or
/// r~(0) when p = 0).
inline OfflineIdentification armax_identify_offline_full(
    const Trajectory& traj, std::size_t n, std::size_t m, std::size_t p,
    std::size_t vi_iterations) {
  OfflineIdentification out;
  std::vector<double> ytilde;
  if (n + m > 0) {
    const IvEstimate est = iv_estimate_arx(traj, n, m, p);
    out.theta_tilde = est.theta_tilde;
    out.condition = est.condition;
    ytilde = residual_series(traj, est);
  } else {
    out.theta_tilde = Eigen::VectorXd(0);
    ytilde = traj.y;
  }
  const std::vector<double> r = autocorrelation(ytilde, p);
  std::vector<double> c_coeffs;
  double sigma2 = r[0];
  if (p > 0) {
    out.ma_trace = ma_identify_offline(r, p, vi_iterations);
    const Eigen::VectorXd& c = out.ma_trace.final_c();
    c_coeffs.assign(c.data(), c.data() + c.size());
    sigma2 = out.ma_trace.final_eps2();
  }
  std::vector<double> a_coeffs(out.theta_tilde.data(), out.theta_tilde.data() + n);
  std::vector<double> b_coeffs(out.theta_tilde.data() + n,
                               out.theta_tilde.data() + n + m);
  out.params = ArmaxParams(std::move(a_coeffs), std::move(b_coeffs),
                           std::move(c_coeffs), sigma2);
  return out;
}

inline ArmaxParams armax_identify_offline(const Trajectory& traj, std::size_t n,
                                          std::size_t m, std::size_t p,
                                          std::size_t vi_iterations) {
  return armax_identify_offline_full(traj, n, m, p, vi_iterations).params;
}

}  // namespace armax
