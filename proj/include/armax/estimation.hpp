#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <tuple>

#include "armax/errors.hpp"
#include "armax/ident_online.hpp"
#include "armax/model.hpp"
#include "armax/polynomial.hpp"

namespace armax {

/// Joint second moments of (process noise w, measurement noise v):
/// E[[w; v][w; v]^T] = [[Q, S], [S^T, R]].
struct NoiseCovariance {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd S;
  Eigen::MatrixXd R;

  static NoiseCovariance scalar(double q, double s, double r) {
    NoiseCovariance cov;
    cov.Q = Eigen::MatrixXd::Constant(1, 1, q);
    cov.S = Eigen::MatrixXd::Constant(1, 1, s);
    cov.R = Eigen::MatrixXd::Constant(1, 1, r);
    return cov;
  }

  /// White ARMAX noise entering both channels: Q = S = R = sigma2.
  static NoiseCovariance armax(double sigma2) {
    return scalar(sigma2, sigma2, sigma2);
  }

  /// Joint block matrix PSD up to `tol` times its largest eigenvalue.
  bool joint_psd(double tol = 1e-10) const {
    const Eigen::Index q = Q.rows(), r = R.rows();
    Eigen::MatrixXd joint(q + r, q + r);
    joint << Q, S, S.transpose(), R;
    joint = 0.5 * (joint + joint.transpose()).eval();
    const Eigen::VectorXd eig =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(joint).eigenvalues();
    const double scale = std::max(1.0, eig.cwiseAbs().maxCoeff());
    return eig.minCoeff() >= -tol * scale;
  }
};

/// Steady-state observer gain and error covariance.
struct ObserverSolution {
  Eigen::VectorXd L;      ///< n x 1
  Eigen::MatrixXd Sigma;  ///< n x n, symmetric PSD
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Solves the steady-state filtering algebraic Riccati equation
///   Sigma = A Sigma A^T - G (C Sigma C^T + R)^-1 G^T + B2 Q B2^T,
///   G = A Sigma C^T + B2 S,   L = G (C Sigma C^T + R)^-1,
/// by plain
/// fixed-point iteration from Sigma = 0 and returns the optimal observer
/// gain with the converged error covariance. Throws when the innovation
/// covariance degenerates or the iterate fails to settle within
/// `max_iter`.
inline ObserverSolution solve_estimation_are(const StateSpaceModel& model,
                                             const NoiseCovariance& noise,
                                             double tol = 1e-10,
                                             std::size_t max_iter = 100000) {
  const Eigen::Index n = model.order();
  Eigen::MatrixXd Sigma = Eigen::MatrixXd::Zero(n, n);
  const auto rhs = [&](const Eigen::MatrixXd& S,
                       Eigen::MatrixXd* gain_t) -> Eigen::MatrixXd {
    const Eigen::MatrixXd G =
        model.A * S * model.C.transpose() + model.B2 * noise.S;
    Eigen::MatrixXd innov = model.C * S * model.C.transpose() + noise.R;
    innov = 0.5 * (innov + innov.transpose()).eval();
    const Eigen::VectorXd eig =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(innov).eigenvalues();
    if (eig.cwiseAbs().minCoeff() <= 1e-12 * std::max(1.0, eig.cwiseAbs().maxCoeff()))
      throw SolverError("solve_estimation_are: singular innovation covariance", 0.0);
    const Eigen::MatrixXd GT_solved = innov.ldlt().solve(G.transpose());
    if (gain_t) *gain_t = GT_solved;
    return model.A * S * model.A.transpose() - G * GT_solved +
           model.B2 * noise.Q * model.B2.transpose();
  };
  std::size_t it = 0;
  double diff = 0.0;
  for (; it < max_iter; ++it) {
    Eigen::MatrixXd next = rhs(Sigma, nullptr);
    next = 0.5 * (next + next.transpose()).eval();
    diff = (next - Sigma).lpNorm<Eigen::Infinity>();
    Sigma = std::move(next);
    if (diff < tol) break;
  }
  if (it == max_iter)
    throw SolverError("solve_estimation_are: no convergence in " +
                          std::to_string(max_iter) + " iterations",
                      diff);
  Eigen::MatrixXd gain_t;
  const Eigen::MatrixXd check = rhs(Sigma, &gain_t);
  ObserverSolution sol;
  sol.L = gain_t.transpose().col(0);
  sol.Sigma = Sigma;
  sol.iterations = it + 1;
  sol.residual = (check - Sigma).lpNorm<Eigen::Infinity>();
  return sol;
}

/// State of a running observer.
struct EstimatorState {
  Eigen::VectorXd x_hat;
  std::uint64_t k = 0;

  EstimatorState() = default;
  explicit EstimatorState(Eigen::Index n)
      : x_hat(Eigen::VectorXd::Zero(n)) {}
};

/// One step of the steady-state Kalman filter:
/// x^_{k+1} = A x^_k + B1 u_k + L (y_k - C x^_k).
inline EstimatorState kalman_step(const EstimatorState& state,
                                  const StateSpaceModel& model,
                                  const Eigen::VectorXd& L, double u, double y) {
  EstimatorState next;
  next.x_hat = model.A * state.x_hat + model.B1 * u +
               L * (y - model.C.dot(state.x_hat));
  next.k = state.k + 1;
  return next;
}

/// Optimal observer gain of the observable-canonical realization: L = B2.
/// Requires n >= m, n >= p and stable c(z); with that gain the estimation
/// error covariance contracts through (A - B2 C), whose spectrum is the
/// zeros of c(z), all the way to zero.
inline Eigen::VectorXd canonical_observer_gain(const ArmaxParams& params) {
  if (!polynomial_is_stable(params.c))
    throw PreconditionError("canonical_observer_gain: c(z) must be stable");
  return to_observable_canonical(params).B2;
}

/// Error-covariance propagation under the canonical gain:
/// Sigma+ = (A - B2 C) Sigma (A - B2 C)^T.
inline Eigen::MatrixXd error_cov_step(const Eigen::MatrixXd& Sigma,
                                      const StateSpaceModel& model) {
  const Eigen::MatrixXd closed = model.A - model.B2 * model.C;
  return closed * Sigma * closed.transpose();
}

/// One step of model-free state estimation: advance the identifier on
/// (u_k, y_k), read its one-step prediction and prediction error, and
/// propagate the estimate through the time-varying canonical realization
/// assembled from the current parameter estimate:
/// x^_{k+1} = A^(k) x^_k + B1^(k) u_k + B2^(k) e_k.
/// Returns the advanced state together with (e_k, y^_k).
inline std::tuple<EstimatorState, double, double> model_free_estimator_step(
    OnlineIdentifier& ident, const EstimatorState& state, double u_k,
    double y_k) {
  if (state.x_hat.size() != static_cast<Eigen::Index>(ident.n()))
    throw DimensionError("model_free_estimator_step: state dimension != n");
  ident.step(u_k, y_k);
  const double e_k = ident.last_prediction_error();
  const double y_hat = ident.last_prediction();
  const StateSpaceModel ss = ident.realization();
  EstimatorState next;
  next.x_hat = ss.A * state.x_hat + ss.B1 * u_k + ss.B2 * e_k;
  next.k = state.k + 1;
  return {std::move(next), e_k, y_hat};
}

}  // namespace armax
