#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "armax/errors.hpp"
#include "armax/ident_online.hpp"
#include "armax/model.hpp"

namespace armax {

/// Discounted LQR solution: value matrix P, feedback gain K (applied as
/// u = -K x^), the discount, and the fixed-point defect of P.
struct LqrSolution {
  Eigen::MatrixXd P;
  Eigen::RowVectorXd K;
  double gamma = 0.0;
  double residual = 0.0;
};

namespace detail {

inline void require_psd(const Eigen::MatrixXd& M, const char* what,
                        double tol = 1e-9) {
  const Eigen::VectorXd eig =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
          0.5 * (M + M.transpose()))
          .eigenvalues();
  const double scale = std::max(1.0, eig.cwiseAbs().maxCoeff());
  if (eig.minCoeff() < -tol * scale)
    throw PreconditionError(std::string(what) + ": matrix not PSD");
}

inline double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return 0.0;
  return Eigen::EigenSolver<Eigen::MatrixXd>(M, false)
      .eigenvalues()
      .cwiseAbs()
      .maxCoeff();
}

}  // namespace detail

/// Feedback gain for a given value matrix:
///   K = (B1^T P B1 + gamma^-1 R)^-1 B1^T P A.
/// The control is applied with a minus sign, u = -K x^.
inline Eigen::RowVectorXd lqr_gain(const Eigen::MatrixXd& P,
                                   const Eigen::MatrixXd& A,
                                   const Eigen::VectorXd& B1, double R,
                                   double gamma) {
  const double inner = B1.dot(P * B1) + R / gamma;
  if (std::abs(inner) < 1e-12)
    throw SolverError("lqr_gain: singular inner matrix", std::abs(inner));
  return (B1.transpose() * P * A) / inner;
}

namespace detail {

/// One sweep of the discounted Riccati value iteration:
///   P+ = Q + gamma {A^T P A - A^T P B1 (B1^T P B1 + gamma^-1 R)^-1 B1^T P A}.
inline Eigen::MatrixXd dare_sweep(const Eigen::MatrixXd& P,
                                  const Eigen::MatrixXd& A,
                                  const Eigen::VectorXd& B1,
                                  const Eigen::MatrixXd& Q, double R,
                                  double gamma) {
  const double inner = B1.dot(P * B1) + R / gamma;
  if (std::abs(inner) < 1e-12)
    throw SolverError("dare sweep: singular inner matrix", std::abs(inner));
  const Eigen::RowVectorXd BPA = B1.transpose() * P * A;
  Eigen::MatrixXd next =
      Q + gamma * (A.transpose() * P * A -
                   (A.transpose() * P * B1) * BPA / inner);
  return 0.5 * (next + next.transpose());
}

}  // namespace detail

/// Solves the discounted DARE
///   P = Q + gamma {A^T P A - A^T P B1 (B1^T P B1 + gamma^-1 R)^-1 B1^T P A}
/// by value iteration from P0, asserting the iterate stays PSD along the
/// way. Requires Q PSD, R > 0, 0 < gamma < 1, P0 PD.
inline LqrSolution dare_solve(const Eigen::MatrixXd& A,
                              const Eigen::VectorXd& B1,
                              const Eigen::MatrixXd& Q, double R, double gamma,
                              const Eigen::MatrixXd& P0, double tol = 1e-12,
                              std::size_t max_iter = 100000) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw PreconditionError("dare_solve: gamma must lie in (0, 1)");
  if (!(R > 0.0)) throw PreconditionError("dare_solve: R must be positive");
  detail::require_psd(Q, "dare_solve Q");
  detail::require_psd(P0, "dare_solve P0");

  Eigen::MatrixXd P = P0;
  std::size_t it = 0;
  double diff = 0.0;
  for (; it < max_iter; ++it) {
    const Eigen::MatrixXd next = detail::dare_sweep(P, A, B1, Q, R, gamma);
    detail::require_psd(next, "dare_solve iterate");
    diff = (next - P).lpNorm<Eigen::Infinity>();
    P = next;
    if (diff < tol) break;
  }
  if (it == max_iter)
    throw SolverError("dare_solve: no convergence in " +
                          std::to_string(max_iter) + " iterations",
                      diff);
  LqrSolution sol;
  sol.P = P;
  sol.K = lqr_gain(P, A, B1, R, gamma);
  sol.gamma = gamma;
  sol.residual =
      (detail::dare_sweep(P, A, B1, Q, R, gamma) - P).lpNorm<Eigen::Infinity>();
  return sol;
}

/// Blocks of the quadratic state-action value
///   Q*(x, u) = [x; u]^T [[H11, H12], [H12^T, H22]] [x; u] + const,
/// with H11 = Q + gamma A^T P A, H12 = gamma A^T P B1,
/// H22 = gamma B1^T P B1 + R.
struct QMatrix {
  Eigen::MatrixXd H11;
  Eigen::VectorXd H12;
  double H22 = 0.0;

  /// Minimizer of the quadratic over u, as a feedback row: u = -H22^-1 H12^T x.
  Eigen::RowVectorXd minimizer_gain() const { return H12.transpose() / H22; }

  /// Schur complement H11 - H12 H22^-1 H12^T; equals P at the DARE solution.
  Eigen::MatrixXd schur_complement() const {
    return H11 - H12 * H12.transpose() / H22;
  }
};

inline QMatrix q_matrix(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A,
                        const Eigen::VectorXd& B1, const Eigen::MatrixXd& Q,
                        double R, double gamma) {
  QMatrix h;
  h.H11 = Q + gamma * A.transpose() * P * A;
  h.H12 = gamma * A.transpose() * P * B1;
  h.H22 = gamma * B1.dot(P * B1) + R;
  return h;
}

/// Value of the uncontrolled stochastic system x+ = A x + B w under the
/// discounted quadratic cost: V(x) = x^T P x + offset with
///   P = Q_eff + gamma A^T P A,     offset = gamma sigma2 / (1 - gamma) B^T P B.
/// Requires sqrt(gamma) A stable.
inline std::pair<Eigen::MatrixXd, double> evaluate_value(
    const Eigen::MatrixXd& A_closed, const Eigen::MatrixXd& Q_eff,
    const Eigen::VectorXd& B, double sigma2, double gamma, double tol = 1e-12,
    std::size_t max_iter = 1000000) {
  if (detail::spectral_radius(std::sqrt(gamma) * A_closed) >= 1.0)
    throw PreconditionError("evaluate_value: sqrt(gamma) A must be stable");
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(A_closed.rows(), A_closed.cols());
  for (std::size_t it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXd next =
        Q_eff + gamma * A_closed.transpose() * P * A_closed;
    const double diff = (next - P).lpNorm<Eigen::Infinity>();
    P = next;
    if (diff < tol) break;
  }
  const double offset = gamma * sigma2 / (1.0 - gamma) * B.dot(P * B);
  return {0.5 * (P + P.transpose()), offset};
}

/// Running state of the model-free LQG recursion.
struct LqgState {
  Eigen::MatrixXd P;
  Eigen::RowVectorXd K;
  std::uint64_t k = 0;
  std::size_t rejected = 0;  ///< sweeps skipped on a singular inner matrix

  LqgState() = default;
  /// P0 defaults to the identity; it must be PD.
  explicit LqgState(Eigen::Index n)
      : P(Eigen::MatrixXd::Identity(n, n)), K(Eigen::RowVectorXd::Zero(n)) {}
  LqgState(const Eigen::MatrixXd& P0, Eigen::Index n)
      : P(P0), K(Eigen::RowVectorXd::Zero(n)) {
    detail::require_psd(P0, "LqgState P0");
  }
};

/// One step of model-free LQG: assemble (A, B1) from the identifier's
/// current estimate, run a single Riccati sweep on P, refresh the gain,
/// and return the control u = -K x^. A singular inner matrix rejects the
/// sweep and reuses the previous gain; the rejection is counted.
inline std::pair<double, LqgState> model_free_lqg_step(
    const LqgState& lqg, const OnlineIdentifier& ident,
    const Eigen::VectorXd& x_hat, const Eigen::MatrixXd& Q, double R,
    double gamma) {
  const StateSpaceModel ss = ident.realization();
  LqgState next = lqg;
  try {
    next.P = detail::dare_sweep(lqg.P, ss.A, ss.B1, Q, R, gamma);
    detail::require_psd(next.P, "model_free_lqg_step P");
    next.K = lqr_gain(next.P, ss.A, ss.B1, R, gamma);
  } catch (const SolverError&) {
    next.P = lqg.P;
    next.K = lqg.K;
    ++next.rejected;
  } catch (const PreconditionError&) {
    next.P = lqg.P;
    next.K = lqg.K;
    ++next.rejected;
  }
  ++next.k;
  const double u = -next.K.dot(x_hat);
  return {u, std::move(next)};
}

}  // namespace armax
