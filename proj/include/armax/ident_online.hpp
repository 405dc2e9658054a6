#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "armax/errors.hpp"
#include "armax/ident_offline.hpp"
#include "armax/model.hpp"

namespace armax {

/// Fixed-depth lag buffer over a scalar signal. Index i reads the value i
/// steps back; pre-stream indices read as zero, matching the zero
/// pre-sample convention.
class LagBuffer {
 public:
  LagBuffer() = default;
  explicit LagBuffer(std::size_t depth) : data_(depth, 0.0) {}

  void push(double v) {
    if (data_.empty()) return;
    head_ = (head_ + data_.size() - 1) % data_.size();
    data_[head_] = v;
    if (count_ < data_.size()) ++count_;
  }

  /// Value i steps back (i >= 1); zero beyond depth or before the stream.
  double operator()(std::size_t i) const {
    if (i == 0 || i > count_) return 0.0;
    return data_[(head_ + i - 1) % data_.size()];
  }

  std::size_t depth() const { return data_.size(); }

 private:
  std::vector<double> data_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

/// Recursive instrumental-variable state: the running estimate theta~ of
/// col{a, b}, the inverse-Gram surrogate P, and the sample counter.
struct RecursiveIvState {
  Eigen::VectorXd theta_tilde;
  Eigen::MatrixXd P;
  std::uint64_t k = 0;  ///< index of the last processed sample

  RecursiveIvState() = default;
  RecursiveIvState(std::size_t dim, double p0)
      : theta_tilde(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
        P(p0 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                         static_cast<Eigen::Index>(dim))) {
    if (!(p0 > 0.0))
      throw PreconditionError("RecursiveIvState: p0 must be positive");
  }
};

/// One recursive IV update for sample k = state.k + 1:
///
///   gamma_k  = 1 + (1/k) phi^T P zeta
///   theta~_k = theta~ + (1/k) P zeta gamma_k^-1 (y - phi^T theta~)
///   P_k      = [I - (1/k) P zeta gamma_k^-1 phi^T] (k+1)/k P
///
/// which tracks the solution of the regularized running-average normal
/// equations exactly. A pivot |gamma_k| below 1e-12 rejects the update:
/// the estimate and P are left untouched, the sample is still counted, and
/// a DegeneracyError is thrown for the caller's log.
inline void riv_step(RecursiveIvState& state, const Eigen::VectorXd& zeta,
                     const Eigen::VectorXd& phi, double y) {
  if (zeta.size() != state.theta_tilde.size() ||
      phi.size() != state.theta_tilde.size())
    throw DimensionError("riv_step: regressor/instrument dimension mismatch");
  const double k = static_cast<double>(state.k + 1);
  const Eigen::VectorXd Pz = state.P * zeta;
  const double gamma = 1.0 + phi.dot(Pz) / k;
  if (std::abs(gamma) < 1e-12) {
    ++state.k;
    throw DegeneracyError("riv_step: degenerate pivot gamma_k at sample " +
                          std::to_string(state.k));
  }
  const double innovation = y - phi.dot(state.theta_tilde);
  state.theta_tilde.noalias() += Pz * (innovation / (gamma * k));
  state.P -= Pz * (phi.transpose() * state.P) / (gamma * k);
  state.P *= (k + 1.0) / k;
  ++state.k;
}

/// Online MA value-iteration state: running autocovariances of the IV
/// residual stream plus the short rings the triangular solve and the c /
/// eps^2 updates reach back into.
struct OnlineMaState {
  std::size_t p = 0;
  Eigen::VectorXd r_y;                  ///< r^(k)(0..p)
  std::vector<double> eps2_ring;        ///< eps2_{k-1} .. eps2_{k-p}
  std::vector<Eigen::VectorXd> c_ring;  ///< c^(k-1) .. c^(k-p+1)
  LagBuffer ytilde_ring;                ///< y~_{k-1} .. y~_{k-p}
  std::uint64_t k = 0;

  OnlineMaState() = default;
  /// Initialization folds the k = 0 sample in: r^(0)(0) = y0^2,
  /// eps2_0 = y0^2, the rest zero.
  OnlineMaState(std::size_t order, double ytilde0)
      : p(order),
        r_y(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order) + 1)),
        eps2_ring(order, 0.0),
        c_ring(order > 0 ? order - 1 : 0,
               Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order))),
        ytilde_ring(order) {
    r_y[0] = ytilde0 * ytilde0;
    if (p > 0) eps2_ring[0] = ytilde0 * ytilde0;
    ytilde_ring.push(ytilde0);
  }
};

/// One online MA update for residual y~_k (k = state.k + 1): refresh the
/// running autocovariances, solve the triangular rho system against the c
/// ring, and apply the shared value-iteration update. Total by
/// construction; returns the new (c, eps2).
inline MaViUpdate online_ma_step(OnlineMaState& state, double ytilde_k) {
  const double k = static_cast<double>(state.k + 1);
  const auto p = static_cast<Eigen::Index>(state.p);
  for (Eigen::Index i = 0; i <= p; ++i) {
    const double back = i == 0 ? ytilde_k : state.ytilde_ring(static_cast<std::size_t>(i));
    state.r_y[i] = k / (k + 1.0) * state.r_y[i] + ytilde_k * back / (k + 1.0);
  }
  MaViUpdate update =
      ma_vi_update(state.r_y[0], state.r_y.tail(p), state.eps2_ring, state.c_ring);
  if (state.p > 0) {
    state.eps2_ring.insert(state.eps2_ring.begin(), update.eps2);
    state.eps2_ring.pop_back();
    if (!state.c_ring.empty()) {
      state.c_ring.insert(state.c_ring.begin(), update.c);
      state.c_ring.pop_back();
    }
  }
  state.ytilde_ring.push(ytilde_k);
  ++state.k;
  return update;
}

/// A rejected recursive update, kept for inspection instead of
/// interrupting the stream.
struct StepEvent {
  std::uint64_t k;
  std::string what;
};

/// Fully recursive ARMAX identifier: recursive instrumental variables for
/// col{a, b} composed with the online MA value iteration for c, exactly
/// one pass per sample.
class OnlineIdentifier {
 public:
  OnlineIdentifier() = default;
  OnlineIdentifier(std::size_t n, std::size_t m, std::size_t p, double p0 = 1e3)
      : n_(n), m_(m), p_(p),
        iv_(n + m, p0),
        y_hist_(n + p),
        u_hist_(m),
        e_hist_(p),
        c_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p))) {}

  /// Identifier frozen at a fixed estimate: step() still maintains the
  /// signal histories and the prediction-error ring, but the estimate
  /// never moves. Used when a consumer needs the prediction/realization
  /// machinery around known parameters.
  static OnlineIdentifier with_estimate(std::size_t n, std::size_t m,
                                        std::size_t p,
                                        const Eigen::VectorXd& theta) {
    if (theta.size() != static_cast<Eigen::Index>(n + m + p))
      throw DimensionError("with_estimate: theta size != n + m + p");
    OnlineIdentifier ident(n, m, p);
    ident.iv_.theta_tilde = theta.head(static_cast<Eigen::Index>(n + m));
    ident.c_ = theta.tail(static_cast<Eigen::Index>(p));
    ident.frozen_ = true;
    return ident;
  }

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::size_t p() const { return p_; }
  std::uint64_t samples() const { return k_; }

  const RecursiveIvState& iv() const { return iv_; }
  const OnlineMaState& ma() const { return ma_; }
  const std::vector<StepEvent>& step_log() const { return step_log_; }

  /// Combined estimate theta^(k) = col{theta~^(k), c^(k)}.
  Eigen::VectorXd combined_estimate() const {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(n_ + m_ + p_));
    theta.head(iv_.theta_tilde.size()) = iv_.theta_tilde;
    theta.tail(c_.size()) = c_;
    return theta;
  }

  const Eigen::VectorXd& c_estimate() const { return c_; }
  double eps2() const { return eps2_; }
  double last_prediction() const { return last_yhat_; }
  double last_prediction_error() const { return last_e_; }

  /// Observable-canonical realization assembled from the current
  /// estimate; its matrices converge to the true ones as the estimate
  /// does.
  StateSpaceModel realization() const {
    return observable_canonical(iv_.theta_tilde.head(static_cast<Eigen::Index>(n_)),
                                iv_.theta_tilde.tail(static_cast<Eigen::Index>(m_)), c_);
  }

  /// One pass of the on-line identification loop. Sample 0 is folded into
  /// initialization (it seeds the autocovariance and eps^2 state); from
  /// sample 1 on, the five updates run in order: recursive IV, the IV
  /// residual under the fresh estimate, the autocovariance refresh, the
  /// triangular rho solve, and the c / eps^2 updates. Degenerate IV pivots
  /// are logged and skipped, never thrown to the stream.
  ///
  /// Estimates are emitted from the first sample on; consumers wanting a
  /// settled regressor window should discard the first max(n + p, m)
  /// of them.
  Eigen::VectorXd step(double u_k, double y_k) {
    if (k_ == 0) {
      if (!frozen_) {
        ma_ = OnlineMaState(p_, y_k);
        eps2_ = ma_.r_y[0];
      }
      predict_and_record(y_k);
      y_hist_.push(y_k);
      u_hist_.push(u_k);
      k_ = 1;
      return combined_estimate();
    }
    if (frozen_) {
      predict_and_record(y_k);
      y_hist_.push(y_k);
      u_hist_.push(u_k);
      ++k_;
      return combined_estimate();
    }
    Eigen::VectorXd phi(static_cast<Eigen::Index>(n_ + m_));
    Eigen::VectorXd zeta(static_cast<Eigen::Index>(n_ + m_));
    for (std::size_t i = 1; i <= n_; ++i) {
      phi[i - 1] = -y_hist_(i);
      zeta[i - 1] = -y_hist_(p_ + i);
    }
    for (std::size_t i = 1; i <= m_; ++i) {
      phi[n_ + i - 1] = u_hist_(i);
      zeta[n_ + i - 1] = u_hist_(i);
    }
    try {
      riv_step(iv_, zeta, phi, y_k);
    } catch (const DegeneracyError& err) {
      step_log_.push_back({k_, err.what()});
    }
    const double ytilde = y_k - phi.dot(iv_.theta_tilde);
    const MaViUpdate update = online_ma_step(ma_, ytilde);
    c_ = update.c;
    eps2_ = update.eps2;
    predict_and_record(y_k);
    y_hist_.push(y_k);
    u_hist_.push(u_k);
    ++k_;
    return combined_estimate();
  }

 private:
  /// One-step-ahead prediction under the current combined estimate, with
  /// past prediction errors drawn from this identifier's own ring. The
  /// prediction depends only on lagged signals, so it runs before the
  /// current sample enters the histories.
  void predict_and_record(double y_k) {
    double yhat = 0.0;
    for (std::size_t i = 1; i <= n_; ++i) yhat -= iv_.theta_tilde[i - 1] * y_hist_(i);
    for (std::size_t i = 1; i <= m_; ++i) yhat += iv_.theta_tilde[n_ + i - 1] * u_hist_(i);
    for (std::size_t i = 1; i <= p_; ++i) yhat += c_[i - 1] * e_hist_(i);
    last_yhat_ = yhat;
    last_e_ = y_k - yhat;
    e_hist_.push(last_e_);
  }

  std::size_t n_ = 0, m_ = 0, p_ = 0;
  RecursiveIvState iv_;
  OnlineMaState ma_;
  LagBuffer y_hist_;
  LagBuffer u_hist_;
  LagBuffer e_hist_;
  Eigen::VectorXd c_;
  double eps2_ = 0.0;
  double last_yhat_ = 0.0;
  double last_e_ = 0.0;
  std::uint64_t k_ = 0;
  bool frozen_ = false;
  std::vector<StepEvent> step_log_;
};

/// Free-function spelling of the Algorithm-1 main loop.
inline Eigen::VectorXd algorithm1_step(OnlineIdentifier& ident, double u_k,
                                       double y_k) {
  return ident.step(u_k, y_k);
}

}  // namespace armax
