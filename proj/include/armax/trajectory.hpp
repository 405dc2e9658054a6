#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "armax/errors.hpp"
#include "armax/model.hpp"
#include "armax/random.hpp"

namespace armax {

/// One simulated or recorded input/output record. The hidden truth (w and
/// the canonical state x) is carried only when the producer recorded it.
struct Trajectory {
  std::vector<double> u;
  std::vector<double> y;
  std::optional<std::vector<double>> w;
  std::optional<std::vector<Eigen::VectorXd>> x;
  std::uint64_t seed = 0;

  std::size_t length() const { return y.size(); }
};

struct SimulateOptions {
  bool with_truth = false;
  /// Samples simulated and discarded before k = 0, to start near
  /// stationarity. The zero pre-sample convention applies before the
  /// burn-in window itself.
  std::size_t burn_in = 0;
};

/// Simulates a(z) y_k = b(z) u_k + c(z) w_k for k = 0..horizon-1 with zero
/// pre-samples and w drawn from the counter-based Gaussian stream of
/// `seed`, so identical arguments reproduce the trajectory bit for bit.
///
/// `input` must cover burn_in + horizon samples; the first burn_in of them
/// drive the discarded transient. When truth is requested the canonical
/// state of the Eq-style realization is rolled alongside (requires
/// n >= m, n >= p).
inline Trajectory simulate_armax(const ArmaxParams& params,
                                 const std::vector<double>& input,
                                 std::size_t horizon, std::uint64_t seed,
                                 const SimulateOptions& opts = {}) {
  if (!params.is_finite())
    throw InvalidModelError("simulate_armax: nonfinite parameter");
  if (horizon < 1) throw DimensionError("simulate_armax: horizon must be >= 1");
  const std::size_t total = opts.burn_in + horizon;
  if (input.size() < total)
    throw DimensionError("simulate_armax: input shorter than burn_in + horizon");

  const std::size_t n = params.n(), m = params.m(), p = params.p();
  const RandomStream noise = make_stream(seed, StreamTag::process_noise);
  const double sigma = std::sqrt(params.sigma2);

  std::vector<double> w(total), y(total);
  for (std::size_t k = 0; k < total; ++k) w[k] = sigma * noise.normal_at(k);
  for (std::size_t k = 0; k < total; ++k) {
    double acc = w[k];
    for (std::size_t i = 1; i <= n && i <= k; ++i)
      acc -= params.a.coeffs[i - 1] * y[k - i];
    for (std::size_t i = 1; i <= m && i <= k; ++i)
      acc += params.b.coeffs[i - 1] * input[k - i];
    for (std::size_t i = 1; i <= p && i <= k; ++i)
      acc += params.c.coeffs[i - 1] * w[k - i];
    y[k] = acc;
  }

  Trajectory traj;
  traj.seed = seed;
  traj.u.assign(input.begin() + opts.burn_in, input.begin() + total);
  traj.y.assign(y.begin() + opts.burn_in, y.begin() + total);
  if (opts.with_truth) {
    const StateSpaceModel ss = to_observable_canonical(params);
    std::vector<Eigen::VectorXd> xs(horizon);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(ss.order());
    for (std::size_t k = 0; k < total; ++k) {
      if (k >= opts.burn_in) xs[k - opts.burn_in] = x;
      x = ss.A * x + ss.B1 * input[k] + ss.B2 * w[k];
    }
    traj.w = std::vector<double>(w.begin() + opts.burn_in, w.begin() + total);
    traj.x = std::move(xs);
  }
  return traj;
}

}  // namespace armax
