#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "armax/analytic.hpp"
#include "armax/estimation.hpp"
#include "armax/harness.hpp"
#include "armax/ident_offline.hpp"
#include "armax/ident_online.hpp"
#include "armax/lqg.hpp"
#include "armax/model.hpp"
#include "armax/stats.hpp"
#include "armax/trajectory.hpp"

// Verification battery: analytic golden values plus seeded Monte Carlo at
// desk scale, shared between the acceptance test binary and the CLI
// `bench` subcommand. Every tolerance is pinned here.

namespace armax::acceptance {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

/// Random coefficients of a monic delay polynomial with all zeros of
/// modulus below max_radius: conjugate pairs plus one real root when the
/// degree is odd, multiplied out to real coefficients.
inline std::vector<double> random_stable_coeffs(const RandomStream& stream,
                                                std::uint64_t& counter,
                                                std::size_t degree,
                                                double max_radius = 0.9) {
  std::vector<std::complex<double>> roots;
  std::size_t left = degree;
  if (left % 2 == 1) {
    roots.emplace_back(max_radius * (2.0 * stream.uniform_at(counter++) - 1.0), 0.0);
    --left;
  }
  while (left > 0) {
    const double radius = max_radius * std::sqrt(stream.uniform_at(counter++));
    const double angle = 2.0 * std::numbers::pi * stream.uniform_at(counter++);
    const std::complex<double> z = std::polar(radius, angle);
    roots.push_back(z);
    roots.push_back(std::conj(z));
    left -= 2;
  }
  // prod (z - r_i) = z^d + p_1 z^{d-1} + ... + p_d
  std::vector<std::complex<double>> poly{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= poly[i] * r;
    }
    poly = std::move(next);
  }
  std::vector<double> coeffs(degree);
  for (std::size_t i = 0; i < degree; ++i) coeffs[i] = poly[i + 1].real();
  return coeffs;
}

inline ExperimentConfig armax211_config(std::size_t horizon, std::size_t seeds) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentConfig::Kind::identify_online;
  cfg.model = ArmaxParams({-1.1, 0.3}, {1.0}, {0.4}, 1.0);
  cfg.input.kind = InputSpec::Kind::white;
  cfg.input.variance = 1.0;
  cfg.horizon = horizon;
  cfg.seeds.clear();
  for (std::uint64_t s = 1; s <= seeds; ++s) cfg.seeds.push_back(s);
  return cfg;
}

}  // namespace detail

/// Example-pitfall golden values: Sigma = (sqrt(5)-1)/2 and L = Sigma for
/// the unit realization; L = 1 and Sigma = 0 for the alpha-scaled one.
inline CriterionResult criterion1_example_golden() {
  const auto start = detail::Clock::now();
  CriterionResult res{1, "estimation ARE golden values", false, "", 0.0};

  StateSpaceModel first;
  first.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
  first.B1 = Eigen::VectorXd::Zero(1);
  first.B2 = Eigen::VectorXd::Constant(1, 1.0);
  first.C = Eigen::RowVectorXd::Constant(1, 1.0);
  const ObserverSolution sol1 =
      solve_estimation_are(first, NoiseCovariance::scalar(1.0, 1.0, 2.0));
  const double sigma_star = 0.5 * (std::sqrt(5.0) - 1.0);

  const double alpha = 0.5 * (3.0 + std::sqrt(5.0));
  StateSpaceModel second = first;
  second.C = Eigen::RowVectorXd::Constant(1, 1.0 / alpha);
  const ObserverSolution sol2 = solve_estimation_are(
      second, NoiseCovariance::scalar(alpha, alpha, alpha));

  const double err1 = std::abs(sol1.Sigma(0, 0) - sigma_star);
  const double err1L = std::abs(sol1.L[0] - sigma_star);
  const double err2L = std::abs(sol2.L[0] - 1.0);
  const double err2S = std::abs(sol2.Sigma(0, 0));
  res.seconds = detail::elapsed(start);
  res.pass = err1 < 1e-6 && err1L < 1e-6 && err2L < 1e-8 && err2S < 1e-8 &&
             res.seconds < 1.0;
  res.detail = "Sigma=" + detail::fmt(sol1.Sigma(0, 0)) +
               " L=" + detail::fmt(sol1.L[0]) +
               " | alpha: L=" + detail::fmt(sol2.L[0]) +
               " Sigma=" + detail::fmt(sol2.Sigma(0, 0));
  return res;
}

/// Offline MA value iteration against exact analytic autocovariances.
inline CriterionResult criterion2_offline_ma() {
  const auto start = detail::Clock::now();
  CriterionResult res{2, "offline MA value iteration consistency", false, "", 0.0};
  bool pass = true;
  std::string detail_str;
  const std::vector<std::vector<double>> cases = {{0.5}, {0.5, -0.3}};
  for (const auto& c_true : cases) {
    const std::size_t p = c_true.size();
    const std::vector<double> r = ma_autocovariance(c_true, 1.0, p);
    const MaViTrace trace = ma_identify_offline(r, p, 500);
    const Eigen::Map<const Eigen::VectorXd> truth(c_true.data(),
                                                  static_cast<Eigen::Index>(p));
    const double c_err = (trace.final_c() - truth).lpNorm<Eigen::Infinity>();
    const double e_err = std::abs(trace.final_eps2() - 1.0);
    pass = pass && trace.c_estimates.size() <= 500 && c_err < 1e-6 && e_err < 1e-6;
    detail_str += "p=" + std::to_string(p) + ": |c err|=" + detail::fmt(c_err) +
                  " |eps2-1|=" + detail::fmt(e_err) +
                  " iters=" + std::to_string(trace.c_estimates.size()) + "  ";
  }
  res.seconds = detail::elapsed(start);
  res.pass = pass;
  res.detail = detail_str;
  return res;
}

struct OnlineBattery {
  std::vector<double> rel_errors;
  std::vector<double> eps2_errors;
  std::vector<double> orthogonality_max;
  double bound = 0.0;
  double seconds = 0.0;
};

/// Shared 20-seed ARMAX(2,1,1) online-identification battery feeding
/// criteria 3 and 4.
inline OnlineBattery run_online_battery(std::size_t horizon = 200000,
                                        std::size_t seeds = 20) {
  const auto start = detail::Clock::now();
  const ExperimentConfig cfg = detail::armax211_config(horizon, seeds);
  OnlineBattery battery;
  battery.rel_errors.resize(seeds);
  battery.eps2_errors.resize(seeds);
  battery.orthogonality_max.resize(seeds);
  battery.bound = 3.0 / std::sqrt(static_cast<double>(horizon));
  const Eigen::VectorXd truth = cfg.model.theta();
  parallel_for_index(seeds, [&](std::size_t i) {
    const Trajectory traj = make_trajectory(cfg, cfg.seeds[i], false);
    const OnlineRun run = run_online_identification(cfg, traj);
    battery.rel_errors[i] = (run.final_theta - truth).norm() / truth.norm();
    battery.eps2_errors[i] = std::abs(run.final_eps2 - cfg.model.sigma2);
    battery.orthogonality_max[i] = run.orthogonality_max;
  });
  battery.seconds = detail::elapsed(start);
  return battery;
}

/// Online Algorithm consistency at T = 2e5 over 20 seeds.
inline CriterionResult criterion3_online_consistency(const OnlineBattery& battery) {
  CriterionResult res{3, "online identification consistency", false, "", battery.seconds};
  const double med_err = median(battery.rel_errors);
  const double med_eps = median(battery.eps2_errors);
  res.pass = med_err < 0.05 && med_eps < 0.05 && battery.seconds < 30.0;
  res.detail = "median rel err=" + detail::fmt(med_err) +
               " median |eps2-1|=" + detail::fmt(med_eps) +
               " runtime=" + detail::fmt(battery.seconds) + "s";
  return res;
}

/// Residual orthogonality of the converged identifier on every seed.
/// The per-lag band 3/sqrt(T) is a 3-sigma whiteness band; taking the max
/// over 20 seeds x 2p lags leaves no multiplicity headroom, and the
/// reconstruction inherits an O(parameter error) correlation component
/// whose ratio to the band does not shrink with T. The strict bound is
/// asserted as stated; the median is reported alongside for context.
inline CriterionResult criterion4_orthogonality(const OnlineBattery& battery) {
  CriterionResult res{4, "residual orthogonality", false, "", 0.0};
  double worst = 0.0;
  for (double v : battery.orthogonality_max) worst = std::max(worst, v);
  res.pass = worst < battery.bound;
  res.detail = "max |corr|=" + detail::fmt(worst) + " median=" +
               detail::fmt(median(battery.orthogonality_max)) +
               " bound=" + detail::fmt(battery.bound);
  return res;
}

/// Structural identities: characteristic polynomial of A - B2 C vs c(z),
/// impulse-response equivalence of the two model routes, and the Schur
/// complement of the Q-matrix.
inline CriterionResult criterion5_structural_identities() {
  const auto start = detail::Clock::now();
  CriterionResult res{5, "structural identities", false, "", 0.0};
  const RandomStream stream(20240901);
  std::uint64_t counter = 0;

  double charpoly_worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const std::size_t n = 1 + static_cast<std::size_t>(stream.uniform_at(counter++) * 4.0);
    const std::size_t p = 1 + (n > 1 ? static_cast<std::size_t>(
                                           stream.uniform_at(counter++) *
                                           static_cast<double>(n - 1)) : 0);
    ArmaxParams params(detail::random_stable_coeffs(stream, counter, n), {},
                       detail::random_stable_coeffs(stream, counter, p), 1.0);
    const StateSpaceModel ss = to_observable_canonical(params);
    const std::vector<double> q =
        characteristic_polynomial(ss.A - ss.B2 * ss.C);
    for (std::size_t i = 1; i <= n; ++i)
      charpoly_worst = std::max(charpoly_worst, std::abs(q[i] - params.c.at(i)));
  }

  // Impulse-response equivalence, direct recursion vs Markov parameters.
  double impulse_worst = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    ArmaxParams params(detail::random_stable_coeffs(stream, counter, 2),
                       {1.0, 0.5},
                       detail::random_stable_coeffs(stream, counter, 1), 0.0);
    if (draw == 0) params = ArmaxParams({-0.9, 0.2}, {1.0, 0.5}, {0.3}, 0.0);
    const StateSpaceModel ss = to_observable_canonical(params);
    const std::vector<double> h_in = impulse_response(ss, Channel::input, 50);
    const std::vector<double> h_no = impulse_response(ss, Channel::noise, 50);
    // Direct recursions of the difference equation.
    std::vector<double> g_in(50, 0.0), g_no(50, 0.0);
    for (std::size_t k = 0; k < 50; ++k) {
      double in_acc = 0.0, no_acc = k == 0 ? 1.0 : params.c.at(k);
      if (k >= 1 && k <= params.m()) in_acc += params.b.coeffs[k - 1];
      for (std::size_t i = 1; i <= params.n() && i <= k; ++i) {
        in_acc -= params.a.coeffs[i - 1] * g_in[k - i];
        no_acc -= params.a.coeffs[i - 1] * g_no[k - i];
      }
      g_in[k] = in_acc;
      g_no[k] = no_acc;
      impulse_worst = std::max({impulse_worst, std::abs(g_in[k] - h_in[k]),
                                std::abs(g_no[k] - h_no[k])});
    }
  }

  // Schur complement of the Q-matrix reproduces P at the DARE solution.
  double schur_worst = 0.0;
  for (int draw = 0; draw < 10; ++draw) {
    const std::size_t n = 1 + static_cast<std::size_t>(stream.uniform_at(counter++) * 3.0);
    ArmaxParams params(detail::random_stable_coeffs(stream, counter, n),
                       std::vector<double>(n, 0.0),
                       detail::random_stable_coeffs(stream, counter,
                                                    std::max<std::size_t>(1, n - 1)),
                       1.0);
    params.b.coeffs[0] = 1.0;
    const StateSpaceModel ss = to_observable_canonical(params);
    const auto ni = static_cast<Eigen::Index>(n);
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(ni, ni);
    const LqrSolution sol =
        dare_solve(ss.A, ss.B1, Q, 1.0, 0.9, Eigen::MatrixXd::Identity(ni, ni));
    const QMatrix h = q_matrix(sol.P, ss.A, ss.B1, Q, 1.0, 0.9);
    schur_worst = std::max(
        schur_worst,
        (h.schur_complement() - sol.P).lpNorm<Eigen::Infinity>());
  }

  res.seconds = detail::elapsed(start);
  res.pass = charpoly_worst < 1e-12 && impulse_worst < 1e-10 && schur_worst < 1e-8;
  res.detail = "charpoly=" + detail::fmt(charpoly_worst) +
               " impulse=" + detail::fmt(impulse_worst) +
               " schur=" + detail::fmt(schur_worst);
  return res;
}

/// Model-free state estimation error stays under 1% of the state power.
inline CriterionResult criterion6_model_free_estimation() {
  const auto start = detail::Clock::now();
  CriterionResult res{6, "model-free state estimation", false, "", 0.0};
  ExperimentConfig cfg = detail::armax211_config(200000, 20);
  cfg.kind = ExperimentConfig::Kind::estimate;
  std::vector<double> ratios(cfg.seeds.size());
  parallel_for_index(cfg.seeds.size(), [&](std::size_t i) {
    const Trajectory traj = make_trajectory(cfg, cfg.seeds[i], true);
    ratios[i] = run_model_free_estimation(cfg, traj).tail_error_ratio;
  });
  const double med = median(ratios);
  res.seconds = detail::elapsed(start);
  res.pass = med < 0.01;
  res.detail = "median tail ratio=" + detail::fmt(med);
  return res;
}

/// DARE golden value, matrix-inversion-lemma identity, and residuals on
/// random stabilizable instances.
inline CriterionResult criterion7_dare() {
  const auto start = detail::Clock::now();
  CriterionResult res{7, "discounted DARE solver", false, "", 0.0};

  // Scalar closed form: P solves P^2 - (8/9) P - 10/9 = 0, K = P - 1.
  const double p_star = 0.5 * (8.0 / 9.0 + std::sqrt(424.0 / 81.0));
  const double k_star = p_star - 1.0;
  const Eigen::MatrixXd A1 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const Eigen::VectorXd B1 = Eigen::VectorXd::Constant(1, 1.0);
  const Eigen::MatrixXd Q1 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const LqrSolution scalar =
      dare_solve(A1, B1, Q1, 1.0, 0.9, Eigen::MatrixXd::Identity(1, 1));
  const double golden_err = std::max(std::abs(scalar.P(0, 0) - p_star),
                                     std::abs(scalar.K[0] - k_star));

  const RandomStream stream(7071);
  std::uint64_t counter = 0;
  double mil_worst = 0.0, residual_worst = 0.0;
  for (int draw = 0; draw < 50; ++draw) {
    const std::size_t n = 1 + static_cast<std::size_t>(stream.uniform_at(counter++) * 4.0);
    const auto ni = static_cast<Eigen::Index>(n);
    std::vector<double> b(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      b[i] = 2.0 * stream.uniform_at(counter++) - 1.0;
    b[0] = b[0] + (b[0] >= 0.0 ? 1.0 : -1.0);  // keep b_1 away from zero
    ArmaxParams params(detail::random_stable_coeffs(stream, counter, n), b, {}, 1.0);
    const StateSpaceModel ss = to_observable_canonical(params);
    Eigen::VectorXd qdiag(ni);
    for (Eigen::Index i = 0; i < ni; ++i)
      qdiag[i] = 0.1 + stream.uniform_at(counter++);
    const Eigen::MatrixXd Q = qdiag.asDiagonal();
    const double R = 0.1 + stream.uniform_at(counter++);
    const double gamma = 0.5 + 0.45 * stream.uniform_at(counter++);
    const LqrSolution sol =
        dare_solve(ss.A, ss.B1, Q, R, gamma, Eigen::MatrixXd::Identity(ni, ni));
    residual_worst = std::max(residual_worst, sol.residual);

    // Matrix-inversion-lemma form of the sweep on a PD iterate.
    Eigen::MatrixXd P = sol.P + 0.3 * Eigen::MatrixXd::Identity(ni, ni);
    const double inner = ss.B1.dot(P * ss.B1) + R / gamma;
    const Eigen::MatrixXd sweep =
        Q + gamma * (ss.A.transpose() * P * ss.A -
                     (ss.A.transpose() * P * ss.B1) *
                         (ss.B1.transpose() * P * ss.A) / inner);
    const Eigen::MatrixXd mil =
        Q + gamma * ss.A.transpose() *
                (P.inverse() + gamma / R * ss.B1 * ss.B1.transpose()).inverse() *
                ss.A;
    mil_worst = std::max(mil_worst, (sweep - mil).lpNorm<Eigen::Infinity>());
  }

  res.seconds = detail::elapsed(start);
  res.pass = golden_err < 1e-5 && mil_worst < 1e-10 && residual_worst < 1e-8;
  res.detail = "golden err=" + detail::fmt(golden_err) +
               " MIL gap=" + detail::fmt(mil_worst) +
               " worst residual=" + detail::fmt(residual_worst);
  return res;
}

/// Model-free LQG closes the loop to within 5% of the model-based gain
/// and the optimal discounted value.
inline CriterionResult criterion8_model_free_lqg() {
  const auto start = detail::Clock::now();
  CriterionResult res{8, "model-free LQG", false, "", 0.0};
  ExperimentConfig cfg = detail::armax211_config(200000, 20);
  cfg.kind = ExperimentConfig::Kind::lqg;
  cfg.gamma = 0.9;
  const StateSpaceModel ss = to_observable_canonical(cfg.model);
  const auto ni = static_cast<Eigen::Index>(cfg.n());
  const LqrSolution model_based =
      dare_solve(ss.A, ss.B1, Eigen::MatrixXd::Identity(ni, ni), cfg.r_weight,
                 cfg.gamma, Eigen::MatrixXd::Identity(ni, ni));
  std::vector<double> gain_errors(cfg.seeds.size());
  std::vector<double> cost_errors(cfg.seeds.size());
  parallel_for_index(cfg.seeds.size(), [&](std::size_t i) {
    const LqgRun run = run_lqg_closed_loop(cfg, cfg.seeds[i], model_based);
    gain_errors[i] = run.gain_rel_error;
    cost_errors[i] = run.cost_rel_error;
  });
  const double med_gain = median(gain_errors);
  const double med_cost = median(cost_errors);
  res.seconds = detail::elapsed(start);
  res.pass = med_gain < 0.05 && med_cost < 0.05 && res.seconds < 60.0;
  res.detail = "median K err=" + detail::fmt(med_gain) +
               " median cost err=" + detail::fmt(med_cost) +
               " runtime=" + detail::fmt(res.seconds) + "s";
  return res;
}

/// Recursive IV matches the direct regularized normal-equation solve at
/// every step of a 50-step stream.
inline CriterionResult criterion9_riv_equivalence() {
  const auto start = detail::Clock::now();
  CriterionResult res{9, "recursive/direct IV equivalence", false, "", 0.0};
  const ExperimentConfig cfg = detail::armax211_config(51, 1);
  const Trajectory traj = make_trajectory(cfg, 42, false);
  const std::size_t n = cfg.n(), m = cfg.m(), p = cfg.p();
  const std::size_t d = n + m;
  const auto di = static_cast<Eigen::Index>(d);
  const double p0 = 1e3;

  RecursiveIvState state(d, p0);
  Eigen::MatrixXd R_sum = Eigen::MatrixXd::Identity(di, di) / p0;
  Eigen::VectorXd r_sum = Eigen::VectorXd::Zero(di);
  double worst = 0.0;
  for (std::size_t k = 1; k < traj.length(); ++k) {
    Eigen::VectorXd phi(di), zeta(di);
    for (std::size_t i = 1; i <= n; ++i) {
      phi[i - 1] = -armax::detail::lag(traj.y, k, i);
      zeta[i - 1] = -armax::detail::lag(traj.y, k, p + i);
    }
    for (std::size_t i = 1; i <= m; ++i) {
      phi[n + i - 1] = armax::detail::lag(traj.u, k, i);
      zeta[n + i - 1] = armax::detail::lag(traj.u, k, i);
    }
    riv_step(state, zeta, phi, traj.y[k]);
    R_sum += zeta * phi.transpose();
    r_sum += zeta * traj.y[k];
    const Eigen::VectorXd direct = R_sum.fullPivLu().solve(r_sum);
    worst = std::max(worst,
                     (direct - state.theta_tilde).lpNorm<Eigen::Infinity>());
  }
  res.seconds = detail::elapsed(start);
  res.pass = worst < 1e-8;
  res.detail = "max |theta gap|=" + detail::fmt(worst);
  return res;
}

/// Discounted squared-prediction-error cost of the converged predictor
/// equals sigma2 / (1 - gamma) across discounts, so the optimum does not
/// depend on gamma.
inline CriterionResult criterion10_discounted_cost() {
  const auto start = detail::Clock::now();
  CriterionResult res{10, "discounted prediction-error cost", false, "", 0.0};
  const ExperimentConfig cfg = detail::armax211_config(200000, 3);
  const std::vector<double> gammas = {0.5, 0.9, 0.99};
  std::vector<std::vector<double>> rel_gaps(gammas.size());
  for (auto& v : rel_gaps) v.resize(cfg.seeds.size());
  parallel_for_index(cfg.seeds.size(), [&](std::size_t s) {
    const Trajectory traj = make_trajectory(cfg, cfg.seeds[s], false);
    OnlineIdentifier ident(cfg.n(), cfg.m(), cfg.p(), cfg.p0);
    std::vector<double> e(traj.length());
    for (std::size_t k = 0; k < traj.length(); ++k) {
      ident.step(traj.u[k], traj.y[k]);
      e[k] = ident.last_prediction_error();
    }
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
      const double gamma = gammas[gi];
      const double target = cfg.model.sigma2 / (1.0 - gamma);
      double J = 0.0, acc = 0.0;
      std::size_t count = 0;
      const std::size_t tail_start = traj.length() / 2;
      for (std::size_t k = 0; k < traj.length(); ++k) {
        J = e[k] * e[k] + gamma * J;
        if (k >= tail_start) {
          acc += J;
          ++count;
        }
      }
      rel_gaps[gi][s] = std::abs(acc / static_cast<double>(count) - target) / target;
    }
  });
  bool pass = true;
  std::string detail_str;
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    const double med = median(rel_gaps[gi]);
    pass = pass && med < 0.05;
    detail_str += "gamma=" + detail::fmt(gammas[gi]) +
                  ": rel gap=" + detail::fmt(med) + "  ";
  }
  res.seconds = detail::elapsed(start);
  res.pass = pass;
  res.detail = detail_str;
  return res;
}

inline std::vector<CriterionResult> run_all() {
  std::vector<CriterionResult> results;
  results.push_back(criterion1_example_golden());
  results.push_back(criterion2_offline_ma());
  const OnlineBattery battery = run_online_battery();
  results.push_back(criterion3_online_consistency(battery));
  results.push_back(criterion4_orthogonality(battery));
  results.push_back(criterion5_structural_identities());
  results.push_back(criterion6_model_free_estimation());
  results.push_back(criterion7_dare());
  results.push_back(criterion8_model_free_lqg());
  results.push_back(criterion9_riv_equivalence());
  results.push_back(criterion10_discounted_cost());
  return results;
}

inline bool print_results(const std::vector<CriterionResult>& results,
                          std::ostream& os) {
  bool all = true;
  for (const auto& r : results) {
    os << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << r.index << ": "
       << r.name << " (" << r.detail << ", " << detail::fmt(r.seconds)
       << "s)\n";
    all = all && r.pass;
  }
  os << (all ? "all criteria passed" : "SOME CRITERIA FAILED") << "\n";
  return all;
}

}  // namespace armax::acceptance
