#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "armax/analytic.hpp"
#include "armax/harness.hpp"
#include "armax/ident_offline.hpp"
#include "armax/stats.hpp"
#include "armax/trajectory.hpp"

using namespace armax;

namespace {

Trajectory white_input_trajectory(const ArmaxParams& params, std::size_t T,
                                  std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.model = params;
  cfg.horizon = T;
  cfg.burn_in = 0;
  return make_trajectory(cfg, seed, false);
}

}  // namespace

TEST_CASE("rho back-substitution worked example") {
  // p = 2, r = (0.5, 0.2), c1^{(k-1)} = 0.4:
  // rho(2) = 0.2, rho(1) = 0.5 - 0.4 * 0.2 = 0.42.
  Eigen::VectorXd r(2);
  r << 0.5, 0.2;
  Eigen::VectorXd c_prev(2);
  c_prev << 0.4, 0.0;
  const Eigen::VectorXd rho = solve_rho_system({c_prev}, r);
  CHECK(rho[1] == Catch::Approx(0.2));
  CHECK(rho[0] == Catch::Approx(0.42));
}

TEST_CASE("rho solve trivial cases") {
  Eigen::VectorXd r1(1);
  r1 << 0.7;
  CHECK(solve_rho_system({}, r1)[0] == Catch::Approx(0.7));

  Eigen::VectorXd r3(3);
  r3 << 0.5, 0.3, 0.1;
  const Eigen::VectorXd rho = solve_rho_system({}, r3);  // zero history
  CHECK(rho[0] == Catch::Approx(0.5));
  CHECK(rho[1] == Catch::Approx(0.3));
  CHECK(rho[2] == Catch::Approx(0.1));
}

TEST_CASE("MA value iteration hand-checked iterates") {
  // Exact MA(1) autocovariances with c1 = 0.5, sigma2 = 1:
  // r = (1.25, 0.5). Iterate 0 takes the zero branch; iterate 1 gives
  // c = 0.4, eps2 = 1.05; iterate 2 gives c ~ 0.47619, eps2 ~ 1.01190.
  const MaViTrace trace = ma_identify_offline({1.25, 0.5}, 1, 3);
  REQUIRE(trace.c_estimates.size() == 3);
  CHECK(trace.c_estimates[0][0] == 0.0);
  CHECK(trace.eps2[0] == Catch::Approx(1.25));
  CHECK(trace.c_estimates[1][0] == Catch::Approx(0.4));
  CHECK(trace.eps2[1] == Catch::Approx(1.05));
  CHECK(trace.c_estimates[2][0] == Catch::Approx(0.5 / 1.05));
  CHECK(trace.eps2[2] == Catch::Approx(1.25 - 0.25 / 1.05));
}

TEST_CASE("MA value iteration fixed point for MA(1)") {
  // Fixed point solves eps^4 - 1.25 eps^2 + 0.25 = 0, the stable root
  // being eps2 = 1 with c = 0.5.
  const MaViTrace trace = ma_identify_offline({1.25, 0.5}, 1, 200);
  CHECK(trace.converged);
  CHECK(trace.final_c()[0] == Catch::Approx(0.5).margin(1e-8));
  CHECK(trace.final_eps2() == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("white-noise autocovariances keep c at zero") {
  const MaViTrace trace = ma_identify_offline({1.0, 0.0}, 1, 10);
  for (std::size_t k = 0; k < trace.eps2.size(); ++k) {
    CHECK(trace.c_estimates[k][0] == 0.0);
    CHECK(trace.eps2[k] == Catch::Approx(1.0));
  }
}

TEST_CASE("MA(2) value iteration converges to the truth") {
  const std::vector<double> c_true = {0.5, -0.3};
  const std::vector<double> r = ma_autocovariance(c_true, 1.0, 2);
  CHECK(r[0] == Catch::Approx(1.34));
  CHECK(r[1] == Catch::Approx(0.35));
  CHECK(r[2] == Catch::Approx(-0.3));
  const MaViTrace trace = ma_identify_offline(r, 2, 500);
  CHECK(trace.final_c()[0] == Catch::Approx(0.5).margin(1e-6));
  CHECK(trace.final_c()[1] == Catch::Approx(-0.3).margin(1e-6));
  CHECK(trace.final_eps2() == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("MA value iteration input validation") {
  CHECK_THROWS_AS(ma_identify_offline({1.0, 0.5}, 1, 0), DimensionError);
  CHECK_THROWS_AS(
      ma_identify_offline({1.0, std::numeric_limits<double>::infinity()}, 1, 5),
      PreconditionError);
}

TEST_CASE("fixed point equals truth on a parameter grid") {
  for (const double c1 : {-0.6, -0.2, 0.2, 0.6}) {
    for (const double sigma2 : {0.5, 2.0}) {
      const std::vector<double> r = ma_autocovariance({c1}, sigma2, 1);
      const MaViTrace trace = ma_identify_offline(r, 1, 500);
      CHECK(trace.final_c()[0] == Catch::Approx(c1).margin(1e-7));
      CHECK(trace.final_eps2() == Catch::Approx(sigma2).margin(1e-7));
    }
  }
}

TEST_CASE("IV estimate is exact on noise-free AR(1) data") {
  const ArmaxParams params({-0.5}, {1.0}, {}, 0.0);
  const Trajectory traj = white_input_trajectory(params, 2000, 17);
  const IvEstimate est = iv_estimate_arx(traj, 1, 1, 0);
  CHECK(est.theta_tilde[0] == Catch::Approx(-0.5).margin(1e-8));
  CHECK(est.theta_tilde[1] == Catch::Approx(1.0).margin(1e-8));
  CHECK(std::isfinite(est.condition));
}

TEST_CASE("zero output raises an excitation error") {
  Trajectory traj;
  traj.u.assign(100, 0.0);
  traj.y.assign(100, 0.0);
  CHECK_THROWS_AS(iv_estimate_arx(traj, 1, 1, 0), ExcitationError);
}

TEST_CASE("IV is consistent on an ARMA(1,1)") {
  // a1 = -0.5, c1 = 0.3, no input part.
  const ArmaxParams params({-0.5}, {}, {0.3}, 1.0);
  const std::vector<double> u(200000, 0.0);
  const Trajectory traj = simulate_armax(params, u, 200000, 23);
  const IvEstimate est = iv_estimate_arx(traj, 1, 0, 1);
  CHECK(est.theta_tilde[0] == Catch::Approx(-0.5).margin(0.05));
}

TEST_CASE("a nontrivial stable filter preserves IV consistency") {
  const ArmaxParams params({-0.5}, {1.0}, {0.3}, 1.0);
  const Trajectory traj = white_input_trajectory(params, 100000, 29);
  const IvEstimate est =
      iv_estimate_arx(traj, 1, 1, 1, DelayPolynomial::monic({0.4}));
  CHECK(est.theta_tilde[0] == Catch::Approx(-0.5).margin(0.05));
  CHECK(est.theta_tilde[1] == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("unstable filters are rejected") {
  const ArmaxParams params({-0.5}, {1.0}, {}, 0.0);
  const Trajectory traj = white_input_trajectory(params, 500, 31);
  CHECK_THROWS_AS(
      iv_estimate_arx(traj, 1, 1, 0, DelayPolynomial::monic({2.0})),
      PreconditionError);
}

TEST_CASE("instrument Gram matrix from analytic ARMA(1,1) autocovariances") {
  // gamma_1 = (1 + phi theta)(phi + theta) / (1 - phi^2) with phi = 0.5,
  // theta = 0.3: R_y = [r(1)] = [1.22666...].
  const std::vector<double> r = arma_autocovariance({-0.5}, {0.3}, 1.0, 2);
  CHECK(r[1] == Catch::Approx(0.92 / 0.75).margin(1e-10));
  const auto [Ry, nonsingular] = arma_instrument_gram(r, 1, 1);
  CHECK(Ry(0, 0) == Catch::Approx(0.92 / 0.75).margin(1e-10));
  CHECK(nonsingular);
}

TEST_CASE("white noise makes the ARMA instrument Gram singular") {
  const auto [Ry, nonsingular] = arma_instrument_gram({1.0, 0.0}, 1, 1);
  CHECK(Ry(0, 0) == 0.0);
  CHECK_FALSE(nonsingular);
}

TEST_CASE("stable ARMA(2,1) with a2 != 0 gives a nonsingular Gram") {
  const std::vector<double> a = {-0.9, 0.2};
  const std::vector<double> c = {0.3};
  const std::vector<double> r = arma_autocovariance(a, c, 1.0, 3);
  const auto [Ry, nonsingular] = arma_instrument_gram(r, 2, 1);
  CHECK(nonsingular);
  CHECK(std::abs(Ry.determinant()) > 1e-6);
}

TEST_CASE("instrument Gram validates the lag budget") {
  CHECK_THROWS_AS(arma_instrument_gram({1.0}, 2, 1), DimensionError);
}

TEST_CASE("residual series with a zero estimate returns the output") {
  const ArmaxParams params({-0.5}, {1.0}, {}, 1.0);
  const Trajectory traj = white_input_trajectory(params, 100, 41);
  const std::vector<double> res =
      residual_series(traj, Eigen::VectorXd::Zero(2), 1, 1);
  for (std::size_t k = 0; k < res.size(); ++k) CHECK(res[k] == traj.y[k]);
}

TEST_CASE("residuals vanish under the true noise-free parameters") {
  const ArmaxParams params({-0.5}, {1.0}, {}, 0.0);
  const Trajectory traj = white_input_trajectory(params, 200, 43);
  Eigen::VectorXd theta(2);
  theta << -0.5, 1.0;
  const std::vector<double> res = residual_series(traj, theta, 1, 1);
  for (std::size_t k = 1; k < res.size(); ++k)
    CHECK(std::abs(res[k]) < 1e-12);
}

TEST_CASE("residuals under the true parameters follow the MA process") {
  const ArmaxParams params({-0.5}, {1.0}, {0.3}, 1.0);
  const Trajectory traj = white_input_trajectory(params, 200000, 47);
  Eigen::VectorXd theta(2);
  theta << -0.5, 1.0;
  const std::vector<double> res = residual_series(traj, theta, 1, 1);
  const std::vector<double> r = autocorrelation(res, 3);
  const std::vector<double> exact = ma_autocovariance({0.3}, 1.0, 3);
  CHECK(r[0] == Catch::Approx(exact[0]).margin(0.03));
  CHECK(r[1] == Catch::Approx(exact[1]).margin(0.02));
  // Autocovariance truncates beyond lag p.
  CHECK(std::abs(r[2]) < 0.02);
  CHECK(std::abs(r[3]) < 0.02);
}

TEST_CASE("PLR with p = 0 is ordinary least squares") {
  const ArmaxParams params({-0.5}, {1.0}, {}, 0.0);
  const Trajectory traj = white_input_trajectory(params, 5000, 53);
  const Eigen::VectorXd theta = plr_bootstrap(traj, 1, 1, 0, 1);
  CHECK(theta[0] == Catch::Approx(-0.5).margin(1e-8));
  CHECK(theta[1] == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("PLR recovers an MA(1) approximately") {
  const ArmaxParams params({}, {}, {0.5}, 1.0);
  const std::vector<double> u(100000, 0.0);
  const Trajectory traj = simulate_armax(params, u, 100000, 59);
  const Eigen::VectorXd theta = plr_bootstrap(traj, 0, 0, 1, 20);
  CHECK(theta[0] == Catch::Approx(0.5).margin(0.1));
}

TEST_CASE("PLR on zero data raises an excitation error") {
  Trajectory traj;
  traj.u.assign(50, 0.0);
  traj.y.assign(50, 0.0);
  CHECK_THROWS_AS(plr_bootstrap(traj, 1, 0, 1, 2), ExcitationError);
}

TEST_CASE("offline pipeline on an ARMA(1,1)") {
  const ArmaxParams params({-0.5}, {}, {0.3}, 1.0);
  const std::vector<double> u(200000, 0.0);
  const Trajectory traj = simulate_armax(params, u, 200000, 61);
  const ArmaxParams est = armax_identify_offline(traj, 1, 0, 1, 500);
  CHECK(est.a.coeffs[0] == Catch::Approx(-0.5).epsilon(0.05));
  CHECK(est.c.coeffs[0] == Catch::Approx(0.3).epsilon(0.05));
  CHECK(est.sigma2 == Catch::Approx(1.0).epsilon(0.05));
}

TEST_CASE("offline pipeline is exact on noise-free ARX data") {
  const ArmaxParams params({-0.7, 0.1}, {1.0, -0.4}, {}, 0.0);
  const Trajectory traj = white_input_trajectory(params, 20000, 67);
  const ArmaxParams est = armax_identify_offline(traj, 2, 2, 0, 10);
  CHECK(est.a.coeffs[0] == Catch::Approx(-0.7).margin(1e-7));
  CHECK(est.a.coeffs[1] == Catch::Approx(0.1).margin(1e-7));
  CHECK(est.b.coeffs[0] == Catch::Approx(1.0).margin(1e-7));
  CHECK(est.b.coeffs[1] == Catch::Approx(-0.4).margin(1e-7));
  CHECK(est.c.coeffs.empty());
  CHECK(est.sigma2 < 1e-10);
}

TEST_CASE("degenerate request n = m = p = 0 returns the output power") {
  const ArmaxParams params({}, {}, {}, 1.0);
  const std::vector<double> u(50000, 0.0);
  const Trajectory traj = simulate_armax(params, u, 50000, 71);
  const ArmaxParams est = armax_identify_offline(traj, 0, 0, 0, 1);
  CHECK(est.sigma2 == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("reconstructed residuals of a converged trace are orthogonal") {
  const ArmaxParams params({}, {}, {0.5}, 1.0);
  const std::size_t T = 100000;
  const std::vector<double> u(T, 0.0);
  const Trajectory traj = simulate_armax(params, u, T, 73);
  const std::vector<double> r = autocorrelation(traj.y, 1);
  const MaViTrace trace = ma_identify_offline(r, 1, 500);
  Eigen::VectorXd theta(1);
  theta << trace.final_c()[0];
  const std::vector<double> e = prediction_error_series(traj, theta, 0, 0, 1);
  const std::vector<double> rho = autocorrelation_coefficients(e, 2);
  const double bound = 3.0 / std::sqrt(static_cast<double>(T));
  CHECK(std::abs(rho[1]) < bound);
  CHECK(std::abs(rho[2]) < bound);
}

TEST_CASE("PLR and MA value iteration agree on an easy MA(1)") {
  const ArmaxParams params({}, {}, {0.3}, 1.0);
  const std::vector<double> u(100000, 0.0);
  const Trajectory traj = simulate_armax(params, u, 100000, 83);
  const Eigen::VectorXd plr = plr_bootstrap(traj, 0, 0, 1, 30);
  const std::vector<double> r = autocorrelation(traj.y, 1);
  const MaViTrace trace = ma_identify_offline(r, 1, 500);
  CHECK(plr[0] == Catch::Approx(trace.final_c()[0]).margin(0.05));
}

TEST_CASE("value iteration converges where PLR has no guarantee") {
  // c(z) = 1 + 1.5 z^-1 + 0.75 z^-2 is stable (|roots| = 0.866) but
  // violates the positive-realness condition PLR convergence rests on
  // (Re C(e^{iw}) < 0 near w = 2 pi / 3). The value iteration still
  // recovers c from the autocovariances; PLR is run for comparison only,
  // with no assertion on where it lands.
  const std::vector<double> c_true = {1.5, 0.75};
  REQUIRE(polynomial_is_stable(DelayPolynomial::monic(c_true)));
  const std::vector<double> r_exact = ma_autocovariance(c_true, 1.0, 2);
  const MaViTrace trace = ma_identify_offline(r_exact, 2, 5000);
  CHECK(trace.final_c()[0] == Catch::Approx(1.5).margin(1e-4));
  CHECK(trace.final_c()[1] == Catch::Approx(0.75).margin(1e-4));
  CHECK(trace.final_eps2() == Catch::Approx(1.0).margin(1e-4));

  const ArmaxParams params({}, {}, c_true, 1.0);
  const std::vector<double> u(100000, 0.0);
  const Trajectory traj = simulate_armax(params, u, 100000, 89);
  try {
    const Eigen::VectorXd plr = plr_bootstrap(traj, 0, 0, 2, 30);
    (void)plr;  // wherever it drifted, the comparison stands unasserted
  } catch (const Error&) {
    // A singular sweep counts as failure to converge; also acceptable.
  }
}

TEST_CASE("IV error shrinks like one over root T") {
  const ArmaxParams params({-0.5}, {}, {0.3}, 1.0);
  std::vector<double> medians;
  for (const std::size_t T : {std::size_t{1000}, std::size_t{10000},
                              std::size_t{100000}}) {
    std::vector<double> errors;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const std::vector<double> u(T, 0.0);
      const Trajectory traj = simulate_armax(params, u, T, seed);
      const IvEstimate est = iv_estimate_arx(traj, 1, 0, 1);
      errors.push_back(std::abs(est.theta_tilde[0] + 0.5));
    }
    medians.push_back(median(errors));
  }
  // One decade of T buys roughly sqrt(10); allow generous slack.
  CHECK(medians[1] < medians[0] * 0.6);
  CHECK(medians[2] < medians[1] * 0.6);
}
