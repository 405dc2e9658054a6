#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <vector>

#include "armax/analytic.hpp"
#include "armax/model.hpp"
#include "armax/random.hpp"
#include "armax/stats.hpp"
#include "armax/trajectory.hpp"

using namespace armax;

namespace {

std::vector<double> impulse_input(std::size_t length) {
  std::vector<double> u(length, 0.0);
  u[0] = 1.0;
  return u;
}

/// Direct recursion of the difference equation driven by explicit (u, w),
/// independent of the simulator's internals.
std::vector<double> hand_recursion(const ArmaxParams& params,
                                   const std::vector<double>& u,
                                   const std::vector<double>& w) {
  std::vector<double> y(u.size(), 0.0);
  for (std::size_t k = 0; k < u.size(); ++k) {
    double acc = w[k];
    for (std::size_t i = 1; i <= params.n() && i <= k; ++i)
      acc -= params.a.coeffs[i - 1] * y[k - i];
    for (std::size_t i = 1; i <= params.m() && i <= k; ++i)
      acc += params.b.coeffs[i - 1] * u[k - i];
    for (std::size_t i = 1; i <= params.p() && i <= k; ++i)
      acc += params.c.coeffs[i - 1] * w[k - i];
    y[k] = acc;
  }
  return y;
}

}  // namespace

TEST_CASE("noise-free AR(1) impulse response by hand recursion") {
  // y_k = 0.5 y_{k-1} + u_{k-1}: impulse input gives 0, 1, 0.5, 0.25, ...
  const ArmaxParams params({-0.5}, {1.0}, {}, 0.0);
  const Trajectory traj = simulate_armax(params, impulse_input(8), 8, 7);
  CHECK(traj.y[0] == 0.0);
  double expected = 1.0;
  for (std::size_t k = 1; k < 8; ++k) {
    CHECK(traj.y[k] == Catch::Approx(expected).margin(1e-15));
    expected *= 0.5;
  }
}

TEST_CASE("zero input and zero noise give zero output") {
  const ArmaxParams params({-1.1, 0.3}, {1.0}, {0.4}, 0.0);
  const std::vector<double> u(32, 0.0);
  const Trajectory traj = simulate_armax(params, u, 32, 99);
  for (double v : traj.y) CHECK(v == 0.0);
}

TEST_CASE("simulation is bitwise deterministic") {
  const ArmaxParams params({-0.7}, {1.0}, {0.2}, 1.5);
  std::vector<double> u(128);
  const RandomStream in(9, 1);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = in.normal_at(k);
  SimulateOptions opts;
  opts.with_truth = true;
  const Trajectory first = simulate_armax(params, u, 128, 1234, opts);
  const Trajectory second = simulate_armax(params, u, 128, 1234, opts);
  REQUIRE(first.y.size() == second.y.size());
  for (std::size_t k = 0; k < first.y.size(); ++k) {
    CHECK(first.y[k] == second.y[k]);
    CHECK((*first.w)[k] == (*second.w)[k]);
  }
}

TEST_CASE("simulate matches hand recursion with recorded noise") {
  const ArmaxParams params({-1.1, 0.3}, {1.0}, {0.4}, 1.0);
  std::vector<double> u(64);
  const RandomStream in(5, 1);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = in.normal_at(k);
  SimulateOptions opts;
  opts.with_truth = true;
  const Trajectory traj = simulate_armax(params, u, 64, 11, opts);
  REQUIRE(traj.w.has_value());
  const std::vector<double> y_ref = hand_recursion(params, u, *traj.w);
  for (std::size_t k = 0; k < 64; ++k)
    CHECK(traj.y[k] == Catch::Approx(y_ref[k]).margin(1e-12));
}

TEST_CASE("nonfinite parameters are rejected") {
  ArmaxParams params({-0.5}, {1.0}, {}, 1.0);
  params.a.coeffs[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(simulate_armax(params, impulse_input(4), 4, 1),
                  InvalidModelError);
}

TEST_CASE("observable canonical form matches the worked example") {
  // a = [0.5, 0.25], b = [1], c = [0.4]:
  const ArmaxParams params({0.5, 0.25}, {1.0}, {0.4}, 1.0);
  const StateSpaceModel ss = to_observable_canonical(params);
  Eigen::MatrixXd A_expected(2, 2);
  A_expected << 0.0, -0.25, 1.0, -0.5;
  CHECK((ss.A - A_expected).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(ss.B1[0] == 0.0);
  CHECK(ss.B1[1] == 1.0);
  CHECK(ss.B2[0] == Catch::Approx(-0.25));  // c2 - a2 with c2 = 0
  CHECK(ss.B2[1] == Catch::Approx(-0.1));   // c1 - a1 = 0.4 - 0.5
  CHECK(ss.C[0] == 0.0);
  CHECK(ss.C[1] == 1.0);
}

TEST_CASE("all-zero first-order parameters") {
  const ArmaxParams params({0.0}, {0.0}, {0.0}, 0.0);
  const StateSpaceModel ss = to_observable_canonical(params);
  CHECK(ss.A(0, 0) == 0.0);
  CHECK(ss.B1[0] == 0.0);
  CHECK(ss.B2[0] == 0.0);
  CHECK(ss.C[0] == 1.0);
}

TEST_CASE("order preconditions for the realization") {
  const ArmaxParams params({-0.5}, {1.0, 0.5}, {}, 1.0);  // m = 2 > n = 1
  CHECK_THROWS_AS(to_observable_canonical(params), DimensionError);
}

TEST_CASE("impulse responses of the realization match the recursion") {
  const ArmaxParams params({-0.9, 0.2}, {1.0, 0.5}, {0.3}, 0.0);
  const StateSpaceModel ss = to_observable_canonical(params);
  const std::vector<double> h = impulse_response(ss, Channel::input, 50);
  const Trajectory traj = simulate_armax(params, impulse_input(50), 50, 3);
  for (std::size_t k = 0; k < 50; ++k)
    CHECK(h[k] == Catch::Approx(traj.y[k]).margin(1e-10));
}

TEST_CASE("impulse response direct terms") {
  StateSpaceModel ss;
  ss.A = Eigen::MatrixXd::Zero(1, 1);
  ss.B1 = Eigen::VectorXd::Constant(1, 1.0);
  ss.B2 = Eigen::VectorXd::Constant(1, 1.0);
  ss.C = Eigen::RowVectorXd::Constant(1, 1.0);
  const std::vector<double> h_in = impulse_response(ss, Channel::input, 4);
  CHECK(h_in == std::vector<double>{0.0, 1.0, 0.0, 0.0});
  const std::vector<double> h_no = impulse_response(ss, Channel::noise, 4);
  CHECK(h_no[0] == 1.0);
}

TEST_CASE("AR(1) canonical model has the geometric input response") {
  const ArmaxParams params({-0.5}, {1.0}, {}, 0.0);
  const std::vector<double> h =
      impulse_response(to_observable_canonical(params), Channel::input, 6);
  double expected = 1.0;
  CHECK(h[0] == 0.0);
  for (std::size_t k = 1; k < 6; ++k) {
    CHECK(h[k] == Catch::Approx(expected).margin(1e-15));
    expected *= 0.5;
  }
}

TEST_CASE("realization equivalence on random parameter draws") {
  const RandomStream stream(314);
  std::uint64_t ctr = 0;
  for (int draw = 0; draw < 10; ++draw) {
    std::vector<double> a = {0.6 * (2.0 * stream.uniform_at(ctr++) - 1.0),
                             0.3 * (2.0 * stream.uniform_at(ctr++) - 1.0)};
    std::vector<double> b = {2.0 * stream.uniform_at(ctr++) - 1.0};
    std::vector<double> c = {0.8 * (2.0 * stream.uniform_at(ctr++) - 1.0)};
    const ArmaxParams params(a, b, c, 1.0);
    std::vector<double> u(200);
    const RandomStream in(1000 + static_cast<std::uint64_t>(draw), 1);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = in.normal_at(k);
    SimulateOptions opts;
    opts.with_truth = true;
    const Trajectory traj = simulate_armax(params, u, 200, 77, opts);
    // Roll the canonical realization on the identical (u, w).
    const StateSpaceModel ss = to_observable_canonical(params);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    for (std::size_t k = 0; k < 200; ++k) {
      const double y_ss = ss.C.dot(x) + (*traj.w)[k];
      REQUIRE(std::abs(y_ss - traj.y[k]) < 1e-10);
      CHECK((x - (*traj.x)[k]).lpNorm<Eigen::Infinity>() < 1e-10);
      x = ss.A * x + ss.B1 * u[k] + ss.B2 * (*traj.w)[k];
    }
  }
}

TEST_CASE("characteristic polynomial of A - B2 C reproduces c(z)") {
  const ArmaxParams params({-0.9, 0.2}, {1.0}, {0.3}, 1.0);
  const StateSpaceModel ss = to_observable_canonical(params);
  const std::vector<double> q = characteristic_polynomial(ss.A - ss.B2 * ss.C);
  REQUIRE(q.size() == 3);
  CHECK(q[0] == Catch::Approx(1.0).margin(1e-14));
  CHECK(q[1] == Catch::Approx(0.3).margin(1e-12));
  CHECK(q[2] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("autocorrelation of white noise") {
  std::vector<double> y(200000);
  const RandomStream stream(123);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = stream.normal_at(k);
  const std::vector<double> r = autocorrelation(y, 3);
  CHECK(r[0] == Catch::Approx(1.0).margin(0.02));
  for (std::size_t i = 1; i <= 3; ++i) CHECK(std::abs(r[i]) < 0.01);
}

TEST_CASE("autocorrelation of an MA(1) approaches the analytic values") {
  const ArmaxParams params({}, {}, {0.5}, 1.0);
  const std::vector<double> u(200000, 0.0);
  const Trajectory traj = simulate_armax(params, u, 200000, 21);
  const std::vector<double> r = autocorrelation(traj.y, 2);
  const std::vector<double> exact = ma_autocovariance({0.5}, 1.0, 2);
  CHECK(exact[0] == Catch::Approx(1.25));
  CHECK(exact[1] == Catch::Approx(0.5));
  CHECK(exact[2] == Catch::Approx(0.0));
  for (std::size_t i = 0; i <= 2; ++i)
    CHECK(r[i] == Catch::Approx(exact[i]).margin(0.02));
}

TEST_CASE("autocorrelation of a constant signal") {
  const std::vector<double> y(100, 1.0);
  const std::vector<double> r = autocorrelation(y, 5);
  for (double v : r) CHECK(v == Catch::Approx(1.0));
}

TEST_CASE("autocorrelation rejects empty and too-short signals") {
  CHECK_THROWS_AS(autocorrelation({}, 0), DimensionError);
  CHECK_THROWS_AS(autocorrelation({1.0, 2.0}, 2), DimensionError);
}

TEST_CASE("Toeplitz autocovariance matrix is PSD up to noise") {
  const ArmaxParams params({-0.6}, {}, {0.4}, 1.0);
  const std::vector<double> u(100000, 0.0);
  const Trajectory traj = simulate_armax(params, u, 100000, 5);
  const std::vector<double> r = autocorrelation(traj.y, 6);
  const Eigen::MatrixXd t = toeplitz_from_autocov(r);
  const Eigen::VectorXd eig =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t).eigenvalues();
  CHECK(eig.minCoeff() > -1e-3 * eig.maxCoeff());
}

TEST_CASE("ARMA analytic autocovariance matches the MA special case") {
  const std::vector<double> via_arma = arma_autocovariance({}, {0.5, -0.3}, 2.0, 3);
  const std::vector<double> via_ma = ma_autocovariance({0.5, -0.3}, 2.0, 3);
  for (std::size_t i = 0; i < via_ma.size(); ++i)
    CHECK(via_arma[i] == Catch::Approx(via_ma[i]).margin(1e-12));
}
