#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "armax/errors.hpp"
#include "armax/estimation.hpp"
#include "armax/ident_offline.hpp"
#include "armax/ident_online.hpp"
#include "armax/io.hpp"
#include "armax/lqg.hpp"
#include "armax/model.hpp"
#include "armax/random.hpp"
#include "armax/stats.hpp"
#include "armax/trajectory.hpp"

namespace armax {

inline constexpr const char* kToolVersion = "armax 0.1.0";
inline constexpr int kReportSchemaVersion = 1;

/// Exogenous input source for simulated experiments.
struct InputSpec {
  enum class Kind { white, prbs, file };
  Kind kind = Kind::white;
  double variance = 1.0;   ///< white noise variance
  double amplitude = 1.0;  ///< PRBS level (+/- amplitude)
  std::string path;        ///< trajectory CSV whose u column is replayed
};

struct DitherSpec {
  double amplitude = 1.0;
  /// Exploration window in samples; defaults to horizon / 10.
  std::optional<std::size_t> window;
};

struct ExperimentConfig {
  enum class Kind { identify_offline, identify_online, estimate, lqg, pitfall_demo };

  Kind kind = Kind::identify_online;
  ArmaxParams model;
  InputSpec input;
  std::size_t horizon = 10000;
  std::vector<std::uint64_t> seeds = {1};

  std::size_t vi_iterations = 500;
  double p0 = 1e3;
  /// Pre-sample burn-in discarded before k = 0; defaults to 10 n.
  std::optional<std::size_t> burn_in;

  double gamma = 0.9;
  std::vector<double> q_diag;  ///< state-cost diagonal; defaults to ones(n)
  double r_weight = 1.0;
  DitherSpec dither;

  std::size_t n() const { return model.n(); }
  std::size_t m() const { return model.m(); }
  std::size_t p() const { return model.p(); }
  std::size_t effective_burn_in() const { return burn_in.value_or(10 * n()); }
  std::size_t dither_window() const {
    return dither.window.value_or(horizon / 10);
  }

  void validate() const {
    if (horizon < 1) throw ParseError("config: horizon must be >= 1");
    if (seeds.empty()) throw ParseError("config: need at least one seed");
    if (!model.is_finite()) throw ParseError("config: nonfinite model parameter");
    if (kind == Kind::lqg && !(gamma > 0.0 && gamma < 1.0))
      throw ParseError("config: gamma must lie in (0, 1)");
  }
};

inline ExperimentConfig::Kind experiment_kind_from_string(const std::string& s) {
  if (s == "identify-offline") return ExperimentConfig::Kind::identify_offline;
  if (s == "identify-online") return ExperimentConfig::Kind::identify_online;
  if (s == "estimate") return ExperimentConfig::Kind::estimate;
  if (s == "lqg") return ExperimentConfig::Kind::lqg;
  if (s == "pitfall-demo") return ExperimentConfig::Kind::pitfall_demo;
  throw ParseError("config: unknown experiment kind '" + s + "'");
}

inline std::string to_string(ExperimentConfig::Kind kind) {
  switch (kind) {
    case ExperimentConfig::Kind::identify_offline: return "identify-offline";
    case ExperimentConfig::Kind::identify_online: return "identify-online";
    case ExperimentConfig::Kind::estimate: return "estimate";
    case ExperimentConfig::Kind::lqg: return "lqg";
    case ExperimentConfig::Kind::pitfall_demo: return "pitfall-demo";
  }
  return "?";
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    if (j.contains("kind"))
      cfg.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("model")) cfg.model = params_from_json(j.at("model"));
    if (j.contains("input")) {
      const auto& in = j.at("input");
      const std::string kind = in.value("kind", std::string("white"));
      if (kind == "white") cfg.input.kind = InputSpec::Kind::white;
      else if (kind == "prbs") cfg.input.kind = InputSpec::Kind::prbs;
      else if (kind == "file") cfg.input.kind = InputSpec::Kind::file;
      else throw ParseError("config: unknown input kind '" + kind + "'");
      cfg.input.variance = in.value("variance", 1.0);
      cfg.input.amplitude = in.value("amplitude", 1.0);
      cfg.input.path = in.value("path", std::string());
    }
    cfg.horizon = j.value("horizon", cfg.horizon);
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.vi_iterations = j.value("vi_iterations", cfg.vi_iterations);
    cfg.p0 = j.value("p0", cfg.p0);
    if (j.contains("burn_in")) cfg.burn_in = j.at("burn_in").get<std::size_t>();
    cfg.gamma = j.value("gamma", cfg.gamma);
    if (j.contains("Q")) cfg.q_diag = j.at("Q").get<std::vector<double>>();
    cfg.r_weight = j.value("R", cfg.r_weight);
    if (j.contains("dither")) {
      cfg.dither.amplitude = j.at("dither").value("amplitude", 1.0);
      if (j.at("dither").contains("window"))
        cfg.dither.window = j.at("dither").at("window").get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j{{"kind", to_string(cfg.kind)},
                   {"model", params_to_json(cfg.model)},
                   {"horizon", cfg.horizon},
                   {"seeds", cfg.seeds},
                   {"vi_iterations", cfg.vi_iterations},
                   {"p0", cfg.p0},
                   {"gamma", cfg.gamma},
                   {"R", cfg.r_weight}};
  nlohmann::json in;
  switch (cfg.input.kind) {
    case InputSpec::Kind::white:
      in = {{"kind", "white"}, {"variance", cfg.input.variance}};
      break;
    case InputSpec::Kind::prbs:
      in = {{"kind", "prbs"}, {"amplitude", cfg.input.amplitude}};
      break;
    case InputSpec::Kind::file:
      in = {{"kind", "file"}, {"path", cfg.input.path}};
      break;
  }
  j["input"] = in;
  if (cfg.burn_in) j["burn_in"] = *cfg.burn_in;
  if (!cfg.q_diag.empty()) j["Q"] = cfg.q_diag;
  j["dither"] = {{"amplitude", cfg.dither.amplitude},
                 {"window", cfg.dither_window()}};
  return j;
}

/// Maximal-length PRBS from the 31-bit Fibonacci LFSR x^31 + x^28 + 1,
/// seeded from the experiment seed; emits +/- amplitude.
class PrbsGenerator {
 public:
  PrbsGenerator(std::uint64_t seed, double amplitude)
      : amplitude_(amplitude),
        reg_(static_cast<std::uint32_t>(splitmix64(seed) & 0x7fffffffu)) {
    if (reg_ == 0) reg_ = 1;
  }

  double next() {
    const std::uint32_t bit = ((reg_ >> 30) ^ (reg_ >> 27)) & 1u;
    reg_ = ((reg_ << 1) | bit) & 0x7fffffffu;
    return (reg_ & 1u) ? amplitude_ : -amplitude_;
  }

 private:
  double amplitude_;
  std::uint32_t reg_;
};

inline std::vector<double> make_input(const InputSpec& spec, std::size_t length,
                                      std::uint64_t seed) {
  std::vector<double> u(length, 0.0);
  switch (spec.kind) {
    case InputSpec::Kind::white: {
      const RandomStream stream = make_stream(seed, StreamTag::input);
      const double sd = std::sqrt(spec.variance);
      for (std::size_t k = 0; k < length; ++k) u[k] = sd * stream.normal_at(k);
      break;
    }
    case InputSpec::Kind::prbs: {
      PrbsGenerator prbs(seed, spec.amplitude);
      for (std::size_t k = 0; k < length; ++k) u[k] = prbs.next();
      break;
    }
    case InputSpec::Kind::file: {
      const Trajectory traj = load_trajectory(spec.path);
      if (traj.length() < length)
        throw ParseError("input file shorter than required length");
      u.assign(traj.u.begin(), traj.u.begin() + static_cast<long>(length));
      break;
    }
  }
  return u;
}

/// Open-loop trajectory for one experiment seed, burn-in discarded.
inline Trajectory make_trajectory(const ExperimentConfig& cfg,
                                  std::uint64_t seed, bool with_truth) {
  const std::size_t total = cfg.effective_burn_in() + cfg.horizon;
  const std::vector<double> u = make_input(cfg.input, total, seed);
  SimulateOptions opts;
  opts.with_truth = with_truth;
  opts.burn_in = cfg.effective_burn_in();
  return simulate_armax(cfg.model, u, cfg.horizon, seed, opts);
}

/// Step-by-step ARMAX plant for closed-loop runs: the output at k is
/// available before the input at k is chosen. The canonical state is
/// rolled alongside as ground truth.
class ArmaxPlant {
 public:
  ArmaxPlant(const ArmaxParams& params, std::uint64_t seed)
      : params_(params),
        ss_(to_observable_canonical(params)),
        noise_(make_stream(seed, StreamTag::process_noise)),
        sigma_(std::sqrt(params.sigma2)),
        y_hist_(params.n()),
        u_hist_(params.m()),
        w_hist_(params.p()),
        x_(Eigen::VectorXd::Zero(ss_.order())) {}

  /// y_k, a function of past inputs/outputs and the fresh noise draw.
  double emit_output() {
    w_k_ = sigma_ * noise_.normal_at(k_);
    double acc = w_k_;
    for (std::size_t i = 1; i <= params_.n(); ++i)
      acc -= params_.a.coeffs[i - 1] * y_hist_(i);
    for (std::size_t i = 1; i <= params_.m(); ++i)
      acc += params_.b.coeffs[i - 1] * u_hist_(i);
    for (std::size_t i = 1; i <= params_.p(); ++i)
      acc += params_.c.coeffs[i - 1] * w_hist_(i);
    y_k_ = acc;
    return acc;
  }

  /// Commit the chosen input and advance to k+1.
  void apply_input(double u_k) {
    y_hist_.push(y_k_);
    u_hist_.push(u_k);
    w_hist_.push(w_k_);
    x_ = ss_.A * x_ + ss_.B1 * u_k + ss_.B2 * w_k_;
    ++k_;
  }

  const Eigen::VectorXd& state() const { return x_; }  ///< x_k before emit/apply of k
  std::uint64_t k() const { return k_; }

 private:
  ArmaxParams params_;
  StateSpaceModel ss_;
  RandomStream noise_;
  double sigma_;
  LagBuffer y_hist_, u_hist_, w_hist_;
  Eigen::VectorXd x_;
  double y_k_ = 0.0, w_k_ = 0.0;
  std::uint64_t k_ = 0;
};

/// Log-spaced sample indices in [1, limit], always including limit.
inline std::vector<std::uint64_t> log_spaced_indices(std::uint64_t limit,
                                                     double factor = 1.3) {
  std::vector<std::uint64_t> out;
  double v = 1.0;
  std::uint64_t last = 0;
  while (static_cast<std::uint64_t>(v) < limit) {
    const auto k = static_cast<std::uint64_t>(v);
    if (k != last) out.push_back(k);
    last = k;
    v = std::max(v * factor, v + 1.0);
  }
  if (out.empty() || out.back() != limit) out.push_back(limit);
  return out;
}

inline std::size_t max_parallel_seeds() {
  if (const char* env = std::getenv("ARMAX_MAX_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs fn(i) for i = 0..count-1 across worker threads. Each index owns
/// its slot of any output vector, so results are deterministic regardless
/// of scheduling.
template <typename Fn>
inline void parallel_for_index(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min(count, max_parallel_seeds());
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  for (auto& t : pool) t.join();
}

struct ExperimentReport {
  nlohmann::json config_echo;
  std::string tool_version = kToolVersion;
  std::vector<nlohmann::json> per_seed;
  nlohmann::json aggregates;

  nlohmann::json to_json() const {
    return nlohmann::json{{"schema_version", kReportSchemaVersion},
                          {"tool_version", tool_version},
                          {"config", config_echo},
                          {"per_seed", per_seed},
                          {"aggregates", aggregates}};
  }
};

namespace detail {

inline double rel_error(const Eigen::VectorXd& est, const Eigen::VectorXd& truth) {
  const double denom = truth.norm();
  return denom > 0.0 ? (est - truth).norm() / denom : est.norm();
}

inline nlohmann::json vec_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline double median_of(const std::vector<nlohmann::json>& per_seed,
                        const char* key) {
  std::vector<double> vals;
  for (const auto& s : per_seed)
    if (s.contains(key)) vals.push_back(s.at(key).get<double>());
  return vals.empty() ? std::numeric_limits<double>::quiet_NaN() : median(vals);
}

}  // namespace detail

/// Per-seed online identification run with log-spaced convergence
/// sampling. Returns the identifier at the end plus the error curve and
/// the reconstructed-residual whiteness statistic.
struct OnlineRun {
  OnlineIdentifier ident;
  std::vector<std::pair<std::uint64_t, double>> error_curve;
  Eigen::VectorXd final_theta;
  double final_eps2 = 0.0;
  double orthogonality_max = 0.0;  ///< max |corr(e_k, e_{k-i})|, i = 1..2p
};

/// Prediction errors e_k(theta) of a fixed combined estimate over a
/// trajectory, with the lagged errors regenerated recursively and zero
/// pre-samples.
inline std::vector<double> prediction_error_series(const Trajectory& traj,
                                                   const Eigen::VectorXd& theta,
                                                   std::size_t n, std::size_t m,
                                                   std::size_t p) {
  if (theta.size() != static_cast<Eigen::Index>(n + m + p))
    throw DimensionError("prediction_error_series: theta size != n + m + p");
  std::vector<double> e(traj.length(), 0.0);
  for (std::size_t k = 0; k < traj.length(); ++k) {
    double yhat = 0.0;
    for (std::size_t i = 1; i <= n && i <= k; ++i)
      yhat -= theta[i - 1] * traj.y[k - i];
    for (std::size_t i = 1; i <= m && i <= k; ++i)
      yhat += theta[n + i - 1] * traj.u[k - i];
    for (std::size_t i = 1; i <= p && i <= k; ++i)
      yhat += theta[n + m + i - 1] * e[k - i];
    e[k] = traj.y[k] - yhat;
  }
  return e;
}

/// Optional per-step record of an online-identification run.
struct OnlineTrace {
  std::vector<Eigen::VectorXd> theta;
  std::vector<double> eps2;
};

inline OnlineRun run_online_identification(const ExperimentConfig& cfg,
                                           const Trajectory& traj,
                                           OnlineTrace* trace = nullptr) {
  OnlineRun run;
  run.ident = OnlineIdentifier(cfg.n(), cfg.m(), cfg.p(), cfg.p0);
  const Eigen::VectorXd truth = cfg.model.theta();
  const std::vector<std::uint64_t> marks =
      log_spaced_indices(traj.length() ? traj.length() - 1 : 1);
  std::size_t mark = 0;
  for (std::size_t k = 0; k < traj.length(); ++k) {
    const Eigen::VectorXd theta = run.ident.step(traj.u[k], traj.y[k]);
    if (trace) {
      trace->theta.push_back(theta);
      trace->eps2.push_back(run.ident.eps2());
    }
    if (mark < marks.size() && marks[mark] == k) {
      run.error_curve.emplace_back(k, detail::rel_error(theta, truth));
      ++mark;
    }
  }
  run.final_theta = run.ident.combined_estimate();
  run.final_eps2 = run.ident.eps2();
  if (cfg.p() > 0) {
    const std::vector<double> e = prediction_error_series(
        traj, run.final_theta, cfg.n(), cfg.m(), cfg.p());
    const std::vector<double> rho = autocorrelation_coefficients(e, 2 * cfg.p());
    for (std::size_t i = 1; i < rho.size(); ++i)
      run.orthogonality_max = std::max(run.orthogonality_max, std::abs(rho[i]));
  }
  return run;
}

/// Closed-loop model-free LQG run for one seed.
struct LqgRun {
  Eigen::RowVectorXd K_final;
  Eigen::MatrixXd P_final;
  double gain_rel_error = 0.0;  ///< vs the model-based gain, infinity norm
  double mean_cost = 0.0;       ///< tail average of discounted cost windows
  double mean_vstar = 0.0;      ///< tail average of V*(x_k) at window starts
  double cost_rel_error = 0.0;
  std::size_t rejected = 0;
  std::vector<std::pair<std::uint64_t, double>> gain_error_curve;
};

/// Optional per-step record of a closed-loop run.
struct LqgTrace {
  std::vector<double> u, y, cost;
  std::vector<Eigen::RowVectorXd> K;
};

inline LqgRun run_lqg_closed_loop(const ExperimentConfig& cfg,
                                  std::uint64_t seed,
                                  const LqrSolution& model_based,
                                  LqgTrace* trace = nullptr) {
  const std::size_t n = cfg.n();
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(ni, ni);
  if (!cfg.q_diag.empty()) {
    if (cfg.q_diag.size() != n) throw ParseError("config: Q diagonal size != n");
    Q = Eigen::Map<const Eigen::VectorXd>(cfg.q_diag.data(), ni).asDiagonal();
  }
  const double R = cfg.r_weight;
  const double gamma = cfg.gamma;
  const std::size_t T = cfg.horizon;
  const std::size_t dither_end = cfg.dither_window();
  const RandomStream dither = make_stream(seed, StreamTag::dither);

  ArmaxPlant plant(cfg.model, seed);
  OnlineIdentifier ident(cfg.n(), cfg.m(), cfg.p(), cfg.p0);
  LqgState lqg(ni);
  EstimatorState est(ni);

  const StateSpaceModel truth_ss = to_observable_canonical(cfg.model);
  const double vstar_offset = gamma * cfg.model.sigma2 / (1.0 - gamma) *
                              truth_ss.B2.dot(model_based.P * truth_ss.B2);

  std::vector<double> stage_cost(T, 0.0);
  std::vector<Eigen::VectorXd> states;
  states.reserve(T);
  const std::vector<std::uint64_t> marks = log_spaced_indices(T ? T - 1 : 1);
  std::size_t mark = 0;
  LqgRun run;

  for (std::size_t k = 0; k < T; ++k) {
    const double y_k = plant.emit_output();
    states.push_back(plant.state());
    auto [u_nominal, next_lqg] = model_free_lqg_step(
        lqg, ident, est.x_hat, Q, R, gamma);
    lqg = std::move(next_lqg);
    double u_k = u_nominal;
    if (k < dither_end) u_k += cfg.dither.amplitude * dither.normal_at(k);
    auto [next_est, e_k, y_hat] = model_free_estimator_step(ident, est, u_k, y_k);
    est = std::move(next_est);
    plant.apply_input(u_k);
    stage_cost[k] = states[k].dot(Q * states[k]) + R * u_k * u_k;
    if (trace) {
      trace->u.push_back(u_k);
      trace->y.push_back(y_k);
      trace->cost.push_back(stage_cost[k]);
      trace->K.push_back(lqg.K);
    }
    if (mark < marks.size() && marks[mark] == k) {
      const double denom = model_based.K.cwiseAbs().maxCoeff();
      run.gain_error_curve.emplace_back(
          k, (lqg.K - model_based.K).cwiseAbs().maxCoeff() / denom);
      ++mark;
    }
  }

  run.K_final = lqg.K;
  run.P_final = lqg.P;
  run.rejected = lqg.rejected;
  run.gain_rel_error = (lqg.K - model_based.K).cwiseAbs().maxCoeff() /
                       model_based.K.cwiseAbs().maxCoeff();

  // Achieved discounted cost: average forward windows J_k = sum gamma^t z_{k+t}
  // over the post-dither tail and compare with V*(x_k) at the window starts.
  const std::size_t H = static_cast<std::size_t>(
      std::ceil(std::log(1e-12) / std::log(gamma)));
  const std::size_t tail = std::min<std::size_t>(T / 4, 50000);
  if (T > H + tail) {
    std::vector<double> gpow(H);
    for (std::size_t t = 0; t < H; ++t) gpow[t] = std::pow(gamma, t);
    const std::size_t start = T - tail - H;
    const std::size_t stride = std::max<std::size_t>(1, tail / 1500);
    double sumJ = 0.0, sumV = 0.0;
    std::size_t count = 0;
    for (std::size_t k0 = start; k0 + H <= T; k0 += stride) {
      double J = 0.0;
      for (std::size_t t = 0; t < H; ++t) J += gpow[t] * stage_cost[k0 + t];
      sumJ += J;
      sumV += states[k0].dot(model_based.P * states[k0]) + vstar_offset;
      ++count;
    }
    run.mean_cost = sumJ / static_cast<double>(count);
    run.mean_vstar = sumV / static_cast<double>(count);
    run.cost_rel_error =
        std::abs(run.mean_cost - run.mean_vstar) / run.mean_vstar;
  }
  return run;
}

/// Model-free estimation run for one seed: identifier plus canonical
/// estimator against the simulated truth state.
struct EstimationRun {
  double tail_error_ratio = 0.0;  ///< mean ||x - x^||^2 / mean ||x||^2, final window
  std::vector<double> window_error_means;  ///< successive 10^4-sample windows
  double final_eps2 = 0.0;
};

/// Optional per-step record of an estimation run.
struct EstimateTrace {
  std::vector<double> e, y_hat, err_sq;
  std::vector<Eigen::VectorXd> x_hat;
};

inline EstimationRun run_model_free_estimation(const ExperimentConfig& cfg,
                                               const Trajectory& traj,
                                               EstimateTrace* trace = nullptr) {
  if (!traj.x)
    throw PreconditionError("run_model_free_estimation: trajectory lacks truth states");
  const std::size_t T = traj.length();
  OnlineIdentifier ident(cfg.n(), cfg.m(), cfg.p(), cfg.p0);
  EstimatorState est(static_cast<Eigen::Index>(cfg.n()));
  std::vector<double> err_sq(T, 0.0), state_sq(T, 0.0);
  for (std::size_t k = 0; k < T; ++k) {
    const Eigen::VectorXd& x_true = (*traj.x)[k];
    err_sq[k] = (x_true - est.x_hat).squaredNorm();
    state_sq[k] = x_true.squaredNorm();
    if (trace) {
      trace->x_hat.push_back(est.x_hat);
      trace->err_sq.push_back(err_sq[k]);
    }
    auto [next, e_k, y_hat] = model_free_estimator_step(ident, est, traj.u[k], traj.y[k]);
    if (trace) {
      trace->e.push_back(e_k);
      trace->y_hat.push_back(y_hat);
    }
    est = std::move(next);
  }
  EstimationRun run;
  run.final_eps2 = ident.eps2();
  const std::size_t window = std::min<std::size_t>(10000, std::max<std::size_t>(1, T / 2));
  for (std::size_t start = 0; start + window <= T; start += window) {
    double acc = 0.0;
    for (std::size_t k = start; k < start + window; ++k) acc += err_sq[k];
    run.window_error_means.push_back(acc / static_cast<double>(window));
  }
  double err_tail = 0.0, state_tail = 0.0;
  for (std::size_t k = T - window; k < T; ++k) {
    err_tail += err_sq[k];
    state_tail += state_sq[k];
  }
  run.tail_error_ratio = state_tail > 0.0 ? err_tail / state_tail : 0.0;
  return run;
}

namespace detail {

inline nlohmann::json curve_json(
    const std::vector<std::pair<std::uint64_t, double>>& curve) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [k, v] : curve) arr.push_back({k, v});
  return arr;
}

}  // namespace detail

/// Streaming-estimate CSV: `k,a1..an,b1..bm,c1..cp,eps2`.
inline void write_estimates_csv(const std::filesystem::path& path,
                                const OnlineTrace& trace, std::size_t n,
                                std::size_t m, std::size_t p) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path.string());
  out << "k";
  for (std::size_t i = 1; i <= n; ++i) out << ",a" << i;
  for (std::size_t i = 1; i <= m; ++i) out << ",b" << i;
  for (std::size_t i = 1; i <= p; ++i) out << ",c" << i;
  out << ",eps2\n";
  for (std::size_t k = 0; k < trace.theta.size(); ++k) {
    out << k;
    for (Eigen::Index j = 0; j < trace.theta[k].size(); ++j)
      out << ',' << format_double(trace.theta[k][j]);
    out << ',' << format_double(trace.eps2[k]) << "\n";
  }
}

/// Estimator CSV: `k,e,y_hat,x_hat1..x_hatn[,err_sq]`.
inline void write_estimation_csv(const std::filesystem::path& path,
                                 const EstimateTrace& trace, std::size_t n,
                                 bool with_truth) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path.string());
  out << "k,e,y_hat";
  for (std::size_t i = 1; i <= n; ++i) out << ",x_hat" << i;
  if (with_truth) out << ",err_sq";
  out << "\n";
  for (std::size_t k = 0; k < trace.e.size(); ++k) {
    out << k << ',' << format_double(trace.e[k]) << ','
        << format_double(trace.y_hat[k]);
    for (Eigen::Index j = 0; j < trace.x_hat[k].size(); ++j)
      out << ',' << format_double(trace.x_hat[k][j]);
    if (with_truth) out << ',' << format_double(trace.err_sq[k]);
    out << "\n";
  }
}

/// Closed-loop CSV: `k,u,y,cost,Kk_1..Kk_n`.
inline void write_lqg_csv(const std::filesystem::path& path,
                          const LqgTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path.string());
  const std::size_t n =
      trace.K.empty() ? 0 : static_cast<std::size_t>(trace.K[0].size());
  out << "k,u,y,cost";
  for (std::size_t i = 1; i <= n; ++i) out << ",Kk_" << i;
  out << "\n";
  for (std::size_t k = 0; k < trace.u.size(); ++k) {
    out << k << ',' << format_double(trace.u[k]) << ','
        << format_double(trace.y[k]) << ',' << format_double(trace.cost[k]);
    for (Eigen::Index j = 0; j < trace.K[k].size(); ++j)
      out << ',' << format_double(trace.K[k][j]);
    out << "\n";
  }
}

/// Runs the configured experiment over all seeds (in parallel when
/// allowed), collecting per-seed metrics and medians. When `out_dir` is
/// set, artifacts are written there: report.json always, plus per-kind
/// CSV/JSON artifacts for the first seed.
inline ExperimentReport run_experiment(
    const ExperimentConfig& cfg,
    const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  cfg.validate();
  if (out_dir) std::filesystem::create_directories(*out_dir);
  ExperimentReport report;
  report.config_echo = config_to_json(cfg);
  report.per_seed.resize(cfg.seeds.size());

  const Eigen::VectorXd truth = cfg.model.theta();

  switch (cfg.kind) {
    case ExperimentConfig::Kind::identify_offline: {
      parallel_for_index(cfg.seeds.size(), [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        nlohmann::json& out = report.per_seed[i];
        out["seed"] = seed;
        try {
          const Trajectory traj = make_trajectory(cfg, seed, false);
          const OfflineIdentification full = armax_identify_offline_full(
              traj, cfg.n(), cfg.m(), cfg.p(), cfg.vi_iterations);
          out["theta"] = detail::vec_json(full.params.theta());
          out["sigma2"] = full.params.sigma2;
          out["condition"] = full.condition;
          out["rel_error"] = detail::rel_error(full.params.theta(), truth);
          out["sigma2_rel_error"] =
              cfg.model.sigma2 > 0.0
                  ? std::abs(full.params.sigma2 - cfg.model.sigma2) / cfg.model.sigma2
                  : full.params.sigma2;
          if (i == 0 && out_dir) {
            nlohmann::json ident_report{
                {"theta_tilde", detail::vec_json(full.theta_tilde)},
                {"c", full.params.c.coeffs},
                {"sigma2", full.params.sigma2},
                {"condition", full.condition}};
            nlohmann::json trace = nlohmann::json::array();
            for (std::size_t it = 0; it < full.ma_trace.eps2.size(); ++it)
              trace.push_back({{"iter", it},
                               {"c", detail::vec_json(full.ma_trace.c_estimates[it])},
                               {"eps2", full.ma_trace.eps2[it]}});
            ident_report["trace"] = trace;
            write_json(ident_report, *out_dir / "identification.json");
          }
        } catch (const Error& e) {
          out["error"] = e.what();
        }
      });
      break;
    }
    case ExperimentConfig::Kind::identify_online: {
      parallel_for_index(cfg.seeds.size(), [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        nlohmann::json& out = report.per_seed[i];
        out["seed"] = seed;
        try {
          const Trajectory traj = make_trajectory(cfg, seed, false);
          OnlineTrace trace;
          const bool keep_trace = i == 0 && out_dir.has_value();
          const OnlineRun run =
              run_online_identification(cfg, traj, keep_trace ? &trace : nullptr);
          if (keep_trace)
            write_estimates_csv(*out_dir / "estimates.csv", trace, cfg.n(),
                                cfg.m(), cfg.p());
          out["theta"] = detail::vec_json(run.final_theta);
          out["rel_error"] = detail::rel_error(run.final_theta, truth);
          out["eps2"] = run.final_eps2;
          out["eps2_abs_error"] = std::abs(run.final_eps2 - cfg.model.sigma2);
          out["orthogonality_max"] = run.orthogonality_max;
          out["orthogonality_bound"] =
              3.0 / std::sqrt(static_cast<double>(traj.length()));
          out["error_curve"] = detail::curve_json(run.error_curve);
        } catch (const Error& e) {
          out["error"] = e.what();
        }
      });
      break;
    }
    case ExperimentConfig::Kind::estimate: {
      parallel_for_index(cfg.seeds.size(), [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        nlohmann::json& out = report.per_seed[i];
        out["seed"] = seed;
        try {
          const Trajectory traj = make_trajectory(cfg, seed, true);
          EstimateTrace trace;
          const bool keep_trace = i == 0 && out_dir.has_value();
          const EstimationRun run =
              run_model_free_estimation(cfg, traj, keep_trace ? &trace : nullptr);
          if (keep_trace)
            write_estimation_csv(*out_dir / "estimation.csv", trace, cfg.n(), true);
          out["tail_error_ratio"] = run.tail_error_ratio;
          out["eps2"] = run.final_eps2;
          out["window_error_means"] = run.window_error_means;
        } catch (const Error& e) {
          out["error"] = e.what();
        }
      });
      break;
    }
    case ExperimentConfig::Kind::lqg: {
      const StateSpaceModel ss = to_observable_canonical(cfg.model);
      const auto ni = static_cast<Eigen::Index>(cfg.n());
      Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(ni, ni);
      if (!cfg.q_diag.empty())
        Q = Eigen::Map<const Eigen::VectorXd>(cfg.q_diag.data(), ni).asDiagonal();
      const LqrSolution model_based =
          dare_solve(ss.A, ss.B1, Q, cfg.r_weight, cfg.gamma,
                     Eigen::MatrixXd::Identity(ni, ni));
      report.aggregates["model_based_K"] = detail::vec_json(model_based.K.transpose());
      parallel_for_index(cfg.seeds.size(), [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        nlohmann::json& out = report.per_seed[i];
        out["seed"] = seed;
        try {
          LqgTrace trace;
          const bool keep_trace = i == 0 && out_dir.has_value();
          const LqgRun run =
              run_lqg_closed_loop(cfg, seed, model_based, keep_trace ? &trace : nullptr);
          if (keep_trace) write_lqg_csv(*out_dir / "closed_loop.csv", trace);
          out["K"] = detail::vec_json(run.K_final.transpose());
          {
            std::vector<double> p_flat(run.P_final.data(),
                                       run.P_final.data() + run.P_final.size());
            out["P"] = p_flat;
          }
          out["gain_rel_error"] = run.gain_rel_error;
          out["mean_cost"] = run.mean_cost;
          out["mean_vstar"] = run.mean_vstar;
          out["cost_rel_error"] = run.cost_rel_error;
          out["rejected_sweeps"] = run.rejected;
          out["gain_error_curve"] = detail::curve_json(run.gain_error_curve);
        } catch (const Error& e) {
          out["error"] = e.what();
        }
      });
      break;
    }
    case ExperimentConfig::Kind::pitfall_demo: {
      // Example-style pitfall: the same output process admits realizations
      // whose optimal estimation errors differ drastically.
      const double alpha = 0.5 * (3.0 + std::sqrt(5.0));
      StateSpaceModel first;
      first.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
      first.B1 = Eigen::VectorXd::Zero(1);
      first.B2 = Eigen::VectorXd::Constant(1, 1.0);
      first.C = Eigen::RowVectorXd::Constant(1, 1.0);
      StateSpaceModel second = first;
      second.C = Eigen::RowVectorXd::Constant(1, 1.0 / alpha);
      const ObserverSolution sol1 =
          solve_estimation_are(first, NoiseCovariance::scalar(1.0, 1.0, 2.0));
      const ObserverSolution sol2 = solve_estimation_are(
          second, NoiseCovariance::scalar(alpha, alpha, alpha));
      report.aggregates["sigma_first"] = sol1.Sigma(0, 0);
      report.aggregates["gain_first"] = sol1.L[0];
      report.aggregates["sigma_second"] = sol2.Sigma(0, 0);
      report.aggregates["gain_second"] = sol2.L[0];
      parallel_for_index(cfg.seeds.size(), [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        nlohmann::json& out = report.per_seed[i];
        out["seed"] = seed;
        const std::size_t T = cfg.horizon;
        const RandomStream w = make_stream(seed, StreamTag::process_noise);
        const RandomStream mu = make_stream(seed, StreamTag::scratch);
        const RandomStream wb = make_stream(seed, StreamTag::input);
        std::vector<double> y1(T), y2(T);
        for (std::size_t k = 0; k < T; ++k) {
          const double wk = w.normal_at(k);
          const double wk1 = k > 0 ? w.normal_at(k - 1) : 0.0;
          y1[k] = wk1 + wk + mu.normal_at(k);
          const double bk = std::sqrt(alpha) * wb.normal_at(k);
          const double bk1 = k > 0 ? std::sqrt(alpha) * wb.normal_at(k - 1) : 0.0;
          y2[k] = bk1 / alpha + bk;
        }
        const std::vector<double> r1 = autocorrelation(y1, 1);
        const std::vector<double> r2 = autocorrelation(y2, 1);
        out["r0_first"] = r1[0];
        out["r1_first"] = r1[1];
        out["r0_second"] = r2[0];
        out["r1_second"] = r2[1];
        out["r0_gap"] = std::abs(r1[0] - r2[0]);
        out["r1_gap"] = std::abs(r1[1] - r2[1]);
        // Lag-1 correlation coefficients; their gap is the scale-free
        // indistinguishability statistic.
        out["rho1_gap"] = std::abs(r1[1] / r1[0] - r2[1] / r2[0]);
        out["bound"] = 3.0 / std::sqrt(static_cast<double>(T));
      });
      break;
    }
  }

  // Aggregate medians for the scalar metrics present.
  for (const char* key :
       {"rel_error", "sigma2_rel_error", "eps2_abs_error", "orthogonality_max",
        "tail_error_ratio", "gain_rel_error", "cost_rel_error", "r0_gap",
        "r1_gap", "rho1_gap"}) {
    const double med = detail::median_of(report.per_seed, key);
    if (!std::isnan(med)) report.aggregates[std::string("median_") + key] = med;
  }
  std::size_t failures = 0;
  for (const auto& s : report.per_seed)
    if (s.contains("error")) ++failures;
  report.aggregates["seed_failures"] = failures;

  if (out_dir) write_json(report.to_json(), *out_dir / "report.json");
  return report;
}

}  // namespace armax
