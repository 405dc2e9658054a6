// Command-line harness: simulation, identification, estimation and LQG
// experiments driven by a JSON config, plus the acceptance benchmark.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "armax/acceptance.hpp"
#include "armax/errors.hpp"
#include "armax/harness.hpp"
#include "armax/io.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
  auto* opt = cmd->add_option("--config", args.config_path, "experiment config JSON");
  if (config_required) opt->required();
  cmd->add_option("--out", args.out_dir, "output directory for artifacts");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&args](std::uint64_t s) { args.seed = s; },
      "override the config seed list with a single seed");
}

armax::ExperimentConfig load_config(const CommonArgs& args) {
  armax::ExperimentConfig cfg = armax::config_from_json(armax::load_json(args.config_path));
  if (args.seed) cfg.seeds = {*args.seed};
  return cfg;
}

std::optional<fs::path> out_path(const CommonArgs& args) {
  if (args.out_dir.empty()) return std::nullopt;
  fs::create_directories(args.out_dir);
  return fs::path(args.out_dir);
}

int run_simulate(const CommonArgs& args, bool with_truth) {
  armax::ExperimentConfig cfg = load_config(args);
  const auto out = out_path(args);
  if (!out) throw armax::ParseError("simulate: --out is required");
  for (const std::uint64_t seed : cfg.seeds) {
    const armax::Trajectory traj = armax::make_trajectory(cfg, seed, with_truth);
    armax::save_trajectory(traj, *out / ("trajectory_seed" + std::to_string(seed) + ".csv"));
  }
  std::cout << "wrote " << cfg.seeds.size() << " trajectories to " << out->string() << "\n";
  return 0;
}

int run_identify_stream(const armax::ExperimentConfig& cfg,
                        const std::string& input_csv, const fs::path& out) {
  const armax::Trajectory traj = armax::load_trajectory(input_csv);
  armax::OnlineIdentifier ident(cfg.n(), cfg.m(), cfg.p(), cfg.p0);
  armax::OnlineTrace trace;
  for (std::size_t k = 0; k < traj.length(); ++k) {
    trace.theta.push_back(ident.step(traj.u[k], traj.y[k]));
    trace.eps2.push_back(ident.eps2());
  }
  armax::write_estimates_csv(out / "estimates.csv", trace, cfg.n(), cfg.m(), cfg.p());
  const Eigen::VectorXd theta = ident.combined_estimate();
  nlohmann::json summary{
      {"theta", std::vector<double>(theta.data(), theta.data() + theta.size())},
      {"eps2", ident.eps2()},
      {"samples", traj.length()},
      {"rejected_steps", ident.step_log().size()}};
  armax::write_json(summary, out / "identify_summary.json");
  std::cout << "streamed " << traj.length() << " samples; estimates.csv written\n";
  return 0;
}

int run_estimate_file(const armax::ExperimentConfig& cfg,
                      const std::string& input_csv, const fs::path& out) {
  const armax::Trajectory traj = armax::load_trajectory(input_csv);
  const bool with_truth = traj.x.has_value();
  armax::OnlineIdentifier ident(cfg.n(), cfg.m(), cfg.p(), cfg.p0);
  armax::EstimatorState est(static_cast<Eigen::Index>(cfg.n()));
  armax::EstimateTrace trace;
  for (std::size_t k = 0; k < traj.length(); ++k) {
    trace.x_hat.push_back(est.x_hat);
    if (with_truth)
      trace.err_sq.push_back(((*traj.x)[k] - est.x_hat).squaredNorm());
    auto [next, e_k, y_hat] =
        armax::model_free_estimator_step(ident, est, traj.u[k], traj.y[k]);
    trace.e.push_back(e_k);
    trace.y_hat.push_back(y_hat);
    est = std::move(next);
  }
  armax::write_estimation_csv(out / "estimation.csv", trace, cfg.n(), with_truth);
  nlohmann::json summary{{"samples", traj.length()}, {"eps2", ident.eps2()}};
  if (with_truth && !trace.err_sq.empty()) {
    const std::size_t window =
        std::min<std::size_t>(10000, std::max<std::size_t>(1, traj.length() / 2));
    double acc = 0.0;
    for (std::size_t k = traj.length() - window; k < traj.length(); ++k)
      acc += trace.err_sq[k];
    summary["tail_window"] = window;
    summary["tail_mean_err_sq"] = acc / static_cast<double>(window);
  }
  armax::write_json(summary, out / "estimate_summary.json");
  std::cout << "estimated " << traj.length() << " samples; estimation.csv written\n";
  return 0;
}

int run_experiment_cmd(const CommonArgs& args,
                       std::optional<armax::ExperimentConfig::Kind> forced_kind) {
  armax::ExperimentConfig cfg = load_config(args);
  if (forced_kind) cfg.kind = *forced_kind;
  const armax::ExperimentReport report = armax::run_experiment(cfg, out_path(args));
  std::cout << report.aggregates.dump(2) << "\n";
  const auto failures = report.aggregates.value("seed_failures", 0);
  if (failures > 0) {
    std::cerr << failures << " seed(s) failed\n";
    return 1;
  }
  return 0;
}

armax::ExperimentConfig default_pitfall_config() {
  armax::ExperimentConfig cfg;
  cfg.kind = armax::ExperimentConfig::Kind::pitfall_demo;
  cfg.horizon = 100000;
  cfg.seeds = {1, 2, 3, 4, 5};
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ARMAX identification, model-free estimation and LQG toolkit"};
  app.require_subcommand(1);

  CommonArgs sim_args, ident_args, est_args, lqg_args, pitfall_args, bench_args;
  bool sim_truth = false;
  std::string ident_stream, est_input;

  auto* sim = app.add_subcommand("simulate", "simulate trajectories to CSV");
  add_common(sim, sim_args, true);
  sim->add_flag("--truth", sim_truth, "record noise and state truth columns");

  auto* ident = app.add_subcommand("identify", "offline or online identification");
  add_common(ident, ident_args, true);
  ident->add_option("--stream", ident_stream,
                    "trajectory CSV to stream row-by-row (online mode)");

  auto* est = app.add_subcommand("estimate", "model-free state estimation");
  add_common(est, est_args, true);
  est->add_option("--input", est_input, "trajectory CSV to consume");

  auto* lqg = app.add_subcommand("lqg", "closed-loop model-free LQG");
  add_common(lqg, lqg_args, true);

  auto* pitfall = app.add_subcommand(
      "demo-pitfall", "two realizations of one output process, different Sigma");
  add_common(pitfall, pitfall_args, false);

  auto* bench = app.add_subcommand("bench", "run the acceptance benchmark");
  add_common(bench, bench_args, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(sim_args, sim_truth);
    if (ident->parsed()) {
      if (!ident_stream.empty()) {
        const auto out = out_path(ident_args);
        if (!out) throw armax::ParseError("identify --stream: --out is required");
        return run_identify_stream(load_config(ident_args), ident_stream, *out);
      }
      return run_experiment_cmd(ident_args, std::nullopt);
    }
    if (est->parsed()) {
      if (!est_input.empty()) {
        const auto out = out_path(est_args);
        if (!out) throw armax::ParseError("estimate --input: --out is required");
        return run_estimate_file(load_config(est_args), est_input, *out);
      }
      return run_experiment_cmd(est_args, armax::ExperimentConfig::Kind::estimate);
    }
    if (lqg->parsed())
      return run_experiment_cmd(lqg_args, armax::ExperimentConfig::Kind::lqg);
    if (pitfall->parsed()) {
      armax::ExperimentConfig cfg = pitfall_args.config_path.empty()
                                        ? default_pitfall_config()
                                        : load_config(pitfall_args);
      cfg.kind = armax::ExperimentConfig::Kind::pitfall_demo;
      const armax::ExperimentReport report =
          armax::run_experiment(cfg, out_path(pitfall_args));
      std::cout << report.aggregates.dump(2) << "\n";
      return 0;
    }
    if (bench->parsed()) {
      const auto results = armax::acceptance::run_all();
      const bool ok = armax::acceptance::print_results(results, std::cout);
      if (!bench_args.out_dir.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : results)
          j.push_back({{"criterion", r.index},
                       {"name", r.name},
                       {"pass", r.pass},
                       {"detail", r.detail},
                       {"seconds", r.seconds}});
        armax::write_json(j, *out_path(bench_args) / "bench.json");
      }
      return ok ? 0 : 1;
    }
  } catch (const armax::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
