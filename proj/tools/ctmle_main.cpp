// command line front end: run one learning experiment, sweep a noise/gap
// grid, execute the self-check suites, or tabulate the measurement-cost
// model. Exit codes: 0 success, 1 failed check, 2 bad configuration,
// 3 runtime failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "ctmle/config.hpp"
#include "ctmle/envs.hpp"
#include "ctmle/errors.hpp"
#include "ctmle/learner.hpp"
#include "ctmle/metrics.hpp"
#include "ctmle/store.hpp"
#include "ctmle/sweep.hpp"
#include "ctmle/verify.hpp"

namespace {

using namespace ctmle;
namespace fs = std::filesystem;

struct RunCli {
  std::string config_path;
  std::string out_dir;
  std::string preset;
  double sigma = 0.0;
  int episodes = 0;
  std::uint64_t seed = 0;
  double schedule_delta = 0.0;
  int value_rollouts = 0;
  int oracle_rollouts = 4096;
  int variance_rollouts = 4096;
  bool no_randomize = false;
};

struct SweepCli {
  std::string config_path;
  std::string out_dir;
  std::vector<double> sigmas = {0.0, 1.0, 2.0};
  std::vector<double> gaps = {0.0625, 0.125, 0.25, 0.5, 1.0};
  int seeds = 5;
  double eps = 0.05;
  int window = 20;
  int episodes = 60;
  std::uint64_t seed = 1;
  int oracle_rollouts = 2048;
};

struct VerifyCli {
  std::string suite = "all";
  std::uint64_t seed = 7;
  bool quick = false;
  std::string json_path;
};

struct ComplexityCli {
  double d = 2.0;
  double eps = 0.05;
  double var_pi = 0.1;
  double horizon = 1.0;
  std::vector<double> lambdas = {0.0, 0.5, 1.0};
  std::vector<double> gaps;
};

void write_error_marker(const std::string& out_dir, const RunConfig& cfg,
                        const std::string& stage, const std::string& message) {
  try {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["config_hash"] = config_hash(cfg);
    j["stage"] = stage;
    j["error"] = message;
    write_text_file((fs::path(out_dir) / "error.json").string(),
                    j.dump(2) + "\n");
  } catch (const std::exception&) {
    // the marker is best effort; the original error wins
  }
}

RunConfig assemble_run_config(const RunCli& cli, const CLI::App* sub) {
  RunConfig cfg;
  if (!cli.config_path.empty()) cfg = load_run_config(cli.config_path);
  if (sub->count("--preset")) cfg.preset = cli.preset;
  if (sub->count("--sigma")) cfg.sigma = cli.sigma;
  if (sub->count("--episodes")) cfg.learner.episodes = cli.episodes;
  if (sub->count("--seed")) cfg.learner.seed = cli.seed;
  if (sub->count("--gap")) {
    cfg.learner.schedule.kind = ScheduleSpec::Kind::equidistant;
    cfg.learner.schedule.delta = cli.schedule_delta;
  }
  if (sub->count("--value-rollouts"))
    cfg.learner.value_rollouts = cli.value_rollouts;
  if (sub->count("--no-randomize")) cfg.learner.randomize = false;
  // round trip through the strict parser so flag-built configs obey the
  // same invariants as file-loaded ones
  return parse_run_config(serialize_run_config(cfg));
}

// eluder estimates for the regret bound at the scales the measurement count
// dictates; the matrix is probe-grid Hellinger distances to the true law
struct BoundScales {
  int d_first = 0;
  int d_second = 0;
};

BoundScales bound_scales(const std::vector<std::vector<double>>& psi,
                         double beta, double m_total) {
  BoundScales s;
  const double m = std::max(1.0, m_total);
  s.d_first = eluder_estimate(psi, 1.0 / (8.0 * beta * m));
  s.d_second = eluder_estimate(psi, 1.0 / m);
  return s;
}

std::vector<std::vector<double>> run_probe_matrix(const Preset& preset,
                                                  const LearnerConfig& lc) {
  const MeasurementSchedule sched =
      lc.schedule.build(preset.env.horizon);
  std::vector<double> gaps = {sched.min_gap()};
  double max_gap = 0.0;
  for (std::size_t k = 0; k < sched.gaps(); ++k)
    max_gap = std::max(max_gap, sched.gap(k));
  if (max_gap > gaps.front() * 1.000001) gaps.push_back(max_gap);
  const Vec ones = Vec::Ones(preset.env.x_ini.size());
  const std::vector<Vec> states = {preset.env.x_ini,
                                   preset.env.x_ini + 0.5 * ones,
                                   preset.env.x_ini - 0.5 * ones};
  return class_discrepancy_matrix(preset.env, states, gaps);
}

int cmd_run(const RunCli& cli, const CLI::App* sub) {
  const RunConfig cfg = assemble_run_config(cli, sub);
  const Preset preset = build_preset(cfg);

  std::error_code ec;
  fs::create_directories(cli.out_dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory '" + cli.out_dir +
                      "': " + ec.message());
  // the config lands first so a crashed run is still reproducible
  save_run_config(cfg, (fs::path(cli.out_dir) / "config.json").string());

  RunOutput out;
  out.config = cfg;
  out.preset_name = preset.name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    out.result = run_experiment(preset.env, cfg.learner);

    const double value_step = preset.env.horizon * cfg.learner.env_step_scale;
    out.regret = regret_curve(
        preset.env, out.result.records, cli.oracle_rollouts, value_step,
        RngStream(cfg.learner.seed, 0, Purpose::oracle));

    for (std::size_t p = 0; p < preset.env.policies.size(); ++p) {
      const VarianceEstimate v = total_variance(
          preset.env.true_model, preset.env.policies[p], preset.env.reward,
          preset.env.x_ini, cli.variance_rollouts, value_step,
          RngStream(cfg.learner.seed, static_cast<int>(p),
                    Purpose::diagnostics));
      out.policy_variances.push_back(v.variance);
      if (static_cast<int>(p) == out.regret.oracle.best_policy)
        out.best_policy_variance = v;
    }
    out.gronwall_bound = gronwall_variance_bound(
        preset.l_b, preset.l_f, preset.l_u, preset.g_frob, preset.env.horizon);

    const std::vector<std::vector<double>> psi =
        run_probe_matrix(preset, cfg.learner);
    double pref_dbar = 0.0, pref_var = 0.0, pref_m = 0.0;
    for (const EpisodeRecord& r : out.result.records) {
      pref_dbar += r.delta_bar_sq;
      pref_var +=
          out.policy_variances[static_cast<std::size_t>(r.policy_index)];
      pref_m += static_cast<double>(r.measurement_count);
      const BoundScales sc = bound_scales(psi, out.result.beta, pref_m);
      RegretBoundInputs in;
      in.d_first = sc.d_first;
      in.d_second = sc.d_second;
      in.beta = out.result.beta;
      in.episodes = r.episode;
      in.delta = cfg.learner.delta;
      in.sum_delta_bar_sq = pref_dbar;
      in.sum_variance = pref_var;
      in.m_bar_total = pref_m;
      out.bound_curve.push_back(regret_bound_rhs(in));
    }
    out.bound_rhs_final =
        out.bound_curve.empty() ? 0.0 : out.bound_curve.back();
    out.sum_delta_bar_sq = pref_dbar;
    out.m_total = static_cast<long>(pref_m + 0.5);
    const int n_eps = static_cast<int>(out.result.records.size());
    out.lambda_complexity_0 = lambda_total_complexity(0.0, n_eps, pref_m);
    out.lambda_complexity_half = lambda_total_complexity(0.5, n_eps, pref_m);
    out.lambda_complexity_1 = lambda_total_complexity(1.0, n_eps, pref_m);
    for (const Policy& p : preset.env.policies) out.policy_ids.push_back(p.id);
    for (const SdeModel& m : preset.env.model_class.models)
      out.model_ids.push_back(m.id);

    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_run_artifacts(cli.out_dir, out);
  } catch (const std::exception& e) {
    write_error_marker(cli.out_dir, cfg, "run", e.what());
    throw;
  }

  const double regret_final =
      out.regret.cumulative.empty() ? 0.0 : out.regret.cumulative.back();
  std::printf("preset            %s", preset.name.c_str());
  if (cfg.preset == "ou_control")
    std::printf(" (sigma = %g)", cfg.sigma.value_or(preset.sigma));
  std::printf("\n");
  std::printf("episodes          %d\n",
              static_cast<int>(out.result.records.size()));
  std::printf("beta              %.6g\n", out.result.beta);
  std::printf("measurements      %ld\n", out.m_total);
  std::printf("regret(N)         %.6g\n", regret_final);
  std::printf("sum gap^2         %.6g\n", out.sum_delta_bar_sq);
  std::printf("bound rhs         %.6g (%s)\n", out.bound_rhs_final,
              regret_final <= out.bound_rhs_final ? "holds" : "violated");
  std::printf("cost lambda=0     %.6g\n", out.lambda_complexity_0);
  std::printf("cost lambda=0.5   %.6g\n", out.lambda_complexity_half);
  std::printf("cost lambda=1     %.6g\n", out.lambda_complexity_1);
  std::printf("variance bound    %.6g\n", out.gronwall_bound);
  if (out.regret.oracle.best_policy >= 0)
    std::printf("oracle policy     %s (value %.4g)\n",
                out.policy_ids[static_cast<std::size_t>(
                                   out.regret.oracle.best_policy)]
                    .c_str(),
                out.regret.oracle.best_value);
  std::printf("artifacts         %s\n", cli.out_dir.c_str());
  return 0;
}

int cmd_sweep(const SweepCli& cli, const CLI::App* sub) {
  RunConfig base;
  if (!cli.config_path.empty()) base = load_run_config(cli.config_path);
  base.preset = "ou_control";
  if (sub->count("--episodes")) base.learner.episodes = cli.episodes;
  else if (cli.config_path.empty()) base.learner.episodes = cli.episodes;
  if (sub->count("--seed")) base.learner.seed = cli.seed;
  base = parse_run_config(serialize_run_config(base));

  std::error_code ec;
  fs::create_directories(cli.out_dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory '" + cli.out_dir +
                      "': " + ec.message());
  save_run_config(base, (fs::path(cli.out_dir) / "config.json").string());

  try {
    const SweepResult sweep =
        run_sweep_grid(base, cli.sigmas, cli.gaps, cli.seeds, cli.eps,
                       cli.window, cli.oracle_rollouts);
    write_sweep_csv((fs::path(cli.out_dir) / "sweep.csv").string(), sweep,
                    base);
    write_sweep_summary(
        (fs::path(cli.out_dir) / "sweep_summary.json").string(), sweep, base);

    std::printf("%10s %10s %16s %14s\n", "sigma", "best gap",
                "min mean episodes", "");
    for (const SigmaSummary& row : sweep.by_sigma)
      std::printf("%10.4g %10.4g %16.4g\n", row.sigma, row.best_gap,
                  row.min_mean_episodes);
    std::printf("spearman(sigma, best gap)  %.4g\n", sweep.spearman);
    std::printf("episodes ordered by sigma  %s\n",
                sweep.endpoints_ordered ? "yes" : "no");
    std::printf("artifacts                  %s\n", cli.out_dir.c_str());
  } catch (const std::exception& e) {
    write_error_marker(cli.out_dir, base, "sweep", e.what());
    throw;
  }
  return 0;
}

int cmd_verify(const VerifyCli& cli) {
  const VerifyReport rep = run_verify_suite(cli.suite, cli.seed, cli.quick);
  int passed = 0;
  for (const CheckResult& c : rep.checks) {
    std::printf("[%s] %-48s observed=%.6g expected=%.6g tol=%.2g%s%s\n",
                c.passed ? "PASS" : "FAIL", c.name.c_str(), c.observed,
                c.expected, c.tolerance, c.detail.empty() ? "" : "  ",
                c.detail.c_str());
    passed += c.passed ? 1 : 0;
  }
  std::printf("verify %s: %d/%d checks passed\n", rep.suite.c_str(), passed,
              static_cast<int>(rep.checks.size()));
  if (!cli.json_path.empty())
    write_text_file(cli.json_path, verify_report_json(rep));
  return rep.all_passed() ? 0 : 1;
}

int cmd_complexity(const ComplexityCli& cli) {
  if (!(cli.d > 0.0) || !(cli.eps > 0.0) || !(cli.var_pi >= 0.0) ||
      !(cli.horizon > 0.0))
    throw ConfigError("complexity: d, eps, horizon must be positive and "
                      "var-pi nonnegative");
  std::vector<double> gaps = cli.gaps;
  if (gaps.empty()) {
    // default grid anchored at var_pi / horizon, doubling up to the horizon
    double g = cli.var_pi > 0.0 ? cli.var_pi / cli.horizon
                                : cli.horizon / 16.0;
    for (int j = 0; j < 5 && g <= cli.horizon * 1.000001; ++j, g *= 2.0)
      gaps.push_back(std::min(g, cli.horizon));
  }
  for (double g : gaps)
    if (!(g > 0.0)) throw ConfigError("complexity: gaps must be positive");

  for (double lambda : cli.lambdas) {
    if (lambda < 0.0 || lambda > 1.0)
      throw ConfigError("complexity: lambda must lie in [0, 1]");
    std::printf("lambda = %.3g\n", lambda);
    std::printf("  %10s %14s %14s %14s %14s %14s\n", "gap", "episode",
                "measurement", "gap bias", "per-episode", "total");
    double best_gap = gaps.front();
    double best_total = 0.0;
    bool first = true;
    for (double gap : gaps) {
      ComplexityInputs in;
      in.d = cli.d;
      in.eps = cli.eps;
      in.var_pi = cli.var_pi;
      in.horizon = cli.horizon;
      in.gap = gap;
      in.lambda = lambda;
      const ComplexityBound b = eval_complexity_bound(in);
      std::printf("  %10.4g %14.6g %14.6g %14.6g %14.6g %14.6g\n", gap,
                  b.episode_term, b.measurement_term, b.gap_term,
                  b.per_episode_cost, b.total);
      if (first || b.total < best_total) {
        best_total = b.total;
        best_gap = gap;
        first = false;
      }
    }
    std::printf("  grid minimum at gap = %.6g\n", best_gap);
    if (lambda == 0.0) {
      ComplexityInputs in;
      in.d = cli.d;
      in.eps = cli.eps;
      in.var_pi = cli.var_pi;
      in.horizon = cli.horizon;
      in.lambda = 0.0;
      std::printf("  episode-cost regime: coarsest near-optimal gap = %.6g "
                  "(variance/horizon = %.6g)\n",
                  lambda0_optimal_gap(in, gaps), cli.var_pi / cli.horizon);
    }
    if (lambda == 1.0)
      std::printf("  measurement-cost regime: gap = horizon = %.6g\n",
                  cli.horizon);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous-time model-based control testbed"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  RunCli run_cli;
  CLI::App* run = app.add_subcommand("run", "run one learning experiment");
  run->add_option("--config", run_cli.config_path,
                  "JSON config; flags override its fields");
  run->add_option("--out", run_cli.out_dir, "output directory")->required();
  run->add_option("--preset", run_cli.preset, "environment preset");
  run->add_option("--sigma", run_cli.sigma, "true noise level (ou_control)");
  run->add_option("--episodes", run_cli.episodes, "episode budget");
  run->add_option("--seed", run_cli.seed, "master seed");
  run->add_option("--gap", run_cli.schedule_delta,
                  "equidistant measurement gap");
  run->add_option("--value-rollouts", run_cli.value_rollouts,
                  "rollouts per optimistic value estimate");
  run->add_option("--oracle-rollouts", run_cli.oracle_rollouts,
                  "rollouts per oracle value estimate");
  run->add_option("--variance-rollouts", run_cli.variance_rollouts,
                  "rollouts per policy variance estimate");
  run->add_flag("--no-randomize", run_cli.no_randomize,
                "disable the per-gap uniform measurement offsets");

  SweepCli sweep_cli;
  CLI::App* sweep =
      app.add_subcommand("sweep", "grid over noise levels and gaps");
  sweep->add_option("--config", sweep_cli.config_path, "base JSON config");
  sweep->add_option("--out", sweep_cli.out_dir, "output directory")
      ->required();
  sweep->add_option("--sigmas", sweep_cli.sigmas, "noise levels");
  sweep->add_option("--gaps", sweep_cli.gaps, "equidistant gaps");
  sweep->add_option("--seeds", sweep_cli.seeds, "replicates per cell");
  sweep->add_option("--eps", sweep_cli.eps, "target mean regret");
  sweep->add_option("--window", sweep_cli.window,
                    "trailing window for the accuracy test");
  sweep->add_option("--episodes", sweep_cli.episodes, "episode budget");
  sweep->add_option("--seed", sweep_cli.seed, "first replicate seed");
  sweep->add_option("--oracle-rollouts", sweep_cli.oracle_rollouts,
                    "rollouts per oracle value estimate");

  VerifyCli verify_cli;
  CLI::App* verify =
      app.add_subcommand("verify", "run the numeric self-check suites");
  verify->add_option("--suite", verify_cli.suite,
                     "density, bellman, variance, decomposition, eluder, all");
  verify->add_option("--seed", verify_cli.seed, "seed for sampled checks");
  verify->add_flag("--quick", verify_cli.quick, "reduced sampling budgets");
  verify->add_option("--json", verify_cli.json_path,
                     "also write the report as JSON");

  ComplexityCli cx_cli;
  CLI::App* cx = app.add_subcommand(
      "complexity", "tabulate the episode/measurement cost model");
  cx->add_option("--d", cx_cli.d, "model class complexity");
  cx->add_option("--eps", cx_cli.eps, "target accuracy");
  cx->add_option("--var-pi", cx_cli.var_pi, "policy class total variance");
  cx->add_option("--horizon", cx_cli.horizon, "episode horizon");
  cx->add_option("--lambdas", cx_cli.lambdas, "cost weights in [0, 1]");
  cx->add_option("--gaps", cx_cli.gaps, "gap grid (default: doubling)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_cli, run);
    if (sweep->parsed()) return cmd_sweep(sweep_cli, sweep);
    if (verify->parsed()) return cmd_verify(verify_cli);
    if (cx->parsed()) return cmd_complexity(cx_cli);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SimulationError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
