#include "ctmle/sweep.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ctmle/errors.hpp"
#include "ctmle/store.hpp"

namespace ctmle {

namespace {

std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 +
                       1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

int episodes_to_accuracy(const std::vector<double>& instantaneous, double eps,
                         int window) {
  if (window < 1) throw std::invalid_argument("episodes_to_accuracy: window");
  if (eps < 0.0) throw std::invalid_argument("episodes_to_accuracy: eps");
  const int n = static_cast<int>(instantaneous.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += instantaneous[static_cast<std::size_t>(i)];
    if (i >= window) acc -= instantaneous[static_cast<std::size_t>(i - window)];
    if (i + 1 >= window && acc / window <= eps) return i + 1;
  }
  return -1;
}

double spearman_rank(const std::vector<double>& xs,
                     const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("spearman_rank: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("spearman_rank: need 2+");
  const std::vector<double> rx = average_ranks(xs);
  const std::vector<double> ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
    sxy += (rx[i] - mx) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

SweepResult run_sweep_grid(const RunConfig& base,
                           const std::vector<double>& sigmas,
                           const std::vector<double>& gaps, int seeds,
                           double eps, int window, int oracle_rollouts,
                           double tie_tol) {
  if (base.preset != "ou_control")
    throw ConfigError("sweeps require the ou_control preset");
  if (sigmas.size() < 2) throw ConfigError("sweep needs 2+ sigma values");
  if (gaps.empty()) throw ConfigError("sweep needs 1+ gap values");
  if (seeds < 3) throw ConfigError("sweep needs 3+ seed replicates");
  for (double g : gaps)
    if (!(g > 0.0)) throw ConfigError("sweep gaps must be positive");

  SweepResult sweep;
  sweep.eps = eps;
  sweep.window = window;
  sweep.seeds = seeds;
  sweep.tie_tol = tie_tol;

  for (double sigma : sigmas) {
    RunConfig sigma_cfg = base;
    sigma_cfg.sigma = sigma;
    const Preset preset = build_preset(sigma_cfg);
    for (double g : gaps)
      if (g > preset.env.horizon + 1e-12)
        throw ConfigError("sweep gap exceeds the horizon");

    // the oracle depends only on sigma, so share one table across the row
    const double value_step =
        preset.env.horizon * sigma_cfg.learner.env_step_scale;
    const RngStream oracle_rng(base.learner.seed, 0, Purpose::oracle);
    const OracleValues oracle =
        brute_force_optimal(preset.env, oracle_rollouts, value_step,
                            oracle_rng);

    SigmaSummary row;
    row.sigma = sigma;
    row.min_mean_episodes = 0.0;
    bool row_started = false;

    for (double gap : gaps) {
      SweepCell cell;
      cell.sigma = sigma;
      cell.gap = gap;
      cell.seeds = seeds;
      cell.min_episodes = 0.0;
      cell.max_episodes = 0.0;
      double sum_episodes = 0.0;
      int reached_count = 0;
      double sum_regret = 0.0, sum_cover = 0.0, sum_meas = 0.0;
      for (int s = 0; s < seeds; ++s) {
        RunConfig cfg = sigma_cfg;
        cfg.learner.schedule.kind = ScheduleSpec::Kind::equidistant;
        cfg.learner.schedule.delta = gap;
        cfg.learner.seed = base.learner.seed + static_cast<std::uint64_t>(s);
        const ExperimentResult result = run_experiment(preset.env, cfg.learner);
        const RegretCurve curve = regret_curve(result.records, oracle);

        const int reached_at =
            episodes_to_accuracy(curve.instantaneous, eps, window);
        // runs that never settle are right-censored at the episode budget
        const double episodes = reached_at > 0
                                    ? static_cast<double>(reached_at)
                                    : static_cast<double>(cfg.learner.episodes);
        if (reached_at > 0) ++reached_count;
        sum_episodes += episodes;
        cell.min_episodes =
            s == 0 ? episodes : std::min(cell.min_episodes, episodes);
        cell.max_episodes = std::max(cell.max_episodes, episodes);
        sum_regret += curve.cumulative.empty() ? 0.0 : curve.cumulative.back();
        int covered = 0;
        long meas = 0;
        for (const EpisodeRecord& r : result.records) {
          covered += r.true_in_cset ? 1 : 0;
          meas += r.measurement_count;
        }
        sum_cover += result.records.empty()
                         ? 0.0
                         : static_cast<double>(covered) /
                               static_cast<double>(result.records.size());
        sum_meas += static_cast<double>(meas);
      }
      cell.mean_episodes = sum_episodes / seeds;
      cell.reach_fraction = static_cast<double>(reached_count) / seeds;
      cell.mean_final_regret = sum_regret / seeds;
      cell.mean_coverage = sum_cover / seeds;
      cell.mean_measurements = sum_meas / seeds;
      sweep.cells.push_back(cell);

      if (!row_started || cell.mean_episodes < row.min_mean_episodes) {
        row.min_mean_episodes = cell.mean_episodes;
        row_started = true;
      }
    }

    // coarsest gap that still reaches the minimum (within tie_tol episodes);
    // the minimizing cell always qualifies, so the scan finds at least one
    row.best_gap = 0.0;
    for (const SweepCell& cell : sweep.cells) {
      if (cell.sigma != sigma) continue;
      if (cell.mean_episodes <= row.min_mean_episodes + tie_tol &&
          cell.gap > row.best_gap)
        row.best_gap = cell.gap;
    }
    sweep.by_sigma.push_back(row);
  }

  std::vector<double> xs, ys;
  for (const SigmaSummary& row : sweep.by_sigma) {
    xs.push_back(row.sigma);
    ys.push_back(row.best_gap);
  }
  sweep.spearman = spearman_rank(xs, ys);

  std::size_t i_min = 0, i_max = 0;
  for (std::size_t i = 0; i < sweep.by_sigma.size(); ++i) {
    if (sweep.by_sigma[i].sigma < sweep.by_sigma[i_min].sigma) i_min = i;
    if (sweep.by_sigma[i].sigma > sweep.by_sigma[i_max].sigma) i_max = i;
  }
  sweep.endpoints_ordered = sweep.by_sigma[i_max].min_mean_episodes >=
                            sweep.by_sigma[i_min].min_mean_episodes;
  return sweep;
}

void write_sweep_csv(const std::string& path, const SweepResult& sweep,
                     const RunConfig& base) {
  CsvFile csv("ctmle.sweep.v1", config_hash(base),
              {"sigma", "gap", "seeds", "mean_episodes", "min_episodes",
               "max_episodes", "reach_fraction", "mean_final_regret",
               "mean_coverage", "mean_measurements"});
  for (const SweepCell& cell : sweep.cells)
    csv.add_row({format_g17(cell.sigma), format_g17(cell.gap),
                 std::to_string(cell.seeds), format_g17(cell.mean_episodes),
                 format_g17(cell.min_episodes), format_g17(cell.max_episodes),
                 format_g17(cell.reach_fraction),
                 format_g17(cell.mean_final_regret),
                 format_g17(cell.mean_coverage),
                 format_g17(cell.mean_measurements)});
  csv.write(path);
}

void write_sweep_summary(const std::string& path, const SweepResult& sweep,
                         const RunConfig& base) {
  nlohmann::json s;
  s["schema_version"] = 1;
  s["config_hash"] = config_hash(base);
  s["eps"] = sweep.eps;
  s["window"] = sweep.window;
  s["seeds"] = sweep.seeds;
  s["tie_tol"] = sweep.tie_tol;
  s["spearman"] = sweep.spearman;
  s["endpoints_ordered"] = sweep.endpoints_ordered;
  s["n_cells"] = static_cast<int>(sweep.cells.size());
  nlohmann::json rows = nlohmann::json::array();
  for (const SigmaSummary& row : sweep.by_sigma) {
    nlohmann::json r;
    r["sigma"] = row.sigma;
    r["best_gap"] = row.best_gap;
    r["min_mean_episodes"] = row.min_mean_episodes;
    rows.push_back(r);
  }
  s["by_sigma"] = rows;
  write_text_file(path, s.dump(2) + "\n");
}

}  // namespace ctmle
