#pragma once

#include <string>
#include <vector>

#include "ctmle/config.hpp"
#include "ctmle/metrics.hpp"

namespace ctmle {

// First 1-based episode n at which the trailing `window` instantaneous
// regrets average at most eps; -1 when never reached.
int episodes_to_accuracy(const std::vector<double>& instantaneous, double eps,
                         int window);

// Spearman rank correlation with average ranks on ties; defined as 0 when
// either side has zero rank variance
double spearman_rank(const std::vector<double>& xs,
                     const std::vector<double>& ys);

// one (sigma, gap) cell, aggregated over the seed replicates
struct SweepCell {
  double sigma = 0.0;
  double gap = 0.0;
  int seeds = 0;
  double mean_episodes = 0.0;  // runs that never reach eps count as episodes
  double min_episodes = 0.0;
  double max_episodes = 0.0;
  double reach_fraction = 0.0;
  double mean_final_regret = 0.0;
  double mean_coverage = 0.0;
  double mean_measurements = 0.0;  // per run, total over episodes
};

struct SigmaSummary {
  double sigma = 0.0;
  double best_gap = 0.0;  // largest gap whose mean episodes ties the minimum
  double min_mean_episodes = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // sigma-major, gap-minor order
  std::vector<SigmaSummary> by_sigma;
  double spearman = 0.0;           // sigma vs best_gap
  bool endpoints_ordered = false;  // min mean episodes rises with sigma
  double eps = 0.0;
  int window = 0;
  int seeds = 0;
  double tie_tol = 0.0;
};

// Runs the learner over every (sigma, gap) cell with `seeds` replicates each
// (seed, seed+1, ...). Episode counts are right-censored at the episode
// budget, per-sigma best gaps break ties within `tie_tol` episodes toward the
// coarser schedule, and the cross-sigma trend is summarized by Spearman rank
// correlation. ou_control only, since sigma reparameterizes that preset.
SweepResult run_sweep_grid(const RunConfig& base,
                           const std::vector<double>& sigmas,
                           const std::vector<double>& gaps, int seeds,
                           double eps, int window, int oracle_rollouts,
                           double tie_tol = 1.0);

void write_sweep_csv(const std::string& path, const SweepResult& sweep,
                     const RunConfig& base);

void write_sweep_summary(const std::string& path, const SweepResult& sweep,
                         const RunConfig& base);

}  // namespace ctmle
