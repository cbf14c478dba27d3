#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ctmle/dataset.hpp"
#include "ctmle/schedule.hpp"
#include "ctmle/sde.hpp"

namespace ctmle {

// everything the learner can touch: the candidate classes and, opaquely,
// the true dynamics it samples trajectories from
struct Environment {
  SdeModel true_model;
  ModelClass model_class;
  std::vector<Policy> policies;
  RewardSpec reward;
  Vec x_ini;
  double horizon = 1.0;
};

struct ScheduleSpec {
  enum class Kind { equidistant, geometric, explicit_times } kind =
      Kind::equidistant;
  double delta = 0.25;          // equidistant
  int m = 4;                    // geometric
  double ratio = 0.5;           // geometric
  std::vector<double> times;    // explicit

  MeasurementSchedule build(double horizon) const;
};

struct LearnerConfig {
  int episodes = 100;
  double delta = 0.1;          // confidence level for the set radius
  bool beta_doubled = false;   // use log(2 |F||G| N / delta) instead
  bool randomize = true;       // draw the per-gap uniform offsets
  int value_rollouts = 256;
  ScheduleSpec schedule;
  // environment simulation step: min(horizon * env_step_scale, min_gap / 64)
  double env_step_scale = 1e-3;
  // value rollout step: horizon / value_step_divisor
  double value_step_divisor = 256.0;
  std::uint64_t seed = 1;
};

struct ValueEstimate {
  double mean = 0.0;
  double std_err = 0.0;
};

// Monte Carlo value of a policy under a candidate model (not the
// environment), over the reward horizon from x_ini. Rollout i draws from
// rng.sub(i), so callers passing the same base stream across candidates get
// common random numbers.
ValueEstimate estimate_return(const SdeModel& model, const Policy& policy,
                              const RewardSpec& reward, const Vec& x_ini,
                              int n_rollouts, double sim_step,
                              const RngStream& rng);

struct Selection {
  int policy_index = -1;
  int model_index = -1;
  double value = 0.0;
  double std_err = 0.0;
};

// argmax of estimate_return over policies x member models under common
// random numbers; ties keep the first (policy-major, then model) candidate
Selection optimistic_select(const Environment& env,
                            const std::vector<int>& members, int n_rollouts,
                            double sim_step, const RngStream& rng);

struct EpisodeRecord {
  int episode = 0;  // 1-based
  int policy_index = -1;
  int model_index = -1;
  double optimistic_value = 0.0;
  double realized_return = 0.0;
  int m_gaps = 0;
  int measurement_count = 0;  // 2 m when randomized, m otherwise
  double delta_bar_sq = 0.0;  // sum_k gap_k^2
  int cset_size = 0;
  int cset_hat_size = 0;
  bool intersection_empty = false;  // fell back to the grid set alone
  bool true_in_cset = false;
  bool true_in_cset_hat = false;
};

struct LearnerState {
  Dataset data;
  std::vector<EpisodeRecord> records;
};

// one full episode: build both confidence sets from history, select
// optimistically, run the environment once, extract grid and augmented
// observations from the dense trajectory, append them to the dataset.
// Returns the record; the trajectory is returned so diagnostics can
// decompose it (offline stores drop it).
struct EpisodeOutcome {
  EpisodeRecord record;
  Trajectory trajectory;
  MeasurementSchedule schedule;
  std::vector<double> offsets;
};

EpisodeOutcome run_episode(LearnerState& state, const Environment& env,
                           const LearnerConfig& config, int episode);

struct ExperimentResult {
  std::vector<EpisodeRecord> records;
  int hat_policy_index = -1;  // policy of a uniformly drawn episode
  int hat_episode = 0;
  double beta = 0.0;
  double m_bar_total = 0.0;  // sum of measurement counts
};

ExperimentResult run_experiment(const Environment& env,
                                const LearnerConfig& config);

// set radius log(|F| |G| N / delta), or with the factor 2 under the doubled
// variant used when both partitions must cover simultaneously
double beta_radius(int n_drift, int n_diffusion, int episodes, double delta,
                   bool doubled = false);

}  // namespace ctmle
