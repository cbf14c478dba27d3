#include "ctmle/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ctmle/errors.hpp"

namespace ctmle {

MeasurementSchedule ScheduleSpec::build(double horizon) const {
  // schedule parameters come straight from user configs, so builder
  // complaints are configuration errors, not internal ones
  try {
    switch (kind) {
      case Kind::equidistant:
        return build_equidistant_schedule(horizon, delta);
      case Kind::geometric:
        return build_geometric_schedule(horizon, m, ratio);
      case Kind::explicit_times:
        return build_explicit_schedule(horizon, times);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw std::logic_error("ScheduleSpec: unknown kind");
}

double beta_radius(int n_drift, int n_diffusion, int episodes, double delta,
                   bool doubled) {
  if (n_drift < 1 || n_diffusion < 1 || episodes < 1)
    throw std::invalid_argument("beta_radius: sizes must be positive");
  if (!(delta > 0.0) || delta >= 1.0)
    throw std::invalid_argument("beta_radius: delta in (0, 1)");
  const double count = static_cast<double>(n_drift) * n_diffusion * episodes;
  return std::log((doubled ? 2.0 : 1.0) * count / delta);
}

ValueEstimate estimate_return(const SdeModel& model, const Policy& policy,
                              const RewardSpec& reward, const Vec& x_ini,
                              int n_rollouts, double sim_step,
                              const RngStream& rng) {
  if (n_rollouts < 1) throw std::invalid_argument("estimate_return: rollouts");
  if (!(sim_step > 0.0)) throw std::invalid_argument("estimate_return: step");
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n_rollouts; ++i) {
    RngStream stream = rng.sub(static_cast<std::uint64_t>(i));
    const RolloutResult r = rollout_reward(model, policy, reward, x_ini,
                                           reward.horizon, sim_step, stream);
    const double v = std::clamp(r.reward_raw, 0.0, 1.0);
    sum += v;
    sum_sq += v * v;
  }
  ValueEstimate est;
  est.mean = sum / n_rollouts;
  if (n_rollouts > 1) {
    const double var =
        std::max(0.0, (sum_sq - sum * sum / n_rollouts) / (n_rollouts - 1));
    est.std_err = std::sqrt(var / n_rollouts);
  }
  return est;
}

Selection optimistic_select(const Environment& env,
                            const std::vector<int>& members, int n_rollouts,
                            double sim_step, const RngStream& rng) {
  if (members.empty())
    throw std::invalid_argument("optimistic_select: empty member set");
  Selection best;
  for (std::size_t p = 0; p < env.policies.size(); ++p) {
    for (int j : members) {
      const ValueEstimate est =
          estimate_return(env.model_class.models[j], env.policies[p],
                          env.reward, env.x_ini, n_rollouts, sim_step, rng);
      if (best.policy_index < 0 || est.mean > best.value) {
        best.policy_index = static_cast<int>(p);
        best.model_index = j;
        best.value = est.mean;
        best.std_err = est.std_err;
      }
    }
  }
  return best;
}

namespace {

double env_sim_step(const LearnerConfig& cfg, double horizon,
                    const MeasurementSchedule& sched) {
  return std::min(horizon * cfg.env_step_scale,
                  sched.min_gap() / 64.0);
}

double value_sim_step(const LearnerConfig& cfg, double horizon,
                      const MeasurementSchedule& sched) {
  // value rollouts never touch the schedule, so their step follows the
  // horizon; common random numbers cancel most of the shared bias across
  // candidates
  (void)sched;
  return horizon / cfg.value_step_divisor;
}

}  // namespace

EpisodeOutcome run_episode(LearnerState& state, const Environment& env,
                           const LearnerConfig& config, int episode) {
  const MeasurementSchedule sched = config.schedule.build(env.horizon);
  const double beta =
      beta_radius(env.model_class.n_drift, env.model_class.n_diffusion,
                  config.episodes, config.delta, config.beta_doubled);

  const ConfidenceSet cset =
      confidence_set(env.model_class, env.policies, state.data.grid, beta);
  const ConfidenceSet cset_hat = confidence_set(
      env.model_class, env.policies, state.data.augmented, beta);

  std::vector<int> members = config.randomize
                                 ? intersect_members(cset, cset_hat)
                                 : cset.members;
  bool intersection_empty = false;
  if (members.empty()) {
    // Both sets hold the truth with high probability, so an empty
    // intersection is a low-probability event; fall back to the grid set
    // rather than aborting the run.
    intersection_empty = true;
    members = cset.members;
  }

  const RngStream scan_rng(config.seed, episode, Purpose::value_scan);
  const Selection sel =
      optimistic_select(env, members, config.value_rollouts,
                        value_sim_step(config, env.horizon, sched), scan_rng);

  // draw this episode's offsets, then run the environment once
  RngStream offs_rng(config.seed, episode, Purpose::schedule_offsets);
  std::vector<double> offsets;
  if (config.randomize) offsets = randomize_schedule(sched, offs_rng).offsets;

  RngStream env_rng(config.seed, episode, Purpose::env_rollout);
  Trajectory traj = simulate_trajectory(
      env.true_model, env.policies[sel.policy_index], env.x_ini, env.horizon,
      env_sim_step(config, env.horizon, sched), env_rng);

  // read observations off the dense grid; gaps are the realized snapped
  // times so the likelihood sees exactly the transition it scores
  EpisodeRecord rec;
  rec.episode = episode;
  rec.policy_index = sel.policy_index;
  rec.model_index = sel.model_index;
  rec.optimistic_value = sel.value;
  rec.m_gaps = static_cast<int>(sched.gaps());
  rec.delta_bar_sq = sched.sum_gap_sq();
  for (std::size_t k = 0; k < sched.gaps(); ++k) {
    const std::size_t i_from = traj.nearest_index(sched.times[k]);
    const std::size_t i_to = traj.nearest_index(sched.times[k + 1]);
    TransitionSample s;
    s.episode = episode;
    s.policy_index = sel.policy_index;
    s.x_from = traj.states[i_from];
    s.x_to = traj.states[i_to];
    s.gap = traj.times[i_to] - traj.times[i_from];
    s.tag = SampleTag::grid;
    state.data.grid.push_back(s);

    if (config.randomize) {
      if (i_to <= i_from + 1)
        throw std::logic_error("run_episode: gap has no interior grid point");
      std::size_t i_aug = traj.nearest_index(sched.times[k] + offsets[k]);
      i_aug = std::clamp(i_aug, i_from + 1, i_to - 1);  // strictly interior
      TransitionSample a;
      a.episode = episode;
      a.policy_index = sel.policy_index;
      a.x_from = traj.states[i_from];
      a.x_to = traj.states[i_aug];
      a.gap = traj.times[i_aug] - traj.times[i_from];
      a.tag = SampleTag::augmented;
      state.data.augmented.push_back(a);
    }
  }
  rec.measurement_count = config.randomize ? 2 * rec.m_gaps : rec.m_gaps;
  rec.realized_return = integrate_reward(traj, env.reward).value;
  rec.cset_size = static_cast<int>(cset.members.size());
  rec.cset_hat_size = static_cast<int>(cset_hat.members.size());
  rec.intersection_empty = intersection_empty;
  if (env.model_class.true_index >= 0) {
    rec.true_in_cset = cset.contains(env.model_class.true_index);
    rec.true_in_cset_hat = cset_hat.contains(env.model_class.true_index);
  }
  state.records.push_back(rec);

  EpisodeOutcome out;
  out.record = rec;
  out.trajectory = std::move(traj);
  out.schedule = sched;
  out.offsets = std::move(offsets);
  return out;
}

ExperimentResult run_experiment(const Environment& env,
                                const LearnerConfig& config) {
  if (config.episodes < 1)
    throw std::invalid_argument("run_experiment: episodes < 1");
  LearnerState state;
  ExperimentResult result;
  result.beta =
      beta_radius(env.model_class.n_drift, env.model_class.n_diffusion,
                  config.episodes, config.delta, config.beta_doubled);
  for (int n = 1; n <= config.episodes; ++n) {
    const EpisodeOutcome out = run_episode(state, env, config, n);
    result.m_bar_total += out.record.measurement_count;
  }
  result.records = std::move(state.records);

  RngStream draw(config.seed, 0, Purpose::episode_draw);
  const auto pick = static_cast<std::size_t>(draw.uniform() * config.episodes);
  result.hat_episode = static_cast<int>(std::min<std::size_t>(
                           pick, config.episodes - 1)) + 1;
  result.hat_policy_index = result.records[result.hat_episode - 1].policy_index;
  return result;
}

}  // namespace ctmle
