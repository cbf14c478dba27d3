#include "ctmle/sde.hpp"

#include <cmath>
#include <stdexcept>

#include "ctmle/errors.hpp"

namespace ctmle {

void validate_model(const SdeModel& m) {
  if (m.state_dim <= 0 || m.control_dim <= 0)
    throw std::invalid_argument("model " + m.id + ": bad dimensions");
  if (!m.drift || !m.diffusion)
    throw std::invalid_argument("model " + m.id + ": missing drift/diffusion");
  if (m.kind == ModelKind::linear_gaussian) {
    if (!m.linear)
      throw std::invalid_argument("model " + m.id +
                                  ": linear_gaussian without LinearDynamics");
    const auto& lin = *m.linear;
    if (lin.A.rows() != m.state_dim || lin.A.cols() != m.state_dim ||
        lin.B.rows() != m.state_dim || lin.B.cols() != m.control_dim ||
        lin.c0.size() != m.state_dim || lin.G.rows() != m.state_dim)
      throw std::invalid_argument("model " + m.id + ": LinearDynamics shapes");
  }
}

std::size_t Trajectory::nearest_index(double t) const {
  if (times.empty()) return 0;
  if (t <= times.front()) return 0;
  if (t >= times.back()) return times.size() - 1;
  // uniform grid except for the truncated last step
  std::size_t i = static_cast<std::size_t>(t / sim_step + 0.5);
  if (i >= times.size()) i = times.size() - 1;
  // guard against float drift near the truncated tail
  while (i + 1 < times.size() &&
         std::abs(times[i + 1] - t) < std::abs(times[i] - t))
    ++i;
  while (i > 0 && std::abs(times[i - 1] - t) < std::abs(times[i] - t)) --i;
  return i;
}

Trajectory simulate_trajectory(const SdeModel& model, const Policy& policy,
                               const Vec& x_ini, double horizon,
                               double sim_step, RngStream& rng) {
  if (!(horizon > 0.0)) throw std::invalid_argument("simulate: horizon <= 0");
  if (!(sim_step > 0.0) || sim_step > horizon + 1e-15)
    throw std::invalid_argument("simulate: need 0 < sim_step <= horizon");
  if (x_ini.size() != model.state_dim)
    throw std::invalid_argument("simulate: x_ini dimension");

  Trajectory traj;
  traj.sim_step = sim_step;
  const auto n_full = static_cast<std::size_t>(horizon / sim_step + 1e-9);
  traj.times.reserve(n_full + 2);
  traj.states.reserve(n_full + 2);
  traj.controls.reserve(n_full + 2);

  Vec x = x_ini;
  double t = 0.0;
  while (true) {
    const Vec u = policy.act(x);
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.controls.push_back(u);
    if (t >= horizon - 1e-12) break;

    const double dt = std::min(sim_step, horizon - t);
    const Vec f = model.drift(x, u);
    const Mat g = model.diffusion(x, u);
    Vec z(g.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    x = x + f * dt + g * (std::sqrt(dt) * z);
    t = (traj.times.size() <= n_full) ? traj.times.size() * sim_step : horizon;
    if (t > horizon) t = horizon;
    if (!x.allFinite())
      throw SimulationError("simulate: non-finite state", t);
  }
  // pin the endpoint exactly
  traj.times.back() = horizon;
  return traj;
}

Vec sample_marginal(const SdeModel& model, const Policy& policy,
                    const Vec& x_ini, double elapsed, double sim_step,
                    RngStream& rng) {
  if (elapsed == 0.0) return x_ini;
  if (!(elapsed > 0.0)) throw std::invalid_argument("sample_marginal: elapsed");
  Vec x = x_ini;
  double t = 0.0;
  std::size_t step = 0;
  while (t < elapsed - 1e-12) {
    const double dt = std::min(sim_step, elapsed - t);
    const Vec u = policy.act(x);
    const Vec f = model.drift(x, u);
    const Mat g = model.diffusion(x, u);
    Vec z(g.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    x = x + f * dt + g * (std::sqrt(dt) * z);
    ++step;
    t = std::min(step * sim_step, elapsed);
    if (!x.allFinite()) throw SimulationError("sample_marginal: non-finite", t);
  }
  return x;
}

RewardIntegral integrate_reward(const Trajectory& traj,
                                const RewardSpec& reward) {
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < traj.times.size(); ++j) {
    const double dt = traj.times[j + 1] - traj.times[j];
    const double b0 = reward.rate(traj.states[j], traj.controls[j]);
    const double b1 = reward.rate(traj.states[j + 1], traj.controls[j + 1]);
    acc += 0.5 * (b0 + b1) * dt;
  }
  RewardIntegral out;
  out.value = std::min(std::max(acc, 0.0), 1.0);
  out.clamp_excess = std::abs(acc - out.value);
  return out;
}

namespace {

RolloutResult rollout_scalar(const SdeModel& model, const Policy& policy,
                             const RewardSpec& reward, double x0,
                             double horizon, double h, RngStream& rng,
                             double split_time) {
  RolloutResult out;
  const auto n_full = static_cast<std::size_t>(horizon / h + 1e-9);
  double x = x0;
  double t = 0.0;
  double u = policy.act1(x);
  Vec xv(1), uv(1);
  auto rate1 = [&](double xs, double us) {
    xv(0) = xs;
    uv(0) = us;
    return reward.rate(xv, uv);
  };
  double b_left = rate1(x, u);
  std::size_t step = 0;
  while (t < horizon - 1e-12) {
    const double dt = std::min(h, horizon - t);
    const double f = model.drift1(x, u);
    const double g = model.diffusion1(x, u);
    x += f * dt + g * std::sqrt(dt) * rng.normal();
    ++step;
    const double t_next = (step <= n_full) ? std::min(step * h, horizon) : horizon;
    if (!std::isfinite(x)) throw SimulationError("rollout: non-finite", t_next);
    u = policy.act1(x);
    const double b_right = rate1(x, u);
    const double piece = 0.5 * (b_left + b_right) * (t_next - t);
    out.reward_raw += piece;
    if (split_time >= 0.0) {
      if (t_next <= split_time + 1e-12) {
        out.reward_pre += piece;
      } else if (t < split_time) {
        out.reward_pre += piece * (split_time - t) / (t_next - t);
      }
    }
    b_left = b_right;
    t = t_next;
  }
  out.terminal = Vec::Constant(1, x);
  return out;
}

RolloutResult rollout_generic(const SdeModel& model, const Policy& policy,
                              const RewardSpec& reward, const Vec& x_ini,
                              double horizon, double h, RngStream& rng,
                              double split_time) {
  RolloutResult out;
  const auto n_full = static_cast<std::size_t>(horizon / h + 1e-9);
  Vec x = x_ini;
  double t = 0.0;
  Vec u = policy.act(x);
  double b_left = reward.rate(x, u);
  std::size_t step = 0;
  while (t < horizon - 1e-12) {
    const double dt = std::min(h, horizon - t);
    const Vec f = model.drift(x, u);
    const Mat g = model.diffusion(x, u);
    Vec z(g.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    x = x + f * dt + g * (std::sqrt(dt) * z);
    ++step;
    const double t_next = (step <= n_full) ? std::min(step * h, horizon) : horizon;
    if (!x.allFinite()) throw SimulationError("rollout: non-finite", t_next);
    u = policy.act(x);
    const double b_right = reward.rate(x, u);
    const double piece = 0.5 * (b_left + b_right) * (t_next - t);
    out.reward_raw += piece;
    if (split_time >= 0.0) {
      if (t_next <= split_time + 1e-12) {
        out.reward_pre += piece;
      } else if (t < split_time) {
        out.reward_pre += piece * (split_time - t) / (t_next - t);
      }
    }
    b_left = b_right;
    t = t_next;
  }
  out.terminal = x;
  return out;
}

}  // namespace

RolloutResult rollout_reward(const SdeModel& model, const Policy& policy,
                             const RewardSpec& reward, const Vec& x_ini,
                             double horizon, double sim_step, RngStream& rng,
                             double split_time) {
  if (horizon <= 0.0) {
    RolloutResult out;
    out.terminal = x_ini;
    return out;
  }
  if (!(sim_step > 0.0)) throw std::invalid_argument("rollout: sim_step <= 0");
  if (model.state_dim == 1 && model.drift1 && model.diffusion1 && policy.act1)
    return rollout_scalar(model, policy, reward, x_ini(0), horizon,
                          std::min(sim_step, horizon), rng, split_time);
  return rollout_generic(model, policy, reward, x_ini, horizon,
                         std::min(sim_step, horizon), rng, split_time);
}

double integrate_reward_segment(const Trajectory& traj,
                                const RewardSpec& reward, double t_lo,
                                double t_hi) {
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < traj.times.size(); ++j) {
    const double a = std::max(traj.times[j], t_lo);
    const double b = std::min(traj.times[j + 1], t_hi);
    if (b <= a) continue;
    // grid is dense relative to reward variation; no sub-step interpolation
    const double b0 = reward.rate(traj.states[j], traj.controls[j]);
    const double b1 = reward.rate(traj.states[j + 1], traj.controls[j + 1]);
    acc += 0.5 * (b0 + b1) * (b - a);
  }
  return acc;
}

}  // namespace ctmle
