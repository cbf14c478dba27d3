#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctmle/rng.hpp"

namespace ctmle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Affine-in-state dynamics dx = (A x + B u + c0) dt + G dw. Present on a
// model iff exact Gaussian transitions are available for it.
struct LinearDynamics {
  Mat A;
  Mat B;
  Vec c0;
  Mat G;  // state-independent diffusion
};

enum class ModelKind { linear_gaussian, nonlinear };

struct SdeModel {
  std::string id;
  ModelKind kind = ModelKind::nonlinear;
  int state_dim = 1;
  int control_dim = 1;
  std::function<Vec(const Vec&, const Vec&)> drift;      // f(x, u)
  std::function<Mat(const Vec&, const Vec&)> diffusion;  // g(x, u)
  std::optional<LinearDynamics> linear;  // required for linear_gaussian

  // scalar fast path for 1-d models; must agree with drift/diffusion.
  // Monte Carlo value scans run millions of rollouts, and the Eigen-typed
  // callables allocate per step.
  std::function<double(double, double)> drift1;
  std::function<double(double, double)> diffusion1;
};

// throws std::invalid_argument if the declared kind and the structural
// fields disagree
void validate_model(const SdeModel& m);

// Feedback policy u(x). The affine part, when present, is what closed-form
// transition kernels compose with; `act` is what the simulator executes and
// may clip the affine map into a box.
struct AffineControl {
  Mat K;
  Vec k0;
  double clip_lo = -std::numeric_limits<double>::infinity();
  double clip_hi = std::numeric_limits<double>::infinity();
};

struct Policy {
  std::string id;
  std::function<Vec(const Vec&)> act;
  double lipschitz_hint = 0.0;
  std::optional<AffineControl> affine;
  std::function<double(double)> act1;  // scalar fast path, see SdeModel
};

// running reward rate b(x, u); rates are expected to take values in
// [0, 1/horizon] so cumulative rewards land in [0, 1]
struct RewardSpec {
  std::function<double(const Vec&, const Vec&)> rate;
  double horizon = 1.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> controls;  // control applied on [t_j, t_{j+1})
  double sim_step = 0.0;

  // index of the internal grid point nearest to t
  std::size_t nearest_index(double t) const;
};

// Euler-Maruyama on a uniform internal grid of step sim_step; the last step
// is truncated so the final time equals horizon exactly. Throws
// SimulationError carrying the first bad time stamp if a state goes
// non-finite.
Trajectory simulate_trajectory(const SdeModel& model, const Policy& policy,
                               const Vec& x_ini, double horizon,
                               double sim_step, RngStream& rng);

// terminal state only; elapsed == 0 returns x_ini unchanged without
// consuming randomness
Vec sample_marginal(const SdeModel& model, const Policy& policy,
                    const Vec& x_ini, double elapsed, double sim_step,
                    RngStream& rng);

struct RewardIntegral {
  double value = 0.0;
  double clamp_excess = 0.0;  // how far the raw integral fell outside [0, 1]
};

// trapezoid rule over the recorded grid, clamped into [0, 1]
RewardIntegral integrate_reward(const Trajectory& traj,
                                const RewardSpec& reward);

// partial trapezoid integral of the reward rate over recorded times in
// [t_lo, t_hi]; no clamping (used for per-gap segments)
double integrate_reward_segment(const Trajectory& traj,
                                const RewardSpec& reward, double t_lo,
                                double t_hi);

struct RolloutResult {
  double reward_raw = 0.0;    // unclamped trapezoid integral over [0, horizon]
  double reward_pre = 0.0;    // portion over [0, split_time], 0 if no split
  Vec terminal;
};

// One Euler-Maruyama rollout without recording the path. Matches
// simulate_trajectory + integrate_reward draw for draw on the same stream
// (same grid, same trapezoid sums), but does not allocate per step when the
// scalar fast-path callables are present. split_time < 0 disables the split.
RolloutResult rollout_reward(const SdeModel& model, const Policy& policy,
                             const RewardSpec& reward, const Vec& x_ini,
                             double horizon, double sim_step, RngStream& rng,
                             double split_time = -1.0);

}  // namespace ctmle
