#include "ctmle/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ctmle/kernel.hpp"

namespace ctmle {

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) throw std::invalid_argument("mean_se: need at least 2 samples");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

double quad_sum(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace

VarianceEstimate total_variance(const SdeModel& model, const Policy& policy,
                                const RewardSpec& reward, const Vec& x_ini,
                                int n_rollouts, double sim_step,
                                const RngStream& rng) {
  if (n_rollouts < 4)
    throw std::invalid_argument("total_variance: need at least 4 rollouts");
  if (sim_step <= 0.0)
    throw std::invalid_argument("total_variance: sim_step must be positive");
  const auto n = static_cast<double>(n_rollouts);
  std::vector<double> vals(n_rollouts);
  for (int i = 0; i < n_rollouts; ++i) {
    RngStream r = rng.sub(static_cast<std::uint64_t>(i));
    const RolloutResult res = rollout_reward(model, policy, reward, x_ini,
                                             reward.horizon, sim_step, r);
    vals[i] = std::clamp(res.reward_raw, 0.0, 1.0);
  }
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : vals) {
    const double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  VarianceEstimate out;
  out.mean = mean;
  out.variance = m2 * n / (n - 1.0);
  // distribution-free standard error of the sample variance
  const double var_of_var = (m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n;
  out.std_err = std::sqrt(std::max(0.0, var_of_var));
  return out;
}

double gronwall_variance_bound(double l_b, double l_f, double l_u,
                               double g_frob, double horizon) {
  if (l_f <= 0.0)
    throw std::invalid_argument("gronwall_variance_bound: l_f must be > 0");
  if (l_b < 0.0 || l_u < 0.0 || g_frob < 0.0 || horizon <= 0.0)
    throw std::invalid_argument(
        "gronwall_variance_bound: negative constant or horizon");
  const double growth = std::exp(2.0 * l_f * (1.0 + l_u) * horizon) - 1.0;
  const double raw = g_frob * g_frob * horizon * l_b * l_b * (1.0 + l_u) /
                     (2.0 * l_f) * growth;
  return std::min(1.0, raw);
}

OracleValues brute_force_optimal(const Environment& env, int n_rollouts,
                                 double sim_step, const RngStream& rng) {
  if (env.policies.empty())
    throw std::invalid_argument("brute_force_optimal: no policies");
  OracleValues out;
  out.values.reserve(env.policies.size());
  out.std_errs.reserve(env.policies.size());
  for (std::size_t p = 0; p < env.policies.size(); ++p) {
    const ValueEstimate v =
        estimate_return(env.true_model, env.policies[p], env.reward, env.x_ini,
                        n_rollouts, sim_step, rng);
    out.values.push_back(v.mean);
    out.std_errs.push_back(v.std_err);
    if (out.best_policy < 0 || v.mean > out.best_value) {
      out.best_policy = static_cast<int>(p);
      out.best_value = v.mean;
    }
  }
  return out;
}

RegretCurve regret_curve(const Environment& env,
                         const std::vector<EpisodeRecord>& records,
                         int n_rollouts, double sim_step,
                         const RngStream& rng) {
  return regret_curve(records,
                      brute_force_optimal(env, n_rollouts, sim_step, rng));
}

RegretCurve regret_curve(const std::vector<EpisodeRecord>& records,
                         const OracleValues& oracle) {
  RegretCurve out;
  out.oracle = oracle;
  out.instantaneous.reserve(records.size());
  out.cumulative.reserve(records.size());
  double running = 0.0;
  for (const EpisodeRecord& rec : records) {
    if (rec.policy_index < 0 ||
        rec.policy_index >= static_cast<int>(out.oracle.values.size()))
      throw std::invalid_argument("regret_curve: record policy out of range");
    // common random numbers make the table differences exact argmax gaps,
    // so instantaneous regret is nonnegative by construction
    const double r =
        out.oracle.best_value -
        out.oracle.values[static_cast<std::size_t>(rec.policy_index)];
    running += r;
    out.instantaneous.push_back(r);
    out.cumulative.push_back(running);
  }
  return out;
}

double loglog_slope(const std::vector<double>& y, int n_lo, int n_hi) {
  if (n_lo < 1 || n_hi <= n_lo || n_hi > static_cast<int>(y.size()))
    throw std::invalid_argument("loglog_slope: bad index range");
  double sx = 0.0, sz = 0.0;
  const int count = n_hi - n_lo + 1;
  for (int n = n_lo; n <= n_hi; ++n) {
    const double yn = y[static_cast<std::size_t>(n - 1)];
    if (yn <= 0.0)
      throw std::invalid_argument("loglog_slope: nonpositive value in range");
    sx += std::log(static_cast<double>(n));
    sz += std::log(yn);
  }
  const double mx = sx / count, mz = sz / count;
  double sxx = 0.0, sxz = 0.0;
  for (int n = n_lo; n <= n_hi; ++n) {
    const double dx = std::log(static_cast<double>(n)) - mx;
    const double dz = std::log(y[static_cast<std::size_t>(n - 1)]) - mz;
    sxx += dx * dx;
    sxz += dx * dz;
  }
  if (sxx <= 0.0) throw std::invalid_argument("loglog_slope: degenerate x");
  return sxz / sxx;
}

double regret_bound_rhs(const RegretBoundInputs& in) {
  if (in.episodes < 1 || in.delta <= 0.0 || in.delta >= 1.0)
    throw std::invalid_argument("regret_bound_rhs: bad episodes or delta");
  if (in.beta <= 0.0 || in.d_first < 0.0 || in.d_second < 0.0 ||
      in.sum_delta_bar_sq < 0.0 || in.sum_variance < 0.0 ||
      in.m_bar_total < 1.0)
    throw std::invalid_argument("regret_bound_rhs: negative input");
  const double iota =
      std::log(static_cast<double>(in.episodes) / in.delta) *
      std::log(in.m_bar_total);
  const double root = std::sqrt(in.d_second * in.beta *
                                (in.sum_delta_bar_sq + in.sum_variance));
  return iota * (in.d_first * in.beta + root);
}

double lambda_total_complexity(double lambda, int episodes, double m_total) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("lambda_total_complexity: lambda in [0, 1]");
  if (episodes < 0 || m_total < 0.0)
    throw std::invalid_argument("lambda_total_complexity: negative count");
  return (1.0 - lambda) * static_cast<double>(episodes) + lambda * m_total;
}

ComplexityBound eval_complexity_bound(const ComplexityInputs& in) {
  if (in.d <= 0.0 || in.eps <= 0.0 || in.var_pi < 0.0 || in.horizon <= 0.0 ||
      in.gap <= 0.0 || in.lambda < 0.0 || in.lambda > 1.0)
    throw std::invalid_argument("eval_complexity_bound: bad input");
  const double d2 = in.d * in.d;
  const double eps2 = in.eps * in.eps;
  const double base = d2 / in.eps + d2 * in.var_pi / eps2;
  ComplexityBound out;
  out.episode_term = (1.0 - in.lambda) * base;
  out.measurement_term = in.lambda * d2 * in.horizon * in.horizon / eps2;
  out.gap_term = (1.0 - in.lambda) * d2 * in.horizon * in.gap / eps2;
  out.per_episode_cost = base * in.lambda * in.horizon / in.gap;
  out.total = out.episode_term + out.measurement_term + out.gap_term +
              out.per_episode_cost;
  return out;
}

double lambda0_optimal_gap(const ComplexityInputs& in,
                           const std::vector<double>& gap_grid) {
  if (gap_grid.empty())
    throw std::invalid_argument("lambda0_optimal_gap: empty grid");
  ComplexityInputs probe = in;
  probe.lambda = 0.0;
  double min_total = std::numeric_limits<double>::infinity();
  for (double g : gap_grid) {
    probe.gap = g;
    min_total = std::min(min_total, eval_complexity_bound(probe).total);
  }
  double best = -1.0;
  for (double g : gap_grid) {
    probe.gap = g;
    if (eval_complexity_bound(probe).total <= 2.0 * min_total)
      best = std::max(best, g);
  }
  return best;
}

int eluder_estimate(const std::vector<std::vector<double>>& psi, double eps) {
  if (eps <= 0.0)
    throw std::invalid_argument("eluder_estimate: eps must be positive");
  if (psi.empty()) return 0;
  const std::size_t n_points = psi.front().size();
  for (const auto& row : psi)
    if (row.size() != n_points)
      throw std::invalid_argument("eluder_estimate: ragged psi matrix");
  if (n_points == 0) return 0;

  // greedily extend a sequence of grid points; a point extends it when some
  // discrepancy function stayed small (l1 over the sequence) yet is large at
  // the new point. Each function can witness at most once, so the loop ends.
  std::vector<double> l1(psi.size(), 0.0);
  int length = 0;
  for (;;) {
    std::size_t pick = n_points;
    for (std::size_t y = 0; y < n_points && pick == n_points; ++y) {
      for (std::size_t j = 0; j < psi.size(); ++j) {
        if (l1[j] <= eps && std::abs(psi[j][y]) > eps) {
          pick = y;
          break;
        }
      }
    }
    if (pick == n_points) break;
    for (std::size_t j = 0; j < psi.size(); ++j)
      l1[j] += std::abs(psi[j][pick]);
    ++length;
  }
  return length;
}

VarSquareCheck var_square_property(const std::vector<double>& samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("var_square_property: need 2+ samples");
  for (double s : samples)
    if (s < 0.0 || s > 1.0)
      throw std::invalid_argument("var_square_property: sample outside [0,1]");
  std::vector<double> sq(samples.size());
  std::transform(samples.begin(), samples.end(), sq.begin(),
                 [](double s) { return s * s; });
  auto variance = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(xs.size() - 1);
  };
  VarSquareCheck out;
  out.var_x = variance(samples);
  out.var_x2 = variance(sq);
  out.holds = out.var_x2 <= 4.0 * out.var_x + 1e-12;
  return out;
}

Decomposition simulation_decomposition(const Environment& env,
                                       const EpisodeOutcome& outcome,
                                       int n_rollouts, double sim_step,
                                       const RngStream& rng) {
  if (n_rollouts < 2)
    throw std::invalid_argument("simulation_decomposition: need 2+ rollouts");
  if (sim_step <= 0.0)
    throw std::invalid_argument("simulation_decomposition: bad sim_step");
  const EpisodeRecord& rec = outcome.record;
  if (rec.policy_index < 0 ||
      rec.policy_index >= static_cast<int>(env.policies.size()) ||
      rec.model_index < 0 ||
      rec.model_index >= static_cast<int>(env.model_class.models.size()))
    throw std::invalid_argument("simulation_decomposition: bad record index");

  const SdeModel& opt_model =
      env.model_class.models[static_cast<std::size_t>(rec.model_index)];
  const Policy& pol =
      env.policies[static_cast<std::size_t>(rec.policy_index)];
  const MeasurementSchedule& sched = outcome.schedule;
  const Trajectory& traj = outcome.trajectory;
  const double horizon = sched.horizon;
  const std::size_t m = sched.gaps();
  if (m == 0)
    throw std::invalid_argument("simulation_decomposition: empty schedule");

  // boundary times t_0 = 0 < t_1 < ... < t_m = horizon and the recorded
  // states at them
  std::vector<double> t(m + 1);
  std::vector<Vec> xs(m + 1);
  t[0] = 0.0;
  xs[0] = traj.states.front();
  for (std::size_t k = 0; k < m; ++k) {
    t[k + 1] = sched.times[k + 1];
    xs[k + 1] = traj.states[traj.nearest_index(sched.times[k + 1])];
  }

  std::vector<double> rec_seg(m);
  for (std::size_t k = 0; k < m; ++k)
    rec_seg[k] = integrate_reward_segment(traj, env.reward, t[k], t[k + 1]);
  const double rec_total =
      integrate_reward_segment(traj, env.reward, 0.0, horizon);

  const auto run_batch = [&](const RngStream& base, auto&& one) {
    std::vector<double> first(static_cast<std::size_t>(n_rollouts));
    std::vector<double> second(static_cast<std::size_t>(n_rollouts));
    for (int i = 0; i < n_rollouts; ++i) {
      RngStream r = base.sub(static_cast<std::uint64_t>(i));
      const std::pair<double, double> pr = one(r);
      first[static_cast<std::size_t>(i)] = pr.first;
      second[static_cast<std::size_t>(i)] = pr.second;
    }
    std::vector<double> total(first.size());
    for (std::size_t i = 0; i < first.size(); ++i)
      total[i] = first[i] + second[i];
    struct Out {
      MeanSe first, second, total;
    };
    return Out{mean_se(first), mean_se(second), mean_se(total)};
  };

  // full-horizon values from the initial state: optimistic pair and truth
  const auto e1 = run_batch(rng.sub(1), [&](RngStream& r) {
    const RolloutResult res = rollout_reward(opt_model, pol, env.reward,
                                             env.x_ini, horizon, sim_step, r);
    return std::make_pair(res.reward_raw, 0.0);
  });
  const auto e2 = run_batch(rng.sub(2), [&](RngStream& r) {
    const RolloutResult res = rollout_reward(env.true_model, pol, env.reward,
                                             env.x_ini, horizon, sim_step, r);
    return std::make_pair(res.reward_raw, 0.0);
  });

  Decomposition out;
  out.value_opt = {e1.first.mean, e1.first.se};
  out.value_true = {e2.first.mean, e2.first.se};
  out.i0 = {e2.first.mean - rec_total, e2.first.se};
  out.i1.resize(m);
  out.i2.resize(m);
  out.i3.resize(m);
  out.i4.resize(m);

  double resid_var = e1.first.se * e1.first.se;
  double sum_terms = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double gap = t[k + 1] - t[k];
    const double tail = horizon - t[k + 1];

    // true-model step over the gap, then optimistic continuation; the two
    // stages share one stream per replicate
    const auto a =
        run_batch(rng.sub(100 + 3 * static_cast<std::uint64_t>(k)),
                  [&](RngStream& r) {
                    const RolloutResult seg = rollout_reward(
                        env.true_model, pol, env.reward, xs[k], gap, sim_step,
                        r);
                    const RolloutResult cont =
                        rollout_reward(opt_model, pol, env.reward,
                                       seg.terminal, tail, sim_step, r);
                    return std::make_pair(seg.reward_raw, cont.reward_raw);
                  });
    // optimistic rollout across the same span, reward split at the gap
    const auto b =
        run_batch(rng.sub(101 + 3 * static_cast<std::uint64_t>(k)),
                  [&](RngStream& r) {
                    const RolloutResult res =
                        rollout_reward(opt_model, pol, env.reward, xs[k],
                                       gap + tail, sim_step, r, gap);
                    return std::make_pair(res.reward_pre,
                                          res.reward_raw - res.reward_pre);
                  });
    // optimistic continuation from the recorded next state
    const auto c =
        run_batch(rng.sub(102 + 3 * static_cast<std::uint64_t>(k)),
                  [&](RngStream& r) {
                    const RolloutResult res =
                        rollout_reward(opt_model, pol, env.reward, xs[k + 1],
                                       tail, sim_step, r);
                    return std::make_pair(res.reward_raw, 0.0);
                  });

    out.i1[k] = {a.second.mean - c.first.mean,
                 quad_sum(a.second.se, c.first.se)};
    out.i2[k] = {a.first.mean - rec_seg[k], a.first.se};
    out.i3[k] = {b.second.mean - a.second.mean,
                 quad_sum(b.second.se, a.second.se)};
    out.i4[k] = {b.first.mean - a.first.mean, quad_sum(b.first.se, a.first.se)};
    sum_terms += out.i1[k].value + out.i2[k].value + out.i3[k].value +
                 out.i4[k].value;
    resid_var += b.total.se * b.total.se + c.first.se * c.first.se;
  }

  // The per-gap terms telescope: their sum minus the realization noise i0
  // estimates value_opt - value_true. The shared batches cancel exactly in
  // the defect below, which leaves only independent estimators, so the
  // quadrature error bar is exact.
  out.residual =
      (out.value_opt.value - out.value_true.value) - (sum_terms - out.i0.value);
  out.residual_std_err = std::sqrt(resid_var);
  return out;
}

BellmanCheck bellman_identity_check(const SdeModel& model, const Policy& policy,
                                    const RewardSpec& reward, const Vec& x,
                                    double remaining, double gap,
                                    int n_rollouts, double sim_step,
                                    const RngStream& rng) {
  if (n_rollouts < 2)
    throw std::invalid_argument("bellman_identity_check: need 2+ rollouts");
  if (!(gap > 0.0) || gap > remaining + 1e-12)
    throw std::invalid_argument(
        "bellman_identity_check: gap must lie in (0, remaining]");
  const double tail = std::max(0.0, remaining - gap);

  const RngStream lhs_rng = rng.sub(1);
  const RngStream seg_rng = rng.sub(2);
  const RngStream cont_rng = rng.sub(3);

  std::vector<double> lhs_vals(static_cast<std::size_t>(n_rollouts));
  std::vector<double> rhs_vals(static_cast<std::size_t>(n_rollouts));
  for (int i = 0; i < n_rollouts; ++i) {
    const auto k = static_cast<std::uint64_t>(i);
    RngStream rl = lhs_rng.sub(k);
    lhs_vals[static_cast<std::size_t>(i)] =
        rollout_reward(model, policy, reward, x, remaining, sim_step, rl)
            .reward_raw;

    RngStream rs = seg_rng.sub(k);
    const RolloutResult seg =
        rollout_reward(model, policy, reward, x, gap, sim_step, rs);
    RngStream rc = cont_rng.sub(k);
    const RolloutResult cont = rollout_reward(model, policy, reward,
                                              seg.terminal, tail, sim_step, rc);
    rhs_vals[static_cast<std::size_t>(i)] = seg.reward_raw + cont.reward_raw;
  }

  const MeanSe lhs = mean_se(lhs_vals);
  const MeanSe rhs = mean_se(rhs_vals);
  BellmanCheck out;
  out.lhs = {lhs.mean, lhs.se};
  out.rhs = {rhs.mean, rhs.se};
  out.diff = lhs.mean - rhs.mean;
  out.combined_std_err = quad_sum(lhs.se, rhs.se);
  out.z = out.combined_std_err > 0.0 ? out.diff / out.combined_std_err : 0.0;
  return out;
}

std::vector<std::vector<double>> class_discrepancy_matrix(
    const Environment& env, const std::vector<Vec>& probe_states,
    const std::vector<double>& gaps) {
  if (probe_states.empty() || gaps.empty())
    throw std::invalid_argument("class_discrepancy_matrix: empty probe grid");
  const KernelMode mode = env.model_class.kernel_mode;
  std::vector<std::vector<double>> psi;
  psi.reserve(env.model_class.models.size());
  for (const SdeModel& member : env.model_class.models) {
    std::vector<double> row;
    row.reserve(env.policies.size() * probe_states.size() * gaps.size());
    for (const Policy& pol : env.policies) {
      const TransitionKernel ref(&env.true_model, &pol, mode);
      const TransitionKernel ker(&member, &pol, mode);
      for (const Vec& x : probe_states)
        for (double gap : gaps) {
          const double h2 = hellinger_sq_gaussian(ref.transition(x, gap),
                                                  ker.transition(x, gap));
          row.push_back(std::sqrt(std::max(0.0, h2)));
        }
    }
    psi.push_back(std::move(row));
  }
  return psi;
}

}  // namespace ctmle
