#pragma once

#include <vector>

#include "ctmle/learner.hpp"

namespace ctmle {

struct VarianceEstimate {
  double variance = 0.0;
  double std_err = 0.0;  // standard error of the variance estimate
  double mean = 0.0;
};

// sample variance of the cumulative reward under one (model, policy) pair;
// the std error uses the fourth-moment formula, no normality assumed
VarianceEstimate total_variance(const SdeModel& model, const Policy& policy,
                                const RewardSpec& reward, const Vec& x_ini,
                                int n_rollouts, double sim_step,
                                const RngStream& rng);

// a priori bound on the total reward variance from the dynamics constants:
//   min{ 1, G^2 T L_b^2 (1 + L_u) / (2 L_f) * (exp(2 L_f (1 + L_u) T) - 1) }
double gronwall_variance_bound(double l_b, double l_f, double l_u,
                               double g_frob, double horizon);

struct OracleValues {
  int best_policy = -1;
  double best_value = 0.0;
  std::vector<double> values;    // per policy, common random numbers
  std::vector<double> std_errs;
};

// scan the policy class under the true model at oracle budget
OracleValues brute_force_optimal(const Environment& env, int n_rollouts,
                                 double sim_step, const RngStream& rng);

struct RegretCurve {
  OracleValues oracle;
  std::vector<double> instantaneous;  // R*(u*) - R*(u_n), one per episode
  std::vector<double> cumulative;
};

// re-evaluates each executed policy under the true model with the oracle
// budget; every distinct policy is evaluated once and shared across episodes
RegretCurve regret_curve(const Environment& env,
                         const std::vector<EpisodeRecord>& records,
                         int n_rollouts, double sim_step,
                         const RngStream& rng);

// same curve against an oracle that was computed once and is being shared
// across several runs of the same environment
RegretCurve regret_curve(const std::vector<EpisodeRecord>& records,
                         const OracleValues& oracle);

// least-squares slope of log(y_n) against log(n) for n in [n_lo, n_hi]
// (1-based); y must be positive on the range
double loglog_slope(const std::vector<double>& y, int n_lo, int n_hi);

struct RegretBoundInputs {
  double d_first = 0.0;   // complexity value entering the linear term
  double d_second = 0.0;  // complexity value entering the square-root term
  double beta = 0.0;
  int episodes = 0;
  double delta = 0.1;
  double sum_delta_bar_sq = 0.0;  // sum_n sum_k gap_{n,k}^2
  double sum_variance = 0.0;      // sum_n Var^{u_n}
  double m_bar_total = 0.0;       // total measurement count
};

// iota * (d_first beta + sqrt(d_second beta (sum_delta_bar_sq +
// sum_variance))) with iota = log(N / delta) log(m_bar_total); all absolute
// constants set to 1
double regret_bound_rhs(const RegretBoundInputs& in);

// (1 - lambda) N + lambda * total measurements
double lambda_total_complexity(double lambda, int episodes, double m_total);

struct ComplexityInputs {
  double d = 1.0;        // model-class complexity entering quadratically
  double eps = 0.1;      // target accuracy
  double var_pi = 0.1;   // worst-case policy-class total variance
  double horizon = 1.0;  // T
  double gap = 0.1;      // measurement gap Delta
  double lambda = 0.0;   // episode vs measurement cost weight
};

struct ComplexityBound {
  double episode_term = 0.0;      // (1-l) (d^2/eps + d^2 var/eps^2)
  double measurement_term = 0.0;  // l d^2 T^2 / eps^2
  double gap_term = 0.0;          // (1-l) d^2 T gap / eps^2
  double per_episode_cost = 0.0;  // (d^2/eps + d^2 var/eps^2) l T / gap
  double total = 0.0;
};

ComplexityBound eval_complexity_bound(const ComplexityInputs& in);

// Largest grid gap whose lambda = 0 bound stays within a factor 2 of the
// grid minimum. The lambda = 0 expression decreases as the gap shrinks, so
// "optimal" means the coarsest gap that preserves the order of the minimum;
// with eps <= var_pi this lands on gap = var_pi / horizon when the grid
// contains it.
double lambda0_optimal_gap(const ComplexityInputs& in,
                           const std::vector<double>& gap_grid);

// greedy lower bound for the eluder dimension at the p = 1 condition;
// psi[j][y] holds |psi_j| evaluated at grid point y
int eluder_estimate(const std::vector<std::vector<double>>& psi, double eps);

struct VarSquareCheck {
  double var_x = 0.0;
  double var_x2 = 0.0;
  bool holds = false;  // var_x2 <= 4 var_x + tolerance
};

// for samples in [0, 1]; checks the variance self-bounding inequality
VarSquareCheck var_square_property(const std::vector<double>& samples);

struct TermEstimate {
  double value = 0.0;
  double std_err = 0.0;
};

// Monte Carlo estimate of the per-gap error decomposition of one recorded
// episode against its optimistic (model, policy) pair. All expectations are
// fresh two-stage rollouts from the recorded states; each estimator draws
// from its own stream, so the residual's standard error is the quadrature
// sum of the parts.
struct Decomposition {
  TermEstimate i0;
  std::vector<TermEstimate> i1, i2, i3, i4;  // one per gap
  TermEstimate value_opt;   // V under the optimistic pair from x_ini
  TermEstimate value_true;  // same under the true model
  double residual = 0.0;    // identity defect, zero in expectation
  double residual_std_err = 0.0;
};

Decomposition simulation_decomposition(const Environment& env,
                                       const EpisodeOutcome& outcome,
                                       int n_rollouts, double sim_step,
                                       const RngStream& rng);

struct BellmanCheck {
  TermEstimate lhs;  // value of the remaining horizon started at x
  TermEstimate rhs;  // reward over the gap plus the value from the gap end
  double diff = 0.0;
  double combined_std_err = 0.0;
  double z = 0.0;  // diff in combined-std-err units
};

// Monte Carlo check of the flow identity
//   V(x, s) = E[ reward over (s, s + gap] ] + E[ V(X_{s+gap}, s + gap) ]
// with `remaining` = horizon - s. Rewards are rate(x, u) integrals, so only
// the remaining duration matters. The two sides use independent streams and
// the right side resamples the continuation independently of the first
// segment, making the comparison a real tower-property test rather than a
// telescoping tautology.
BellmanCheck bellman_identity_check(const SdeModel& model, const Policy& policy,
                                    const RewardSpec& reward, const Vec& x,
                                    double remaining, double gap,
                                    int n_rollouts, double sim_step,
                                    const RngStream& rng);

// Row j holds the gap-transition Hellinger distances between class member j
// and the environment's true dynamics over a probe grid (every policy
// crossed with every probe state and gap). Rows feed eluder_estimate; the
// row of the true member, when present, is identically zero and never
// witnesses.
std::vector<std::vector<double>> class_discrepancy_matrix(
    const Environment& env, const std::vector<Vec>& probe_states,
    const std::vector<double>& gaps);

}  // namespace ctmle
