// Throughput benchmarks for the paths that dominate experiment wall time:
// bare rollouts (value scans), gap-transition kernels, likelihood sums over
// the model class, and the Hellinger bilinear form.

#include <benchmark/benchmark.h>

#include <cmath>

#include "ctmle/dataset.hpp"
#include "ctmle/envs.hpp"
#include "ctmle/kernel.hpp"
#include "ctmle/learner.hpp"
#include "ctmle/metrics.hpp"
#include "ctmle/quadratic.hpp"
#include "ctmle/sde.hpp"

namespace {

using namespace ctmle;

void BM_rollout_scalar_ou(benchmark::State& state) {
  const Preset p = make_ou_control();
  const RngStream base(3, 0, Purpose::diagnostics);
  std::uint64_t i = 0;
  for (auto _ : state) {
    RngStream rng = base.sub(i++);
    const RolloutResult r =
        rollout_reward(p.env.true_model, p.env.policies[1], p.env.reward,
                       p.env.x_ini, p.env.horizon, 1.0 / 256.0, rng);
    benchmark::DoNotOptimize(r.reward_raw);
  }
}
BENCHMARK(BM_rollout_scalar_ou);

void BM_rollout_vector_linear2d(benchmark::State& state) {
  const Preset p = make_linear_2d();
  const RngStream base(3, 1, Purpose::diagnostics);
  std::uint64_t i = 0;
  for (auto _ : state) {
    RngStream rng = base.sub(i++);
    const RolloutResult r =
        rollout_reward(p.env.true_model, p.env.policies[0], p.env.reward,
                       p.env.x_ini, p.env.horizon, 1.0 / 256.0, rng);
    benchmark::DoNotOptimize(r.reward_raw);
  }
}
BENCHMARK(BM_rollout_vector_linear2d);

void BM_transition_closed_form(benchmark::State& state) {
  const Preset p = make_ou_control();
  const TransitionKernel kernel(&p.env.true_model, &p.env.policies[1],
                                KernelMode::closed_form_linear);
  const Vec x = Vec::Constant(1, 0.3);
  for (auto _ : state) {
    const GaussianTransition law = kernel.transition(x, 0.25);
    benchmark::DoNotOptimize(law.mean);
  }
}
BENCHMARK(BM_transition_closed_form);

void BM_transition_euler_gaussian(benchmark::State& state) {
  const Preset p = make_bounded_nonlinear();
  const TransitionKernel kernel(&p.env.true_model, &p.env.policies[0],
                                KernelMode::euler_gaussian);
  const Vec x = Vec::Constant(1, 0.2);
  for (auto _ : state) {
    const GaussianTransition law = kernel.transition(x, 0.25);
    benchmark::DoNotOptimize(law.mean);
  }
}
BENCHMARK(BM_transition_euler_gaussian);

void BM_log_likelihood_class(benchmark::State& state) {
  const Preset p = make_ou_control();
  const TransitionKernel kernel(
      &p.env.true_model, &p.env.policies[2],
      p.env.model_class.kernel_mode);
  RngStream rng(3, 2, Purpose::fixture);
  std::vector<TransitionSample> samples;
  for (int i = 0; i < 256; ++i) {
    TransitionSample s;
    s.episode = 1;
    s.policy_index = 2;
    s.x_from = Vec::Constant(1, rng.uniform(-0.5, 1.5));
    s.gap = 0.25;
    const GaussianTransition law = kernel.transition(s.x_from, s.gap);
    s.x_to = Vec::Constant(
        1, law.mean[0] + std::sqrt(law.cov(0, 0)) * rng.normal());
    samples.push_back(std::move(s));
  }
  int model = 0;
  const int n_models = static_cast<int>(p.env.model_class.models.size());
  for (auto _ : state) {
    const double ll =
        log_likelihood(p.env.model_class, p.env.policies, model, samples);
    benchmark::DoNotOptimize(ll);
    model = (model + 1) % n_models;
  }
}
BENCHMARK(BM_log_likelihood_class);

void BM_hellinger_bilinear(benchmark::State& state) {
  const QuadraticDensityFamily fam = make_quadratic_fixture();
  for (auto _ : state) {
    const HellingerValue h = hellinger_sq_quadratic(fam, 1, 3, 0.02);
    benchmark::DoNotOptimize(h.value);
  }
}
BENCHMARK(BM_hellinger_bilinear);

void BM_eluder_estimate_grid(benchmark::State& state) {
  RngStream rng(3, 3, Purpose::fixture);
  std::vector<std::vector<double>> psi(40, std::vector<double>(192));
  for (auto& row : psi)
    for (double& v : row) v = rng.uniform(0.0, 0.4);
  for (auto _ : state) {
    const int est = eluder_estimate(psi, 0.05);
    benchmark::DoNotOptimize(est);
  }
}
BENCHMARK(BM_eluder_estimate_grid);

}  // namespace

BENCHMARK_MAIN();
