#pragma once

#include "ctmle/gaussian.hpp"
#include "ctmle/sde.hpp"

namespace ctmle {

enum class KernelMode { closed_form_linear, euler_gaussian };

// Gap-level transition law p(x' | x, gap) for a model composed with a
// feedback policy.
//
// closed_form_linear: exact for affine dynamics composed with the affine
// part of the policy (mean via the matrix exponential, covariance via the
// Lyapunov integral). Only legal for linear_gaussian models with a policy
// that carries an affine part; any clipping in the executed policy is
// ignored here, which the environment presets keep rare by construction.
//
// euler_gaussian: mean from an RK4 flow of the composed drift (at least 16
// substeps per gap), covariance frozen at g(x, u(x)) g^T * gap.
class TransitionKernel {
 public:
  TransitionKernel(const SdeModel* model, const Policy* policy,
                   KernelMode mode);

  GaussianTransition transition(const Vec& x_from, double gap) const;

  KernelMode mode() const { return mode_; }
  const SdeModel& model() const { return *model_; }
  const Policy& policy() const { return *policy_; }

 private:
  const SdeModel* model_;
  const Policy* policy_;
  KernelMode mode_;
  // composed affine dynamics, linear mode only
  Mat A_eff_;
  Vec b_eff_;
  Mat GGt_;

  GaussianTransition linear_step(const Vec& x_from, double gap) const;
  GaussianTransition euler_step(const Vec& x_from, double gap) const;
};

}  // namespace ctmle
