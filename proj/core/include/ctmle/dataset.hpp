#pragma once

#include <string>
#include <vector>

#include "ctmle/kernel.hpp"
#include "ctmle/sde.hpp"

namespace ctmle {

enum class SampleTag { grid, augmented };

// one observed transition x(t) -> x(t + gap) under a recorded policy
struct TransitionSample {
  int episode = 0;       // 1-based episode index
  int policy_index = 0;  // into the policy class of the experiment
  Vec x_from;
  Vec x_to;
  double gap = 0.0;  // realized gap, > 0
  SampleTag tag = SampleTag::grid;
};

// grid and augmented observations kept as separate partitions; the two
// confidence sets are built from one partition each
struct Dataset {
  std::vector<TransitionSample> grid;
  std::vector<TransitionSample> augmented;
};

// finite drift x diffusion product class; ids encode the (drift, diffusion)
// grid coordinates
struct ModelClass {
  std::vector<SdeModel> models;
  int n_drift = 0;      // |F|
  int n_diffusion = 0;  // |G|
  int true_index = -1;  // position of the environment model, -1 if absent
  KernelMode kernel_mode = KernelMode::closed_form_linear;
};

// sum over samples of the gap-transition log density under one model,
// composed with the policy each sample was collected under
double log_likelihood(const ModelClass& cls, const std::vector<Policy>& pols,
                      int model_index,
                      const std::vector<TransitionSample>& samples);

struct ConfidenceSet {
  std::vector<int> members;      // model indices with loglik >= best - beta
  std::vector<double> logliks;   // one per class member
  double best_loglik = 0.0;
  double beta = 0.0;

  bool contains(int model_index) const;
};

// MLE confidence set at radius beta; an empty sample set keeps every model
ConfidenceSet confidence_set(const ModelClass& cls,
                             const std::vector<Policy>& pols,
                             const std::vector<TransitionSample>& samples,
                             double beta);

std::vector<int> intersect_members(const ConfidenceSet& a,
                                   const ConfidenceSet& b);

}  // namespace ctmle
