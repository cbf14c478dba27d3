#include "ctmle/dataset.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <stdexcept>

namespace ctmle {

double log_likelihood(const ModelClass& cls, const std::vector<Policy>& pols,
                      int model_index,
                      const std::vector<TransitionSample>& samples) {
  if (model_index < 0 || model_index >= static_cast<int>(cls.models.size()))
    throw std::invalid_argument("log_likelihood: model index");
  // one kernel per policy seen in the data
  std::vector<std::unique_ptr<TransitionKernel>> kernels(pols.size());
  double acc = 0.0;
  for (const auto& s : samples) {
    if (s.gap <= 0.0) throw std::invalid_argument("log_likelihood: gap <= 0");
    auto& k = kernels.at(s.policy_index);
    if (!k)
      k = std::make_unique<TransitionKernel>(
          &cls.models[model_index], &pols[s.policy_index], cls.kernel_mode);
    acc += log_density(k->transition(s.x_from, s.gap), s.x_to);
  }
  return acc;
}

bool ConfidenceSet::contains(int model_index) const {
  return std::find(members.begin(), members.end(), model_index) !=
         members.end();
}

ConfidenceSet confidence_set(const ModelClass& cls,
                             const std::vector<Policy>& pols,
                             const std::vector<TransitionSample>& samples,
                             double beta) {
  if (beta < 0.0) throw std::invalid_argument("confidence_set: beta < 0");
  ConfidenceSet out;
  out.beta = beta;
  out.logliks.resize(cls.models.size());
  for (std::size_t j = 0; j < cls.models.size(); ++j)
    out.logliks[j] = log_likelihood(cls, pols, static_cast<int>(j), samples);
  out.best_loglik =
      *std::max_element(out.logliks.begin(), out.logliks.end());
  for (std::size_t j = 0; j < cls.models.size(); ++j)
    if (out.logliks[j] >= out.best_loglik - beta)
      out.members.push_back(static_cast<int>(j));
  return out;
}

std::vector<int> intersect_members(const ConfidenceSet& a,
                                   const ConfidenceSet& b) {
  std::vector<int> out;
  for (int j : a.members)
    if (b.contains(j)) out.push_back(j);
  return out;
}

}  // namespace ctmle
