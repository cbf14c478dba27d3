#pragma once

#include <cstdint>
#include <random>

namespace ctmle {

// Purpose tags keep the different consumers of one master seed on disjoint
// streams. Tag values participate in the stream key, so renumbering changes
// every derived stream; append new tags at the end only.
enum class Purpose : std::uint64_t {
  env_rollout = 1,
  schedule_offsets = 2,
  value_scan = 3,
  oracle = 4,
  marginal = 5,
  decomposition = 6,
  diagnostics = 7,
  episode_draw = 8,
  fixture = 9,
};

// splitmix64 finalizer, used to mix stream keys into generator seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

// A deterministic random stream addressed by (seed, episode, purpose,
// replicate). Streams with distinct keys are independent for practical
// purposes and can be created in any order, which is what makes parallel
// rollouts reproducible: each rollout derives its own stream from the key
// instead of sharing a sequential generator.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t episode, Purpose purpose,
            std::uint64_t replicate = 0);

  // child stream with the same (seed, episode, purpose) but a new replicate
  // index; independent of how many draws this stream has produced
  RngStream sub(std::uint64_t replicate) const;

  std::uint64_t bits();
  double uniform();                  // [0, 1)
  double uniform(double a, double b);
  // standard normal via the Marsaglia polar method; hand-rolled because
  // std::normal_distribution is implementation-defined and run outputs
  // must be byte-reproducible
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t episode() const { return episode_; }

 private:
  std::uint64_t seed_, episode_, purpose_, replicate_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ctmle
