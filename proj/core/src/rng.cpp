#include "ctmle/rng.hpp"

#include <cmath>

namespace ctmle {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t episode,
                         std::uint64_t purpose, std::uint64_t replicate) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ episode);
  h = mix64(h ^ (purpose << 32));
  h = mix64(h ^ replicate);
  return h;
}
}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t episode, Purpose purpose,
                     std::uint64_t replicate)
    : seed_(seed),
      episode_(episode),
      purpose_(static_cast<std::uint64_t>(purpose)),
      replicate_(replicate),
      gen_(derive_key(seed, episode, static_cast<std::uint64_t>(purpose),
                      replicate)) {}

RngStream RngStream::sub(std::uint64_t replicate) const {
  // re-key on (replicate_, replicate) so nested derivation stays collision-free
  RngStream child = *this;
  child.replicate_ = replicate;
  child.gen_.seed(derive_key(seed_, episode_, purpose_,
                             mix64(replicate_ ^ (replicate << 1)) + replicate));
  child.has_spare_ = false;
  return child;
}

std::uint64_t RngStream::bits() { return gen_(); }

double RngStream::uniform() {
  // 53-bit mantissa in [0, 1)
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double a, double b) { return a + (b - a) * uniform(); }

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m;
}

}  // namespace ctmle
