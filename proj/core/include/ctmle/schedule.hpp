#pragma once

#include <vector>

#include "ctmle/rng.hpp"

namespace ctmle {

// measurement grid 0 = t_0 < t_1 < ... < t_m = horizon
struct MeasurementSchedule {
  std::vector<double> times;
  double horizon = 0.0;

  std::size_t gaps() const { return times.empty() ? 0 : times.size() - 1; }
  double gap(std::size_t k) const { return times[k + 1] - times[k]; }
  double min_gap() const;
  double sum_gap_sq() const;  // sum_k gap_k^2
};

// uniform gaps of width delta, last gap truncated to land on the horizon;
// delta == horizon gives the single-measurement schedule
MeasurementSchedule build_equidistant_schedule(double horizon, double delta);

// m gaps shrinking (or growing) geometrically by `ratio`
MeasurementSchedule build_geometric_schedule(double horizon, int m,
                                             double ratio);

// caller-provided grid including both endpoints
MeasurementSchedule build_explicit_schedule(double horizon,
                                            std::vector<double> times);

// base schedule plus one uniform draw per gap, offsets[k] ~ Unif(0, gap_k)
// strictly interior
struct AugmentedSchedule {
  MeasurementSchedule base;
  std::vector<double> offsets;

  double augmented_time(std::size_t k) const {
    return base.times[k] + offsets[k];
  }
};

AugmentedSchedule randomize_schedule(const MeasurementSchedule& schedule,
                                     RngStream& rng);

}  // namespace ctmle
