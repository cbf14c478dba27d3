#include "ctmle/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctmle {

double MeasurementSchedule::min_gap() const {
  double m = horizon;
  for (std::size_t k = 0; k < gaps(); ++k) m = std::min(m, gap(k));
  return m;
}

double MeasurementSchedule::sum_gap_sq() const {
  double s = 0.0;
  for (std::size_t k = 0; k < gaps(); ++k) s += gap(k) * gap(k);
  return s;
}

MeasurementSchedule build_equidistant_schedule(double horizon, double delta) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("schedule: horizon must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("schedule: delta <= 0");
  if (delta > horizon + 1e-12)
    throw std::invalid_argument("schedule: delta > horizon");
  MeasurementSchedule s;
  s.horizon = horizon;
  s.times.push_back(0.0);
  for (double t = delta; t < horizon - 1e-9 * horizon; t += delta)
    s.times.push_back(t);
  s.times.push_back(horizon);
  return s;
}

MeasurementSchedule build_geometric_schedule(double horizon, int m,
                                             double ratio) {
  if (!(horizon > 0.0) || m < 1 || !(ratio > 0.0))
    throw std::invalid_argument("schedule: bad geometric parameters");
  MeasurementSchedule s;
  s.horizon = horizon;
  s.times.resize(m + 1);
  s.times[0] = 0.0;
  const double first =
      std::abs(ratio - 1.0) < 1e-12
          ? horizon / m
          : horizon * (1.0 - ratio) / (1.0 - std::pow(ratio, m));
  double gap = first;
  for (int k = 0; k < m; ++k) {
    s.times[k + 1] = s.times[k] + gap;
    gap *= ratio;
  }
  s.times[m] = horizon;
  return s;
}

MeasurementSchedule build_explicit_schedule(double horizon,
                                            std::vector<double> times) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("schedule: horizon must be positive");
  if (times.size() < 2)
    throw std::invalid_argument("schedule: explicit times too short");
  if (std::abs(times.front()) > 1e-12 ||
      std::abs(times.back() - horizon) > 1e-9)
    throw std::invalid_argument("schedule: explicit times must span [0, horizon]");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw std::invalid_argument("schedule: explicit times not increasing");
  MeasurementSchedule s;
  s.horizon = horizon;
  s.times = std::move(times);
  s.times.front() = 0.0;
  s.times.back() = horizon;
  return s;
}

AugmentedSchedule randomize_schedule(const MeasurementSchedule& schedule,
                                     RngStream& rng) {
  AugmentedSchedule a;
  a.base = schedule;
  a.offsets.resize(schedule.gaps());
  for (std::size_t k = 0; k < schedule.gaps(); ++k) {
    double u;
    do {
      u = rng.uniform();
    } while (u == 0.0);  // offsets are strictly interior
    a.offsets[k] = u * schedule.gap(k);
  }
  return a;
}

}  // namespace ctmle
