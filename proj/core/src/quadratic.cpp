#include "ctmle/quadratic.hpp"

#include <cmath>
#include <stdexcept>

#include "ctmle/quadrature.hpp"

namespace ctmle {

QuadraticDensityFamily make_trig_hermite_family(
    const std::vector<double>& shifts, int gram_points) {
  if (shifts.empty())
    throw std::invalid_argument("make_trig_hermite_family: no shifts");
  QuadraticDensityFamily fam;
  fam.feature_dim = 2;
  fam.support_lo = -8.0;
  fam.support_hi = 8.0;
  fam.feature = [](double t) {
    Eigen::VectorXd phi(2);
    phi << std::cos(t), std::sin(t);
    return phi;
  };

  const double c1 = std::pow(2.0 / M_PI, 0.25);
  const double c2 = 2.0 * c1;
  for (std::size_t j = 0; j < shifts.size(); ++j) {
    const double s = shifts[j];
    const double cs = std::cos(s), sn = std::sin(s);
    fam.components.push_back([c1, c2, cs, sn](double y) {
      const double e = std::exp(-y * y);
      // R(s)^T applied to (c1 e^{-y^2}, c2 y e^{-y^2})
      Eigen::VectorXd mu(2);
      mu << cs * c1 * e + sn * c2 * y * e, -sn * c1 * e + cs * c2 * y * e;
      return mu;
    });
    fam.model_ids.push_back("shift_" + std::to_string(s));
  }
  fam.true_model = 0;

  const auto k = static_cast<int>(shifts.size());
  fam.gram.assign(k, std::vector<Eigen::MatrixXd>(k));
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      Eigen::MatrixXd g(2, 2);
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          g(r, c) = simpson(
              [&](double y) {
                return fam.components[a](y)(r) * fam.components[b](y)(c);
              },
              fam.support_lo, fam.support_hi, gram_points);
        }
      }
      fam.gram[a][b] = g;
    }
  }
  fam.b_bound = 0.0;
  for (int a = 0; a < k; ++a)
    fam.b_bound = std::max(fam.b_bound, fam.gram[a][a].trace());
  return fam;
}

double quadratic_density_eval(const QuadraticDensityFamily& fam,
                              int model_index, double t, double y) {
  if (model_index < 0 ||
      model_index >= static_cast<int>(fam.components.size()))
    throw std::invalid_argument("quadratic_density_eval: model index");
  const double v = fam.feature(t).dot(fam.components[model_index](y));
  return v * v;
}

HellingerValue hellinger_sq_quadratic(const QuadraticDensityFamily& fam,
                                      int model_a, int model_b, double t) {
  const auto k = static_cast<int>(fam.components.size());
  if (model_a < 0 || model_a >= k || model_b < 0 || model_b >= k)
    throw std::invalid_argument("hellinger_sq_quadratic: model index");
  const Eigen::VectorXd phi = fam.feature(t);
  const double raw = 1.0 - phi.dot(fam.gram[model_a][model_b] * phi);
  HellingerValue out;
  out.value = std::min(std::max(raw, 0.0), 1.0);
  out.clamp_amount = std::abs(raw - out.value);
  return out;
}

}  // namespace ctmle
