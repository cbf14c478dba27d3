#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace ctmle {

// Finite class of squared-linear-form densities on a bounded support:
//   p_j(y | t) = (phi(t)^T mu_j(y))^2
// with a shared feature map ||phi(t)||_2 <= 1 and per-model component maps.
// Cross-Gram matrices G_ab = int mu_a mu_b^T dy are precomputed at
// construction so squared Hellinger distances reduce to a bilinear form.
struct QuadraticDensityFamily {
  int feature_dim = 0;
  double support_lo = -8.0;
  double support_hi = 8.0;
  std::function<Eigen::VectorXd(double)> feature;  // phi(t)
  std::vector<std::function<Eigen::VectorXd(double)>> components;
  std::vector<std::string> model_ids;
  int true_model = 0;
  std::vector<std::vector<Eigen::MatrixXd>> gram;  // [a][b]
  double b_bound = 0.0;  // max_j int ||mu_j||^2 dy
};

// Fixture family: phi(t) = (cos t, sin t) and
//   mu(y) = (c1 exp(-y^2), c2 y exp(-y^2)),
//   c1 = (2/pi)^{1/4}, c2 = 2 (2/pi)^{1/4},
// whose components are orthonormal on the line, so every phase-rotated copy
//   mu_s(y) = R(s)^T mu(y)
// is again a normalized density family member. Model j uses shift s_j;
// shifts[0] should be 0 so the base model is the true one.
QuadraticDensityFamily make_trig_hermite_family(
    const std::vector<double>& shifts, int gram_points = 4096);

double quadratic_density_eval(const QuadraticDensityFamily& fam,
                              int model_index, double t, double y);

struct HellingerValue {
  double value = 0.0;
  double clamp_amount = 0.0;  // > 1e-9 means the bilinear form left [0, 1]
};

// squared Hellinger distance between two members at feature point t via the
// precomputed cross-Gram bilinear form, clamped into [0, 1]. Exact whenever
// phi^T mu_a and phi^T mu_b carry no sign change over the effective support.
HellingerValue hellinger_sq_quadratic(const QuadraticDensityFamily& fam,
                                      int model_a, int model_b, double t);

}  // namespace ctmle
