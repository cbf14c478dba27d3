#pragma once

#include <Eigen/Dense>

namespace ctmle {

// One-step transition law x' ~ N(mean, cov). Covariances are kept symmetric
// with eigenvalues floored at kSigmaFloor^2 so log densities stay finite even
// for degenerate model classes.
struct GaussianTransition {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline constexpr double kSigmaFloor = 1e-6;  // state units

// symmetrize and floor eigenvalues at floor_sq
Eigen::MatrixXd floor_covariance(const Eigen::MatrixXd& cov, double floor_sq);

GaussianTransition make_transition(Eigen::VectorXd mean, Eigen::MatrixXd cov);

double log_density(const GaussianTransition& t, const Eigen::VectorXd& y);

// closed-form squared Hellinger distance between two Gaussians
double hellinger_sq_gaussian(const GaussianTransition& a,
                             const GaussianTransition& b);

// Transition density of dx = -gamma x dt + sigma dw as a truncated
// eigenfunction series (Mehler kernel with probabilists' Hermite
// polynomials):
//   p(y | t, y0) = p_st(y) sum_{n<n_terms} rho^n / n! He_n(y/s) He_n(y0/s),
// rho = exp(-gamma t), s^2 = sigma^2 / (2 gamma). Test fixture for
// cross-checking Gaussian transition kernels against an independent
// representation; truncation error grows with rho and |y|/s.
double ou_spectral_density(double y, double t, double y0, double gamma,
                           double sigma, int n_terms);

}  // namespace ctmle
