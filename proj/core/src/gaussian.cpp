#include "ctmle/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace ctmle {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

Eigen::MatrixXd floor_covariance(const Eigen::MatrixXd& cov, double floor_sq) {
  Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  if (sym.rows() == 1) {
    sym(0, 0) = std::max(sym(0, 0), floor_sq);
    return sym;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.eigenvalues().minCoeff() >= floor_sq) return sym;
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor_sq);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

GaussianTransition make_transition(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  if (mean.size() != cov.rows() || cov.rows() != cov.cols())
    throw std::invalid_argument("make_transition: shape mismatch");
  return {std::move(mean), floor_covariance(cov, kSigmaFloor * kSigmaFloor)};
}

double log_density(const GaussianTransition& t, const Eigen::VectorXd& y) {
  const auto d = t.mean.size();
  if (y.size() != d) throw std::invalid_argument("log_density: dim mismatch");
  if (d == 1) {
    // scalar fast path; this sits inside the likelihood loops
    const double var = t.cov(0, 0);
    const double r = y(0) - t.mean(0);
    return -0.5 * (kLog2Pi + std::log(var) + r * r / var);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(t.cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log_density: covariance not positive definite");
  const Eigen::VectorXd r = y - t.mean;
  const Eigen::VectorXd w = llt.matrixL().solve(r);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (d * kLog2Pi + logdet + w.squaredNorm());
}

double ou_spectral_density(double y, double t, double y0, double gamma,
                           double sigma, int n_terms) {
  if (gamma <= 0.0 || sigma <= 0.0 || n_terms < 1)
    throw std::invalid_argument("ou_spectral_density: parameters");
  const double s2 = sigma * sigma / (2.0 * gamma);
  const double s = std::sqrt(s2);
  const double rho = std::exp(-gamma * t);
  const double a = y / s, b = y0 / s;
  // probabilists' Hermite: He_{n+1}(x) = x He_n(x) - n He_{n-1}(x)
  double he_a0 = 1.0, he_a1 = a, he_b0 = 1.0, he_b1 = b;
  double sum = 1.0;           // n = 0 term
  double rho_pow = rho;       // rho^n
  double factorial = 1.0;     // n!
  for (int n = 1; n < n_terms; ++n) {
    factorial *= n;
    sum += rho_pow / factorial * he_a1 * he_b1;
    // advance recurrences to order n+1
    const double next_a = a * he_a1 - n * he_a0;
    const double next_b = b * he_b1 - n * he_b0;
    he_a0 = he_a1;
    he_a1 = next_a;
    he_b0 = he_b1;
    he_b1 = next_b;
    rho_pow *= rho;
  }
  const double p_st = std::exp(-0.5 * a * a) / (s * std::sqrt(2.0 * M_PI));
  return p_st * sum;
}

double hellinger_sq_gaussian(const GaussianTransition& a,
                             const GaussianTransition& b) {
  if (a.mean.size() != b.mean.size())
    throw std::invalid_argument("hellinger_sq_gaussian: dim mismatch");
  const Eigen::MatrixXd avg = 0.5 * (a.cov + b.cov);
  const Eigen::VectorXd dm = a.mean - b.mean;
  const double det_a = a.cov.determinant();
  const double det_b = b.cov.determinant();
  const double det_avg = avg.determinant();
  const double coef =
      std::pow(det_a, 0.25) * std::pow(det_b, 0.25) / std::sqrt(det_avg);
  const double expo = -0.125 * dm.dot(avg.llt().solve(dm));
  const double h2 = 1.0 - coef * std::exp(expo);
  return std::min(std::max(h2, 0.0), 1.0);
}

}  // namespace ctmle
