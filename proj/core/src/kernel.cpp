#include "ctmle/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace ctmle {

TransitionKernel::TransitionKernel(const SdeModel* model, const Policy* policy,
                                   KernelMode mode)
    : model_(model), policy_(policy), mode_(mode) {
  if (mode_ == KernelMode::closed_form_linear) {
    if (model->kind != ModelKind::linear_gaussian || !model->linear)
      throw std::invalid_argument(
          "TransitionKernel: closed_form_linear needs a linear_gaussian model");
    if (!policy->affine)
      throw std::invalid_argument(
          "TransitionKernel: closed_form_linear needs an affine policy");
    const auto& lin = *model->linear;
    const auto& aff = *policy->affine;
    A_eff_ = lin.A + lin.B * aff.K;
    b_eff_ = lin.B * aff.k0 + lin.c0;
    GGt_ = lin.G * lin.G.transpose();
  }
}

GaussianTransition TransitionKernel::transition(const Vec& x_from,
                                                double gap) const {
  if (!(gap > 0.0))
    throw std::invalid_argument("TransitionKernel: gap must be positive");
  if (x_from.size() != model_->state_dim)
    throw std::invalid_argument("TransitionKernel: x_from dimension");
  return mode_ == KernelMode::closed_form_linear ? linear_step(x_from, gap)
                                                 : euler_step(x_from, gap);
}

GaussianTransition TransitionKernel::linear_step(const Vec& x_from,
                                                 double gap) const {
  const auto d = model_->state_dim;
  if (d == 1) {
    const double a = A_eff_(0, 0), b = b_eff_(0), q = GGt_(0, 0);
    const double phi = std::exp(a * gap);
    double drive, var;
    if (std::abs(a) > 1e-12) {
      drive = (phi - 1.0) / a * b;
      var = q * (std::exp(2.0 * a * gap) - 1.0) / (2.0 * a);
    } else {
      drive = b * gap;
      var = q * gap;
    }
    Vec mean = Vec::Constant(1, phi * x_from(0) + drive);
    Mat cov = Mat::Constant(1, 1, var);
    return make_transition(std::move(mean), std::move(cov));
  }

  // mean: augment the state with a constant to fold in the affine drive
  Mat aug = Mat::Zero(d + 1, d + 1);
  aug.topLeftCorner(d, d) = A_eff_;
  aug.topRightCorner(d, 1) = b_eff_;
  const Mat aug_exp = (aug * gap).exp();
  Vec mean = aug_exp.topLeftCorner(d, d) * x_from + aug_exp.topRightCorner(d, 1);

  // covariance: Van Loan block trick,
  //   exp([[A, Q], [0, -A^T]] gap) = [[M11, M12], [0, M22]]
  // gives int_0^gap e^{As} Q e^{A^T s} ds = M12 M11^T
  Mat block = Mat::Zero(2 * d, 2 * d);
  block.topLeftCorner(d, d) = A_eff_;
  block.topRightCorner(d, d) = GGt_;
  block.bottomRightCorner(d, d) = -A_eff_.transpose();
  const Mat block_exp = (block * gap).exp();
  const Mat m11 = block_exp.topLeftCorner(d, d);
  const Mat m12 = block_exp.topRightCorner(d, d);
  Mat cov = m12 * m11.transpose();
  return make_transition(std::move(mean), std::move(cov));
}

GaussianTransition TransitionKernel::euler_step(const Vec& x_from,
                                                double gap) const {
  const Vec u0 = policy_->act(x_from);
  const Mat g = model_->diffusion(x_from, u0);
  Mat cov = g * g.transpose() * gap;

  // RK4 on the composed drift
  constexpr int kMinSubsteps = 16;
  const int n = kMinSubsteps;
  const double h = gap / n;
  Vec x = x_from;
  auto f = [&](const Vec& xs) { return model_->drift(xs, policy_->act(xs)); };
  for (int i = 0; i < n; ++i) {
    const Vec k1 = f(x);
    const Vec k2 = f(x + 0.5 * h * k1);
    const Vec k3 = f(x + 0.5 * h * k2);
    const Vec k4 = f(x + h * k3);
    x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return make_transition(std::move(x), std::move(cov));
}

}  // namespace ctmle
