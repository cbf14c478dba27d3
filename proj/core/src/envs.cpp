#include "ctmle/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ctmle {

namespace {

std::string fmt_id(const char* prefix, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%.4g", prefix, v);
  return std::string(buf);
}

RewardSpec gaussian_bump_reward(double center, double width, double horizon) {
  RewardSpec r;
  r.horizon = horizon;
  r.rate = [center, width, horizon](const Vec& x, const Vec&) {
    double z2 = 0.0;
    if (x.size() == 1) {
      const double z = (x[0] - center) / width;
      z2 = z * z;
    } else {
      // bump centered at (center, 0, ..., 0)
      Vec d = x;
      d[0] -= center;
      z2 = d.squaredNorm() / (width * width);
    }
    return std::exp(-0.5 * z2) / horizon;
  };
  return r;
}

SdeModel make_ou_model(double a, double s) {
  SdeModel m;
  m.id = fmt_id("a", a) + fmt_id("_s", s);
  m.kind = ModelKind::linear_gaussian;
  m.state_dim = 1;
  m.control_dim = 1;
  m.drift = [a](const Vec& x, const Vec& u) {
    return Vec::Constant(1, a * x[0] + u[0]).eval();
  };
  m.diffusion = [s](const Vec&, const Vec&) {
    return Mat::Constant(1, 1, s).eval();
  };
  LinearDynamics lin;
  lin.A = Mat::Constant(1, 1, a);
  lin.B = Mat::Identity(1, 1);
  lin.c0 = Vec::Zero(1);
  lin.G = Mat::Constant(1, 1, s);
  m.linear = lin;
  m.drift1 = [a](double x, double u) { return a * x + u; };
  m.diffusion1 = [s](double, double) { return s; };
  validate_model(m);
  return m;
}

Policy make_setpoint_policy(double theta) {
  Policy p;
  p.id = fmt_id("theta", theta);
  p.act = [theta](const Vec& x) {
    return Vec::Constant(1, theta - x[0]).eval();
  };
  p.act1 = [theta](double x) { return theta - x; };
  p.lipschitz_hint = 1.0;
  AffineControl aff;
  aff.K = Mat::Constant(1, 1, -1.0);
  aff.k0 = Vec::Constant(1, theta);
  p.affine = aff;
  return p;
}

SdeModel make_lin2d_model(double drift_scale, double noise_scale) {
  Mat a0(2, 2);
  a0 << -0.5, 1.0, -1.0, -0.5;
  Mat g0(2, 2);
  g0 << 0.3, 0.05, 0.0, 0.2;
  const Mat a = drift_scale * a0;
  const Mat g = noise_scale * g0;
  Vec c0(2);
  c0 << 0.1, 0.0;

  SdeModel m;
  m.id = fmt_id("A", drift_scale) + fmt_id("_G", noise_scale);
  m.kind = ModelKind::linear_gaussian;
  m.state_dim = 2;
  m.control_dim = 2;
  m.drift = [a, c0](const Vec& x, const Vec& u) {
    return (a * x + u + c0).eval();
  };
  m.diffusion = [g](const Vec&, const Vec&) { return g; };
  LinearDynamics lin;
  lin.A = a;
  lin.B = Mat::Identity(2, 2);
  lin.c0 = c0;
  lin.G = g;
  m.linear = lin;
  validate_model(m);
  return m;
}

Policy make_lin2d_policy(double k) {
  Policy p;
  p.id = fmt_id("k", k);
  p.act = [k](const Vec& x) { return (-k * x).eval(); };
  p.lipschitz_hint = k;
  AffineControl aff;
  aff.K = -k * Mat::Identity(2, 2);
  aff.k0 = Vec::Zero(2);
  p.affine = aff;
  return p;
}

SdeModel make_tanh_model(double c, double s) {
  SdeModel m;
  m.id = fmt_id("c", c) + fmt_id("_s", s);
  m.kind = ModelKind::nonlinear;
  m.state_dim = 1;
  m.control_dim = 1;
  m.drift = [c](const Vec& x, const Vec& u) {
    return Vec::Constant(1, -c * std::tanh(x[0]) + 0.5 * u[0]).eval();
  };
  m.diffusion = [s](const Vec& x, const Vec&) {
    return Mat::Constant(1, 1, s * (1.0 + 0.1 * std::sin(x[0]))).eval();
  };
  m.drift1 = [c](double x, double u) { return -c * std::tanh(x) + 0.5 * u; };
  m.diffusion1 = [s](double x, double) {
    return s * (1.0 + 0.1 * std::sin(x));
  };
  validate_model(m);
  return m;
}

Policy make_tanh_policy(double theta) {
  Policy p;
  p.id = fmt_id("theta", theta);
  p.act = [theta](const Vec& x) {
    return Vec::Constant(1, std::tanh(theta - x[0])).eval();
  };
  p.act1 = [theta](double x) { return std::tanh(theta - x); };
  p.lipschitz_hint = 1.0;
  return p;
}

}  // namespace

Preset make_ou_control(double sigma) {
  if (sigma < 0.0 || !std::isfinite(sigma))
    throw std::invalid_argument("make_ou_control: sigma must be >= 0");
  const double a_true = -0.25;

  const std::vector<double> a_grid = {-0.75, -0.5, -0.25, 0.0, 0.25};
  std::vector<double> s_grid;
  for (double f : {0.5, 0.75, 1.0, 1.25, 1.5})
    s_grid.push_back(std::max(kDiffusionFloor, sigma * f));
  std::sort(s_grid.begin(), s_grid.end());
  s_grid.erase(std::unique(s_grid.begin(), s_grid.end()), s_grid.end());

  ModelClass cls;
  cls.n_drift = static_cast<int>(a_grid.size());
  cls.n_diffusion = static_cast<int>(s_grid.size());
  cls.kernel_mode = KernelMode::closed_form_linear;
  for (double a : a_grid)
    for (double s : s_grid) {
      if (a == a_true && s == sigma)
        cls.true_index = static_cast<int>(cls.models.size());
      cls.models.push_back(make_ou_model(a, s));
    }

  Environment env;
  env.true_model = make_ou_model(a_true, sigma);
  env.model_class = std::move(cls);
  for (double theta : {0.525, 0.7, 0.875, 1.05, 1.225})
    env.policies.push_back(make_setpoint_policy(theta));
  env.reward = gaussian_bump_reward(0.7, 0.5, 1.0);
  // start on the bump: the task is holding it, and which setpoint holds it
  // depends on the drift coefficient (theta* = 0.7 (1 - a)). Starting at 0
  // instead would reward the largest setpoint under every hypothesis
  // (fastest climb), leaving optimism nothing to learn.
  env.x_ini = Vec::Constant(1, 0.7);
  env.horizon = 1.0;

  Preset p;
  p.name = "ou_control";
  p.env = std::move(env);
  p.sigma = sigma;
  p.l_b = 2.0 * std::exp(-0.5);  // steepest slope of the width-0.5 bump
  p.l_f = 1.0;                   // max(|a|, control gain 1)
  p.l_u = 1.0;
  p.g_frob = sigma;
  return p;
}

Preset make_linear_2d() {
  ModelClass cls;
  cls.n_drift = 2;
  cls.n_diffusion = 2;
  cls.kernel_mode = KernelMode::closed_form_linear;
  for (double da : {1.0, 0.7})
    for (double dg : {1.0, 1.3}) cls.models.push_back(make_lin2d_model(da, dg));
  cls.true_index = 0;

  Environment env;
  env.true_model = make_lin2d_model(1.0, 1.0);
  env.model_class = std::move(cls);
  env.policies = {make_lin2d_policy(0.2), make_lin2d_policy(0.4)};
  env.reward = gaussian_bump_reward(0.5, 0.5, 1.0);
  env.x_ini = Vec(2);
  env.x_ini << 1.0, 0.0;
  env.horizon = 1.0;

  Preset p;
  p.name = "linear_2d";
  p.env = std::move(env);
  p.sigma = 1.0;
  p.l_b = 2.0 * std::exp(-0.5);
  p.l_f = std::sqrt(1.25);  // spectral norm of the drift matrix
  p.l_u = 0.4;
  p.g_frob = std::sqrt(0.09 + 0.0025 + 0.04);
  return p;
}

Preset make_bounded_nonlinear() {
  ModelClass cls;
  cls.n_drift = 3;
  cls.n_diffusion = 3;
  cls.kernel_mode = KernelMode::euler_gaussian;
  const double c_true = 0.5, s_true = 0.15;
  for (double c : {0.25, 0.5, 0.75})
    for (double s : {0.1, 0.15, 0.225}) {
      if (c == c_true && s == s_true)
        cls.true_index = static_cast<int>(cls.models.size());
      cls.models.push_back(make_tanh_model(c, s));
    }

  Environment env;
  env.true_model = make_tanh_model(c_true, s_true);
  env.model_class = std::move(cls);
  for (double theta : {-0.5, 0.0, 0.5})
    env.policies.push_back(make_tanh_policy(theta));
  env.reward = gaussian_bump_reward(0.5, 0.5, 1.0);
  env.x_ini = Vec::Constant(1, 0.2);
  env.horizon = 1.0;

  Preset p;
  p.name = "bounded_nonlinear";
  p.env = std::move(env);
  p.sigma = s_true;
  p.l_b = 2.0 * std::exp(-0.5);
  p.l_f = 0.5;  // max(c_true * sup tanh', control coefficient 0.5)
  p.l_u = 1.0;
  p.g_frob = s_true * 1.1;  // sup over x of the true diffusion
  return p;
}

Preset make_preset(const std::string& name) {
  if (name == "ou_control") return make_ou_control();
  if (name == "linear_2d") return make_linear_2d();
  if (name == "bounded_nonlinear") return make_bounded_nonlinear();
  throw std::invalid_argument("make_preset: unknown preset '" + name + "'");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"ou_control", "linear_2d",
                                                 "bounded_nonlinear"};
  return names;
}

QuadraticDensityFamily make_quadratic_fixture() {
  QuadraticDensityFamily fam =
      make_trig_hermite_family({0.0, 0.02, 0.04, 0.06, 0.08});
  fam.true_model = 0;
  return fam;
}

std::vector<double> quadratic_fixture_times() { return {0.01, 0.03}; }

std::pair<double, double> quadratic_fixture_time_window() {
  // Largest shift is 0.08; sign changes of phi(t + s)' mu(y) stay beyond
  // |y| ~ 4.2 (tail mass < 1e-14) for t + s <= 0.12, so cap t well below.
  return {0.002, 0.038};
}

}  // namespace ctmle
