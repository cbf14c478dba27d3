#include "ctmle/verify.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ctmle/envs.hpp"
#include "ctmle/errors.hpp"
#include "ctmle/gaussian.hpp"
#include "ctmle/kernel.hpp"
#include "ctmle/metrics.hpp"
#include "ctmle/quadrature.hpp"

namespace ctmle {

bool VerifyReport::all_passed() const {
  for (const CheckResult& c : checks)
    if (!c.passed) return false;
  return true;
}

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return std::string(buf);
}

CheckResult approx(std::string name, double observed, double expected,
                   double tol, std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.observed = observed;
  c.expected = expected;
  c.tolerance = tol;
  c.passed = std::abs(observed - expected) <= tol;
  c.detail = std::move(detail);
  return c;
}

CheckResult upper(std::string name, double observed, double bound,
                  std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.observed = observed;
  c.expected = bound;
  c.tolerance = 0.0;
  c.passed = observed <= bound;
  c.detail = std::move(detail);
  return c;
}

auto gaussian_pdf(double mu, double var) {
  return [mu, var](double y) {
    return std::exp(-0.5 * (y - mu) * (y - mu) / var) /
           std::sqrt(2.0 * M_PI * var);
  };
}

void density_suite(VerifyReport& rep) {
  {
    const GaussianTransition a =
        make_transition(Vec::Zero(1), Mat::Constant(1, 1, 1.0));
    GaussianTransition b =
        make_transition(Vec::Constant(1, 1.0), Mat::Constant(1, 1, 1.0));
    const double closed = hellinger_sq_gaussian(a, b);
    rep.checks.push_back(approx("density.gaussian_hellinger_equal_vars",
                                closed, 1.0 - std::exp(-0.125), 1e-12));
    const double quad = numerical_hellinger(gaussian_pdf(0.0, 1.0),
                                            gaussian_pdf(1.0, 1.0), -10.0,
                                            11.0, 4096);
    rep.checks.push_back(approx("density.gaussian_hellinger_vs_quadrature",
                                quad, closed, 1e-9));

    b = make_transition(Vec::Constant(1, 0.5), Mat::Constant(1, 1, 1.69));
    const GaussianTransition a2 =
        make_transition(Vec::Zero(1), Mat::Constant(1, 1, 0.64));
    const double closed2 = hellinger_sq_gaussian(a2, b);
    const double quad2 = numerical_hellinger(gaussian_pdf(0.0, 0.64),
                                             gaussian_pdf(0.5, 1.69), -12.0,
                                             13.0, 4096);
    rep.checks.push_back(approx("density.gaussian_hellinger_unequal_vars",
                                quad2, closed2, 1e-9));
  }

  {
    const double gamma = 1.0, sigma = 0.6, t = 1.5;
    const double s2 = sigma * sigma / (2.0 * gamma);
    const double rho = std::exp(-gamma * t);
    double max_dev = 0.0;
    for (double y0 : {0.0, 0.3}) {
      const GaussianTransition exact = make_transition(
          Vec::Constant(1, rho * y0),
          Mat::Constant(1, 1, s2 * (1.0 - rho * rho)));
      for (int i = 0; i <= 20; ++i) {
        const double y =
            -1.5 * std::sqrt(s2) + 3.0 * std::sqrt(s2) * i / 20.0;
        const double series = ou_spectral_density(y, t, y0, gamma, sigma, 12);
        const double dens = std::exp(log_density(exact, Vec::Constant(1, y)));
        max_dev = std::max(max_dev, std::abs(series - dens));
      }
    }
    // truncation decays like rho^n, so 12 terms leave ~1.5e-8 of tail
    rep.checks.push_back(approx("density.ou_eigenfunction_series_vs_exact",
                                max_dev, 0.0, 1e-6,
                                "12-term series, rho = 0.22"));
  }

  const QuadraticDensityFamily fam = make_quadratic_fixture();
  const std::vector<double> times = quadratic_fixture_times();
  {
    double max_dev = 0.0;
    for (std::size_t j = 0; j < fam.components.size(); ++j)
      for (double t : times) {
        const double mass = adaptive_simpson(
            [&](double y) {
              return quadratic_density_eval(fam, static_cast<int>(j), t, y);
            },
            fam.support_lo, fam.support_hi, 1e-11);
        max_dev = std::max(max_dev, std::abs(mass - 1.0));
      }
    rep.checks.push_back(
        approx("density.quadratic_members_normalized", max_dev, 0.0, 1e-8));
  }
  {
    double max_dev = 0.0;
    for (std::size_t a = 0; a < fam.components.size(); ++a)
      for (std::size_t b = a + 1; b < fam.components.size(); ++b)
        for (double t : times) {
          const double lin =
              hellinger_sq_quadratic(fam, static_cast<int>(a),
                                     static_cast<int>(b), t)
                  .value;
          const double num = numerical_hellinger(
              [&](double y) {
                return quadratic_density_eval(fam, static_cast<int>(a), t, y);
              },
              [&](double y) {
                return quadratic_density_eval(fam, static_cast<int>(b), t, y);
              },
              fam.support_lo, fam.support_hi, 4096);
          max_dev = std::max(max_dev, std::abs(lin - num));
        }
    rep.checks.push_back(approx("density.quadratic_hellinger_bilinear_vs_quad",
                                max_dev, 0.0, 1e-6,
                                "all member pairs at the fixture times"));
  }
  {
    // rotation structure: squared distance depends only on the shift gap
    double max_dev = 0.0;
    const std::vector<double> shifts = {0.0, 0.02, 0.04, 0.06, 0.08};
    for (std::size_t a = 0; a < shifts.size(); ++a)
      for (std::size_t b = 0; b < shifts.size(); ++b)
        for (double t : times) {
          const double lin =
              hellinger_sq_quadratic(fam, static_cast<int>(a),
                                     static_cast<int>(b), t)
                  .value;
          const double law = 1.0 - std::cos(shifts[a] - shifts[b]);
          max_dev = std::max(max_dev, std::abs(lin - law));
        }
    rep.checks.push_back(approx("density.quadratic_hellinger_shift_law",
                                max_dev, 0.0, 1e-6));
  }
}

struct Moments {
  Vec mean;
  Mat cov;
  double max_sd = 0.0;
  int n = 0;
};

Moments empirical_marginal(const SdeModel& model, const Policy& policy,
                           const Vec& x0, double gap, double step, int n,
                           const RngStream& rng) {
  const auto d = x0.size();
  Moments m;
  m.n = n;
  m.mean = Vec::Zero(d);
  m.cov = Mat::Zero(d, d);
  std::vector<Vec> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    RngStream r = rng.sub(static_cast<std::uint64_t>(i));
    samples.push_back(sample_marginal(model, policy, x0, gap, step, r));
    m.mean += samples.back();
  }
  m.mean /= static_cast<double>(n);
  for (const Vec& s : samples) {
    const Vec d0 = s - m.mean;
    m.cov += d0 * d0.transpose();
  }
  m.cov /= static_cast<double>(n - 1);
  m.max_sd = std::sqrt(m.cov.diagonal().maxCoeff());
  return m;
}

void bellman_suite(VerifyReport& rep, std::uint64_t seed, bool quick) {
  {
    const SdeModel ou = make_ou_control().env.true_model;
    const Policy pol = make_ou_control().env.policies[1];  // setpoint 0.7
    const TransitionKernel kernel(&ou, &pol, KernelMode::closed_form_linear);
    const Vec x0 = Vec::Constant(1, 0.3);
    const double gap = 0.25;
    const GaussianTransition law = kernel.transition(x0, gap);
    const int n = quick ? 4000 : 20000;
    const Moments emp = empirical_marginal(
        ou, pol, x0, gap, 5e-4, n, RngStream(seed, 0, Purpose::diagnostics));
    const double se = emp.max_sd / std::sqrt(static_cast<double>(n));
    rep.checks.push_back(approx("bellman.ou_kernel_mean_vs_simulation",
                                emp.mean[0], law.mean[0], 4.0 * se + 2e-3,
                                fmt("n = %.0f, se = %.2g",
                                    static_cast<double>(n), se)));
    const double var_tol =
        4.0 * law.cov(0, 0) * std::sqrt(2.0 / n) + 2e-3 * law.cov(0, 0);
    rep.checks.push_back(approx("bellman.ou_kernel_var_vs_simulation",
                                emp.cov(0, 0), law.cov(0, 0), var_tol));
  }

  {
    const Preset lin = make_linear_2d();
    const TransitionKernel kernel(&lin.env.true_model, &lin.env.policies[0],
                                  KernelMode::closed_form_linear);
    Vec x0(2);
    x0 << 1.0, 0.0;
    const double gap = 0.3;
    const GaussianTransition law = kernel.transition(x0, gap);
    const int n = quick ? 2000 : 8000;
    const Moments emp = empirical_marginal(
        lin.env.true_model, lin.env.policies[0], x0, gap, 5e-4, n,
        RngStream(seed, 1, Purpose::diagnostics));
    const double se = emp.max_sd / std::sqrt(static_cast<double>(n));
    const double mean_err = (emp.mean - law.mean).cwiseAbs().maxCoeff();
    rep.checks.push_back(approx("bellman.planar_kernel_mean_vs_simulation",
                                mean_err, 0.0, 4.0 * se + 2e-3));
    const double cov_rel = (emp.cov - law.cov).norm() / law.cov.norm();
    rep.checks.push_back(approx("bellman.planar_kernel_cov_vs_simulation",
                                cov_rel, 0.0,
                                4.0 * std::sqrt(2.0 / n) + 5e-3));
  }

  {
    // tower property: value from (x, s) equals gap reward plus value from
    // the gap endpoint, checked at a few random anchors
    const Preset p = make_ou_control();
    RngStream draw(seed, 3, Purpose::diagnostics);
    const int n = quick ? 1024 : 4096;
    double worst_z = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      const Vec x = Vec::Constant(1, 1.2 * draw.uniform() - 0.2);
      const double s = 0.7 * draw.uniform();
      const double remaining = p.env.horizon - s;
      const double gap = remaining * (0.2 + 0.7 * draw.uniform());
      const BellmanCheck c = bellman_identity_check(
          p.env.true_model, p.env.policies[trial % 5], p.env.reward, x,
          remaining, gap, n, 1e-3,
          RngStream(seed, static_cast<std::uint64_t>(10 + trial),
                    Purpose::diagnostics));
      worst_z = std::max(worst_z, std::abs(c.z));
    }
    rep.checks.push_back(upper("bellman.value_identity_random_anchors",
                               worst_z, 3.0,
                               fmt("max |z| over 3 anchors at %g rollouts",
                                   static_cast<double>(n))));
  }

  {
    // at small gaps the one-step Gaussian kernel approaches the exact law
    const SdeModel ou = make_ou_control().env.true_model;
    const Policy pol = make_ou_control().env.policies[1];
    const TransitionKernel exact(&ou, &pol, KernelMode::closed_form_linear);
    const TransitionKernel euler(&ou, &pol, KernelMode::euler_gaussian);
    const Vec x0 = Vec::Constant(1, 0.3);
    const double gap = 0.01;
    const GaussianTransition a = exact.transition(x0, gap);
    const GaussianTransition b = euler.transition(x0, gap);
    double max_dev = 0.0;
    for (double z : {-1.0, 0.0, 1.0}) {
      const Vec y = Vec::Constant(1, a.mean[0] + z * std::sqrt(a.cov(0, 0)));
      max_dev = std::max(max_dev,
                         std::abs(log_density(a, y) - log_density(b, y)));
    }
    rep.checks.push_back(approx("bellman.euler_kernel_small_gap_log_density",
                                max_dev, 0.0, 0.02));
  }
}

void variance_suite(VerifyReport& rep, std::uint64_t seed, bool quick) {
  rep.checks.push_back(approx("variance.gronwall_worked_example",
                              gronwall_variance_bound(1.0, 1.0, 1.0, 0.1, 1.0),
                              0.01 * (std::exp(4.0) - 1.0), 1e-12));

  {
    const Preset p = make_ou_control();
    const double bound = std::min(
        1.0,
        gronwall_variance_bound(p.l_b, p.l_f, p.l_u, p.g_frob,
                                p.env.horizon));
    const VarianceEstimate v = total_variance(
        p.env.true_model, p.env.policies[1], p.env.reward, p.env.x_ini,
        quick ? 2000 : 8000, 1e-3, RngStream(seed, 0, Purpose::diagnostics));
    rep.checks.push_back(upper("variance.ou_total_variance_within_bound",
                               v.variance, bound + 3.0 * v.std_err,
                               fmt("var = %.4g, bound = %.4g", v.variance,
                                   bound)));
  }
  {
    const Preset p = make_bounded_nonlinear();
    const double bound = std::min(
        1.0,
        gronwall_variance_bound(p.l_b, p.l_f, p.l_u, p.g_frob,
                                p.env.horizon));
    const VarianceEstimate v = total_variance(
        p.env.true_model, p.env.policies[2], p.env.reward, p.env.x_ini,
        quick ? 2000 : 8000, 1e-3, RngStream(seed, 1, Purpose::diagnostics));
    rep.checks.push_back(upper("variance.nonlinear_total_variance_within_bound",
                               v.variance, bound + 3.0 * v.std_err,
                               fmt("var = %.4g, bound = %.4g", v.variance,
                                   bound)));
  }
  {
    RngStream r(seed, 2, Purpose::diagnostics);
    std::vector<double> u(quick ? 5000 : 20000);
    for (double& x : u) x = r.uniform();
    const VarSquareCheck c = var_square_property(u);
    CheckResult res = upper("variance.square_self_bounding", c.var_x2,
                            4.0 * c.var_x + 1e-12,
                            fmt("var(x) = %.4g, var(x^2) = %.4g", c.var_x,
                                c.var_x2));
    res.passed = res.passed && c.holds;
    rep.checks.push_back(res);
  }
}

void decomposition_suite(VerifyReport& rep, std::uint64_t seed, bool quick) {
  const Preset p = make_ou_control();
  {
    LearnerConfig lc;
    lc.episodes = 1;
    lc.value_rollouts = quick ? 32 : 64;
    lc.seed = seed;
    lc.schedule.kind = ScheduleSpec::Kind::equidistant;
    lc.schedule.delta = 0.25;
    LearnerState st;
    const EpisodeOutcome out = run_episode(st, p.env, lc, 1);
    const Decomposition dec = simulation_decomposition(
        p.env, out, quick ? 128 : 512, 1e-3,
        RngStream(seed, 1, Purpose::decomposition));
    rep.checks.push_back(approx("decomposition.residual_within_noise",
                                dec.residual, 0.0,
                                4.0 * dec.residual_std_err,
                                fmt("residual se = %.2g",
                                    dec.residual_std_err)));
  }
  {
    LearnerConfig lc;
    lc.episodes = 1;
    lc.value_rollouts = quick ? 32 : 64;
    lc.seed = seed + 1;
    lc.schedule.kind = ScheduleSpec::Kind::explicit_times;
    lc.schedule.times = {0.0, p.env.horizon};
    LearnerState st;
    const EpisodeOutcome out = run_episode(st, p.env, lc, 1);
    const Decomposition dec = simulation_decomposition(
        p.env, out, quick ? 64 : 128, 1e-3,
        RngStream(seed, 2, Purpose::decomposition));
    const double observed =
        std::abs(dec.i1[0].value) + std::abs(dec.i3[0].value);
    rep.checks.push_back(approx(
        "decomposition.single_gap_continuation_terms_vanish", observed, 0.0,
        0.0, "zero-length continuations must contribute exactly zero"));
  }
}

void eluder_suite(VerifyReport& rep) {
  {
    // 5 indicator functions on 6 grid points: dimension exactly 5
    std::vector<std::vector<double>> psi(5, std::vector<double>(6, 0.0));
    for (std::size_t j = 0; j < 5; ++j) psi[j][j] = 1.0;
    rep.checks.push_back(approx("eluder.indicator_class_exact",
                                eluder_estimate(psi, 0.5), 5.0, 0.0));
  }
  const QuadraticDensityFamily fam = make_quadratic_fixture();
  std::vector<double> grid;
  for (int i = 0; i < 64; ++i)
    grid.push_back(0.01 + (M_PI / 2.0 - 0.02) * i / 63.0);
  std::vector<std::vector<double>> psi;
  for (std::size_t j = 0; j < fam.components.size(); ++j) {
    if (static_cast<int>(j) == fam.true_model) continue;
    std::vector<double> row;
    for (double t : grid)
      row.push_back(std::sqrt(
          hellinger_sq_quadratic(fam, static_cast<int>(j), fam.true_model, t)
              .value));
    psi.push_back(std::move(row));
  }
  {
    const int est = eluder_estimate(psi, 0.05);
    const double bound =
        4.0 * fam.feature_dim * fam.feature_dim *
        std::log(1.0 + fam.b_bound * fam.b_bound / (0.05 * 0.05));
    CheckResult c = upper("eluder.rotation_family_within_bound",
                          static_cast<double>(est), bound,
                          "distances are constant in t, so one point"
                          " exhausts the class");
    c.passed = c.passed && est == 1;
    rep.checks.push_back(c);
  }
  rep.checks.push_back(approx("eluder.rotation_family_coarse_eps",
                              eluder_estimate(psi, 0.1), 0.0, 0.0,
                              "all pairwise distances below eps"));
}

}  // namespace

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {
      "density", "bellman", "variance", "decomposition", "eluder", "all"};
  return names;
}

VerifyReport run_verify_suite(const std::string& suite, std::uint64_t seed,
                              bool quick) {
  VerifyReport rep;
  rep.suite = suite;
  const bool all = suite == "all";
  bool known = all;
  if (suite == "density" || all) density_suite(rep), known = true;
  if (suite == "bellman" || all) bellman_suite(rep, seed, quick), known = true;
  if (suite == "variance" || all)
    variance_suite(rep, seed, quick), known = true;
  if (suite == "decomposition" || all)
    decomposition_suite(rep, seed, quick), known = true;
  if (suite == "eluder" || all) eluder_suite(rep), known = true;
  if (!known)
    throw ConfigError("unknown verify suite '" + suite +
                      "'; expected one of density, bellman, variance, "
                      "decomposition, eluder, all");
  return rep;
}

std::string verify_report_json(const VerifyReport& report) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["suite"] = report.suite;
  j["passed"] = report.all_passed();
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckResult& c : report.checks) {
    nlohmann::json e;
    e["name"] = c.name;
    e["passed"] = c.passed;
    e["observed"] = c.observed;
    e["expected"] = c.expected;
    e["tolerance"] = c.tolerance;
    e["detail"] = c.detail;
    arr.push_back(e);
  }
  j["checks"] = arr;
  return j.dump(2) + "\n";
}

}  // namespace ctmle
