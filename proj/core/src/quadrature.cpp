#include "ctmle/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ctmle/errors.hpp"

namespace ctmle {

double simpson(const std::function<double(double)>& f, double a, double b,
               int n) {
  if (!(b > a)) throw std::invalid_argument("simpson: need b > a");
  if (n < 2) throw std::invalid_argument("simpson: need n >= 2");
  if (n % 2 != 0) ++n;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) {
    acc += f(a + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
  }
  return acc * h / 3.0;
}

namespace {
double adaptive_step(const std::function<double(double)>& f, double a,
                     double b, double fa, double fm, double fb, double whole,
                     double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}
}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (!(b > a)) throw std::invalid_argument("adaptive_simpson: need b > a");
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

double numerical_hellinger(const std::function<double(double)>& dens_a,
                           const std::function<double(double)>& dens_b,
                           double lo, double hi, int n_points) {
  if (n_points < 128)
    throw std::invalid_argument("numerical_hellinger: n_points < 128");
  auto integrand = [&](double y) {
    const double pa = dens_a(y), pb = dens_b(y);
    if (pa < 0.0 || pb < 0.0)
      throw SimulationError("numerical_hellinger: negative density", y);
    return std::sqrt(pa * pb);
  };
  const double bc = simpson(integrand, lo, hi, n_points);
  return std::clamp(1.0 - bc, 0.0, 1.0);
}

}  // namespace ctmle
