#pragma once

#include <functional>

namespace ctmle {

// composite Simpson on [a, b] with n subintervals (n made even internally)
double simpson(const std::function<double(double)>& f, double a, double b,
               int n);

// adaptive Simpson to absolute tolerance tol; independent integration route
// used as an oracle against the fixed-grid rules
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

// Squared Hellinger distance 1 - int sqrt(p q) between two densities on a
// bounded support, by composite Simpson. Requires n_points >= 128 and
// rejects negative density samples. The result is clamped into [0, 1].
double numerical_hellinger(const std::function<double(double)>& dens_a,
                           const std::function<double(double)>& dens_b,
                           double lo, double hi, int n_points);

}  // namespace ctmle
