#pragma once

#include <string>
#include <vector>

#include "ctmle/learner.hpp"
#include "ctmle/quadratic.hpp"

namespace ctmle {

// A ready-to-run environment plus the dynamics constants that feed the
// a priori variance bound. The constants describe the true model and the
// steepest policy in the class.
struct Preset {
  std::string name;
  Environment env;
  double sigma = 0.0;   // true noise level tag
  double l_b = 0.0;     // reward-rate Lipschitz constant
  double l_f = 0.0;     // drift Lipschitz constant (state and control)
  double l_u = 0.0;     // policy Lipschitz constant
  double g_frob = 0.0;  // Frobenius bound on the true diffusion
};

// likelihood-side diffusion floor; simulation may still run at sigma below
// it (confidence-set statistics are flagged off when the truth leaves the
// class)
inline constexpr double kDiffusionFloor = 0.05;

// Scalar controlled Ornstein-Uhlenbeck process dx = (a x + u) dt +
// sigma dw with unclipped setpoint policies u(x) = theta - x and a Gaussian
// reward bump at 0.7. The process starts on the bump and the setpoint grid
// is matched to the drift grid (theta = 0.7 (1 - a)), so each drift
// hypothesis names a different policy as the one that holds the bump and
// optimism has something to learn. The model class crosses five drift
// coefficients with up to five diffusion levels around sigma (floored at
// kDiffusionFloor and deduplicated). sigma = 0 yields a deterministic
// environment whose true model is absent from the class (true_index = -1).
Preset make_ou_control(double sigma = 0.5);

// Two-dimensional stable linear system with cross coupling, non-diagonal
// diffusion, and unclipped linear feedback policies; exercises the
// matrix-exponential transition path.
Preset make_linear_2d();

// Scalar saturating-drift process dx = (-c tanh(x) + u / 2) dt +
// s (1 + sin(x) / 10) dw with tanh setpoint policies. Nothing here is
// affine, so transitions go through the Euler-Gaussian kernel.
Preset make_bounded_nonlinear();

// dispatch by name: "ou_control", "linear_2d", "bounded_nonlinear"
Preset make_preset(const std::string& name);

// names accepted by make_preset
const std::vector<std::string>& preset_names();

// Trigonometric-Hermite density family at the frozen shift grid
// {0, 0.02, ..., 0.08}; pairwise squared Hellinger distance is
// 1 - cos(shift difference) at every conditioning time
QuadraticDensityFamily make_quadratic_fixture();

// conditioning times at which the fixture's linear Hellinger form is exact
// (all component sign changes sit far outside the effective support)
std::vector<double> quadratic_fixture_times();

// Open time window with the same sign-consistency guarantee; random
// Hellinger cross-checks should draw t from here. Outside it a member's
// linear form can change sign inside the support and the bilinear identity
// breaks down by design.
std::pair<double, double> quadratic_fixture_time_window();

}  // namespace ctmle
