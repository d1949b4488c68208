#pragma once

// Problems and independent oracles shared by the unit and acceptance tests.

#include "kamtori/engine.hpp"

namespace kamtori::fixtures {

/// h = |p|^2/2, f = eps (cos q1 + cos(q1 + q2)) on the ball |p - (1, 0.6)|_inf <= 0.5.
ProblemSetup desk_setup(double eps);
ScheduleParams desk_schedule(Mode mode);
RunOptions desk_options();

/// The angle-only part of the desk perturbation at unit size.
TrigPoly desk_force_potential();

/// sup |Gamma - grad a| / eps^2 of the direct torus of the desk problem at the
/// golden frequency, frozen from direct_torus at degree 96 for eps = 1e-3 and
/// 1e-4 (0.736154 and 0.736077), rounded up.
inline constexpr double kSecondOrderConstant = 0.7362;

/// grad a with omega . d a = -(f - [f]).
TrigVec first_order_graph(const TrigPoly& f, const RealVec& omega);

struct DirectTorus {
  TrigVec u;      // q = theta + u(theta)
  TrigVec graph;  // p(q) - p_star, mean zero
  RealVec p_star;
  int iterations = 0;
  double last_change = 0.0;
};

/// Invariant torus of |p|^2/2 + f(q) from the second-order equation
/// (omega . d)^2 u = -grad f(theta + u), solved by fixed point on modes
/// |k|_1 <= degree; the graph is p = omega + omega . du taken along (Id + u)^-1.
DirectTorus direct_torus(const TrigPoly& f, const RealVec& omega, int degree);

}  // namespace kamtori::fixtures
