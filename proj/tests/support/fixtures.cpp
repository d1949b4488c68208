#include "fixtures.hpp"

#include <cmath>

#include "kamtori/diophantine.hpp"
#include "kamtori/errors.hpp"

namespace kamtori::fixtures {

TrigPoly desk_force_potential() {
  return TrigPoly::cosine(2, {1, 0}) + TrigPoly::cosine(2, {1, 1});
}

ProblemSetup desk_setup(double eps) {
  ProblemSetup s;
  s.n = 2;
  s.h = ActionPoly::kinetic(2);
  FIPoly f(2, 0);
  f.set_term(zero_exponent(2), desk_force_potential() * eps);
  s.f = f;
  s.p_center = {0.0, 0.0};
  s.ball_center = {1.0, 0.6};
  s.ball_radius = 0.5;
  s.gamma = 0.5;
  s.tau = 1.5;
  s.l = 8.0;
  s.eps = eps;
  return s;
}

ScheduleParams desk_schedule(Mode mode) {
  ScheduleParams sp;
  sp.mode = mode;
  sp.constants.c2 = 1e6;
  sp.constants.c_trunc = 2.0;
  return sp;
}

RunOptions desk_options() {
  RunOptions o;
  o.degree = 32;
  o.K_cap = 16;
  return o;
}

namespace {

// solves omega . d x = g coefficientwise, applied `times` times; the mean is dropped
TrigPoly invert_transport(const TrigPoly& g, const RealVec& omega, int times) {
  TrigPoly out(g.dim(), g.degree());
  g.for_each([&](const MultiIndex& k, cplx c) {
    double kw = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) kw += k[i] * omega[i];
    if (kw == 0.0) {
      if (l1_norm(k) != 0 && c != cplx{}) throw ExactResonance(k, "oracle: k . omega = 0");
      return;
    }
    cplx d(0.0, kw);
    cplx v = c;
    for (int t = 0; t < times; ++t) v /= d;
    out.set_coeff(k, v);
  });
  return out;
}

}  // namespace

TrigVec first_order_graph(const TrigPoly& f, const RealVec& omega) {
  const TrigPoly a = invert_transport(f * -1.0, omega, 1);
  return gradient(a);
}

DirectTorus direct_torus(const TrigPoly& f, const RealVec& omega, int degree) {
  const int n = f.dim();
  DirectTorus out;
  const TrigVec df = gradient(f);
  out.u = zero_vec(n, degree);
  CompositionOptions co;
  co.tail_budget = 1.0;  // the degree is fixed, the tail is monitored by the caller
  co.max_degree = degree;
  for (int it = 0; it < 200; ++it) {
    const TrigVec force = compose_angle(std::span<const TrigPoly>(df), out.u, degree, co).values;
    double change = 0.0, size = 0.0;
    for (int i = 0; i < n; ++i) {
      TrigPoly next = invert_transport(force[i] * -1.0, omega, 2).with_degree(degree);
      change = std::max(change, strip_norm(next - out.u[i], 0.0));
      out.u[i] = std::move(next);
      size = std::max(size, strip_norm(out.u[i], 0.0));
    }
    out.iterations = it + 1;
    // stop at the target, or once roundoff keeps the increment from shrinking
    const bool stalled = it > 3 && change >= out.last_change;
    out.last_change = change;
    if (change <= 1e-15 * size || stalled) break;
  }
  TrigVec w;
  for (int i = 0; i < n; ++i) w.push_back(directional_derivative(out.u[i], omega));
  const TrigVec inv = invert_near_identity(out.u, degree);
  out.graph = compose_angle(std::span<const TrigPoly>(w), inv, degree, co).values;
  out.p_star.resize(n);
  for (int i = 0; i < n; ++i) {
    out.p_star[i] = omega[i] + out.graph[i].mean();
    out.graph[i].set_mean(0.0);
  }
  return out;
}

}  // namespace kamtori::fixtures
