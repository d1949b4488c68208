#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "kamtori/diophantine.hpp"
#include "kamtori/engine.hpp"
#include "kamtori/errors.hpp"

using namespace kamtori;

namespace {

double sup_norm(const TrigVec& v, int grid = 64) { return sup_distance(v, zero_vec(int(v.size()), 0), grid); }

ProblemSetup free_setup() {
  ProblemSetup s = fixtures::desk_setup(1e-4);
  s.f.reset();
  return s;
}

}  // namespace

TEST_CASE("parameterize: quadratic h gives rho |I|^2 / 2") {
  ProblemSetup s = free_setup();
  s.rho = 0.01;
  const Parameterization par = parameterize(s, golden_vector(2), 3);
  CHECK(par.p0[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(par.p0[1] == doctest::Approx(golden_vector(2)[1]).epsilon(1e-14));
  CHECK(par.P.terms().size() == 2);
  CHECK(par.P.term({2, 0}).mean() == doctest::Approx(0.005).epsilon(1e-14));
  CHECK(par.P.term({0, 2}).mean() == doctest::Approx(0.005).epsilon(1e-14));
  CHECK(par.norm == doctest::Approx(0.01 / 2 * 2).epsilon(1e-14));
}

TEST_CASE("parameterize: cubic h against the pointwise remainder") {
  ProblemSetup s = free_setup();
  s.h.add({3, 0}, 0.1);
  s.rho = 1e-2;
  const RealVec w = golden_vector(2);
  const Parameterization par = parameterize(s, w, 3);
  const RealVec g = s.h.gradient(par.p0);
  CHECK(std::abs(g[0] - w[0]) <= 1e-12);
  CHECK(std::abs(g[1] - w[1]) <= 1e-12);
  const RealVec th{0.3, 1.1};
  double worst = 0.0;
  for (int a = -4; a <= 4; ++a)
    for (int b = -4; b <= 4; ++b) {
      const RealVec I{a / 4.0, b / 4.0};
      RealVec p{par.p0[0] + s.rho * I[0], par.p0[1] + s.rho * I[1]};
      const double direct = (s.h.eval(p) - s.h.eval(par.p0) - s.rho * (w[0] * I[0] + w[1] * I[1])) / s.rho;
      worst = std::max(worst, std::abs(par.P.eval(th, I) - direct));
    }
  CHECK(worst <= 1e-12);
}

TEST_CASE("parameterize: omega outside grad h(B)") {
  CHECK_THROWS_AS(parameterize(free_setup(), RealVec{3.0, 0.6}, 3), OutsideFrequencyDomain);
}

TEST_CASE("f = 0 converges at level 0 to the flat torus") {
  const ProblemSetup s = free_setup();
  const RealVec w = golden_vector(2);
  const TorusResult r = run(s, w, fixtures::desk_schedule(Mode::Strict), fixtures::desk_options());
  CHECK(r.converged);
  CHECK(r.steps == 0);
  CHECK(sup_norm(r.Gamma) == 0.0);
  CHECK(sup_norm(r.transform.E) == 0.0);
  CHECK(r.phi_omega == r.p0);
  CHECK(std::abs(r.phi_omega[0] - w[0]) <= 1e-15);
  CHECK(r.residual <= 1e-13);
  CHECK(r.lagrangian_defect == 0.0);
}

TEST_CASE("resonant frequency is rejected before any work") {
  const ProblemSetup s = fixtures::desk_setup(1e-4);
  try {
    run(s, RealVec{1.0, 1.0}, fixtures::desk_schedule(Mode::Strict), fixtures::desk_options());
    FAIL("expected a resonance error");
  } catch (const NotDiophantine& e) {
    CHECK(e.margin() == 0.0);
    CHECK(std::abs(e.worst_mode()[0]) == 1);
    CHECK(e.worst_mode()[0] == -e.worst_mode()[1]);
  }
}

TEST_CASE("strict mode names the failed inequality") {
  const ProblemSetup s = fixtures::desk_setup(1e-3);
  try {
    run(s, golden_vector(2), fixtures::desk_schedule(Mode::Strict), fixtures::desk_options());
    FAIL("expected a gate failure");
  } catch (const GateFailure& e) {
    CHECK(e.level() == 0);
    CHECK(e.inequality() == "base inequality s0^l <= c1 s0^(lambda+nu)");
  }
}

TEST_CASE("the sign-flip mutation surfaces as a symplecticity failure") {
  RunOptions o = fixtures::desk_options();
  o.flip_sign = true;
  CHECK_THROWS_AS(run(fixtures::desk_setup(1e-4), golden_vector(2),
                      fixtures::desk_schedule(Mode::Practical), o),
                  SymplecticityFailure);
}

TEST_CASE("desk run matches the direct torus") {
  const double eps = 1e-4;
  const RealVec w = golden_vector(2);
  const TorusResult r =
      run(fixtures::desk_setup(eps), w, fixtures::desk_schedule(Mode::Strict), fixtures::desk_options());
  REQUIRE(r.converged);
  CHECK(r.residual <= 1e-13);
  CHECK(r.lagrangian_defect <= 1e-12);
  int run_len = 0, best = 0;
  const double bound = 2.0 * std::pow(r.schedule.delta, r.schedule.l);
  for (const auto& st : r.step_log) {
    run_len = st.contraction <= bound ? run_len + 1 : 0;
    best = std::max(best, run_len);
  }
  CHECK(best >= 3);
  for (const auto& a : r.audits) CHECK(a.worst() <= 1e-10);

  const fixtures::DirectTorus d = fixtures::direct_torus(fixtures::desk_force_potential() * eps, w, 48);
  CHECK(d.last_change <= 1e-15 * 1e-3);
  CHECK(sup_distance(r.Gamma, d.graph, 64) <= 1e-12);
  CHECK(std::abs(r.p_star[0] - d.p_star[0]) <= 1e-12);
  CHECK(std::abs(r.p_star[1] - d.p_star[1]) <= 1e-12);
  // for h = |p|^2 / 2 the frequency map is the identity on actions
  CHECK(r.phi_omega == r.p_star);
}

TEST_CASE("truncated runs: residual falls with max_j and ignores the grid offset") {
  const ProblemSetup s = fixtures::desk_setup(1e-4);
  double prev = INFINITY;
  for (int J = 0; J <= 2; ++J) {
    RunOptions o = fixtures::desk_options();
    o.max_j = J;
    const TorusResult r = run(s, golden_vector(2), fixtures::desk_schedule(Mode::Practical), o);
    CHECK(!r.converged);
    CHECK(r.residual < prev);
    prev = r.residual;
    const double shifted = invariance_residual(s, r, 64, 0.5);
    CHECK(std::abs(shifted - r.residual) < 0.1 * r.residual);
  }
}

TEST_CASE("eps -> 0 continuity of the transform and the graph") {
  const RealVec w = golden_vector(2);
  double prevE = INFINITY, prevG = INFINITY, prevGam = INFINITY;
  for (double eps : {1e-3, 1e-4, 1e-5}) {
    const TorusResult r = run(fixtures::desk_setup(eps), w, fixtures::desk_schedule(Mode::Practical),
                              fixtures::desk_options());
    REQUIRE(r.converged);
    const double e = strip_norm(r.transform.E, 0.0), g = strip_norm(r.transform.G, 0.0);
    const double gam = sup_norm(r.Gamma);
    CHECK(e < prevE);
    CHECK(g < prevG);
    CHECK(gam < prevGam);
    prevE = e;
    prevG = g;
    prevGam = gam;
  }
}

TEST_CASE("lagrangian defect") {
  CHECK(lagrangian_defect(zero_vec(2, 0)) == 0.0);
  const TrigVec grad = gradient(TrigPoly::sine(2, {1, 1}));
  CHECK(lagrangian_defect(grad) <= 1e-12);
  TrigVec rot{TrigPoly::sine(2, {0, 1}), TrigPoly(2, 1)};
  CHECK(lagrangian_defect(rot) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("composition of an identity step leaves the transform unchanged") {
  ComposedTransform C = ComposedTransform::identity(2);
  const CompositionAudit a = append_step(C, identity_transform(2), 8, {}, 10, 1);
  CHECK(a.worst() == 0.0);
  CHECK(sup_norm(C.Gamma) == 0.0);
}

TEST_CASE("first-order graph of a single cosine") {
  const RealVec w = golden_vector(2);
  const TrigVec g = fixtures::first_order_graph(TrigPoly::cosine(2, {1, 0}), w);
  // a = -sin(theta_1) / omega_1
  CHECK(sup_distance(g, TrigVec{TrigPoly::cosine(2, {1, 0}, -1.0 / w[0]), TrigPoly(2, 0)}) <= 1e-15);
}

TEST_CASE("direct torus reproduces the frozen second-order constant") {
  const RealVec w = golden_vector(2);
  for (double eps : {1e-3, 1e-4}) {
    const TrigPoly f = fixtures::desk_force_potential() * eps;
    const fixtures::DirectTorus d = fixtures::direct_torus(f, w, 32);
    const double C = sup_distance(d.graph, fixtures::first_order_graph(f, w), 128) / (eps * eps);
    CHECK(C <= fixtures::kSecondOrderConstant);
    CHECK(C >= 0.999 * fixtures::kSecondOrderConstant);
  }
}
