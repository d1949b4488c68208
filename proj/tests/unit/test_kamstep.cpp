#include <cmath>
#include <random>

#include "doctest.h"
#include "kamtori/diophantine.hpp"
#include "kamtori/errors.hpp"
#include "kamtori/kamstep.hpp"
#include "test_util.hpp"

using namespace kamtori;

namespace {

NormalForm golden_nf() { return {0.0, golden_vector(2)}; }

FIPoly random_affine(int degree, double amp, std::mt19937_64& rng) {
  FIPoly R(2, 1);
  R.set_term(zero_exponent(2), test::random_poly(2, degree, rng) * amp);
  R.set_term(unit_exponent(2, 0), test::random_poly(2, degree, rng) * amp);
  R.set_term(unit_exponent(2, 1), test::random_poly(2, degree, rng) * amp);
  return R;
}

// (theta, I) -> H(Phi(theta, I)) evaluated directly from the pieces
double direct_pullback(const FIPoly& H, const StepTransform& T, const RealVec& th, const RealVec& I) {
  const int n = 2;
  RealVec th2(n), I2(n);
  for (int i = 0; i < n; ++i) {
    th2[i] = th[i] + T.E[i].eval(th);
    I2[i] = I[i] + T.G[i].eval(th);
    for (int j = 0; j < n; ++j) I2[i] += T.F(i, j).eval(th) * I[j];
  }
  return H.eval(th2, I2);
}

}  // namespace

TEST_CASE("zero remainder gives the identity transform") {
  FIPoly R(2, 1);
  StepTransform T = build_transform(R, golden_nf(), 10);
  CHECK(T.is_identity());
  CHECK(T.vshift == RealVec{0.0, 0.0});
  auto out = transform_hamiltonian(golden_nf(), FIPoly(2, 3), T, 8, 3);
  CHECK(fi_norm(out.R, 0.0, 1.0) <= 1e-13);
  CHECK(out.N.e == 0.0);
  CHECK(out.N.omega == golden_nf().omega);
}

TEST_CASE("single cosine: G is the gradient of the one-mode solution") {
  const NormalForm N = golden_nf();
  FIPoly R(2, 1);
  R.set_term(zero_exponent(2), TrigPoly::cosine(2, {1, 0}));
  StepTransform T = build_transform(R, N, 10, {.out_degree = 8});
  // omega.d a = -cos(theta_1)  =>  a = -sin(theta_1)/omega_1, G = grad a
  const TrigPoly a = TrigPoly::sine(2, {1, 0}, -1.0 / N.omega[0]);
  CHECK(strip_norm(T.G[0] - a.derivative(0), 0.0) <= 1e-14);
  CHECK(strip_norm(T.G[1], 0.0) <= 1e-14);
  CHECK(strip_norm(T.E, 0.0) == 0.0);
  CHECK(T.gate_residual <= 1e-12);
  auto out = transform_hamiltonian(N, R, T, 8, 1);
  CHECK(fi_norm(out.R.affine_part(), 0.0, 1.0) <= 1e-12);
}

TEST_CASE("random affine remainder of degree 10 passes the gate and is symplectic") {
  std::mt19937_64 rng(7);
  const NormalForm N = golden_nf();
  for (int t = 0; t < 3; ++t) {
    FIPoly R = random_affine(10, 1e-6, rng);
    StepTransform T = build_transform(R, N, 10, {.out_degree = 32, .seed = 11u + t});
    CHECK(T.gate_residual <= 1e-3 * T.gate_reference);
    CHECK(T.symplectic_defect <= 1e-9);

    // transform-and-extract oracle: pointwise pullback against the expansion
    FIPoly H = R;
    H.add_term(unit_exponent(2, 0), TrigPoly::constant(2, N.omega[0]));
    H.add_term(unit_exponent(2, 1), TrigPoly::constant(2, N.omega[1]));
    auto out = transform_hamiltonian(N, R, T, 32, 1);
    std::uniform_real_distribution<double> U(0.0, 6.28);
    for (int p = 0; p < 20; ++p) {
      RealVec th{U(rng), U(rng)}, I{U(rng) / 6.28 - 0.5, U(rng) / 6.28 - 0.5};
      const double expect = direct_pullback(H, T, th, I);
      const double got = out.N.e + N.omega[0] * I[0] + N.omega[1] * I[1] + out.R.eval(th, I);
      CHECK(std::abs(got - expect) <= 1e-12);
    }
  }
}

TEST_CASE("flipping the solver sign is caught by the gate") {
  std::mt19937_64 rng(3);
  FIPoly R = random_affine(6, 1e-5, rng);
  BuildOptions o;
  o.flip_sign = true;
  CHECK_THROWS_AS(build_transform(R, golden_nf(), 6, o), SymplecticityFailure);
  o.flip_sign = false;
  CHECK_NOTHROW(build_transform(R, golden_nf(), 6, o));
}

TEST_CASE("exact resonance is reported") {
  FIPoly R(2, 1);
  R.set_term(zero_exponent(2), TrigPoly::cosine(2, {1, -1}, 1e-3));
  CHECK_THROWS_AS(build_transform(R, {0.0, {1.0, 1.0}}, 4), ExactResonance);
}

TEST_CASE("truncation") {
  std::mt19937_64 rng(5);
  const double eta = 0.02, s = 0.5, sigma = 0.1, r = 0.3;
  SUBCASE("affine input of degree <= K has no tail") {
    FIPoly R = random_affine(6, 1.0, rng);
    Truncation t = truncate(R, 6, eta, s, sigma, r);
    CHECK(t.tail == 0.0);
  }
  SUBCASE("pure quadratic") {
    FIPoly R(2, 2);
    R.set_term({2, 0}, TrigPoly::constant(2, 1.0));
    Truncation t = truncate(R, 6, eta, s, sigma, r);
    CHECK(t.Rtilde.is_zero());
    CHECK(t.tail == doctest::Approx(std::pow(2 * eta * r, 2)).epsilon(1e-14));
    CHECK_THROWS_AS(truncate(R, 6, eta, s, sigma, r, TruncationProfile::Sharp, 1e-6),
                    TailBudgetExceeded);
  }
  SUBCASE("Fourier tail beyond K") {
    FIPoly R(2, 1);
    R.set_term(zero_exponent(2), TrigPoly::cosine(2, {1, 0}) + TrigPoly::cosine(2, {3, 4}, 0.1));
    Truncation t = truncate(R, 5, eta, s, sigma, r);
    CHECK(t.Rtilde.trig_degree() <= 5);
    CHECK(t.tail == doctest::Approx(0.1 * std::exp(7 * (s - sigma))));
  }
  SUBCASE("smooth profile keeps nothing at or above K") {
    FIPoly R = random_affine(8, 1.0, rng);
    Truncation t = truncate(R, 8, eta, s, sigma, r, TruncationProfile::Smooth);
    t.Rtilde.constant_term().for_each([](const MultiIndex& k, cplx c) {
      if (l1_norm(k) >= 8) CHECK(c == cplx{});
      if (l1_norm(k) <= 4) CHECK(c != cplx{});
    });
  }
}

TEST_CASE("angle-only input is removed exactly") {
  std::mt19937_64 rng(9);
  const NormalForm N = golden_nf();
  FIPoly R(2, 1);
  R.set_term(zero_exponent(2), test::random_poly(2, 12, rng) * 1e-3);
  StepTransform T = build_transform(R, N, 12, {.out_degree = 12});
  auto out = transform_hamiltonian(N, R, T, 12, 1);
  CHECK(fi_norm(out.R.affine_part(), 0.0, 1.0) <= 1e-10 * fi_norm(R, 0.0, 1.0));
  CHECK(out.N.e == doctest::Approx(R.constant_term().mean()));
}

TEST_CASE("twist translation removes the linear mean") {
  // R = b.I + cos(theta_1) I_1 + (mu/2)|I|^2 ; c = -[B]/mu
  const NormalForm N = golden_nf();
  const double mu = 0.02;
  FIPoly R(2, 2);
  R.set_term({1, 0}, TrigPoly::constant(2, 1e-6) + TrigPoly::cosine(2, {0, 1}, 1e-6));
  R.set_term({0, 1}, TrigPoly::constant(2, -2e-6));
  R.set_term({2, 0}, TrigPoly::constant(2, mu / 2));
  R.set_term({0, 2}, TrigPoly::constant(2, mu / 2));
  const RealVec M = mean_hessian(R);
  CHECK(M == RealVec{mu, 0.0, 0.0, mu});
  Truncation t = truncate(R, 8, 0.02, 0.5, 0.1, 0.1);
  BuildOptions o;
  o.out_degree = 16;
  o.twist = M;
  StepTransform T = build_transform(t.Rtilde, N, 8, o);
  CHECK(T.c[0] == doctest::Approx(-1e-6 / mu));
  CHECK(T.c[1] == doctest::Approx(2e-6 / mu));
  auto out = transform_hamiltonian(N, R, T, 16, 2);
  CHECK(out.N.omega == N.omega);
  const TrigVec B = out.R.linear_terms();
  CHECK(std::abs(B[0].mean()) <= 1e-10);
  CHECK(std::abs(B[1].mean()) <= 1e-10);
}

TEST_CASE("audit rows of the identity pass") {
  Schedule S = make_schedule({});
  for (const auto& row : audit_step(identity_transform(2), S, 0, 0.0)) CHECK(row.pass);
}

TEST_CASE("mean hessian of a mixed term") {
  FIPoly R(2, 2);
  R.set_term({1, 1}, TrigPoly::constant(2, 3.0) + TrigPoly::cosine(2, {1, 0}));
  CHECK(mean_hessian(R) == RealVec{0.0, 3.0, 3.0, 0.0});
}
