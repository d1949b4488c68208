#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kamtori/errors.hpp"
#include "kamtori/trigpoly.hpp"
#include "test_util.hpp"

using namespace kamtori;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

double max_coeff_diff(const TrigPoly& a, const TrigPoly& b) {
  double d = 0.0;
  const int deg = std::max(a.degree(), b.degree());
  TrigPoly A = a.with_degree(deg), B = b.with_degree(deg);
  A.for_each([&](const MultiIndex& k, cplx c) { d = std::max(d, std::abs(c - B.coeff(k))); });
  return d;
}

}  // namespace

TEST_CASE("strip norm of simple polynomials") {
  CHECK(strip_norm(TrigPoly(2, 5), 1.3) == 0.0);
  TrigPoly c = TrigPoly::cosine(1, {1});
  CHECK(strip_norm(c, 0.0) == doctest::Approx(1.0));
  CHECK(strip_norm(c, 1.0) == doctest::Approx(std::exp(1.0)));
  // |cos(x + i y)| on the strip boundary, sampled
  double sup = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = 2 * std::numbers::pi * i / 1000.0;
    sup = std::max(sup, std::abs(std::cos(cplx(x, 1.0))));
  }
  CHECK(sup == doctest::Approx(std::cosh(1.0)).epsilon(1e-6));
  CHECK(sup <= strip_norm(c, 1.0));
}

TEST_CASE("majorant bounds sampled strip values") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 2 * std::numbers::pi);
  for (int trial = 0; trial < 1000; ++trial) {
    TrigPoly f = test::random_poly(2, 4, rng);
    const double s = 0.5 * (trial % 3);
    const double bound = strip_norm(f, s);
    for (int p = 0; p < 8; ++p) {
      const double x0 = U(rng), x1 = U(rng);
      const double y0 = (p & 1 ? s : -s), y1 = (p & 2 ? s : -s);
      cplx v = 0.0;
      f.for_each([&](const MultiIndex& k, cplx c) {
        v += c * std::exp(cplx(0, 1) * (double(k[0]) * cplx(x0, y0) + double(k[1]) * cplx(x1, y1)));
      });
      REQUIRE(std::abs(v) <= bound * (1 + 1e-12));
    }
  }
}

TEST_CASE("reality and evaluation") {
  std::mt19937_64 rng(3);
  TrigPoly f = test::random_poly(2, 6, rng);
  CHECK(f.reality_defect() == 0.0);
  const double theta[2] = {0.3, 1.7};
  double direct = 0.0;
  f.for_each([&](const MultiIndex& k, cplx c) {
    direct += (c * std::exp(cplx(0, k[0] * theta[0] + k[1] * theta[1]))).real();
  });
  CHECK(f.eval(theta) == doctest::Approx(direct).epsilon(1e-13));
  TrigPoly g = f * 2.0 - f.derivative(0) + f.derivative(1).derivative(1);
  CHECK(g.reality_defect() < 1e-15);
}

TEST_CASE("grid transforms round-trip") {
  std::mt19937_64 rng(11);
  TrigPoly f = test::random_poly(2, 7, rng);
  const int m = collocation_size(7);
  RealVec vals = to_grid(f, m);
  RealVec pts = grid_points(2, m);
  for (std::size_t g = 0; g < vals.size(); g += 37)
    CHECK(vals[g] == doctest::Approx(f.eval({&pts[2 * g], 2})).epsilon(1e-12));
  Reexpansion r = from_grid(vals, 2, m, 7);
  CHECK(max_coeff_diff(r.poly, f) < 1e-14);
  CHECK(r.tail < 1e-12);
  Reexpansion low = from_grid(vals, 2, m, 3);
  CHECK(low.tail > 0.0);
  CHECK(max_coeff_diff(low.poly, f.with_degree(3)) < 1e-14);

  PointEvaluator ev(2, 7, pts);
  RealVec direct = ev.eval(f);
  for (std::size_t g = 0; g < vals.size(); ++g) REQUIRE(std::abs(direct[g] - vals[g]) < 1e-12);
}

TEST_CASE("shifted grid evaluation matches direct evaluation") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const TrigPoly f = test::random_poly(2, 12, rng);
  const int m = 24;
  const RealVec base = grid_points(2, m);
  for (double amp : {0.0, 1e-4, 1e-2, 0.5}) {
    RealVec shifts(base.size());
    for (double& e : shifts) e = amp * U(rng);
    RealVec pts = base;
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] += shifts[i];
    const ShiftedGridEvaluator ev(2, m, 12, shifts);
    if (amp == 0.0) CHECK(ev.order() == 0);
    const RealVec got = ev.eval(f);
    const RealVec want = PointEvaluator(2, 12, pts).eval(f);
    double err = 0.0;
    for (std::size_t g = 0; g < got.size(); ++g) err = std::max(err, std::abs(got[g] - want[g]));
    CHECK(err <= 1e-13 * strip_norm(f, 0.0));
  }
  CHECK_THROWS_AS(ShiftedGridEvaluator(2, m, 4, RealVec(base.size())).eval(f), DegreeOverflow);
}

TEST_CASE("product is exact") {
  TrigPoly a = TrigPoly::cosine(2, {1, 0});
  TrigPoly b = TrigPoly::cosine(2, {0, 1});
  TrigPoly p = product(a, b, 10);
  // cos x cos y = (cos(x+y) + cos(x-y)) / 2
  TrigPoly expect = TrigPoly::cosine(2, {1, 1}, 0.5) + TrigPoly::cosine(2, {1, -1}, 0.5);
  CHECK(max_coeff_diff(p, expect) < 1e-15);
  double tail = 0.0;
  TrigPoly q = product(a, b, 1, &tail);
  CHECK(strip_norm(q, 0.0) < 1e-15);
  CHECK(tail == doctest::Approx(1.0));
}

TEST_CASE("homological solve") {
  const double omega[2] = {1.0, kGolden};
  SUBCASE("single mode") {
    TrigPoly A = TrigPoly::cosine(2, {1, -1});
    TrigPoly a = solve_homological(A, omega, 10).a;
    TrigPoly expect = TrigPoly::sine(2, {1, -1}, 1.0 / (1.0 - kGolden));
    CHECK(max_coeff_diff(a, expect) < 1e-14);
    CHECK(1.0 - kGolden == doctest::Approx(0.3819660113));
  }
  SUBCASE("constant input") {
    CHECK(solve_homological(TrigPoly::constant(2, 3.5), omega, 10).a.is_zero());
  }
  SUBCASE("random degree 20 plug-back") {
    std::mt19937_64 rng(5);
    TrigPoly A = test::random_poly(2, 20, rng);
    TrigPoly a = solve_homological(A, omega, 20).a;
    TrigPoly back = directional_derivative(a, omega);
    TrigPoly target = A;
    target.set_mean(0.0);
    CHECK(max_coeff_diff(back, target) <= 1e-12 * strip_norm(A, 0.0));
    CHECK(a.mean() == 0.0);
  }
  SUBCASE("exact resonance") {
    const double res[2] = {1.0, 1.0};
    try {
      solve_homological(TrigPoly::cosine(2, {1, -1}), res, 4);
      FAIL("expected resonance");
    } catch (const ExactResonance& e) {
      CHECK(std::abs(e.mode()[0]) == 1);
      CHECK(e.mode()[0] == -e.mode()[1]);
    }
  }
  SUBCASE("near resonances are recorded") {
    HomologicalOptions opts{.gamma = 0.7, .tau = 1.0};
    std::mt19937_64 rng(2);
    auto sol = solve_homological(test::random_poly(2, 8, rng), omega, 8, opts);
    CHECK(!sol.near_resonances.empty());
    for (const auto& nr : sol.near_resonances) CHECK(nr.divisor < nr.threshold);
  }
}

TEST_CASE("angle composition") {
  TrigPoly f = TrigPoly::cosine(2, {1, 0});
  SUBCASE("identity") {
    TrigVec E = zero_vec(2, 3);
    TrigPoly g = compose_angle(f, E, 4);
    CHECK(max_coeff_diff(g, f) < 1e-14);
  }
  SUBCASE("constant shift") {
    const double c = 0.7;
    TrigVec E = {TrigPoly::constant(2, c), TrigPoly::constant(2, 0.0)};
    TrigPoly g = compose_angle(f, E, 2);
    TrigPoly expect = TrigPoly::cosine(2, {1, 0}, std::cos(c)) - TrigPoly::sine(2, {1, 0}, std::sin(c));
    CHECK(max_coeff_diff(g, expect) < 1e-14);
  }
  SUBCASE("pointwise oracle") {
    TrigVec E = {TrigPoly::sine(2, {0, 1}, 0.1), TrigPoly(2, 0)};
    TrigPoly g = compose_angle(f, E, 16);
    const int m = 64;
    RealVec pts = grid_points(2, m);
    double err = 0.0;
    for (int i = 0; i < m * m; ++i) {
      const double x = pts[2 * i], y = pts[2 * i + 1];
      err = std::max(err, std::abs(g.eval({&pts[2 * i], 2}) - std::cos(x + 0.1 * std::sin(y))));
    }
    CHECK(err <= 1e-10);
  }
  SUBCASE("not a diffeomorphism") {
    TrigVec E = {TrigPoly::sine(2, {1, 0}, 1.5), TrigPoly(2, 0)};
    CHECK_THROWS_AS(compose_angle(f, E, 8), NotADiffeomorphism);
  }
  SUBCASE("aliasing budget") {
    TrigVec E = {TrigPoly::sine(2, {0, 1}, 0.9), TrigPoly(2, 0)};
    TrigPoly big = TrigPoly::cosine(2, {20, 0});
    CompositionOptions opts{.tail_budget = 1e-12, .max_degree = 24};
    CHECK_THROWS_AS(compose_angle(big, E, 22, opts), AliasingBudgetExceeded);
  }
  SUBCASE("associativity") {
    TrigVec U1 = {TrigPoly::sine(2, {0, 1}, 0.05), TrigPoly::cosine(2, {1, 0}, 0.04)};
    TrigVec U2 = {TrigPoly::cosine(2, {1, 1}, 0.03), TrigPoly::sine(2, {1, 0}, 0.02)};
    TrigPoly h = TrigPoly::cosine(2, {1, 0}) + TrigPoly::sine(2, {1, 1}, 0.5);
    const int D = 40;
    TrigPoly left = compose_angle(compose_angle(h, U1, D), U2, D);
    // U1 o U2 : theta -> theta + U2 + U1(theta + U2)
    CompositionResult inner = compose_angle(std::span<const TrigPoly>(U1), U2, D);
    TrigVec U12 = {U2[0] + inner.values[0], U2[1] + inner.values[1]};
    TrigPoly right = compose_angle(h, U12, D);
    CHECK(max_coeff_diff(left, right) <= 1e-9);
  }
}

TEST_CASE("near-identity inversion") {
  SUBCASE("zero") {
    TrigVec inv = invert_near_identity(zero_vec(2, 2), 8);
    CHECK(strip_norm(inv, 0.0) < 1e-15);
  }
  SUBCASE("constant") {
    TrigVec E = {TrigPoly::constant(2, 0.3), TrigPoly::constant(2, -0.2)};
    TrigVec inv = invert_near_identity(E, 4);
    CHECK(inv[0].mean() == doctest::Approx(-0.3));
    CHECK(inv[1].mean() == doctest::Approx(0.2));
  }
  SUBCASE("single sine on a 128 grid") {
    TrigVec E = {TrigPoly::sine(2, {1, 0}, 0.05), TrigPoly(2, 0)};
    TrigVec inv = invert_near_identity(E, 32);
    const int m = 128;
    RealVec pts = grid_points(2, m);
    double err = 0.0;
    for (int i = 0; i < m * m; ++i) {
      double x = pts[2 * i] + inv[0].eval({&pts[2 * i], 2});
      double y = pts[2 * i + 1] + inv[1].eval({&pts[2 * i], 2});
      double z[2] = {x, y};
      err = std::max(err, std::abs(x + E[0].eval(z) - pts[2 * i]));
      err = std::max(err, std::abs(y + E[1].eval(z) - pts[2 * i + 1]));
    }
    CHECK(err <= 1e-10);
  }
}
