#include <cmath>
#include <random>

#include "doctest.h"
#include "kamtori/errors.hpp"
#include "kamtori/fipoly.hpp"
#include "kamtori/io.hpp"
#include "test_util.hpp"

using namespace kamtori;

TEST_CASE("monomial table") {
  MonomialTable T(2, 3);
  CHECK(T.size() == 10);
  CHECK(T.exponent(0) == MultiIndex{0, 0});
  const int a = T.index({1, 0}), b = T.index({0, 2});
  CHECK(T.exponent(T.product(a, b)) == MultiIndex{1, 2});
  CHECK(T.product(T.index({2, 1}), a) == -1);
}

TEST_CASE("fi_norm examples") {
  FIPoly P(2, 1);
  P.set_term({1, 0}, TrigPoly::constant(2, 1.0));
  CHECK(fi_norm(P, 3.0, 0.5) == doctest::Approx(0.5));

  FIPoly Q(2, 1);
  Q.set_term({1, 0}, TrigPoly::cosine(2, {1, 0}));
  CHECK(fi_norm(Q, 0.0, 1.0) == doctest::Approx(1.0));

  FIPoly R(2, 2);
  R.set_term({0, 0}, TrigPoly::cosine(2, {1, 0}));
  R.set_term({0, 2}, TrigPoly::constant(2, 1.0));
  CHECK(fi_norm(R, 1.0, 0.5) == doctest::Approx(std::exp(1.0) + 0.25));
  CHECK(fi_norm(R, 1.0, 0.5) == doctest::Approx(2.9683).epsilon(1e-4));
}

TEST_CASE("fi_norm is a majorant on the real domain") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    FIPoly P(2, 2);
    for (MultiIndex m : {MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{1, 1}, MultiIndex{0, 2}})
      P.set_term(m, test::random_poly(2, 3, rng));
    const double r = 0.7;
    const double bound = fi_norm(P, 0.0, r);
    for (int p = 0; p < 50; ++p) {
      const double th[2] = {3 * U(rng), 3 * U(rng)};
      const double I[2] = {r * U(rng) / std::sqrt(2.0), r * U(rng) / std::sqrt(2.0)};
      REQUIRE(std::abs(P.eval(th, I)) <= bound);
    }
  }
}

TEST_CASE("affine split") {
  std::mt19937_64 rng(4);
  FIPoly P(2, 3);
  P.set_term({0, 0}, test::random_poly(2, 2, rng));
  P.set_term({0, 1}, test::random_poly(2, 2, rng));
  P.set_term({2, 1}, test::random_poly(2, 2, rng));
  FIPoly sum = P.affine_part() + P.higher_part();
  CHECK(fi_norm(sum - P, 0.0, 1.0) < 1e-15);
  CHECK(P.affine_part().terms().size() == 2);
  CHECK(P.linear_terms()[0].is_zero());
}

TEST_CASE("action substitution is exact") {
  std::mt19937_64 rng(8);
  FIPoly P(2, 3);
  P.set_term({0, 0}, test::random_poly(2, 2, rng));
  P.set_term({1, 0}, test::random_poly(2, 2, rng));
  P.set_term({1, 2}, test::random_poly(2, 2, rng));
  P.set_term({0, 3}, test::random_poly(2, 2, rng));
  const double c[2] = {0.4, -0.3};
  const double rho = 0.2;
  FIPoly Q = substitute_action(P, c, rho);
  const double th[2] = {0.9, 2.1}, I[2] = {0.5, -0.8};
  const double y[2] = {c[0] + rho * I[0], c[1] + rho * I[1]};
  CHECK(Q.eval(th, I) == doctest::Approx(P.eval(th, y)).epsilon(1e-13));
}

TEST_CASE("affine composition matches pointwise evaluation") {
  std::mt19937_64 rng(12);
  FIPoly P(2, 2);
  P.set_term({0, 0}, test::random_poly(2, 3, rng));
  P.set_term({1, 0}, test::random_poly(2, 3, rng));
  P.set_term({1, 1}, test::random_poly(2, 3, rng));
  AffineMap phi = identity_map(2);
  phi.E = {TrigPoly::sine(2, {0, 1}, 0.05), TrigPoly::cosine(2, {1, 0}, 0.03)};
  phi.F(0, 0) = TrigPoly::cosine(2, {1, 1}, 0.02);
  phi.F(1, 0) = TrigPoly::sine(2, {1, 0}, 0.01);
  phi.G = {TrigPoly::cosine(2, {0, 1}, 0.1), TrigPoly::constant(2, 0.05)};
  double tail = 0.0;
  FIPoly Q = compose_affine(P, phi, 40, 2, {}, &tail);
  CHECK(Q.ideg() == 2);
  CHECK(tail < 1e-10);
  std::uniform_real_distribution<double> U(0.0, 6.28);
  for (int p = 0; p < 20; ++p) {
    const double th[2] = {U(rng), U(rng)}, I[2] = {0.3, -0.2};
    const double th2[2] = {th[0] + phi.E[0].eval(th), th[1] + phi.E[1].eval(th)};
    double I2[2];
    for (int i = 0; i < 2; ++i) {
      I2[i] = I[i] + phi.G[i].eval(th);
      for (int j = 0; j < 2; ++j) I2[i] += phi.F(i, j).eval(th) * I[j];
    }
    CHECK(Q.eval(th, I) == doctest::Approx(P.eval(th2, I2)).epsilon(1e-12));
  }

  SUBCASE("lower output ideg keeps contributions from high terms") {
    FIPoly Qa = compose_affine(P, phi, 40, 1);
    CHECK(fi_norm(Qa - Q.affine_part(), 0.0, 1.0) < 1e-12);
  }
}

TEST_CASE("coefficient dumps round-trip") {
  std::mt19937_64 rng(21);
  TrigPoly f = test::random_poly(2, 4, rng);
  TrigPoly g = trigpoly_from_json(to_json(f));
  CHECK(strip_norm(f - g, 0.0) == 0.0);
  CHECK(to_json(f).dump() == to_json(g).dump());

  TrigVec v = {test::random_poly(2, 2, rng), test::random_poly(2, 3, rng)};
  TrigVec w = trigvec_from_json(to_json(v));
  CHECK(strip_norm(TrigVec{v[0] - w[0], v[1] - w[1]}, 0.0) == 0.0);

  FIPoly P(2, 2);
  P.set_term({0, 1}, f);
  P.set_term({2, 0}, v[1]);
  FIPoly Q = fipoly_from_json(to_json(P));
  CHECK(fi_norm(P - Q, 0.0, 1.0) == 0.0);

  auto entries = to_json(f)["entries"];
  for (std::size_t i = 1; i < entries.size(); ++i)
    CHECK(entries[i - 1]["k"].get<MultiIndex>() < entries[i]["k"].get<MultiIndex>());
}
