#include "kamtori/io.hpp"

#include <charconv>

#include <algorithm>
#include <tuple>

#include "kamtori/errors.hpp"

namespace kamtori {

namespace {

struct Entry {
  int i = -1, j = -1;
  MultiIndex k;
  cplx c;
};

void collect(const TrigPoly& f, int i, int j, std::vector<Entry>& out) {
  f.for_each([&](const MultiIndex& k, cplx c) {
    if (c != cplx{}) out.push_back({i, j, k, c});
  });
}

json pack(int dim, const char* shape, int degree, std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.k, a.i, a.j) < std::tie(b.k, b.i, b.j);
  });
  json arr = json::array();
  for (const auto& e : entries) {
    json row = {{"k", e.k}, {"re", e.c.real()}, {"im", e.c.imag()}};
    if (e.i >= 0) row["i"] = e.i;
    if (e.j >= 0) row["j"] = e.j;
    arr.push_back(std::move(row));
  }
  return {{"dim", dim}, {"shape", shape}, {"degree", degree}, {"entries", std::move(arr)}};
}

void expect_shape(const json& j, const char* shape) {
  if (j.at("shape").get<std::string>() != shape)
    throw ConfigError(std::string("coefficient dump: expected shape ") + shape);
}

void put(TrigPoly& f, const json& e) {
  MultiIndex k = e.at("k").get<MultiIndex>();
  // only one half is needed; set_coeff restores the conjugate
  f.set_coeff(k, cplx(e.at("re").get<double>(), e.at("im").get<double>()));
}

}  // namespace

json to_json(const TrigPoly& f) {
  std::vector<Entry> e;
  collect(f, -1, -1, e);
  return pack(f.dim(), "scalar", f.degree(), std::move(e));
}

json to_json(const TrigVec& f) {
  std::vector<Entry> e;
  int deg = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    collect(f[i], static_cast<int>(i), -1, e);
    deg = std::max(deg, f[i].degree());
  }
  return pack(f.empty() ? 0 : f[0].dim(), "vector", deg, std::move(e));
}

json to_json(const TrigMat& f) {
  std::vector<Entry> e;
  int deg = 0;
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j) {
      collect(f(i, j), i, j, e);
      deg = std::max(deg, f(i, j).degree());
    }
  return pack(f.entries.empty() ? 0 : f.entries[0].dim(), "matrix", deg, std::move(e));
}

json to_json(const FIPoly& P) {
  json terms = json::array();
  for (const auto& [m, p] : P.terms()) terms.push_back({{"m", m}, {"coeff", to_json(p)}});
  return {{"dim", P.dim()}, {"ideg", P.ideg()}, {"terms", std::move(terms)}};
}

TrigPoly trigpoly_from_json(const json& j) {
  expect_shape(j, "scalar");
  TrigPoly f(j.at("dim").get<int>(), j.at("degree").get<int>());
  for (const auto& e : j.at("entries")) put(f, e);
  return f;
}

TrigVec trigvec_from_json(const json& j) {
  expect_shape(j, "vector");
  const int n = j.at("dim").get<int>();
  TrigVec f = zero_vec(n, j.at("degree").get<int>());
  for (const auto& e : j.at("entries")) put(f.at(e.at("i").get<int>()), e);
  return f;
}

TrigMat trigmat_from_json(const json& j) {
  expect_shape(j, "matrix");
  const int n = j.at("dim").get<int>();
  TrigMat f(n, n, j.at("degree").get<int>());
  for (const auto& e : j.at("entries")) put(f(e.at("i").get<int>(), e.at("j").get<int>()), e);
  return f;
}

FIPoly fipoly_from_json(const json& j) {
  FIPoly P(j.at("dim").get<int>(), j.at("ideg").get<int>());
  for (const auto& t : j.at("terms"))
    P.set_term(t.at("m").get<MultiIndex>(), trigpoly_from_json(t.at("coeff")));
  return P;
}

std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace kamtori
