#include "kamtori/fipoly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kamtori/errors.hpp"

namespace kamtori {

namespace {

int total(const MultiIndex& m) {
  int s = 0;
  for (int v : m) s += v;
  return s;
}

void enumerate(int n, int D, int axis, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (axis == n) {
    out.push_back(cur);
    return;
  }
  const int used = std::accumulate(cur.begin(), cur.begin() + axis, 0);
  for (int v = 0; v + used <= D; ++v) {
    cur[axis] = v;
    enumerate(n, D, axis + 1, cur, out);
  }
  cur[axis] = 0;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

}  // namespace

// ---- MonomialTable ---------------------------------------------------------

MonomialTable::MonomialTable(int n, int D) : n_(n), D_(D) {
  MultiIndex cur(n, 0);
  enumerate(n, D, 0, cur, exps_);
  std::stable_sort(exps_.begin(), exps_.end(), [](const MultiIndex& a, const MultiIndex& b) {
    const int ta = total(a), tb = total(b);
    return ta != tb ? ta < tb : a > b;
  });
  for (int i = 0; i < size(); ++i) lookup_[exps_[i]] = i;
  mult_.assign(static_cast<std::size_t>(size()) * size(), -1);
  MultiIndex sum(n);
  for (int a = 0; a < size(); ++a) {
    for (int b = 0; b < size(); ++b) {
      for (int d = 0; d < n; ++d) sum[d] = exps_[a][d] + exps_[b][d];
      mult_[a * size() + b] = index(sum);
    }
  }
}

int MonomialTable::index(const MultiIndex& m) const {
  auto it = lookup_.find(m);
  return it == lookup_.end() ? -1 : it->second;
}

// ---- FIPoly ------------------------------------------------------------------

MultiIndex unit_exponent(int n, int i) {
  MultiIndex m(n, 0);
  m[i] = 1;
  return m;
}

MultiIndex zero_exponent(int n) { return MultiIndex(n, 0); }

int FIPoly::trig_degree() const {
  int d = 0;
  for (const auto& [m, p] : terms_) d = std::max(d, p.degree());
  return d;
}

TrigPoly FIPoly::term(const MultiIndex& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? TrigPoly(dim_, 0) : it->second;
}

void FIPoly::set_term(const MultiIndex& m, TrigPoly p) {
  if (static_cast<int>(m.size()) != dim_ || p.dim() != dim_)
    throw KamError("FIPoly::set_term: dimension mismatch");
  if (total(m) > ideg_) throw DegreeOverflow("FIPoly::set_term: action degree above ideg");
  terms_[m] = std::move(p);
}

void FIPoly::add_term(const MultiIndex& m, const TrigPoly& p) {
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    set_term(m, p);
  } else {
    it->second += p;
  }
}

double FIPoly::eval(std::span<const double> theta, std::span<const double> I) const {
  double acc = 0.0;
  for (const auto& [m, p] : terms_) {
    double mono = 1.0;
    for (int d = 0; d < dim_; ++d) mono *= std::pow(I[d], m[d]);
    acc += p.eval(theta) * mono;
  }
  return acc;
}

FIPoly FIPoly::affine_part() const {
  FIPoly out(dim_, std::min(ideg_, 1));
  for (const auto& [m, p] : terms_)
    if (total(m) <= 1) out.terms_[m] = p;
  return out;
}

FIPoly FIPoly::higher_part() const {
  FIPoly out(dim_, ideg_);
  for (const auto& [m, p] : terms_)
    if (total(m) >= 2) out.terms_[m] = p;
  return out;
}

FIPoly FIPoly::with_trig_degree(int K) const {
  FIPoly out(dim_, ideg_);
  for (const auto& [m, p] : terms_) out.terms_[m] = p.with_degree(std::min(K, p.degree()));
  return out;
}

FIPoly FIPoly::with_ideg(int D) const {
  FIPoly out(dim_, D);
  for (const auto& [m, p] : terms_)
    if (total(m) <= D) out.terms_[m] = p;
  return out;
}

TrigPoly FIPoly::constant_term() const { return term(zero_exponent(dim_)); }

TrigVec FIPoly::linear_terms() const {
  TrigVec B;
  for (int i = 0; i < dim_; ++i) B.push_back(term(unit_exponent(dim_, i)));
  return B;
}

FIPoly& FIPoly::operator+=(const FIPoly& other) {
  ideg_ = std::max(ideg_, other.ideg_);
  for (const auto& [m, p] : other.terms_) add_term(m, p);
  return *this;
}

FIPoly& FIPoly::operator-=(const FIPoly& other) {
  ideg_ = std::max(ideg_, other.ideg_);
  for (const auto& [m, p] : other.terms_) add_term(m, -p);
  return *this;
}

FIPoly& FIPoly::operator*=(double s) {
  for (auto& [m, p] : terms_) p *= s;
  return *this;
}

bool FIPoly::is_zero() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.second.is_zero(); });
}

double fi_norm(const FIPoly& P, double s, double r) {
  double acc = 0.0;
  for (const auto& [m, p] : P.terms()) acc += strip_norm(p, s) * std::pow(r, total(m));
  return acc;
}

double cl_majorant(const FIPoly& P, double l) {
  double acc = 0.0;
  for (const auto& [m, p] : P.terms()) {
    double mf = 1.0;
    for (int v : m) mf *= factorial(v);
    double s = 0.0;
    p.for_each([&](const MultiIndex& k, cplx c) {
      if (c == cplx{}) return;
      int kinf = 1;
      for (int v : k) kinf = std::max(kinf, std::abs(v));
      s += std::abs(c) * std::pow(static_cast<double>(kinf), l);
    });
    acc += mf * s;
  }
  return acc;
}

// ---- composition -------------------------------------------------------------

FIPoly compose_angle(const FIPoly& P, const TrigVec& E, int out_degree,
                     const CompositionOptions& opts, double* tail) {
  std::vector<MultiIndex> keys;
  std::vector<TrigPoly> polys;
  for (const auto& [m, p] : P.terms()) {
    keys.push_back(m);
    polys.push_back(p);
  }
  FIPoly out(P.dim(), P.ideg());
  if (tail) *tail = 0.0;
  if (polys.empty()) return out;
  CompositionResult r = compose_angle(std::span<const TrigPoly>(polys), E, out_degree, opts);
  for (std::size_t i = 0; i < keys.size(); ++i) out.set_term(keys[i], std::move(r.values[i]));
  if (tail) *tail = r.tail;
  return out;
}

AffineMap identity_map(int n) { return {zero_vec(n, 0), TrigMat(n, n, 0), zero_vec(n, 0)}; }

FIPoly compose_affine(const FIPoly& P, const AffineMap& phi, int out_degree, int out_ideg,
                      const CompositionOptions& opts, double* tail) {
  const int n = P.dim();
  const int D = std::min(P.ideg(), out_ideg);
  const MonomialTable T(n, D);
  const int S = T.size();
  const int m = collocation_size(out_degree);

  if (opts.check_diffeomorphism) {
    const double jn = max_jacobian_norm(phi.E, m);
    if (jn >= 1.0)
      throw NotADiffeomorphism("compose_affine: |d_theta E| = " + std::to_string(jn) + " >= 1");
  }

  std::size_t npts = 1;
  for (int d = 0; d < n; ++d) npts *= m;
  RealVec shifts(npts * n);
  for (int d = 0; d < n; ++d) {
    RealVec e = to_grid(phi.E[d], m);
    for (std::size_t g = 0; g < npts; ++g) shifts[g * n + d] = e[g];
  }
  std::vector<RealVec> Gg, Fg;
  for (int i = 0; i < n; ++i) Gg.push_back(to_grid(phi.G[i], m));
  for (int i = 0; i < n * n; ++i) Fg.push_back(to_grid(phi.F.entries[i], m));

  std::vector<MultiIndex> keys;
  std::vector<RealVec> vals;
  {
    const ShiftedGridEvaluator ev(n, m, std::max(P.trig_degree(), 0), shifts);
    for (const auto& [mm, p] : P.terms()) {
      keys.push_back(mm);
      vals.push_back(ev.eval(p));
    }
  }

  std::vector<RealVec> out(S, RealVec(npts, 0.0));
  // powers[i][e] = (G_i + sum_j (delta_ij + F_ij) I_j)^e as coefficients on T
  // (terms above the output degree still feed lower orders through G)
  const int E_max = P.ideg();
  std::vector<std::vector<RealVec>> powers(n, std::vector<RealVec>(E_max + 1, RealVec(S, 0.0)));
  RealVec acc(S), tmp(S);
  const int one = T.index(zero_exponent(n));
  for (std::size_t g = 0; g < npts; ++g) {
    for (int i = 0; i < n; ++i) {
      auto& pw = powers[i];
      std::fill(pw[0].begin(), pw[0].end(), 0.0);
      pw[0][one] = 1.0;
      RealVec lin(S, 0.0);
      lin[one] = Gg[i][g];
      if (D > 0)
        for (int j = 0; j < n; ++j)
          lin[T.index(unit_exponent(n, j))] = (i == j ? 1.0 : 0.0) + Fg[i * n + j][g];
      for (int e = 1; e <= E_max; ++e) {
        std::fill(pw[e].begin(), pw[e].end(), 0.0);
        for (int a = 0; a < S; ++a) {
          if (pw[e - 1][a] == 0.0) continue;
          for (int b = 0; b < S; ++b) {
            if (lin[b] == 0.0) continue;
            const int c = T.product(a, b);
            if (c >= 0) pw[e][c] += pw[e - 1][a] * lin[b];
          }
        }
      }
    }
    for (std::size_t t = 0; t < keys.size(); ++t) {
      const MultiIndex& mm = keys[t];
      std::fill(acc.begin(), acc.end(), 0.0);
      acc[one] = vals[t][g];
      for (int i = 0; i < n; ++i) {
        if (mm[i] == 0) continue;
        const RealVec& f = powers[i][mm[i]];
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (int a = 0; a < S; ++a) {
          if (acc[a] == 0.0) continue;
          for (int b = 0; b < S; ++b) {
            if (f[b] == 0.0) continue;
            const int c = T.product(a, b);
            if (c >= 0) tmp[c] += acc[a] * f[b];
          }
        }
        acc.swap(tmp);
      }
      for (int s = 0; s < S; ++s) out[s][g] += acc[s];
    }
  }

  FIPoly res(n, D);
  double worst = 0.0;
  for (int s = 0; s < S; ++s) {
    Reexpansion r = from_grid(out[s], n, m, out_degree);
    worst = std::max(worst, r.tail);
    if (!r.poly.is_zero()) res.set_term(T.exponent(s), std::move(r.poly));
  }
  if (tail) *tail = worst;
  const double scale = std::max(fi_norm(P, 0.0, 1.0), 1e-300);
  if (worst > opts.tail_budget * scale)
    throw AliasingBudgetExceeded("compose_affine: tail " + std::to_string(worst / scale) +
                                 " of |P| exceeds budget at degree " + std::to_string(out_degree));
  return res;
}

FIPoly substitute_action(const FIPoly& P, std::span<const double> c, double rho) {
  const int n = P.dim();
  FIPoly out(n, P.ideg());
  for (const auto& [m, p] : P.terms()) {
    // enumerate a <= m componentwise
    MultiIndex a(n, 0);
    for (;;) {
      double w = 1.0;
      for (int i = 0; i < n; ++i)
        w *= binomial(m[i], a[i]) * std::pow(c[i], m[i] - a[i]) * std::pow(rho, a[i]);
      if (w != 0.0) out.add_term(a, p * w);
      int i = 0;
      while (i < n && a[i] == m[i]) a[i++] = 0;
      if (i == n) break;
      ++a[i];
    }
  }
  return out;
}

}  // namespace kamtori
