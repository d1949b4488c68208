#pragma once

// Polynomials in the action I in R^n whose coefficients are trig polynomials
// in the angle theta:  P(theta, I) = sum_m p_m(theta) I^m,  |m| <= ideg.

#include <map>
#include <span>
#include <vector>

#include "kamtori/trigpoly.hpp"

namespace kamtori {

/// Exponents m in N^n with |m| <= D, ordered by total degree then lexicographically.
class MonomialTable {
 public:
  MonomialTable(int n, int D);
  int size() const { return static_cast<int>(exps_.size()); }
  int dim() const { return n_; }
  int max_degree() const { return D_; }
  const MultiIndex& exponent(int i) const { return exps_[i]; }
  int index(const MultiIndex& m) const;  // -1 if |m| > D
  /// index of exponent(a) + exponent(b), -1 if beyond D
  int product(int a, int b) const { return mult_[a * size() + b]; }

 private:
  int n_, D_;
  std::vector<MultiIndex> exps_;
  std::map<MultiIndex, int> lookup_;
  std::vector<int> mult_;
};

class FIPoly {
 public:
  FIPoly() = default;
  FIPoly(int dim, int ideg) : dim_(dim), ideg_(ideg) {}

  int dim() const { return dim_; }
  int ideg() const { return ideg_; }
  /// largest trig degree among the coefficients
  int trig_degree() const;

  const std::map<MultiIndex, TrigPoly>& terms() const { return terms_; }
  /// coefficient of I^m (a zero polynomial if absent)
  TrigPoly term(const MultiIndex& m) const;
  void set_term(const MultiIndex& m, TrigPoly p);
  void add_term(const MultiIndex& m, const TrigPoly& p);

  double eval(std::span<const double> theta, std::span<const double> I) const;

  /// Terms with |m| <= 1 (A(theta) + B(theta).I).
  FIPoly affine_part() const;
  /// Terms with |m| >= 2.
  FIPoly higher_part() const;
  FIPoly with_trig_degree(int K) const;
  FIPoly with_ideg(int D) const;

  /// A = coefficient of I^0, B_i = coefficient of I_i.
  TrigPoly constant_term() const;
  TrigVec linear_terms() const;

  FIPoly& operator+=(const FIPoly& other);
  FIPoly& operator-=(const FIPoly& other);
  FIPoly& operator*=(double s);
  friend FIPoly operator+(FIPoly a, const FIPoly& b) { return a += b; }
  friend FIPoly operator-(FIPoly a, const FIPoly& b) { return a -= b; }
  friend FIPoly operator*(FIPoly a, double s) { return a *= s; }
  friend FIPoly operator*(double s, FIPoly a) { return a *= s; }

  bool is_zero() const;

 private:
  int dim_ = 1;
  int ideg_ = 0;
  std::map<MultiIndex, TrigPoly> terms_;
};

MultiIndex unit_exponent(int n, int i);
MultiIndex zero_exponent(int n);

/// sum_m strip_norm(p_m, s) r^{|m|}
double fi_norm(const FIPoly& P, double s, double r);

/// sum_{k,m} |c_{k,m}| max(1, |k|_inf)^l prod m_i!  -- a C^l majorant of P on
/// the real torus times the unit action ball.
double cl_majorant(const FIPoly& P, double l);

/// (theta, I) -> P(theta + E(theta), I)
FIPoly compose_angle(const FIPoly& P, const TrigVec& E, int out_degree,
                     const CompositionOptions& opts = {}, double* tail = nullptr);

/// The step map Phi(theta, I) = (theta + E, I + F I + G), affine in I.
struct AffineMap {
  TrigVec E;
  TrigMat F;
  TrigVec G;
};

AffineMap identity_map(int n);

/// P o Phi, computed pointwise on the collocation grid of out_degree and
/// re-expanded; the I-degree of the result is min(P.ideg, out_ideg).
FIPoly compose_affine(const FIPoly& P, const AffineMap& phi, int out_degree, int out_ideg,
                      const CompositionOptions& opts = {}, double* tail = nullptr);

/// Q(theta, I) = P(theta, c + rho I), exact binomial re-expansion.
FIPoly substitute_action(const FIPoly& P, std::span<const double> c, double rho);

}  // namespace kamtori
