#pragma once

// Real-valued trigonometric polynomials on T^n = R^n / (2 pi Z)^n.
//
// A TrigPoly stores complex Fourier coefficients c_k for |k|_1 <= degree in a
// dense box [-degree, degree]^n; entries outside the l1 ball are kept at zero.
// The reality condition c_{-k} = conj(c_k) is maintained by every mutator.
//
// Grid conventions: a uniform grid of m points per axis, theta_j = 2 pi j / m,
// flattened with axis 0 varying fastest.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace kamtori {

using cplx = std::complex<double>;
using MultiIndex = std::vector<int>;
using RealVec = std::vector<double>;

int l1_norm(std::span<const int> k);

class TrigPoly {
 public:
  TrigPoly() = default;
  TrigPoly(int dim, int degree);

  static TrigPoly constant(int dim, double value);
  /// amplitude * cos(k . theta)
  static TrigPoly cosine(int dim, const MultiIndex& k, double amplitude = 1.0);
  /// amplitude * sin(k . theta)
  static TrigPoly sine(int dim, const MultiIndex& k, double amplitude = 1.0);

  int dim() const { return dim_; }
  int degree() const { return degree_; }

  cplx coeff(std::span<const int> k) const;
  /// Sets c_k and c_{-k} = conj(c_k). For k = 0 only the real part is kept.
  void set_coeff(std::span<const int> k, cplx value);
  void add_coeff(std::span<const int> k, cplx value);

  double eval(std::span<const double> theta) const;
  /// Mean value [f] = c_0.
  double mean() const { return c_.empty() ? 0.0 : c_[center_].real(); }
  void set_mean(double value);

  TrigPoly derivative(int axis) const;
  /// Re-embeds into degree d (truncating modes with |k|_1 > d).
  TrigPoly with_degree(int degree) const;

  bool is_zero() const;
  double l1_coeff_sum() const;
  /// Largest |c_k + conj(c_{-k})| / 2 mismatch, i.e. departure from reality.
  double reality_defect() const;

  /// Invokes f(k, c_k) for every mode with |k|_1 <= degree (both halves).
  template <class Fn>
  void for_each(Fn&& fn) const {
    MultiIndex k(dim_);
    for (std::size_t flat = 0; flat < c_.size(); ++flat) {
      decode(flat, k);
      if (l1_norm(k) <= degree_) fn(static_cast<const MultiIndex&>(k), c_[flat]);
    }
  }

  TrigPoly& operator+=(const TrigPoly& other);
  TrigPoly& operator-=(const TrigPoly& other);
  TrigPoly& operator*=(double s);
  friend TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }
  friend TrigPoly operator-(TrigPoly a, const TrigPoly& b) { return a -= b; }
  friend TrigPoly operator*(TrigPoly a, double s) { return a *= s; }
  friend TrigPoly operator*(double s, TrigPoly a) { return a *= s; }
  TrigPoly operator-() const { return *this * -1.0; }

  // Raw storage access for the grid transforms.
  int side() const { return side_; }
  std::span<const cplx> data() const { return c_; }
  std::span<cplx> data() { return c_; }
  std::size_t flat_index(std::span<const int> k) const;
  void decode(std::size_t flat, MultiIndex& k) const;

 private:
  int dim_ = 1;
  int degree_ = 0;
  int side_ = 1;
  std::size_t center_ = 0;
  std::vector<cplx> c_{cplx{}};
};

using TrigVec = std::vector<TrigPoly>;

/// n x n matrix of trigonometric polynomials, row-major.
struct TrigMat {
  int n = 0;
  std::vector<TrigPoly> entries;

  TrigMat() = default;
  TrigMat(int n_, int dim, int degree) : n(n_), entries(n_ * n_, TrigPoly(dim, degree)) {}
  TrigPoly& operator()(int i, int j) { return entries[i * n + j]; }
  const TrigPoly& operator()(int i, int j) const { return entries[i * n + j]; }
};

TrigVec zero_vec(int n, int degree);

// ---- norms ---------------------------------------------------------------

/// Weighted l1 majorant sum_k |c_k| e^{|k|_1 s}; bounds sup |f| on |Im theta| <= s.
double strip_norm(const TrigPoly& f, double s);
/// Max over components (the vector/matrix norm used throughout).
double strip_norm(const TrigVec& f, double s);
double strip_norm(const TrigMat& f, double s);

// ---- grids ----------------------------------------------------------------

/// Coordinates of the m^n grid, n doubles per point.
RealVec grid_points(int dim, int m);
/// Values of f on the m^n grid. Requires m >= 1.
RealVec to_grid(const TrigPoly& f, int m);

struct Reexpansion {
  TrigPoly poly;
  /// sum of |c_k| over resolved modes with |k|_1 > degree (discarded mass)
  double tail = 0.0;
};

/// Fourier coefficients of grid samples, truncated to |k|_1 <= degree.
Reexpansion from_grid(std::span<const double> values, int dim, int m, int degree);

/// Smallest even grid size giving an oversampled collocation for degree d.
int collocation_size(int degree);

/// Evaluates many polynomials at one fixed set of (non-grid) points.
class PointEvaluator {
 public:
  PointEvaluator(int dim, int max_degree, std::span<const double> points);
  std::size_t size() const { return npoints_; }
  RealVec eval(const TrigPoly& f) const;

 private:
  int dim_;
  int max_degree_;
  std::size_t npoints_;
  std::vector<cplx> powers_;  // [point][axis][0..max_degree]
};

/// Evaluates polynomials at theta_g + e_g for the points theta_g of the m-grid
/// through the spectral Taylor series in e_g, truncated where the remainder
/// bound (|e|_inf D)^(q+1) / (q+1)! drops below 1e-17 |f|. Shifts too large for
/// a short series fall back to direct evaluation.
class ShiftedGridEvaluator {
 public:
  ShiftedGridEvaluator(int dim, int m, int max_degree, std::span<const double> shifts);
  std::size_t size() const { return npoints_; }
  int order() const { return order_; }
  RealVec eval(const TrigPoly& f) const;

 private:
  int dim_, m_, max_degree_, order_ = 0;
  std::size_t npoints_;
  std::vector<double> scaled_;  // [point][axis][0..order] e^j / j!
  std::vector<MultiIndex> alphas_;
  std::optional<PointEvaluator> direct_;
};

// ---- algebra --------------------------------------------------------------

/// Exact product truncated to out_degree; tail receives discarded mass.
TrigPoly product(const TrigPoly& a, const TrigPoly& b, int out_degree, double* tail = nullptr);

/// omega . grad f
TrigPoly directional_derivative(const TrigPoly& f, std::span<const double> omega);

TrigVec gradient(const TrigPoly& f);

// ---- small divisors -------------------------------------------------------

struct NearResonance {
  MultiIndex k;
  double divisor;   // |k . omega|
  double threshold; // gamma |k|^-tau
};

struct HomologicalSolution {
  TrigPoly a;
  std::vector<NearResonance> near_resonances;
};

struct HomologicalOptions {
  double gamma = 0.0;  // 0 disables near-resonance bookkeeping
  double tau = 0.0;
  bool flip_sign = false;  // mutation hook for self-validation only
};

/// Solves omega . d_theta a = A - [A] on modes |k|_1 <= K, with [a] = 0.
HomologicalSolution solve_homological(const TrigPoly& A, std::span<const double> omega, int K,
                                      const HomologicalOptions& opts = {});

// ---- composition ----------------------------------------------------------

struct CompositionOptions {
  double tail_budget = 1e-3;  // relative to strip_norm(f, 0)
  int max_degree = 512;
  bool check_diffeomorphism = true;
};

struct CompositionResult {
  TrigVec values;
  int degree = 0;
  double tail = 0.0;
};

/// max over the m-grid of the infinity operator norm of d_theta E.
double max_jacobian_norm(const TrigVec& E, int m);

/// theta -> f(theta + E(theta)) for a batch of f sharing the same E.
/// Raises the output degree (doubling, up to max_degree) while the tail
/// exceeds tail_budget * |f|.
CompositionResult compose_angle(std::span<const TrigPoly> fs, const TrigVec& E, int out_degree,
                                const CompositionOptions& opts = {});
TrigPoly compose_angle(const TrigPoly& f, const TrigVec& E, int out_degree,
                       const CompositionOptions& opts = {}, double* tail = nullptr);

struct InversionOptions {
  int max_iterations = 200;
  double increment_tol = 1e-13;
  double identity_tol = 1e-10;
};

/// E' with (Id + E) o (Id + E') = Id on the collocation grid of out_degree.
TrigVec invert_near_identity(const TrigVec& E, int out_degree, const InversionOptions& opts = {});

}  // namespace kamtori
