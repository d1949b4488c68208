#pragma once

// Near-integrable problems H(q, p) = h(p) + f(q, p) and their local form
// around the torus of frequency omega.

#include <map>
#include <optional>
#include <span>

#include "kamtori/fipoly.hpp"
#include "kamtori/smoothing.hpp"

namespace kamtori {

/// Real polynomial in p: sum_m c_m p^m.
class ActionPoly {
 public:
  ActionPoly() = default;
  explicit ActionPoly(int n) : n_(n) {}
  /// |p|^2 / 2
  static ActionPoly kinetic(int n);

  int dim() const { return n_; }
  int degree() const;
  const std::map<MultiIndex, double>& terms() const { return terms_; }
  void add(const MultiIndex& m, double c);

  double eval(std::span<const double> p) const;
  RealVec gradient(std::span<const double> p) const;
  RealVec hessian(std::span<const double> p) const;  // row-major
  /// the same polynomial as an FIPoly with constant coefficients
  FIPoly as_fipoly() const;

 private:
  int n_ = 2;
  std::map<MultiIndex, double> terms_;
};

struct ProblemSetup {
  int n = 2;
  ActionPoly h{2};
  /// f(q, p) as an FIPoly in (q, p - p_center); absent if an oracle is used
  std::optional<FIPoly> f;
  RealVec p_center;
  /// angle-only perturbation given by coefficients
  std::optional<CoefficientOracle> f_oracle;
  /// ball B = {|p - ball_center|_inf <= ball_radius}
  RealVec ball_center;
  double ball_radius = 1.0;
  double gamma = 0.5;
  double tau = 1.5;
  double l = 8.0;
  double eps = 1e-4;  // declared size of f
  double rho = 0.0;   // 0 means sqrt(eps)

  double effective_rho() const;
  bool has_perturbation() const;
};

/// Same problem with f multiplied by eps_new / eps (and rho reset).
ProblemSetup rescaled(const ProblemSetup& setup, double eps_new);

/// Newton solve of grad h(p) = omega from the ball center, tolerance 1e-12.
/// OutsideFrequencyDomain if the root leaves B, NonInvertibleGradient if the
/// Hessian is singular or Newton stalls.
RealVec inverse_gradient(const ProblemSetup& setup, std::span<const double> omega);

/// Smallest singular value of the Hessian of h over a 5^n sample of B.
double min_hessian_singular_value(const ProblemSetup& setup);

struct Parameterization {
  RealVec p0;
  FIPoly P;        // rho^-1 P_h(rho I) + rho^-1 P_f(theta, rho I)
  FIPoly P_h;      // the h part alone
  double e = 0.0;  // h(p0) / rho
  double rho = 0.0;
  double norm = 0.0;  // fi_norm(P, 0, 1)
};

/// Local form around p0 = (grad h)^-1(omega) on the unit action ball.
/// For oracle perturbations P holds only the h part (the f part is smoothed
/// level by level).
Parameterization parameterize(const ProblemSetup& setup, std::span<const double> omega, int ideg);

/// f as an FIPoly in (q, p - p_center); oracle modes are filled in up to
/// max_degree (or the oracle's own limit).
FIPoly perturbation_poly(const ProblemSetup& setup, int max_degree);

/// X_H(q, p) = (grad h + d_p f, -d_q f), with the derivatives of f prepared once.
class HamiltonianField {
 public:
  HamiltonianField(const ProblemSetup& setup, int max_degree = 64);
  void eval(std::span<const double> q, std::span<const double> p, std::span<double> out) const;

 private:
  const ProblemSetup* setup_;
  FIPoly f_;
  std::vector<FIPoly> dq_;
};

}  // namespace kamtori
