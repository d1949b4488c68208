#pragma once

// Analytic approximation of finitely differentiable perturbations by smooth
// Fourier damping: S_u P has modes multiplied by psi(u |k|_1).

#include <climits>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "kamtori/fipoly.hpp"
#include "kamtori/schedule.hpp"

namespace kamtori {

/// 1 on [0,1], exp(1 - 1/(1 - (x-1)^2)) on (1,2), 0 from 2 on.
double cutoff(double x);

/// Angle-only coefficient source. coeff must satisfy c_{-k} = conj(c_k).
struct CoefficientOracle {
  int dim = 2;
  int available_degree = INT_MAX;
  std::function<cplx(const MultiIndex&)> coeff;
  /// Optional: |c_k| as a function of |k|_1 alone, enabling shell sums.
  std::function<double(int)> shell_abs;
};

/// c_k = scale (1 + |k|_1)^-decay for k != 0, c_0 = 0.
CoefficientOracle radial_oracle(int dim, double decay, double scale = 1.0);

struct SmoothableFunction {
  std::optional<FIPoly> poly;
  std::optional<CoefficientOracle> oracle;
  double l = 0.0;
  double cl_norm = 0.0;  // declared |P|_l

  static SmoothableFunction from_poly(FIPoly P, double l, double cl_norm);
  static SmoothableFunction from_oracle(CoefficientOracle o, double l, double cl_norm);
  bool is_explicit() const { return poly.has_value(); }
  int dim() const;
};

/// Requires 0 < u <= 1. Oracle sources are expanded to degree floor(2/u)
/// (all modes the cutoff keeps); OracleExhausted if that exceeds the oracle.
FIPoly smooth_at(const SmoothableFunction& P, double u);

struct SmoothingLevel {
  double u = 0.0;
  std::optional<FIPoly> P;      // absent when the level is too large to expand
  double increment_norm = 0.0;  // |P_{j+1} - P_j| at strip u_{j+1} (row j is the increment j -> j+1)
};

struct SmoothingSequence {
  std::vector<SmoothingLevel> levels;
  double fitted_exponent = 0.0;  // slope of log increment vs log u_j
  double p0_norm = 0.0;          // |P_0| on U_0
  double p0_bound = 0.0;         // c_smooth * cl_norm
};

struct SequenceOptions {
  double c_smooth = 7.38905609893065;
  int materialize_cap = 256;  // do not expand levels above this trig degree
};

/// Levels j = 0..J at u_j = u0 delta^j, increments for j = 0..J-1.
SmoothingSequence build_sequence(const SmoothableFunction& P, double u0, double delta, int J,
                                 const SequenceOptions& opts = {});
SmoothingSequence build_sequence(const SmoothableFunction& P, const Schedule& sched, int J,
                                 const SequenceOptions& opts = {});

/// max over a sample grid of |P - Q| and of its first theta and I derivatives.
double c1_distance(const FIPoly& P, const FIPoly& Q, int grid = 32);

/// Number of k in Z^n with |k|_1 = N.
double shell_count(int n, int N);

/// Columns j, u_j, increment_norm, fitted_exponent (running fit through level j).
void write_rate_csv(std::ostream& os, const SmoothingSequence& seq);

}  // namespace kamtori
