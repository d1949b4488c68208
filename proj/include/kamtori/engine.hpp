#pragma once

// The smoothing-plus-KAM iteration at a fixed frequency, the composition of
// the step maps, and ground-truth diagnostics in the original coordinates.

#include <cstdint>
#include <string>
#include <vector>

#include "kamtori/kamstep.hpp"
#include "kamtori/problem.hpp"
#include "kamtori/schedule.hpp"

namespace kamtori {

enum class SmoothingMode { Auto, Damped, Identity };

SmoothingMode parse_smoothing(const std::string& s);
std::string to_string(SmoothingMode m);

struct RunOptions {
  double tol = 1e-10;   // stop once s_j^l drops below
  int max_j = 8;
  int degree = 32;      // trig degree of every stored function
  int K_cap = 16;       // truncation order is min(ceil K_j, K_cap)
  int ideg = 3;
  SmoothingMode smoothing = SmoothingMode::Auto;
  TruncationProfile truncation = TruncationProfile::Sharp;
  int residual_grid = 64;
  double residual_tol = 1e-8;
  double composition_budget = 1e-3;
  double floor = 1e-12;  // affine size relative to level 0 treated as the numerical floor
  double audit_tol = 1e-10;
  int audit_points = 40;
  int certify_K = 2000;
  std::uint64_t seed = 1;
  bool flip_sign = false;
  bool operator==(const RunOptions&) const = default;
};

/// Accumulated map F^j = Phi_1 o ... o Phi_j in the internal coordinates.
struct ComposedTransform {
  TrigVec E;
  TrigMat F;
  TrigVec G;
  TrigVec Uinv;   // (Id + E)^-1 - Id
  TrigVec Gamma;  // G o (Id + E)^-1

  static ComposedTransform identity(int n);
  AffineMap map() const { return {E, F, G}; }
};

/// Pointwise discrepancies of the stored recursion against fresh evaluation.
struct CompositionAudit {
  int j = 0;
  double E = 0.0, F = 0.0, G = 0.0, Gamma = 0.0, Gamma_increment = 0.0;
  double worst() const;
};

/// F^{j+1} = F^j o Phi_{j+1}. The audit compares every recursion at random points.
CompositionAudit append_step(ComposedTransform& C, const StepTransform& T, int degree,
                             const CompositionOptions& opts, int audit_points, std::uint64_t seed);

struct TorusResult {
  RealVec omega;
  RealVec p0;          // (grad h)^-1(omega)
  RealVec p_star;      // p0 + rho [Gamma]
  RealVec phi_omega;   // grad h(p_star)
  double rho = 0.0;
  double eps_internal = 0.0;  // the size the schedule was built for
  Schedule schedule;
  ComposedTransform transform;
  /// torus in the original coordinates: p = p_star + Gamma(theta)
  TrigVec Gamma;
  std::vector<StepReport> step_log;
  std::vector<CompositionAudit> audits;
  std::vector<double> eps;          // |Rhat_j| on level j
  std::vector<double> affine_size;  // fluctuating affine part of Rhat_j
  std::vector<RealVec> omega_chain;
  double symplectic_max = 0.0;
  double residual = 0.0;
  double lagrangian_defect = 0.0;
  bool converged = false;
  std::string reason;
  int steps = 0;
};

/// Throws GateFailure in strict mode, ExactResonance / NotDiophantine for bad
/// frequencies, and the step errors. Non-convergence is reported in the
/// result (converged = false) rather than thrown.
TorusResult run(const ProblemSetup& setup, const RealVec& omega, const ScheduleParams& sp,
                const RunOptions& opts = {});

/// max over a grid^n sample (shifted by offset cells) of |X_H o Psi - DPsi.omega|,
/// Psi(theta) = (theta + E(theta), p0 + rho G(theta)).
double invariance_residual(const ProblemSetup& setup, const TorusResult& result, int grid,
                           double offset = 0.0);

/// max over the grid of |d_i Gamma_j - d_j Gamma_i|.
double lagrangian_defect(const TrigVec& Gamma, int grid = 64);

/// sup over a grid of |a(theta) - b(theta)| for vector functions.
double sup_distance(const TrigVec& a, const TrigVec& b, int grid = 32);

}  // namespace kamtori
