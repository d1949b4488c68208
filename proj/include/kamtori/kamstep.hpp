#pragma once

// One KAM step for H = e + omega.I + R(theta, I): truncate R to its affine
// low-mode part, solve the two homological equations, build the symplectic
// map Phi(theta, I) = (theta + E, I + F I + G) and transform H.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "kamtori/fipoly.hpp"
#include "kamtori/schedule.hpp"

namespace kamtori {

struct NormalForm {
  double e = 0.0;
  RealVec omega;
};

enum class TruncationProfile { Sharp, Smooth };

struct Truncation {
  FIPoly Rtilde;  // A(theta) + B(theta).I with |k|_1 <= K
  double tail = 0.0;  // fi_norm(R - Rtilde, s - sigma, 2 eta r)
};

/// Smooth keeps mode k with weight cutoff(2|k|_1 / K), so nothing above K survives.
/// Throws TailBudgetExceeded when tail > budget.
Truncation truncate(const FIPoly& R, int K, double eta, double s, double sigma, double r,
                    TruncationProfile profile = TruncationProfile::Sharp,
                    double budget = std::numeric_limits<double>::infinity());

/// Mean over the torus of the Hessian in I of the quadratic terms of R (row-major n x n).
RealVec mean_hessian(const FIPoly& R);

struct TransformNorms {
  double E = 0.0, dE = 0.0;  // |E|, |d_theta E| on the evaluation strip
  double F = 0.0, dF = 0.0;
  double G = 0.0, dG = 0.0;  // gradient part D U^-T grad a only
  double vshift = 0.0;       // max |[B]_i|
  double translation = 0.0;  // max |c_i|
};

struct StepTransform {
  TrigVec E;
  TrigMat F;
  TrigVec G;
  RealVec vshift;  // [B], the frequency correction
  RealVec c;       // action translation absorbing vshift through the twist
  TransformNorms norms;
  double gate_residual = 0.0;      // fluctuating affine part left by (N + Rtilde) o Phi
  double gate_reference = 0.0;     // fluctuating affine part of Rtilde
  double symplectic_defect = 0.0;  // max |DPhi^T J DPhi - J| at random points
  int degree = 0;

  AffineMap map() const { return {E, F, G}; }
  bool is_identity() const;
};

StepTransform identity_transform(int n, int degree = 0);

struct BuildOptions {
  int out_degree = 32;    // degree of F and G (their grid expansion)
  double gamma = 0.0;     // near-resonance bookkeeping; 0 disables
  double tau = 0.0;
  bool flip_sign = false; // mutation hook, see HomologicalOptions
  double gate_ratio = 0.5;
  double gate_floor = 1e-13;  // absolute slack for the gate
  bool check_symplectic = true;
  int symplectic_points = 100;
  double symplectic_tol = 1e-9;
  std::uint64_t seed = 1;
  double norm_strip = 0.0;  // strip width for the recorded norms
  RealVec twist;            // mean Hessian of the quadratic part; empty = no translation
  CompositionOptions composition;
};

/// Requires Rtilde affine in I. Throws ExactResonance from the solver and
/// SymplecticityFailure if the transformed affine part does not shrink or
/// the map fails the symplecticity check.
StepTransform build_transform(const FIPoly& Rtilde, const NormalForm& N, int K,
                              const BuildOptions& opts = {});

/// max over points of the entries of DPhi^T J DPhi - J, J = [[0, Id], [-Id, 0]]
/// in (theta, I) order. I is sampled in [-1, 1]^n.
double symplectic_defect(const StepTransform& T, int points, std::uint64_t seed);

struct TransformedHamiltonian {
  NormalForm N;
  FIPoly R;
  double tail = 0.0;
};

/// (N + R) o Phi = e+ + omega.I + R+, with e+ the mean energy.
TransformedHamiltonian transform_hamiltonian(const NormalForm& N, const FIPoly& R,
                                             const StepTransform& T, int out_degree, int ideg,
                                             const CompositionOptions& opts = {});

struct StepReport {
  int j = 0;
  double eps_in = 0.0;
  double eps_out = 0.0;
  double contraction = 0.0;
  double tail = 0.0;
  std::vector<GateRow> estimate_table;
  std::vector<GateRow> condition_checks;
  bool accepted = true;
};

/// Measured transform norms against the per-level bounds (named constant c_estimate).
std::vector<GateRow> audit_step(const StepTransform& T, const Schedule& S, int j, double eps_j);

/// j, quantity, measured, bound, slack, pass for every row of every report.
void write_step_csv(std::ostream& os, const std::vector<StepReport>& reports);

}  // namespace kamtori
