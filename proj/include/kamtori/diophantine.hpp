#pragma once

// Finite-order Diophantine certificates |k.omega| >= gamma |k|_1^-tau and
// grid estimates of the measure of the non-Diophantine set.

#include <iosfwd>
#include <vector>

#include "kamtori/trigpoly.hpp"

namespace kamtori {

struct DiophantineFrequency {
  RealVec omega;
  double gamma = 0.0;
  double tau = 0.0;
  int K_checked = 0;
  double margin = 0.0;  // min over checked k of |k.omega| |k|^tau
  MultiIndex worst_k;   // where the minimum is attained
};

/// Exact check over 0 < |k|_1 <= K. Throws NotDiophantine if margin < gamma.
DiophantineFrequency certify(const RealVec& omega, double gamma, double tau, int K);

/// Margin and minimizing mode without the pass/fail decision.
DiophantineFrequency diophantine_margin(const RealVec& omega, double tau, int K);

/// (1, g, g^2, ...) with g = (sqrt 5 - 1)/2, times scale.
RealVec golden_vector(int n, double scale = 1.0);

struct FrequencyDomain {
  RealVec lo, hi;  // axis-aligned box
  double gamma = 0.0;
  double tau = 0.0;
  bool boundary_margin = true;  // also exclude points within gamma of the box boundary

  double volume() const;
};

/// vol(box) times the fraction of midpoint samples (grid per axis) that fail
/// the |k|_1 <= K check or lie within gamma of the boundary.
double measure_complement(const FrequencyDomain& domain, int K, int grid);

struct MeasureRow {
  double gamma, tau;
  int K, grid;
  double measure_complement;
};

void write_measure_csv(std::ostream& os, const std::vector<MeasureRow>& rows);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace kamtori
