#pragma once

// Families of tori over frequencies and perturbation sizes: Lipschitz
// estimates in omega, their trend as eps -> 0, and the phase-space measure
// estimate built from them.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kamtori/diophantine.hpp"
#include "kamtori/engine.hpp"

namespace kamtori {

/// omega_i = scale_i (1, (sqrt 5 - 1) / 2) for count scales evenly spaced in
/// [1 - spread, 1 + spread]; every member has the golden Diophantine ratio.
std::vector<RealVec> golden_family(int count, double spread);

struct SurveyRun {
  double eps = 0.0;
  RealVec omega;
  std::string status;  // "converged", "not converged: ..." or "failed: ..."
  std::optional<TorusResult> result;
  bool converged() const { return result && result->converged; }
};

/// Pairwise Lipschitz quotients over the runs of one eps; absent with fewer
/// than two usable runs.
struct LipschitzRow {
  double eps = 0.0;
  int usable = 0;
  std::optional<double> gamma, phi, torus, inverse_gradient;
};

struct SurveyReport {
  std::vector<SurveyRun> runs;  // eps in the given order, then omega
  std::vector<LipschitzRow> lipschitz;
  std::optional<double> slope_gamma, slope_phi;  // log-log fits of Lip against eps
  double predicted_gamma = 0.0;  // (l - 2 nu) / l
  double predicted_phi = 0.0;    // (l - lambda - nu) / l
  bool gamma_decreasing = false;  // strictly, as eps decreases
  bool phi_decreasing = false;
  bool all_converged() const;
};

/// Runs every (eps, omega) pair on `jobs` threads; the setup is rescaled to
/// each eps. Failures are recorded per run and never abort the survey.
SurveyReport survey(const ProblemSetup& setup, const std::vector<RealVec>& omegas,
                    const std::vector<double>& eps_list, const ScheduleParams& sp,
                    const RunOptions& opts, int jobs = 1);

/// Quotients over the runs that produced a torus.
LipschitzRow lipschitz_row(double eps, const std::vector<const TorusResult*>& runs, int grid = 64);

/// One row per run; per-eps Lipschitz and fit columns repeat on every row of
/// that eps and read n/a where undefined.
void write_survey_csv(std::ostream& os, const SurveyReport& report);

struct PhaseMeasureRow {
  double gamma = 0.0, tau = 0.0;
  int K = 0, grid = 0;
  double measure_complement = 0.0;    // in frequency space
  double transfer_factor = 0.0;       // (1 + Lip(T))^n
  double phase_space_estimate = 0.0;  // (2 pi)^n measure_complement transfer_factor
};

/// Bounding box of grad h over a 5^n sample of B.
FrequencyDomain frequency_box(const ProblemSetup& setup);

std::vector<PhaseMeasureRow> measure_report(const FrequencyDomain& domain, int n,
                                            const std::vector<double>& gammas, int K, int grid,
                                            double lip_torus);

void write_phase_measure_csv(std::ostream& os, const std::vector<PhaseMeasureRow>& rows);

}  // namespace kamtori
