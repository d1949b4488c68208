#pragma once

// Exponents, constants and geometric sequences driving the iteration, plus the
// per-level smallness checks.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace kamtori {

enum class Mode { Strict, Practical };

Mode parse_mode(const std::string& s);
std::string to_string(Mode m);

/// The implicit constants of the smallness conditions, made explicit.
struct NamedConstants {
  double c1 = 1.0;           // eps_j <= c1 s_j^(lambda+nu)
  double c2 = 1.0;           // eps_j <= c2 h_j r_j  (frequency-ball condition)
  double c_remainder = 1.0;  // |R^_j| <= c_remainder s_j^l
  double c_trunc = 1.0;      // truncation tail <= c_trunc 2 eta^2 eps_j
  double c_estimate = 1.0;   // step-estimate rows of audit_step
  double c_smooth = 7.38905609893065;  // s0^l = c_smooth eps; e^2 bounds the damping majorant
  bool operator==(const NamedConstants&) const = default;
};

struct ScheduleParams {
  int n = 2;
  double tau = 1.5;
  double l = 8.0;
  double eps = 1e-4;
  std::optional<double> chi;
  NamedConstants constants;
  Mode mode = Mode::Strict;
  int levels = 8;  // planned levels j = 0 .. levels-1
};

struct Schedule {
  int n = 0;
  double tau = 0, l = 0, eps = 0;
  double nu = 0, chi = 0, lambda = 0, kappa = 0;
  double delta = 0, eta = 0, hbar = 0;
  double s0 = 0, u0 = 0;
  bool s0_clamped = false;  // practical mode pulled s0 back into the admissible range
  Mode mode = Mode::Strict;
  NamedConstants constants;

  std::vector<double> s, sigma, s_star, r, h, u, K, eps_budget;

  int levels() const { return static_cast<int>(s.size()); }
};

/// Throws RegularityTooLow (l <= 2 nu, kappa <= 0, chi <= 0) or, in strict mode,
/// EpsilonTooLarge when s0^l > c1 s0^(lambda+nu).
Schedule make_schedule(const ScheduleParams& p);

/// One measured-vs-bound line; slack = bound / measured.
struct GateRow {
  int j = 0;
  std::string quantity;
  double measured = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  bool pass = true;
};

GateRow make_row(int j, std::string quantity, double measured, double bound, double rel_tol = 0.0);

struct LevelReport {
  int j = 0;
  std::vector<GateRow> rows;
  bool all_pass() const;
};

LevelReport check_level(const Schedule& sched, double eps_j, int j);

/// Invariant identities of the schedule; rows fail if violated.
std::vector<GateRow> schedule_identities(const Schedule& sched);

/// max over planned levels of ceil(K_j)
int max_K(const Schedule& sched);

nlohmann::json to_json(const Schedule& sched);
void write_rows_csv(std::ostream& os, const std::vector<GateRow>& rows);
void print_table(std::ostream& os, const Schedule& sched);

}  // namespace kamtori
