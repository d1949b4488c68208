#pragma once

// Versioned JSON run configuration. Every key is written on dump, so the
// echoed file is the complete effective configuration.

#include <optional>
#include <string>
#include <vector>

#include "kamtori/engine.hpp"
#include "kamtori/io.hpp"
#include "kamtori/survey.hpp"

namespace kamtori {

inline constexpr int kConfigVersion = 1;

/// c (p - p_center)^m cos(k.q) + s (p - p_center)^m sin(k.q)
struct PerturbationTerm {
  MultiIndex m, k;
  double cos = 0.0, sin = 0.0;
  bool operator==(const PerturbationTerm&) const = default;
};

struct HTerm {
  MultiIndex p;
  double c = 0.0;
  bool operator==(const HTerm&) const = default;
};

/// Angle-only coefficient source by name; "radial" is scale (1 + |k|_1)^-decay.
struct OracleSpec {
  std::string id;
  double decay = 0.0;
  double scale = 1.0;
  bool operator==(const OracleSpec&) const = default;
};

struct ProblemConfig {
  int n = 2;
  std::vector<HTerm> h;
  std::vector<PerturbationTerm> f;
  std::optional<OracleSpec> oracle;
  RealVec p_center, ball_center;
  double ball_radius = 1.0;
  double gamma = 0.5, tau = 1.5, l = 8.0, eps = 1e-4, rho = 0.0;
  bool operator==(const ProblemConfig&) const = default;
};

struct ScheduleConfig {
  Mode mode = Mode::Strict;
  std::optional<double> chi;
  NamedConstants constants;
  bool operator==(const ScheduleConfig&) const = default;
};

struct MeasureConfig {
  std::vector<double> gammas;
  int K = 200;
  int grid = 512;
  std::optional<RealVec> lo, hi;  // frequency box; default is grad h(B)
  bool operator==(const MeasureConfig&) const = default;
};

struct SurveyConfig {
  std::vector<RealVec> omegas;  // used as given when non-empty
  int family_count = 5;         // otherwise golden_family(count, spread)
  double family_spread = 0.1;
  std::vector<double> eps;
  MeasureConfig measure;
  bool operator==(const SurveyConfig&) const = default;
};

struct ExecutionConfig {
  RunOptions run;
  int jobs = 1;
  bool operator==(const ExecutionConfig&) const = default;
};

struct RunConfig {
  int version = kConfigVersion;
  ProblemConfig problem;
  std::optional<RealVec> omega;  // torus target; default golden_vector(n)
  SurveyConfig survey;
  ScheduleConfig schedule;
  ExecutionConfig execution;
  std::string output = "out";
  bool operator==(const RunConfig&) const = default;

  RealVec target() const;
  std::vector<RealVec> survey_omegas() const;
  std::vector<double> survey_eps() const;  // defaults to {problem.eps}
};

/// ConfigError on unknown keys, wrong types, a different version or an unknown oracle.
RunConfig config_from_json(const json& j);
json to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);

ProblemSetup make_setup(const ProblemConfig& p);
ScheduleParams make_schedule_params(const RunConfig& c);
CoefficientOracle make_oracle(const OracleSpec& o, int n);

}  // namespace kamtori
