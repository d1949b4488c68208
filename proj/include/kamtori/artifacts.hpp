#pragma once

// Run artifacts on disk: result.json, gamma.json, steps.csv, survey.csv,
// measure.csv and the echoed effective configuration config.json.

#include <filesystem>
#include <string>

#include "kamtori/config.hpp"
#include "kamtori/engine.hpp"
#include "kamtori/survey.hpp"

namespace kamtori {

json result_json(const TorusResult& r);
/// Gamma coefficients in the original coordinates, with p_star.
json gamma_json(const TorusResult& r);

/// result.json, gamma.json, steps.csv
void write_torus_artifacts(const std::filesystem::path& dir, const TorusResult& r);
/// result.json for a run that stopped with an error.
void write_failure(const std::filesystem::path& dir, const std::string& kind, const std::string& message,
                   const json& extra = json::object());
void write_config(const std::filesystem::path& dir, const RunConfig& c);
/// survey.csv and measure.csv
void write_survey_artifacts(const std::filesystem::path& dir, const SurveyReport& report,
                            const std::vector<PhaseMeasureRow>& measure);

std::string read_file(const std::filesystem::path& p);

}  // namespace kamtori
