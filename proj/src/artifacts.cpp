#include "kamtori/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "kamtori/errors.hpp"
#include "kamtori/io.hpp"
#include "kamtori/kamstep.hpp"

namespace kamtori {

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + p.string() + "'");
  return os;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

double sup_norm(const TrigVec& v) { return sup_distance(v, zero_vec(static_cast<int>(v.size()), 0), 64); }

}  // namespace

json result_json(const TorusResult& r) {
  json steps = json::array();
  for (std::size_t i = 0; i < r.step_log.size(); ++i) {
    const StepReport& s = r.step_log[i];
    json a = nullptr;
    if (i < r.audits.size()) {
      const CompositionAudit& c = r.audits[i];
      a = {{"E", c.E}, {"F", c.F}, {"G", c.G}, {"Gamma", c.Gamma}, {"Gamma_increment", c.Gamma_increment}};
    }
    steps.push_back({{"j", s.j}, {"eps_in", s.eps_in}, {"eps_out", s.eps_out},
                     {"contraction", s.contraction}, {"truncation_tail", s.tail}, {"audit", a}});
  }
  return {{"status", r.converged ? "converged" : "not converged"},
          {"converged", r.converged},
          {"reason", r.reason},
          {"omega", r.omega},
          {"p0", r.p0},
          {"p_star", r.p_star},
          {"phi_omega", r.phi_omega},
          {"rho", r.rho},
          {"eps_internal", r.eps_internal},
          {"steps", r.steps},
          {"residual", r.residual},
          {"lagrangian_defect", r.lagrangian_defect},
          {"symplectic_max", r.symplectic_max},
          {"eps_levels", r.eps},
          {"affine_size", r.affine_size},
          {"omega_chain", r.omega_chain},
          {"norms",
           {{"Gamma_sup", sup_norm(r.Gamma)},
            {"E_1", strip_norm(r.transform.E, 0.0)},
            {"G_1", strip_norm(r.transform.G, 0.0)}}},
          {"step_summary", steps},
          {"schedule", to_json(r.schedule)}};
}

json gamma_json(const TorusResult& r) {
  return {{"p_star", r.p_star}, {"Gamma", to_json(r.Gamma)}};
}

void write_torus_artifacts(const std::filesystem::path& dir, const TorusResult& r) {
  ensure_dir(dir);
  open_out(dir / "result.json") << result_json(r).dump(2) << '\n';
  open_out(dir / "gamma.json") << gamma_json(r).dump(2) << '\n';
  auto os = open_out(dir / "steps.csv");
  write_step_csv(os, r.step_log);
}

void write_failure(const std::filesystem::path& dir, const std::string& kind, const std::string& message,
                   const json& extra) {
  ensure_dir(dir);
  json j = extra;
  j["status"] = "failed";
  j["converged"] = false;
  j["error"] = kind;
  j["reason"] = message;
  open_out(dir / "result.json") << j.dump(2) << '\n';
}

void write_config(const std::filesystem::path& dir, const RunConfig& c) {
  ensure_dir(dir);
  open_out(dir / "config.json") << to_json(c).dump(2) << '\n';
}

void write_survey_artifacts(const std::filesystem::path& dir, const SurveyReport& report,
                            const std::vector<PhaseMeasureRow>& measure) {
  ensure_dir(dir);
  {
    auto os = open_out(dir / "survey.csv");
    write_survey_csv(os, report);
  }
  auto os = open_out(dir / "measure.csv");
  write_phase_measure_csv(os, measure);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace kamtori
