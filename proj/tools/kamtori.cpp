// Command-line front end: torus, survey, schedule and validate.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "criteria.hpp"
#include "kamtori/artifacts.hpp"
#include "kamtori/config.hpp"
#include "kamtori/errors.hpp"
#include "kamtori/schedule.hpp"

namespace fs = std::filesystem;
using namespace kamtori;

namespace {

enum Exit { kOk = 0, kUsage = 1, kGate = 2, kResonance = 3, kPartial = 4 };

struct Common {
  std::string config, out, mode;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "run configuration (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--out", c.out, "output directory (overrides the config)");
  cmd->add_option("--mode", c.mode, "schedule mode")->check(CLI::IsMember({"strict", "practical"}));
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "seed for the random audit points");
}

RunConfig effective_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (!c.out.empty()) cfg.output = c.out;
  if (!c.mode.empty()) cfg.schedule.mode = parse_mode(c.mode);
  if (c.jobs) cfg.execution.jobs = *c.jobs;
  if (c.seed) cfg.execution.run.seed = *c.seed;
  return cfg;
}

std::string format_mode(const std::vector<int>& k) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
  os << ")";
  return os.str();
}

int fail(const fs::path& dir, int code, const std::exception& e, const std::string& message,
         const json& extra = json::object()) {
  std::cerr << "error: " << message << std::endl;
  try {
    write_failure(dir, error_name(e), message, extra);
  } catch (const std::exception&) {
  }
  return code;
}

int cmd_torus(const Common& c) {
  RunConfig cfg;
  try {
    cfg = effective_config(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << error_name(e) << ": " << e.what() << std::endl;
    return kUsage;
  }
  const fs::path dir = cfg.output;
  try {
    write_config(dir, cfg);
    const ProblemSetup setup = make_setup(cfg.problem);
    const TorusResult r = run(setup, cfg.target(), make_schedule_params(cfg), cfg.execution.run);
    write_torus_artifacts(dir, r);
    std::cout << (r.converged ? "converged" : "not converged") << ": " << r.steps << " steps, residual "
              << format_double(r.residual) << ", lagrangian defect " << format_double(r.lagrangian_defect)
              << " (" << r.reason << ")" << std::endl;
    std::cout << "artifacts in " << dir.string() << std::endl;
    if (!r.converged) {
      std::cerr << "error: NoConvergence: " << r.reason << std::endl;
      return kGate;
    }
    return kOk;
  } catch (const NotDiophantine& e) {
    return fail(dir, kResonance, e,
                "frequency is not (gamma, tau)-Diophantine: |k.omega| >= gamma |k|^-tau fails at k = " +
                    format_mode(e.worst_mode()) + " (" + e.what() + ")",
                {{"k", e.worst_mode()}, {"margin", e.margin()}});
  } catch (const ExactResonance& e) {
    return fail(dir, kResonance, e, "exact resonance k.omega = 0 at k = " + format_mode(e.mode()), {{"k", e.mode()}});
  } catch (const GateFailure& e) {
    return fail(dir, kGate, e,
                "gate failure at level " + std::to_string(e.level()) + ": " + e.inequality() + " (" + e.what() + ")",
                {{"level", e.level()}, {"inequality", e.inequality()}});
  } catch (const ConfigError& e) {
    return fail(dir, kUsage, e, std::string("ConfigError: ") + e.what());
  } catch (const OutsideFrequencyDomain& e) {
    return fail(dir, kUsage, e, std::string("OutsideFrequencyDomain: ") + e.what());
  } catch (const std::exception& e) {
    return fail(dir, kGate, e, error_name(e) + ": " + e.what());
  }
}

int cmd_survey(const Common& c) {
  RunConfig cfg;
  try {
    cfg = effective_config(c);
    const fs::path dir = cfg.output;
    write_config(dir, cfg);
    const ProblemSetup setup = make_setup(cfg.problem);
    const SurveyReport rep = survey(setup, cfg.survey_omegas(), cfg.survey_eps(), make_schedule_params(cfg),
                                    cfg.execution.run, cfg.execution.jobs);
    double lip = 0.0;
    for (const auto& row : rep.lipschitz)
      if (row.torus) lip = std::max(lip, *row.torus);
    const MeasureConfig& mc = cfg.survey.measure;
    FrequencyDomain dom = frequency_box(setup);
    if (mc.lo) dom.lo = *mc.lo;
    if (mc.hi) dom.hi = *mc.hi;
    dom.tau = cfg.problem.tau;
    const std::vector<double> gammas = mc.gammas.empty() ? std::vector<double>{cfg.problem.gamma} : mc.gammas;
    write_survey_artifacts(dir, rep, measure_report(dom, cfg.problem.n, gammas, mc.K, mc.grid, lip));
    for (const auto& r : rep.runs)
      std::cout << "eps " << format_double(r.eps) << " omega " << format_double(r.omega[0]) << ","
                << format_double(r.omega[1]) << ": " << r.status << std::endl;
    std::cout << "artifacts in " << dir.string() << std::endl;
    return rep.all_converged() ? kOk : kPartial;
  } catch (const std::exception& e) {
    std::cerr << "error: " << error_name(e) << ": " << e.what() << std::endl;
    return kUsage;
  }
}

int cmd_schedule(const Common& c, std::optional<double> l, std::optional<double> chi) {
  RunConfig cfg;
  try {
    cfg = effective_config(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << error_name(e) << ": " << e.what() << std::endl;
    return kUsage;
  }
  ScheduleParams p = make_schedule_params(cfg);
  if (l) p.l = *l;
  if (chi) p.chi = *chi;
  try {
    const Schedule S = make_schedule(p);
    print_table(std::cout, S);
    bool ok = true;
    for (const GateRow& r : schedule_identities(S)) {
      if (r.j >= 0) continue;
      std::cout << (r.pass ? "ok    " : "FAIL  ") << r.quantity << "  (" << format_double(r.measured) << ")\n";
      ok = ok && r.pass;
    }
    // the row where the contraction exponent is one
    ScheduleParams q = p;
    q.chi = (q.l - 2.0 * (q.tau + 1.0) - 1.0) / 2.0;
    q.mode = Mode::Practical;
    if (*q.chi > 0.0) {
      const Schedule K1 = make_schedule(q);
      std::cout << "kappa = " << format_double(K1.kappa) << ": delta = " << format_double(K1.delta)
                << (K1.delta == 1.0 / 6.0 ? " = 1/6" : "") << "\n";
    }
    if (!c.out.empty()) {
      fs::create_directories(c.out);
      std::ofstream(fs::path(c.out) / "schedule.json") << to_json(S).dump(2) << "\n";
    }
    return ok ? kOk : kGate;
  } catch (const RegularityTooLow& e) {
    std::cerr << "error: RegularityTooLow: " << e.what() << std::endl;
    return kGate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << error_name(e) << ": " << e.what() << std::endl;
    return kGate;
  }
}

int cmd_validate(const Common& c, const std::string& mutate) {
  RunConfig cfg;
  try {
    cfg = effective_config(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << error_name(e) << ": " << e.what() << std::endl;
    return kUsage;
  }
  acceptance::Options o;
  o.jobs = cfg.execution.jobs;
  o.seed = cfg.execution.run.seed;
  o.flip_sign = mutate == "sign-flip";
  o.scratch = fs::path(cfg.output) / "validate";
  const auto results = acceptance::run_all(o, std::cout);
  int passed = 0;
  bool surfaced = false;
  for (const auto& r : results) {
    passed += r.pass;
    surfaced = surfaced || r.detail.find("SymplecticityFailure") != std::string::npos;
  }
  std::cout << passed << "/" << results.size() << " criteria passed" << std::endl;
  if (o.flip_sign)
    std::cout << "mutation sign-flip: " << (surfaced ? "SymplecticityFailure surfaced" : "not detected")
              << std::endl;
  return passed == static_cast<int>(results.size()) ? kOk : kGate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kamtori: invariant tori of near-integrable Hamiltonians"};
  app.require_subcommand(1);

  Common torus_c, survey_c, schedule_c, validate_c;
  auto* torus = app.add_subcommand("torus", "compute the torus of one frequency");
  add_common(torus, torus_c, true);
  auto* surv = app.add_subcommand("survey", "Lipschitz survey over frequencies and eps, plus measure estimates");
  add_common(surv, survey_c, true);
  auto* sched = app.add_subcommand("schedule", "print the schedule table and identity checks");
  add_common(sched, schedule_c, false);
  std::optional<double> l, chi;
  sched->add_option("--l", l, "regularity l (overrides the config)");
  sched->add_option("--chi", chi, "exponent chi (overrides the config)");
  auto* val = app.add_subcommand("validate", "run the acceptance suite");
  add_common(val, validate_c, true);
  std::string mutate;
  val->add_option("--mutate", mutate, "inject a deliberate defect")->check(CLI::IsMember({"sign-flip"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }
  if (*torus) return cmd_torus(torus_c);
  if (*surv) return cmd_survey(survey_c);
  if (*sched) return cmd_schedule(schedule_c, l, chi);
  return cmd_validate(validate_c, mutate);
}
