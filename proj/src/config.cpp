#include "kamtori/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "kamtori/diophantine.hpp"
#include "kamtori/errors.hpp"

namespace kamtori {

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <class T>
void get(const json& j, const std::string& where, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
void get_opt(const json& j, const std::string& where, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  T v{};
  get(j, where, key, v);
  out = v;
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

TruncationProfile parse_truncation(const std::string& s) {
  if (s == "sharp") return TruncationProfile::Sharp;
  if (s == "smooth") return TruncationProfile::Smooth;
  throw ConfigError("truncation must be sharp or smooth, got '" + s + "'");
}

std::string truncation_name(TruncationProfile p) { return p == TruncationProfile::Sharp ? "sharp" : "smooth"; }

ProblemConfig problem_from_json(const json& j) {
  const std::string w = "problem";
  check_keys(j, w, {"n", "h", "f", "oracle", "p_center", "ball_center", "ball_radius", "gamma", "tau",
                    "l", "eps", "rho"});
  ProblemConfig p;
  get(j, w, "n", p.n);
  if (p.n < 1) throw ConfigError("problem.n must be positive");
  if (j.contains("h")) {
    for (const auto& t : j.at("h")) {
      check_keys(t, "problem.h[]", {"p", "c"});
      HTerm h;
      get(t, "problem.h[]", "p", h.p);
      get(t, "problem.h[]", "c", h.c);
      if (static_cast<int>(h.p.size()) != p.n) throw ConfigError("problem.h[].p must have n entries");
      p.h.push_back(h);
    }
  } else {
    for (int i = 0; i < p.n; ++i) {
      MultiIndex m(p.n, 0);
      m[i] = 2;
      p.h.push_back({m, 0.5});
    }
  }
  if (j.contains("f")) {
    for (const auto& t : j.at("f")) {
      check_keys(t, "problem.f[]", {"m", "k", "cos", "sin"});
      PerturbationTerm f;
      f.m.assign(p.n, 0);
      get(t, "problem.f[]", "m", f.m);
      get(t, "problem.f[]", "k", f.k);
      get(t, "problem.f[]", "cos", f.cos);
      get(t, "problem.f[]", "sin", f.sin);
      if (static_cast<int>(f.m.size()) != p.n || static_cast<int>(f.k.size()) != p.n)
        throw ConfigError("problem.f[]: m and k must have n entries");
      p.f.push_back(f);
    }
  }
  if (j.contains("oracle") && !j.at("oracle").is_null()) {
    const json& o = j.at("oracle");
    check_keys(o, "problem.oracle", {"id", "decay", "scale"});
    OracleSpec s;
    get(o, "problem.oracle", "id", s.id);
    get(o, "problem.oracle", "decay", s.decay);
    get(o, "problem.oracle", "scale", s.scale);
    make_oracle(s, p.n);  // rejects unknown ids
    p.oracle = s;
  }
  if (p.oracle && !p.f.empty()) throw ConfigError("problem: give either f or oracle, not both");
  p.p_center.assign(p.n, 0.0);
  p.ball_center.assign(p.n, 0.0);
  get(j, w, "p_center", p.p_center);
  get(j, w, "ball_center", p.ball_center);
  if (static_cast<int>(p.p_center.size()) != p.n || static_cast<int>(p.ball_center.size()) != p.n)
    throw ConfigError("problem: p_center and ball_center must have n entries");
  get(j, w, "ball_radius", p.ball_radius);
  get(j, w, "gamma", p.gamma);
  get(j, w, "tau", p.tau);
  get(j, w, "l", p.l);
  get(j, w, "eps", p.eps);
  get(j, w, "rho", p.rho);
  if (!(p.gamma > 0.0) || !(p.eps > 0.0) || !(p.ball_radius > 0.0) || p.rho < 0.0)
    throw ConfigError("problem: gamma, eps and ball_radius must be positive, rho non-negative");
  return p;
}

json to_json(const ProblemConfig& p) {
  json h = json::array(), f = json::array();
  for (const auto& t : p.h) h.push_back({{"p", t.p}, {"c", t.c}});
  for (const auto& t : p.f) f.push_back({{"m", t.m}, {"k", t.k}, {"cos", t.cos}, {"sin", t.sin}});
  json o = nullptr;
  if (p.oracle) o = {{"id", p.oracle->id}, {"decay", p.oracle->decay}, {"scale", p.oracle->scale}};
  return {{"n", p.n},
          {"h", h},
          {"f", f},
          {"oracle", o},
          {"p_center", p.p_center},
          {"ball_center", p.ball_center},
          {"ball_radius", p.ball_radius},
          {"gamma", p.gamma},
          {"tau", p.tau},
          {"l", p.l},
          {"eps", p.eps},
          {"rho", p.rho}};
}

ScheduleConfig schedule_from_json(const json& j) {
  const std::string w = "schedule";
  check_keys(j, w, {"mode", "chi", "constants"});
  ScheduleConfig s;
  std::string mode = to_string(s.mode);
  get(j, w, "mode", mode);
  s.mode = parse_mode(mode);
  get_opt(j, w, "chi", s.chi);
  if (j.contains("constants")) {
    const json& c = j.at("constants");
    const std::string wc = "schedule.constants";
    check_keys(c, wc, {"c1", "c2", "c_remainder", "c_trunc", "c_estimate", "c_smooth"});
    get(c, wc, "c1", s.constants.c1);
    get(c, wc, "c2", s.constants.c2);
    get(c, wc, "c_remainder", s.constants.c_remainder);
    get(c, wc, "c_trunc", s.constants.c_trunc);
    get(c, wc, "c_estimate", s.constants.c_estimate);
    get(c, wc, "c_smooth", s.constants.c_smooth);
  }
  return s;
}

json to_json(const ScheduleConfig& s) {
  const NamedConstants& c = s.constants;
  return {{"mode", to_string(s.mode)},
          {"chi", opt_json(s.chi)},
          {"constants",
           {{"c1", c.c1},
            {"c2", c.c2},
            {"c_remainder", c.c_remainder},
            {"c_trunc", c.c_trunc},
            {"c_estimate", c.c_estimate},
            {"c_smooth", c.c_smooth}}}};
}

SurveyConfig survey_from_json(const json& j) {
  const std::string w = "survey";
  check_keys(j, w, {"omegas", "family_count", "family_spread", "eps", "measure"});
  SurveyConfig s;
  get(j, w, "omegas", s.omegas);
  get(j, w, "family_count", s.family_count);
  get(j, w, "family_spread", s.family_spread);
  get(j, w, "eps", s.eps);
  if (j.contains("measure")) {
    const json& m = j.at("measure");
    const std::string wm = "survey.measure";
    check_keys(m, wm, {"gammas", "K", "grid", "lo", "hi"});
    get(m, wm, "gammas", s.measure.gammas);
    get(m, wm, "K", s.measure.K);
    get(m, wm, "grid", s.measure.grid);
    get_opt(m, wm, "lo", s.measure.lo);
    get_opt(m, wm, "hi", s.measure.hi);
    if (s.measure.lo.has_value() != s.measure.hi.has_value())
      throw ConfigError("survey.measure: give both lo and hi or neither");
  }
  return s;
}

json to_json(const SurveyConfig& s) {
  const MeasureConfig& m = s.measure;
  return {{"omegas", s.omegas},
          {"family_count", s.family_count},
          {"family_spread", s.family_spread},
          {"eps", s.eps},
          {"measure",
           {{"gammas", m.gammas}, {"K", m.K}, {"grid", m.grid}, {"lo", opt_json(m.lo)}, {"hi", opt_json(m.hi)}}}};
}

ExecutionConfig execution_from_json(const json& j) {
  const std::string w = "execution";
  check_keys(j, w, {"tol", "max_j", "degree", "K_cap", "ideg", "smoothing", "truncation",
                    "residual_grid", "residual_tol", "composition_budget", "floor", "audit_tol",
                    "audit_points", "certify_K", "seed", "flip_sign", "jobs"});
  ExecutionConfig e;
  RunOptions& o = e.run;
  get(j, w, "tol", o.tol);
  get(j, w, "max_j", o.max_j);
  get(j, w, "degree", o.degree);
  get(j, w, "K_cap", o.K_cap);
  get(j, w, "ideg", o.ideg);
  std::string sm = to_string(o.smoothing), tr = truncation_name(o.truncation);
  get(j, w, "smoothing", sm);
  get(j, w, "truncation", tr);
  o.smoothing = parse_smoothing(sm);
  o.truncation = parse_truncation(tr);
  get(j, w, "residual_grid", o.residual_grid);
  get(j, w, "residual_tol", o.residual_tol);
  get(j, w, "composition_budget", o.composition_budget);
  get(j, w, "floor", o.floor);
  get(j, w, "audit_tol", o.audit_tol);
  get(j, w, "audit_points", o.audit_points);
  get(j, w, "certify_K", o.certify_K);
  get(j, w, "seed", o.seed);
  get(j, w, "flip_sign", o.flip_sign);
  get(j, w, "jobs", e.jobs);
  if (o.degree < 1 || o.K_cap < 1 || o.ideg < 1 || o.max_j < 0 || e.jobs < 1)
    throw ConfigError("execution: degree, K_cap, ideg and jobs must be positive, max_j non-negative");
  return e;
}

json to_json(const ExecutionConfig& e) {
  const RunOptions& o = e.run;
  return {{"tol", o.tol},
          {"max_j", o.max_j},
          {"degree", o.degree},
          {"K_cap", o.K_cap},
          {"ideg", o.ideg},
          {"smoothing", to_string(o.smoothing)},
          {"truncation", truncation_name(o.truncation)},
          {"residual_grid", o.residual_grid},
          {"residual_tol", o.residual_tol},
          {"composition_budget", o.composition_budget},
          {"floor", o.floor},
          {"audit_tol", o.audit_tol},
          {"audit_points", o.audit_points},
          {"certify_K", o.certify_K},
          {"seed", o.seed},
          {"flip_sign", o.flip_sign},
          {"jobs", e.jobs}};
}

}  // namespace

RealVec RunConfig::target() const { return omega ? *omega : golden_vector(problem.n); }

std::vector<RealVec> RunConfig::survey_omegas() const {
  if (!survey.omegas.empty()) return survey.omegas;
  return golden_family(survey.family_count, survey.family_spread);
}

std::vector<double> RunConfig::survey_eps() const {
  return survey.eps.empty() ? std::vector<double>{problem.eps} : survey.eps;
}

RunConfig config_from_json(const json& j) {
  check_keys(j, "config", {"version", "problem", "omega", "survey", "schedule", "execution", "output"});
  RunConfig c;
  if (!j.contains("version")) throw ConfigError("config: missing version");
  get(j, "config", "version", c.version);
  if (c.version != kConfigVersion)
    throw ConfigError("config: version " + std::to_string(c.version) + " is not supported (expected " +
                      std::to_string(kConfigVersion) + ")");
  c.problem = problem_from_json(j.value("problem", json::object()));
  get_opt(j, "config", "omega", c.omega);
  if (c.omega && static_cast<int>(c.omega->size()) != c.problem.n)
    throw ConfigError("config.omega must have n entries");
  c.survey = survey_from_json(j.value("survey", json::object()));
  c.schedule = schedule_from_json(j.value("schedule", json::object()));
  c.execution = execution_from_json(j.value("execution", json::object()));
  get(j, "config", "output", c.output);
  return c;
}

json to_json(const RunConfig& c) {
  return {{"version", c.version},
          {"problem", to_json(c.problem)},
          {"omega", opt_json(c.omega)},
          {"survey", to_json(c.survey)},
          {"schedule", to_json(c.schedule)},
          {"execution", to_json(c.execution)},
          {"output", c.output}};
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

CoefficientOracle make_oracle(const OracleSpec& o, int n) {
  if (o.id == "radial") {
    if (!(o.decay > 0.0)) throw ConfigError("oracle radial: decay must be positive");
    return radial_oracle(n, o.decay, o.scale);
  }
  throw ConfigError("unknown oracle '" + o.id + "' (available: radial)");
}

ProblemSetup make_setup(const ProblemConfig& p) {
  ProblemSetup s;
  s.n = p.n;
  s.h = ActionPoly(p.n);
  for (const auto& t : p.h) s.h.add(t.p, t.c);
  if (!p.f.empty()) {
    int ideg = 0;
    for (const auto& t : p.f) ideg = std::max(ideg, l1_norm(t.m));
    FIPoly f(p.n, ideg);
    for (const auto& t : p.f) {
      TrigPoly q(p.n, 0);
      if (t.cos != 0.0) q += TrigPoly::cosine(p.n, t.k, t.cos);
      if (t.sin != 0.0) q += TrigPoly::sine(p.n, t.k, t.sin);
      f.add_term(t.m, q);
    }
    s.f = f;
  }
  if (p.oracle) s.f_oracle = make_oracle(*p.oracle, p.n);
  s.p_center = p.p_center;
  s.ball_center = p.ball_center;
  s.ball_radius = p.ball_radius;
  s.gamma = p.gamma;
  s.tau = p.tau;
  s.l = p.l;
  s.eps = p.eps;
  s.rho = p.rho;
  return s;
}

ScheduleParams make_schedule_params(const RunConfig& c) {
  ScheduleParams sp;
  sp.n = c.problem.n;
  sp.tau = c.problem.tau;
  sp.l = c.problem.l;
  sp.eps = c.problem.eps;
  sp.chi = c.schedule.chi;
  sp.constants = c.schedule.constants;
  sp.mode = c.schedule.mode;
  return sp;
}

}  // namespace kamtori
