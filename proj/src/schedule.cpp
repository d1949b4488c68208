#include "kamtori/schedule.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "kamtori/errors.hpp"

namespace kamtori {

Mode parse_mode(const std::string& s) {
  if (s == "strict") return Mode::Strict;
  if (s == "practical") return Mode::Practical;
  throw ConfigError("mode must be 'strict' or 'practical', got '" + s + "'");
}

std::string to_string(Mode m) { return m == Mode::Strict ? "strict" : "practical"; }

Schedule make_schedule(const ScheduleParams& p) {
  Schedule S;
  S.n = p.n;
  S.tau = p.tau;
  S.l = p.l;
  S.eps = p.eps;
  S.mode = p.mode;
  S.constants = p.constants;
  if (p.n < 1) throw ConfigError("schedule: n must be >= 1");
  if (p.eps <= 0.0) throw ConfigError("schedule: eps must be positive");
  if (p.levels < 1) throw ConfigError("schedule: need at least one level");
  S.nu = p.tau + 1.0;
  if (!(p.l > 2.0 * S.nu)) {
    std::ostringstream os;
    os << "regularity l = " << p.l << " must exceed 2(tau+1) = " << 2.0 * S.nu;
    throw RegularityTooLow(os.str());
  }
  S.chi = p.chi.value_or((p.l - 2.0 * S.nu) / 10.0);
  S.lambda = p.l - S.nu - S.chi;
  S.kappa = 2.0 * S.lambda - p.l;
  if (!(S.chi > 0.0) || !(S.kappa > 0.0)) {
    std::ostringstream os;
    os << "exponent split needs chi > 0 and kappa = 2 lambda - l > 0 (chi = " << S.chi
       << ", kappa = " << S.kappa << ")";
    throw RegularityTooLow(os.str());
  }
  S.delta = std::pow(6.0, -1.0 / S.kappa);
  S.eta = std::pow(S.delta, S.lambda);
  S.hbar = 0.5 * std::pow(1.0 - S.delta, S.nu) *
           std::pow(5.0 * p.n * S.lambda * std::log(std::pow(S.delta, -2.0)), -S.nu);

  S.s0 = std::pow(p.constants.c_smooth * p.eps, 1.0 / p.l);
  // s0^l <= c1 s0^(lambda+nu)  <=>  s0^chi <= c1
  const double s0_max = std::pow(p.constants.c1, 1.0 / S.chi);
  if (S.s0 > s0_max) {
    if (p.mode == Mode::Strict) {
      std::ostringstream os;
      os << "base inequality s0^l <= c1 s0^(lambda+nu) fails: s0 = " << S.s0
         << " exceeds c1^(1/chi) = " << s0_max;
      throw EpsilonTooLarge(os.str());
    }
    S.s0 = s0_max;
    S.s0_clamped = true;
  }
  S.u0 = S.s0 / S.delta;

  const double log_eta = std::log(std::pow(S.eta, -2.0));
  double s = S.s0;
  for (int j = 0; j < p.levels; ++j, s *= S.delta) {
    const double sig = (1.0 - S.delta) * s / 5.0;
    S.s.push_back(s);
    S.sigma.push_back(sig);
    S.s_star.push_back(s - 4.0 * sig);  // s*_{j+1}
    S.r.push_back(std::pow(s, S.lambda));
    S.h.push_back(S.hbar * std::pow(s, S.nu));
    S.u.push_back(S.u0 * std::pow(S.delta, j));
    S.K.push_back(p.n * log_eta / sig);
    S.eps_budget.push_back(std::pow(s, p.l));
  }
  return S;
}

GateRow make_row(int j, std::string quantity, double measured, double bound, double rel_tol) {
  GateRow r;
  r.j = j;
  r.quantity = std::move(quantity);
  r.measured = measured;
  r.bound = bound;
  r.slack = measured == 0.0 ? std::numeric_limits<double>::infinity() : bound / measured;
  r.pass = std::isfinite(measured) && measured <= bound * (1.0 + rel_tol);
  return r;
}

bool LevelReport::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

LevelReport check_level(const Schedule& S, double eps_j, int j) {
  if (j < 0 || j >= S.levels()) throw KamError("check_level: level outside the planned range");
  LevelReport rep{j, {}};
  const auto& c = S.constants;
  rep.rows.push_back(make_row(j, "eps_j <= c1 s_j^(lambda+nu)", eps_j,
                              c.c1 * std::pow(S.s[j], S.lambda + S.nu)));
  rep.rows.push_back(make_row(j, "eps_j <= c2 h_j r_j", eps_j, c.c2 * S.h[j] * S.r[j]));
  rep.rows.push_back(make_row(j, "h_j <= (2 K_j^nu)^-1", S.h[j],
                              1.0 / (2.0 * std::pow(S.K[j], S.nu)), 1e-12));
  return rep;
}

std::vector<GateRow> schedule_identities(const Schedule& S) {
  std::vector<GateRow> rows;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  constexpr double tol = 1e-12;
  rows.push_back(make_row(-1, "l = lambda + nu + chi", rel(S.lambda + S.nu + S.chi, S.l), tol));
  rows.push_back(make_row(-1, "kappa = 2 lambda - l > 0", S.kappa > 0 ? 0.0 : 1.0, 0.0));
  rows.push_back(make_row(-1, "delta = 6^(-1/kappa)", rel(S.delta, std::pow(6.0, -1.0 / S.kappa)), tol));
  rows.push_back(make_row(-1, "3 eta^2 = delta^l / 2", rel(3.0 * S.eta * S.eta, 0.5 * std::pow(S.delta, S.l)), tol));
  rows.push_back(make_row(-1, "u0 = s0 / delta", rel(S.u0 * S.delta, S.s0), tol));
  for (int j = 0; j < S.levels(); ++j) {
    rows.push_back(make_row(j, "r_j = s_j^lambda", rel(S.r[j], std::pow(S.s[j], S.lambda)), tol));
    rows.push_back(make_row(j, "h_j = hbar s_j^nu", rel(S.h[j], S.hbar * std::pow(S.s[j], S.nu)), tol));
    rows.push_back(make_row(j, "h_j <= (2 K_j^nu)^-1", S.h[j], 1.0 / (2.0 * std::pow(S.K[j], S.nu)), tol));
    if (j + 1 < S.levels()) {
      rows.push_back(make_row(j, "s_{j+1} = s_j - 5 sigma_j", std::abs(S.s[j + 1] - (S.s[j] - 5.0 * S.sigma[j])) / S.s[j], tol));
      rows.push_back(make_row(j, "s*_{j+1} > s_{j+1}", S.s[j + 1], S.s_star[j], 0.0));
      rows.push_back(make_row(j, "r_{j+1} = eta r_j", rel(S.r[j + 1], S.eta * S.r[j]), tol));
      rows.push_back(make_row(j, "u_{j+1} = delta u_j", rel(S.u[j + 1], S.delta * S.u[j]), tol));
      rows.push_back(make_row(j, "h_{j+1} <= h_j / 4", S.h[j + 1], S.h[j] / 4.0));
    }
  }
  return rows;
}

int max_K(const Schedule& S) {
  double m = 0.0;
  for (double k : S.K) m = std::max(m, k);
  return static_cast<int>(std::ceil(m));
}

nlohmann::json to_json(const Schedule& S) {
  const auto& c = S.constants;
  return {{"n", S.n},
          {"tau", S.tau},
          {"l", S.l},
          {"eps", S.eps},
          {"mode", to_string(S.mode)},
          {"nu", S.nu},
          {"chi", S.chi},
          {"lambda", S.lambda},
          {"kappa", S.kappa},
          {"delta", S.delta},
          {"eta", S.eta},
          {"hbar", S.hbar},
          {"s0", S.s0},
          {"u0", S.u0},
          {"s0_clamped", S.s0_clamped},
          {"constants",
           {{"c1", c.c1},
            {"c2", c.c2},
            {"c_remainder", c.c_remainder},
            {"c_trunc", c.c_trunc},
            {"c_estimate", c.c_estimate},
            {"c_smooth", c.c_smooth}}},
          {"levels",
           {{"s", S.s},
            {"sigma", S.sigma},
            {"s_star", S.s_star},
            {"r", S.r},
            {"h", S.h},
            {"u", S.u},
            {"K", S.K},
            {"eps_budget", S.eps_budget}}}};
}

void write_rows_csv(std::ostream& os, const std::vector<GateRow>& rows) {
  os << "j,quantity,measured,bound,slack,pass\n";
  os << std::setprecision(17);
  for (const auto& r : rows)
    os << r.j << ",\"" << r.quantity << "\"," << r.measured << ',' << r.bound << ',' << r.slack
       << ',' << (r.pass ? 1 : 0) << '\n';
}

void print_table(std::ostream& os, const Schedule& S) {
  os << std::setprecision(10);
  os << "n = " << S.n << "  tau = " << S.tau << "  l = " << S.l << "  eps = " << S.eps
     << "  mode = " << to_string(S.mode) << '\n';
  os << "nu = " << S.nu << "  chi = " << S.chi << "  lambda = " << S.lambda
     << "  kappa = " << S.kappa << '\n';
  os << "delta = " << S.delta << "  eta = " << S.eta << "  hbar = " << S.hbar << '\n';
  os << "s0 = " << S.s0 << (S.s0_clamped ? " (clamped)" : "") << "  u0 = " << S.u0 << '\n';
  os << std::setw(3) << "j" << std::setw(15) << "s_j" << std::setw(15) << "sigma_j"
     << std::setw(15) << "r_j" << std::setw(15) << "h_j" << std::setw(15) << "u_j"
     << std::setw(15) << "K_j" << '\n';
  os << std::setprecision(6);
  for (int j = 0; j < S.levels(); ++j)
    os << std::setw(3) << j << std::setw(15) << S.s[j] << std::setw(15) << S.sigma[j]
       << std::setw(15) << S.r[j] << std::setw(15) << S.h[j] << std::setw(15) << S.u[j]
       << std::setw(15) << S.K[j] << '\n';
}

}  // namespace kamtori
