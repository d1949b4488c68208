#include "kamtori/survey.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <ostream>
#include <thread>

#include "kamtori/errors.hpp"
#include "kamtori/io.hpp"

namespace kamtori {

std::vector<RealVec> golden_family(int count, double spread) {
  if (count < 1) throw ConfigError("golden_family: count must be positive");
  std::vector<RealVec> out;
  const RealVec g = golden_vector(2);
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : -1.0 + 2.0 * i / (count - 1);
    const double scale = 1.0 + spread * t;
    out.push_back({scale * g[0], scale * g[1]});
  }
  return out;
}

bool SurveyReport::all_converged() const {
  return std::all_of(runs.begin(), runs.end(), [](const SurveyRun& r) { return r.converged(); });
}

namespace {

double dist_inf(const RealVec& a, const RealVec& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

TrigVec shifted(const TrigVec& v, const RealVec& c) {
  TrigVec out = v;
  for (std::size_t i = 0; i < v.size(); ++i) out[i].set_mean(out[i].mean() + c[i]);
  return out;
}

// strictly decreasing along the list (eps is sorted descending by the caller)
bool strictly_decreasing(const std::vector<double>& v) {
  if (v.size() < 2) return false;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

std::optional<double> fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return std::nullopt;
  for (double v : y)
    if (!(v > 0.0)) return std::nullopt;
  return loglog_slope(x, y);
}

}  // namespace

LipschitzRow lipschitz_row(double eps, const std::vector<const TorusResult*>& runs, int grid) {
  LipschitzRow row;
  row.eps = eps;
  row.usable = static_cast<int>(runs.size());
  if (runs.size() < 2) return row;
  double lg = 0.0, lp = 0.0, lt = 0.0, li = 0.0;
  for (std::size_t a = 0; a < runs.size(); ++a)
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      const TorusResult& A = *runs[a];
      const TorusResult& B = *runs[b];
      const double dw = dist_inf(A.omega, B.omega);
      if (dw == 0.0) continue;
      lg = std::max(lg, sup_distance(A.Gamma, B.Gamma, grid) / dw);
      RealVec da(A.omega.size()), db(B.omega.size());
      for (std::size_t i = 0; i < da.size(); ++i) {
        da[i] = A.phi_omega[i] - A.omega[i];
        db[i] = B.phi_omega[i] - B.omega[i];
      }
      lp = std::max(lp, dist_inf(da, db) / dw);
      lt = std::max(lt, sup_distance(shifted(A.Gamma, A.p_star), shifted(B.Gamma, B.p_star), grid) / dw);
      li = std::max(li, dist_inf(A.p0, B.p0) / dw);
    }
  row.gamma = lg;
  row.phi = lp;
  row.torus = lt;
  row.inverse_gradient = li;
  return row;
}

SurveyReport survey(const ProblemSetup& setup, const std::vector<RealVec>& omegas,
                    const std::vector<double>& eps_list, const ScheduleParams& sp,
                    const RunOptions& opts, int jobs) {
  if (omegas.empty() || eps_list.empty()) throw ConfigError("survey: no frequencies or no eps values");
  SurveyReport rep;
  for (double eps : eps_list)
    for (const RealVec& w : omegas) rep.runs.push_back({eps, w, "", std::nullopt});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rep.runs.size(); i = next++) {
      SurveyRun& r = rep.runs[i];
      try {
        const ProblemSetup s = rescaled(setup, r.eps);
        r.result = run(s, r.omega, sp, opts);
        r.status = r.result->converged ? "converged" : "not converged: " + r.result->reason;
      } catch (const KamError& e) {
        r.status = std::string("failed: ") + e.what();
      }
    }
  };
  const int nthreads = std::clamp(jobs, 1, static_cast<int>(rep.runs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (double eps : eps_list) {
    std::vector<const TorusResult*> ok;
    for (const SurveyRun& r : rep.runs)
      if (r.eps == eps && r.converged()) ok.push_back(&*r.result);
    rep.lipschitz.push_back(lipschitz_row(eps, ok));
  }

  ScheduleParams p = sp;
  p.n = setup.n;
  p.tau = setup.tau;
  p.l = setup.l;
  p.mode = Mode::Practical;
  const Schedule S = make_schedule(p);
  rep.predicted_gamma = (S.l - 2.0 * S.nu) / S.l;
  rep.predicted_phi = (S.l - S.lambda - S.nu) / S.l;

  std::vector<LipschitzRow> rows = rep.lipschitz;
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.eps > b.eps; });
  std::vector<double> e, g, f;
  for (const auto& r : rows)
    if (r.gamma) {
      e.push_back(r.eps);
      g.push_back(*r.gamma);
      f.push_back(*r.phi);
    }
  rep.gamma_decreasing = e.size() == rows.size() && strictly_decreasing(g);
  rep.phi_decreasing = e.size() == rows.size() && strictly_decreasing(f);
  rep.slope_gamma = fit(e, g);
  rep.slope_phi = fit(e, f);
  return rep;
}

namespace {

struct Cell {
  const std::optional<double>& v;
};

std::ostream& operator<<(std::ostream& os, Cell c) {
  if (c.v) return os << format_double(*c.v);
  return os << "n/a";
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

}  // namespace

void write_survey_csv(std::ostream& os, const SurveyReport& report) {
  os << "eps,omega_1,omega_2,status,steps,residual,lagrangian_defect,phi_minus_omega,"
        "lip_gamma,lip_phi_minus_id,lip_torus,lip_inverse_gradient,slope_gamma,slope_phi,"
        "predicted_gamma,predicted_phi\n";
  const std::optional<double> none;
  auto F = [](double x) { return format_double(x); };
  for (const SurveyRun& r : report.runs) {
    const LipschitzRow* lr = nullptr;
    for (const auto& l : report.lipschitz)
      if (l.eps == r.eps) lr = &l;
    os << F(r.eps) << ',' << F(r.omega[0]) << ',' << F(r.omega.size() > 1 ? r.omega[1] : 0.0) << ','
       << csv_quote(r.status) << ',';
    if (r.result) {
      os << r.result->steps << ',' << F(r.result->residual) << ',' << F(r.result->lagrangian_defect)
         << ',' << F(dist_inf(r.result->phi_omega, r.omega)) << ',';
    } else {
      os << "n/a,n/a,n/a,n/a,";
    }
    os << Cell{lr ? lr->gamma : none} << ',' << Cell{lr ? lr->phi : none} << ','
       << Cell{lr ? lr->torus : none} << ',' << Cell{lr ? lr->inverse_gradient : none} << ','
       << Cell{report.slope_gamma} << ',' << Cell{report.slope_phi} << ','
       << F(report.predicted_gamma) << ',' << F(report.predicted_phi) << '\n';
  }
}

FrequencyDomain frequency_box(const ProblemSetup& setup) {
  const int n = setup.n;
  FrequencyDomain dom;
  dom.lo.assign(n, INFINITY);
  dom.hi.assign(n, -INFINITY);
  dom.gamma = setup.gamma;
  dom.tau = setup.tau;
  const int pts = static_cast<int>(std::pow(5, n));
  RealVec p(n);
  for (int c = 0; c < pts; ++c) {
    int rem = c;
    for (int d = 0; d < n; ++d, rem /= 5) {
      const double ctr = setup.ball_center.empty() ? 0.0 : setup.ball_center[d];
      p[d] = ctr + setup.ball_radius * (rem % 5 - 2) / 2.0;
    }
    const RealVec g = setup.h.gradient(p);
    for (int d = 0; d < n; ++d) {
      dom.lo[d] = std::min(dom.lo[d], g[d]);
      dom.hi[d] = std::max(dom.hi[d], g[d]);
    }
  }
  return dom;
}

std::vector<PhaseMeasureRow> measure_report(const FrequencyDomain& domain, int n,
                                            const std::vector<double>& gammas, int K, int grid,
                                            double lip_torus) {
  std::vector<PhaseMeasureRow> rows;
  const double torus_volume = std::pow(2.0 * std::numbers::pi, n);
  const double transfer = std::pow(1.0 + lip_torus, n);
  for (double g : gammas) {
    FrequencyDomain d = domain;
    d.gamma = g;
    PhaseMeasureRow r;
    r.gamma = g;
    r.tau = d.tau;
    r.K = K;
    r.grid = grid;
    r.measure_complement = measure_complement(d, K, grid);
    r.transfer_factor = transfer;
    r.phase_space_estimate = torus_volume * r.measure_complement * transfer;
    rows.push_back(r);
  }
  return rows;
}

void write_phase_measure_csv(std::ostream& os, const std::vector<PhaseMeasureRow>& rows) {
  os << "gamma,tau,K,grid,measure_complement,transfer_factor,phase_space_estimate\n";
  auto F = [](double x) { return format_double(x); };
  for (const auto& r : rows)
    os << F(r.gamma) << ',' << F(r.tau) << ',' << r.K << ',' << r.grid << ','
       << F(r.measure_complement) << ',' << F(r.transfer_factor) << ','
       << F(r.phase_space_estimate) << '\n';
}

}  // namespace kamtori
