#include "kamtori/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "kamtori/diophantine.hpp"
#include "kamtori/errors.hpp"
#include "kamtori/smoothing.hpp"

namespace kamtori {

SmoothingMode parse_smoothing(const std::string& s) {
  if (s == "auto") return SmoothingMode::Auto;
  if (s == "damped") return SmoothingMode::Damped;
  if (s == "identity") return SmoothingMode::Identity;
  throw ConfigError("smoothing must be auto, damped or identity, got '" + s + "'");
}

std::string to_string(SmoothingMode m) {
  switch (m) {
    case SmoothingMode::Auto: return "auto";
    case SmoothingMode::Damped: return "damped";
    case SmoothingMode::Identity: return "identity";
  }
  return "auto";
}

ComposedTransform ComposedTransform::identity(int n) {
  ComposedTransform C;
  C.E = zero_vec(n, 0);
  C.F = TrigMat(n, n, 0);
  C.G = zero_vec(n, 0);
  C.Uinv = zero_vec(n, 0);
  C.Gamma = zero_vec(n, 0);
  return C;
}

double CompositionAudit::worst() const { return std::max({E, F, G, Gamma, Gamma_increment}); }

namespace {

RealVec eval_vec(const TrigVec& v, std::span<const double> th) {
  RealVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].eval(th);
  return out;
}

RealVec eval_mat(const TrigMat& M, std::span<const double> th) {
  RealVec out(M.entries.size());
  for (std::size_t i = 0; i < M.entries.size(); ++i) out[i] = M.entries[i].eval(th);
  return out;
}

double max_diff(const RealVec& a, const RealVec& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
  return w;
}

// phi with phi + E(phi) = theta, by fixed point on the exact trig polynomials
RealVec invert_point(const TrigVec& E, const RealVec& th) {
  RealVec phi = th;
  for (int it = 0; it < 200; ++it) {
    const RealVec e = eval_vec(E, phi);
    double change = 0.0;
    for (std::size_t i = 0; i < th.size(); ++i) {
      const double next = th[i] - e[i];
      change = std::max(change, std::abs(next - phi[i]));
      phi[i] = next;
    }
    if (change <= 1e-16) break;
  }
  return phi;
}

bool all_zero(const TrigVec& v) {
  return std::all_of(v.begin(), v.end(), [](const TrigPoly& p) { return p.is_zero(); });
}

}  // namespace

CompositionAudit append_step(ComposedTransform& C, const StepTransform& T, int degree,
                             const CompositionOptions& opts, int audit_points, std::uint64_t seed) {
  const int n = static_cast<int>(T.E.size());
  const int D = degree;
  const ComposedTransform old = C;

  // E^j, F^j, G^j along U_{j+1} = Id + E_{j+1}
  TrigVec Eo = zero_vec(n, 0), Go = zero_vec(n, 0);
  TrigMat Fo(n, n, 0);
  if (!(all_zero(old.E) && all_zero(old.F.entries) && all_zero(old.G))) {
    std::vector<TrigPoly> batch;
    batch.insert(batch.end(), old.E.begin(), old.E.end());
    batch.insert(batch.end(), old.F.entries.begin(), old.F.entries.end());
    batch.insert(batch.end(), old.G.begin(), old.G.end());
    CompositionResult r = compose_angle(batch, T.E, D, opts);
    for (int i = 0; i < n; ++i) {
      Eo[i] = r.values[i];
      Go[i] = r.values[n + n * n + i];
    }
    for (int i = 0; i < n * n; ++i) Fo.entries[i] = r.values[n + i];
  }

  C.E = zero_vec(n, D);
  C.G = zero_vec(n, D);
  C.F = TrigMat(n, n, D);
  for (int i = 0; i < n; ++i) {
    C.E[i] = (T.E[i] + Eo[i]).with_degree(D);
    TrigPoly g = T.G[i] + Go[i];
    for (int l = 0; l < n; ++l) g += product(Fo(i, l), T.G[l], D);
    C.G[i] = g.with_degree(D);
    for (int k = 0; k < n; ++k) {
      TrigPoly f = T.F(i, k) + Fo(i, k);
      for (int l = 0; l < n; ++l) f += product(Fo(i, l), T.F(l, k), D);
      C.F(i, k) = f.with_degree(D);
    }
  }
  if (all_zero(C.E)) {
    C.Uinv = zero_vec(n, 0);
    C.Gamma = C.G;
  } else {
    C.Uinv = invert_near_identity(C.E, D);
    C.Gamma = compose_angle(std::span<const TrigPoly>(C.G), C.Uinv, D, opts).values;
  }

  CompositionAudit audit;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 2.0 * M_PI);
  RealVec th(n);
  for (int p = 0; p < audit_points; ++p) {
    for (int d = 0; d < n; ++d) th[d] = U(rng);
    const RealVec e1 = eval_vec(T.E, th);
    RealVec y(n);
    for (int d = 0; d < n; ++d) y[d] = th[d] + e1[d];
    const RealVec Eold = eval_vec(old.E, y), Gold = eval_vec(old.G, y), Fold = eval_mat(old.F, y);
    const RealVec F1 = eval_mat(T.F, th), G1 = eval_vec(T.G, th);

    RealVec Ef(n), Ff(n * n), Gf(n);
    for (int i = 0; i < n; ++i) {
      Ef[i] = e1[i] + Eold[i];
      Gf[i] = G1[i] + Gold[i];
      for (int l = 0; l < n; ++l) Gf[i] += Fold[i * n + l] * G1[l];
      for (int k = 0; k < n; ++k) {
        double v = F1[i * n + k] + Fold[i * n + k];
        for (int l = 0; l < n; ++l) v += Fold[i * n + l] * F1[l * n + k];
        Ff[i * n + k] = v;
      }
    }
    audit.E = std::max(audit.E, max_diff(Ef, eval_vec(C.E, th)));
    audit.F = std::max(audit.F, max_diff(Ff, eval_mat(C.F, th)));
    audit.G = std::max(audit.G, max_diff(Gf, eval_vec(C.G, th)));

    // Gamma^{j+1}(theta) = G^{j+1}(phi), phi = (U^{j+1})^-1(theta)
    const RealVec phi = invert_point(C.E, th);
    const RealVec Gam = eval_vec(C.Gamma, th);
    audit.Gamma = std::max(audit.Gamma, max_diff(Gam, eval_vec(C.G, phi)));
    // increment (Id + F^j o U_{j+1}) G_{j+1}, taken at phi
    const RealVec e1p = eval_vec(T.E, phi);
    RealVec yp(n);
    for (int d = 0; d < n; ++d) yp[d] = phi[d] + e1p[d];
    const RealVec Fp = eval_mat(old.F, yp), G1p = eval_vec(T.G, phi);
    const RealVec Gamold = eval_vec(old.Gamma, th);
    RealVec inc(n), got(n);
    for (int i = 0; i < n; ++i) {
      inc[i] = G1p[i];
      for (int l = 0; l < n; ++l) inc[i] += Fp[i * n + l] * G1p[l];
      got[i] = Gam[i] - Gamold[i];
    }
    audit.Gamma_increment = std::max(audit.Gamma_increment, max_diff(inc, got));
  }
  return audit;
}

namespace {

// fluctuating part of A plus all of B, on the real torus
double affine_size(const FIPoly& R) {
  TrigPoly A = R.constant_term();
  A.set_mean(0.0);
  double acc = strip_norm(A, 0.0);
  for (const TrigPoly& B : R.linear_terms()) acc += strip_norm(B, 0.0);
  return acc;
}

CoefficientOracle scaled_oracle(const CoefficientOracle& o, double k) {
  CoefficientOracle s = o;
  s.coeff = [c = o.coeff, k](const MultiIndex& m) { return c(m) * k; };
  if (o.shell_abs) s.shell_abs = [a = o.shell_abs, k](int N) { return a(N) * k; };
  return s;
}

// C^k sup norm of h on the ball: max over |alpha| <= k of sup |d^alpha h| on a 5^n sample
double h_ck_norm(const ProblemSetup& setup, int k) {
  const int n = setup.n;
  double worst = 0.0;
  const int pts = static_cast<int>(std::pow(5, n));
  RealVec p(n);
  for (int c = 0; c < pts; ++c) {
    int rem = c;
    for (int d = 0; d < n; ++d, rem /= 5) {
      const double ctr = setup.ball_center.empty() ? 0.0 : setup.ball_center[d];
      p[d] = ctr + setup.ball_radius * (rem % 5 - 2) / 2.0;
    }
    // every derivative of a monomial is a monomial: enumerate alpha <= m
    std::map<MultiIndex, double> acc;
    for (const auto& [m, coef] : setup.h.terms()) {
      MultiIndex a(n, 0);
      for (;;) {
        if (l1_norm(a) <= k) {
          double t = coef;
          for (int d = 0; d < n; ++d) {
            for (int r = 0; r < a[d]; ++r) t *= m[d] - r;
            t *= std::pow(p[d], m[d] - a[d]);
          }
          acc[a] += t;
        }
        int d = 0;
        while (d < n && a[d] == m[d]) a[d++] = 0;
        if (d == n) break;
        ++a[d];
      }
    }
    for (const auto& [a, v] : acc) worst = std::max(worst, std::abs(v));
  }
  return worst;
}

void fail_first(const std::vector<GateRow>& rows) {
  for (const auto& r : rows)
    if (!r.pass) {
      std::ostringstream os;
      os << "level " << r.j << ": " << r.quantity << " fails (measured " << r.measured
         << ", bound " << r.bound << ")";
      throw GateFailure(r.j, r.quantity, os.str());
    }
}

}  // namespace

TorusResult run(const ProblemSetup& setup, const RealVec& omega, const ScheduleParams& sp,
                const RunOptions& opts) {
  const int n = setup.n;
  if (static_cast<int>(omega.size()) != n) throw ConfigError("run: omega has the wrong dimension");
  if (!(setup.gamma > 0.0)) throw ConfigError("run: gamma must be positive");
  const int D = opts.degree;
  const double gam = setup.gamma;

  certify(omega, gam, setup.tau, std::max(opts.certify_K, opts.K_cap));

  TorusResult res;
  res.omega = omega;
  const Parameterization par = parameterize(setup, omega, opts.ideg);
  res.p0 = par.p0;
  res.rho = par.rho;

  // normalized problem: time rescaled by gamma, so the frequency is omega / gamma
  RealVec w(n);
  for (int i = 0; i < n; ++i) w[i] = omega[i] / gam;
  const FIPoly P_int = par.P * (1.0 / gam);
  const FIPoly Ph_int = par.P_h.with_ideg(opts.ideg) * (1.0 / gam);
  std::optional<CoefficientOracle> oracle;
  if (setup.f_oracle) oracle = scaled_oracle(*setup.f_oracle, 1.0 / (par.rho * gam));

  ScheduleParams p = sp;
  p.n = n;
  p.tau = setup.tau;
  p.l = setup.l;
  p.levels = opts.max_j + 2;
  p.eps = cl_majorant(P_int, setup.l);
  if (oracle) p.eps += setup.eps / (par.rho * gam);
  if (!(p.eps > 0.0)) p.eps = std::numeric_limits<double>::min();
  res.eps_internal = p.eps;
  Schedule S;
  try {
    S = make_schedule(p);
  } catch (const EpsilonTooLarge& e) {
    throw GateFailure(0, "base inequality s0^l <= c1 s0^(lambda+nu)", e.what());
  }
  res.schedule = S;
  const bool strict = S.mode == Mode::Strict;
  const auto& cst = S.constants;

  if (strict) {
    const double bound = gam / (2.0 * h_ck_norm(setup, static_cast<int>(std::ceil(setup.l)) + 2));
    fail_first({make_row(-1, "rho <= (2 |h|_{l+2})^-1 gamma", par.rho, bound)});
  }

  SmoothingMode mode = opts.smoothing;
  if (mode == SmoothingMode::Auto) mode = oracle ? SmoothingMode::Damped : SmoothingMode::Identity;
  if (oracle && mode == SmoothingMode::Identity)
    throw ConfigError("run: oracle perturbations need damped smoothing");
  auto level_P = [&](int j) -> FIPoly {
    if (mode == SmoothingMode::Identity) return P_int;
    const double u = std::min(S.u[j], 1.0);
    if (!oracle) return smooth_at(SmoothableFunction::from_poly(P_int, setup.l, 0.0), u);
    FIPoly f = smooth_at(SmoothableFunction::from_oracle(*oracle, setup.l, 0.0), u).with_trig_degree(D);
    return Ph_int + f;
  };

  const CompositionOptions comp{opts.composition_budget, D, true};
  NormalForm N{par.e / gam, w};
  ComposedTransform C = ComposedTransform::identity(n);
  FIPoly Pprev = level_P(0);
  FIPoly R = Pprev;
  res.omega_chain.push_back(omega);
  double aff0 = 0.0;
  bool done = false;

  for (int j = 0; !done; ++j) {
    FIPoly Rhat = R;
    if (j > 0 && mode != SmoothingMode::Identity) {
      const FIPoly Pj = level_P(j);
      const FIPoly dP = Pj - Pprev;
      if (!dP.is_zero()) Rhat += compose_affine(dP, C.map(), D, opts.ideg, comp);
      Pprev = Pj;
    }
    const double eps_j = fi_norm(Rhat, S.s[j], S.r[j]);
    const double aff = affine_size(Rhat);
    res.eps.push_back(eps_j);
    res.affine_size.push_back(aff);
    if (j == 0) aff0 = aff;

    std::vector<GateRow> rows = check_level(S, eps_j, j).rows;
    rows.push_back(make_row(j, "|Rhat_j| <= c_remainder s_j^l", eps_j,
                            cst.c_remainder * S.eps_budget[j]));
    if (strict) fail_first(rows);

    if (aff == 0.0 || aff <= opts.floor * aff0) {
      res.converged = true;
      res.reason = "affine remainder at the numerical floor";
      break;
    }
    if (S.eps_budget[j] < opts.tol) {
      res.converged = true;
      res.reason = "s_j^l below tolerance";
      break;
    }
    if (j >= opts.max_j) {
      res.reason = "max_j reached before the remainder reached the floor";
      break;
    }

    const int K = std::min(static_cast<int>(std::ceil(S.K[j])), opts.K_cap);
    // roundoff allowance: a few hundred ulps of the remainder
    const double noise = 100.0 * std::numeric_limits<double>::epsilon() * fi_norm(Rhat, 0.0, 1.0);
    const double trunc_bound = cst.c_trunc * 2.0 * S.eta * S.eta * eps_j + noise;
    const double budget = strict ? trunc_bound : std::numeric_limits<double>::infinity();
    const Truncation tr =
        truncate(Rhat, K, S.eta, S.s[j], S.sigma[j], S.r[j], opts.truncation, budget);

    BuildOptions bo;
    bo.out_degree = D;
    bo.gamma = 1.0;
    bo.tau = setup.tau;
    bo.flip_sign = opts.flip_sign;
    bo.twist = mean_hessian(Rhat);
    bo.norm_strip = S.s_star[j];
    bo.seed = opts.seed * 1000003u + static_cast<std::uint64_t>(j);
    bo.composition = comp;
    const StepTransform T = build_transform(tr.Rtilde, N, K, bo);
    const TransformedHamiltonian th = transform_hamiltonian(N, Rhat, T, D, opts.ideg, comp);
    N = th.N;
    R = th.R;

    StepReport rep;
    rep.j = j;
    rep.eps_in = eps_j;
    rep.eps_out = fi_norm(R, S.s[j + 1], S.r[j + 1]);
    rep.contraction = eps_j > 0.0 ? rep.eps_out / eps_j : 0.0;
    rep.tail = tr.tail;
    rep.estimate_table = audit_step(T, S, j, eps_j);
    rep.condition_checks = rows;
    rep.condition_checks.push_back(make_row(j, "|R_{j+1}| <= 3 eta^2 eps_j", rep.eps_out,
                                            3.0 * S.eta * S.eta * eps_j));
    rep.condition_checks.push_back(make_row(j, "|R_{j+1}| <= 2 delta^l eps_j", rep.eps_out,
                                            2.0 * std::pow(S.delta, S.l) * eps_j));
    rep.condition_checks.push_back(
        make_row(j, "|R - Rtilde| <= c_trunc 2 eta^2 eps_j", tr.tail, trunc_bound));
    rep.condition_checks.push_back(
        make_row(j, "|DPhi^T J DPhi - J| <= 1e-9", T.symplectic_defect, 1e-9));
    rep.condition_checks.push_back(make_row(j, "affine gate residual <= 0.5 |Rtilde fluct|",
                                            T.gate_residual, 0.5 * T.gate_reference + 1e-13));
    res.symplectic_max = std::max(res.symplectic_max, T.symplectic_defect);

    const CompositionAudit audit =
        append_step(C, T, D, comp, opts.audit_points, opts.seed * 7919u + static_cast<std::uint64_t>(j));
    rep.condition_checks.push_back(
        make_row(j, "composition recursion consistency", audit.worst(), opts.audit_tol));
    res.audits.push_back(audit);
    res.step_log.push_back(std::move(rep));
    ++res.steps;

    RealVec pc(n);
    for (int i = 0; i < n; ++i) pc[i] = res.p0[i] + par.rho * C.Gamma[i].mean();
    res.omega_chain.push_back(setup.h.gradient(pc));
  }

  res.transform = C;
  res.p_star.resize(n);
  res.Gamma = zero_vec(n, 0);
  for (int i = 0; i < n; ++i) {
    const double m = C.Gamma[i].mean();
    res.p_star[i] = res.p0[i] + par.rho * m;
    TrigPoly g = C.Gamma[i] * par.rho;
    g.set_mean(0.0);
    res.Gamma[i] = std::move(g);
  }
  res.phi_omega = setup.h.gradient(res.p_star);
  res.residual = invariance_residual(setup, res, opts.residual_grid);
  res.lagrangian_defect = lagrangian_defect(res.Gamma);
  if (res.converged && !(res.residual <= opts.residual_tol)) {
    res.converged = false;
    std::ostringstream os;
    os << "invariance residual " << res.residual << " above " << opts.residual_tol;
    res.reason = os.str();
  }
  return res;
}

namespace {

RealVec offset_grid(int n, int grid, double offset) {
  RealVec pts = grid_points(n, grid);
  const double h = 2.0 * M_PI / grid * offset;
  for (double& x : pts) x += h;
  return pts;
}

int max_degree(const TrigVec& v) {
  int d = 0;
  for (const auto& p : v) d = std::max(d, p.degree());
  return d;
}

}  // namespace

double invariance_residual(const ProblemSetup& setup, const TorusResult& result, int grid,
                           double offset) {
  const int n = setup.n;
  const TrigVec& E = result.transform.E;
  const TrigVec& G = result.transform.G;
  const RealVec& w = result.omega;
  const RealVec pts = offset_grid(n, grid, offset);
  const std::size_t npts = pts.size() / n;
  const PointEvaluator ev(n, std::max({max_degree(E), max_degree(G), 0}), pts);
  std::vector<RealVec> Ev, Gv, dE, dG;
  for (int i = 0; i < n; ++i) {
    Ev.push_back(ev.eval(E[i]));
    Gv.push_back(ev.eval(G[i]));
    dE.push_back(ev.eval(directional_derivative(E[i], w)));
    dG.push_back(ev.eval(directional_derivative(G[i], w)));
  }
  const HamiltonianField X(setup);
  RealVec q(n), p(n), out(2 * n);
  double worst = 0.0;
  for (std::size_t g = 0; g < npts; ++g) {
    for (int i = 0; i < n; ++i) {
      q[i] = pts[g * n + i] + Ev[i][g];
      p[i] = result.p0[i] + result.rho * Gv[i][g];
    }
    X.eval(q, p, out);
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(out[i] - (w[i] + dE[i][g])));
      worst = std::max(worst, std::abs(out[n + i] - result.rho * dG[i][g]));
    }
  }
  return worst;
}

double lagrangian_defect(const TrigVec& Gamma, int grid) {
  const int n = static_cast<int>(Gamma.size());
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const TrigPoly d = Gamma[j].derivative(i) - Gamma[i].derivative(j);
      for (double v : to_grid(d, grid)) worst = std::max(worst, std::abs(v));
    }
  return worst;
}

double sup_distance(const TrigVec& a, const TrigVec& b, int grid) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (double v : to_grid(a[i] - b[i], grid)) worst = std::max(worst, std::abs(v));
  return worst;
}

}  // namespace kamtori
