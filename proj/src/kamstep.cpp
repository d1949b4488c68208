#include "kamtori/kamstep.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "kamtori/errors.hpp"
#include "kamtori/smoothing.hpp"

namespace kamtori {

namespace {

TrigPoly damp_above(const TrigPoly& p, int K) {
  TrigPoly out = p.with_degree(std::min(p.degree(), K));
  auto data = out.data();
  MultiIndex k(p.dim());
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    if (data[flat] == cplx{}) continue;
    out.decode(flat, k);
    data[flat] *= cutoff(2.0 * l1_norm(k) / K);
  }
  return out;
}

// sum of strip norms of the fluctuating parts of A and of each B_i
double fluctuation(const FIPoly& P, double s) {
  TrigPoly A = P.constant_term();
  A.set_mean(0.0);
  double acc = strip_norm(A, s);
  for (TrigPoly B : P.linear_terms()) {
    B.set_mean(0.0);
    acc += strip_norm(B, s);
  }
  return acc;
}

// N o Phi = e + omega.G + (omega + F^T omega).I, added exactly to R o Phi
void add_normal_form(FIPoly& X, const NormalForm& N, const StepTransform& T) {
  const int n = X.dim();
  TrigPoly A = TrigPoly::constant(n, N.e);
  for (int i = 0; i < n; ++i) A += T.G[i] * N.omega[i];
  X.add_term(zero_exponent(n), A);
  for (int j = 0; j < n; ++j) {
    TrigPoly b = TrigPoly::constant(n, N.omega[j]);
    for (int i = 0; i < n; ++i) b += T.F(i, j) * N.omega[i];
    X.add_term(unit_exponent(n, j), b);
  }
}

}  // namespace

Truncation truncate(const FIPoly& R, int K, double eta, double s, double sigma, double r,
                    TruncationProfile profile, double budget) {
  if (K < 1) throw KamError("truncate: K must be >= 1");
  Truncation t;
  const FIPoly aff = R.affine_part();
  if (profile == TruncationProfile::Sharp) {
    t.Rtilde = aff.with_trig_degree(K);
  } else {
    t.Rtilde = FIPoly(R.dim(), 1);
    for (const auto& [m, p] : aff.terms()) t.Rtilde.set_term(m, damp_above(p, K));
  }
  t.Rtilde = t.Rtilde.with_ideg(1);
  t.tail = fi_norm(R - t.Rtilde, s - sigma, 2.0 * eta * r);
  if (t.tail > budget) {
    std::ostringstream os;
    os << "truncation error |R - Rtilde|_{s-sigma, 2 eta r} = " << t.tail
       << " exceeds its budget " << budget;
    throw TailBudgetExceeded(os.str());
  }
  return t;
}

RealVec mean_hessian(const FIPoly& R) {
  const int n = R.dim();
  RealVec H(n * n, 0.0);
  for (const auto& [m, p] : R.terms()) {
    if (l1_norm(m) != 2) continue;
    const double c = p.mean();
    int a = -1, b = -1;
    for (int i = 0; i < n; ++i) {
      if (m[i] == 2) a = b = i;
      if (m[i] == 1) (a < 0 ? a : b) = i;
    }
    if (a == b) {
      H[a * n + a] += 2.0 * c;
    } else {
      H[a * n + b] += c;
      H[b * n + a] += c;
    }
  }
  return H;
}

bool StepTransform::is_identity() const {
  for (const auto& e : E)
    if (!e.is_zero()) return false;
  for (const auto& f : F.entries)
    if (!f.is_zero()) return false;
  for (const auto& g : G)
    if (!g.is_zero()) return false;
  return true;
}

StepTransform identity_transform(int n, int degree) {
  StepTransform T;
  T.E = zero_vec(n, degree);
  T.F = TrigMat(n, n, degree);
  T.G = zero_vec(n, degree);
  T.vshift.assign(n, 0.0);
  T.c.assign(n, 0.0);
  T.degree = degree;
  return T;
}

double symplectic_defect(const StepTransform& T, int points, std::uint64_t seed) {
  const int n = static_cast<int>(T.E.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI), act(-1.0, 1.0);
  // derivative tables d_j of E_i, F_il, G_i
  std::vector<TrigPoly> dE, dF, dG;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      dE.push_back(T.E[i].derivative(j));
      dG.push_back(T.G[i].derivative(j));
    }
  for (int il = 0; il < n * n; ++il)
    for (int j = 0; j < n; ++j) dF.push_back(T.F.entries[il].derivative(j));

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  J.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);

  RealVec th(n), I(n);
  double worst = 0.0;
  for (int p = 0; p < points; ++p) {
    for (int d = 0; d < n; ++d) th[d] = angle(rng);
    for (int d = 0; d < n; ++d) I[d] = act(rng);
    Eigen::MatrixXd D = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        D(i, j) += dE[i * n + j].eval(th);
        double v = dG[i * n + j].eval(th);
        for (int l = 0; l < n; ++l) v += dF[(i * n + l) * n + j].eval(th) * I[l];
        D(n + i, j) = v;
        D(n + i, n + j) += T.F(i, j).eval(th);
      }
    const Eigen::MatrixXd M = D.transpose() * J * D - J;
    worst = std::max(worst, M.cwiseAbs().maxCoeff());
  }
  return worst;
}

StepTransform build_transform(const FIPoly& Rtilde, const NormalForm& N, int K,
                              const BuildOptions& opts) {
  const int n = Rtilde.dim();
  for (const auto& [m, p] : Rtilde.terms())
    if (l1_norm(m) > 1 && !p.is_zero()) throw KamError("build_transform: Rtilde is not affine in I");
  if (static_cast<int>(N.omega.size()) != n) throw KamError("build_transform: dimension mismatch");

  StepTransform T = identity_transform(n, 0);
  if (Rtilde.is_zero()) return T;

  HomologicalOptions ho{opts.gamma, opts.tau, opts.flip_sign};
  // omega.d a = -(A - [A]),  omega.d E = B - [B]
  const TrigPoly a = solve_homological(-Rtilde.constant_term(), N.omega, K, ho).a;
  const TrigVec B = Rtilde.linear_terms();
  for (int i = 0; i < n; ++i) {
    T.E[i] = solve_homological(B[i], N.omega, K, ho).a;
    T.vshift[i] = B[i].mean();
  }

  bool shift = false;
  for (double v : T.vshift) shift = shift || v != 0.0;
  if (shift && static_cast<int>(opts.twist.size()) == n * n) {
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
      v(i) = -T.vshift[i];
      for (int j = 0; j < n; ++j) M(i, j) = opts.twist[i * n + j];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.rank() == n) {
      const Eigen::VectorXd c = lu.solve(v);
      for (int i = 0; i < n; ++i) T.c[i] = c(i);
    }
  }

  // F = DU^-T - Id and G = DU^-T (grad a + c) pointwise, DU = Id + d_theta E
  const int deg = std::max(opts.out_degree, 1);
  const int m = collocation_size(deg);
  std::vector<RealVec> dE, da;
  for (int i = 0; i < n; ++i) {
    da.push_back(to_grid(a.derivative(i), m));
    for (int j = 0; j < n; ++j) dE.push_back(to_grid(T.E[i].derivative(j), m));
  }
  const std::size_t npts = da[0].size();
  std::vector<RealVec> Fg(n * n, RealVec(npts)), Ga(n, RealVec(npts)), Gc(n, RealVec(npts));
  Eigen::MatrixXd DU(n, n);
  Eigen::VectorXd ga(n), cc(n);
  for (int i = 0; i < n; ++i) cc(i) = T.c[i];
  for (std::size_t g = 0; g < npts; ++g) {
    for (int i = 0; i < n; ++i) {
      ga(i) = da[i][g];
      for (int j = 0; j < n; ++j) DU(i, j) = (i == j ? 1.0 : 0.0) + dE[i * n + j][g];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(DU);
    const double det = lu.determinant();
    if (!(det > 0.0) || !std::isfinite(det))
      throw NotADiffeomorphism("build_transform: Id + d_theta E is not invertible on the grid");
    const Eigen::MatrixXd W = lu.inverse().transpose();
    const Eigen::VectorXd wa = W * ga, wc = W * cc;
    for (int i = 0; i < n; ++i) {
      Ga[i][g] = wa(i);
      Gc[i][g] = wc(i);
      for (int j = 0; j < n; ++j) Fg[i * n + j][g] = W(i, j) - (i == j ? 1.0 : 0.0);
    }
  }
  T.F = TrigMat(n, n, deg);
  T.G = zero_vec(n, deg);
  TrigVec Gonly = zero_vec(n, deg);
  for (int i = 0; i < n; ++i) {
    Gonly[i] = from_grid(Ga[i], n, m, deg).poly;
    T.G[i] = Gonly[i] + from_grid(Gc[i], n, m, deg).poly;
    for (int j = 0; j < n; ++j) T.F(i, j) = from_grid(Fg[i * n + j], n, m, deg).poly;
  }
  T.degree = deg;

  const double s = opts.norm_strip;
  auto dnorm = [&](const auto& polys) {
    double w = 0.0;
    for (const TrigPoly& p : polys)
      for (int j = 0; j < n; ++j) w = std::max(w, strip_norm(p.derivative(j), s));
    return w;
  };
  T.norms.E = strip_norm(T.E, s);
  T.norms.dE = dnorm(T.E);
  T.norms.F = strip_norm(T.F, s);
  T.norms.dF = dnorm(T.F.entries);
  T.norms.G = strip_norm(Gonly, s);
  T.norms.dG = dnorm(Gonly);
  for (int i = 0; i < n; ++i) {
    T.norms.vshift = std::max(T.norms.vshift, std::abs(T.vshift[i]));
    T.norms.translation = std::max(T.norms.translation, std::abs(T.c[i]));
  }

  // transform-and-extract gate: the fluctuating affine part must shrink
  FIPoly X = compose_affine(Rtilde, T.map(), deg, 1, opts.composition);
  add_normal_form(X, N, T);
  T.gate_residual = fluctuation(X, 0.0);
  T.gate_reference = fluctuation(Rtilde, 0.0);
  if (T.gate_residual > opts.gate_ratio * T.gate_reference + opts.gate_floor) {
    std::ostringstream os;
    os << "homological gate: fluctuating affine part after the step " << T.gate_residual
       << " > " << opts.gate_ratio << " x " << T.gate_reference
       << " before it (sign convention of the homological equations)";
    throw SymplecticityFailure(os.str());
  }
  if (opts.check_symplectic) {
    T.symplectic_defect = symplectic_defect(T, opts.symplectic_points, opts.seed);
    if (!(T.symplectic_defect <= opts.symplectic_tol)) {
      std::ostringstream os;
      os << "symplecticity: max |DPhi^T J DPhi - J| = " << T.symplectic_defect << " > "
         << opts.symplectic_tol;
      throw SymplecticityFailure(os.str());
    }
  }
  return T;
}

TransformedHamiltonian transform_hamiltonian(const NormalForm& N, const FIPoly& R,
                                             const StepTransform& T, int out_degree, int ideg,
                                             const CompositionOptions& opts) {
  const int n = R.dim();
  TransformedHamiltonian out;
  out.N = N;
  FIPoly X = R.is_zero() ? FIPoly(n, std::max(ideg, 1))
                         : compose_affine(R, T.map(), out_degree, std::max(ideg, 1), opts, &out.tail);
  add_normal_form(X, N, T);
  TrigPoly A = X.constant_term();
  out.N.e = A.mean();
  A.set_mean(0.0);
  FIPoly Rp(n, X.ideg());
  for (const auto& [m, p] : X.terms()) {
    const int d = l1_norm(m);
    if (d == 0) {
      if (!A.is_zero()) Rp.set_term(m, A);
    } else if (d == 1) {
      int i = 0;
      while (m[i] == 0) ++i;
      TrigPoly b = p;
      b.set_mean(p.mean() - N.omega[i]);
      if (!b.is_zero()) Rp.set_term(m, std::move(b));
    } else {
      Rp.set_term(m, p);
    }
  }
  out.R = std::move(Rp);
  return out;
}

std::vector<GateRow> audit_step(const StepTransform& T, const Schedule& S, int j, double eps_j) {
  if (j < 0 || j >= S.levels()) throw KamError("audit_step: level outside the planned range");
  const double s = S.s[j], c = S.constants.c_estimate;
  const double lam = S.lambda, nu = S.nu, tau = S.tau;
  auto b = [&](double expo) { return c * eps_j * std::pow(s, expo); };
  const auto& q = T.norms;
  return {
      make_row(j, "|E_{j+1}| <= c eps_j s_j^(-lambda-tau)", q.E, b(-lam - tau)),
      make_row(j, "|d_theta E_{j+1}| <= c eps_j s_j^(-lambda-nu)", q.dE, b(-lam - nu)),
      make_row(j, "|F_{j+1}| <= c eps_j s_j^(-lambda-nu)", q.F, b(-lam - nu)),
      make_row(j, "|d_theta F_{j+1}| <= c eps_j s_j^(-lambda-nu-1)", q.dF, b(-lam - nu - 1)),
      make_row(j, "|G_{j+1}| <= c eps_j s_j^(-nu)", q.G, b(-nu)),
      make_row(j, "|d_theta G_{j+1}| <= c eps_j s_j^(-nu-1)", q.dG, b(-nu - 1)),
      make_row(j, "|phi_{j+1} - Id| <= c eps_j s_j^(-lambda)", q.vshift, b(-lam)),
  };
}

void write_step_csv(std::ostream& os, const std::vector<StepReport>& reports) {
  std::vector<GateRow> rows;
  for (const auto& r : reports) {
    rows.push_back(make_row(r.j, "eps_j", r.eps_in, std::numeric_limits<double>::infinity()));
    rows.push_back(make_row(r.j, "eps_{j+1}", r.eps_out, std::numeric_limits<double>::infinity()));
    rows.push_back(make_row(r.j, "truncation tail", r.tail, std::numeric_limits<double>::infinity()));
    rows.insert(rows.end(), r.condition_checks.begin(), r.condition_checks.end());
    rows.insert(rows.end(), r.estimate_table.begin(), r.estimate_table.end());
  }
  write_rows_csv(os, rows);
}

}  // namespace kamtori
