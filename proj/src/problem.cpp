#include "kamtori/problem.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>

#include "kamtori/errors.hpp"

namespace kamtori {

ActionPoly ActionPoly::kinetic(int n) {
  ActionPoly h(n);
  for (int i = 0; i < n; ++i) {
    MultiIndex m(n, 0);
    m[i] = 2;
    h.add(m, 0.5);
  }
  return h;
}

int ActionPoly::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, l1_norm(m));
  return d;
}

void ActionPoly::add(const MultiIndex& m, double c) {
  if (static_cast<int>(m.size()) != n_) throw ConfigError("h: exponent of the wrong dimension");
  if (c == 0.0) return;
  terms_[m] += c;
}

double ActionPoly::eval(std::span<const double> p) const {
  double v = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (int i = 0; i < n_; ++i) t *= std::pow(p[i], m[i]);
    v += t;
  }
  return v;
}

RealVec ActionPoly::gradient(std::span<const double> p) const {
  RealVec g(n_, 0.0);
  for (const auto& [m, c] : terms_)
    for (int i = 0; i < n_; ++i) {
      if (m[i] == 0) continue;
      double t = c * m[i];
      for (int d = 0; d < n_; ++d) t *= std::pow(p[d], m[d] - (d == i ? 1 : 0));
      g[i] += t;
    }
  return g;
}

RealVec ActionPoly::hessian(std::span<const double> p) const {
  RealVec H(n_ * n_, 0.0);
  for (const auto& [m, c] : terms_)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        MultiIndex e = m;
        double t = c * e[i]--;
        if (t == 0.0) continue;
        t *= e[j]--;
        if (t == 0.0) continue;
        for (int d = 0; d < n_; ++d) t *= std::pow(p[d], e[d]);
        H[i * n_ + j] += t;
      }
  return H;
}

FIPoly ActionPoly::as_fipoly() const {
  FIPoly P(n_, degree());
  for (const auto& [m, c] : terms_) P.add_term(m, TrigPoly::constant(n_, c));
  return P;
}

double ProblemSetup::effective_rho() const { return rho > 0.0 ? rho : std::sqrt(eps); }

bool ProblemSetup::has_perturbation() const {
  if (f_oracle) return true;
  return f && !f->is_zero();
}

ProblemSetup rescaled(const ProblemSetup& setup, double eps_new) {
  if (!(eps_new > 0.0) || !(setup.eps > 0.0)) throw ConfigError("rescaled: eps must be positive");
  ProblemSetup s = setup;
  const double k = eps_new / setup.eps;
  if (s.f) *s.f *= k;
  if (s.f_oracle) {
    auto c = s.f_oracle->coeff;
    s.f_oracle->coeff = [c, k](const MultiIndex& m) { return c(m) * k; };
    if (s.f_oracle->shell_abs) {
      auto a = s.f_oracle->shell_abs;
      s.f_oracle->shell_abs = [a, k](int N) { return a(N) * k; };
    }
  }
  s.eps = eps_new;
  s.rho = 0.0;
  return s;
}

RealVec inverse_gradient(const ProblemSetup& setup, std::span<const double> omega) {
  const int n = setup.n;
  RealVec p = setup.ball_center.empty() ? RealVec(n, 0.0) : setup.ball_center;
  Eigen::VectorXd r(n);
  Eigen::MatrixXd H(n, n);
  for (int it = 0; it < 60; ++it) {
    const RealVec g = setup.h.gradient(p);
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      r(i) = g[i] - omega[i];
      res = std::max(res, std::abs(r(i)));
    }
    if (res <= 1e-12 * std::max(1.0, std::abs(omega[0]))) {
      // one polishing step past the tolerance costs nothing
      const RealVec Hv = setup.h.hessian(p);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) H(i, j) = Hv[i * n + j];
      const Eigen::VectorXd dp = H.fullPivLu().solve(r);
      for (int i = 0; i < n; ++i) p[i] -= dp(i);
      for (int i = 0; i < n; ++i) {
        const double c = setup.ball_center.empty() ? 0.0 : setup.ball_center[i];
        if (std::abs(p[i] - c) > setup.ball_radius) {
          std::ostringstream os;
          os << "omega is outside grad h(B): (grad h)^-1(omega) leaves the ball of radius "
             << setup.ball_radius;
          throw OutsideFrequencyDomain(os.str());
        }
      }
      return p;
    }
    const RealVec Hv = setup.h.hessian(p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) H(i, j) = Hv[i * n + j];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
    if (lu.rank() < n) throw NonInvertibleGradient("non-degeneracy: Hessian of h is singular");
    const Eigen::VectorXd dp = lu.solve(r);
    for (int i = 0; i < n; ++i) p[i] -= dp(i);
  }
  throw NonInvertibleGradient("(grad h)^-1: Newton iteration did not reach 1e-12");
}

double min_hessian_singular_value(const ProblemSetup& setup) {
  const int n = setup.n;
  const int pts = static_cast<int>(std::pow(5, n));
  double worst = std::numeric_limits<double>::infinity();
  RealVec p(n);
  Eigen::MatrixXd H(n, n);
  for (int c = 0; c < pts; ++c) {
    int rem = c;
    for (int d = 0; d < n; ++d, rem /= 5) {
      const double ctr = setup.ball_center.empty() ? 0.0 : setup.ball_center[d];
      p[d] = ctr + setup.ball_radius * (rem % 5 - 2) / 2.0;
    }
    const RealVec Hv = setup.h.hessian(p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) H(i, j) = Hv[i * n + j];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(H);
    worst = std::min(worst, svd.singularValues().minCoeff());
  }
  return worst;
}

Parameterization parameterize(const ProblemSetup& setup, std::span<const double> omega, int ideg) {
  const int n = setup.n;
  Parameterization out;
  out.rho = setup.effective_rho();
  if (!(out.rho > 0.0)) throw ConfigError("parameterize: rho must be positive");
  out.p0 = inverse_gradient(setup, omega);
  out.e = setup.h.eval(out.p0) / out.rho;

  // Taylor remainder of order 2 of h at p0, exact for polynomial h
  const FIPoly hp = substitute_action(setup.h.as_fipoly(), out.p0, out.rho);
  out.P_h = FIPoly(n, std::max(setup.h.degree(), 1));
  for (const auto& [m, p] : hp.terms())
    if (l1_norm(m) >= 2) out.P_h.set_term(m, p * (1.0 / out.rho));
  out.P_h = out.P_h.with_ideg(ideg);

  out.P = out.P_h;
  if (setup.f && !setup.f->is_zero()) {
    RealVec shift(n);
    for (int i = 0; i < n; ++i)
      shift[i] = out.p0[i] - (setup.p_center.empty() ? 0.0 : setup.p_center[i]);
    FIPoly pf = substitute_action(*setup.f, shift, out.rho) * (1.0 / out.rho);
    out.P = (out.P.with_ideg(std::max(ideg, pf.ideg())) + pf).with_ideg(ideg);
  }
  out.norm = fi_norm(out.P, 0.0, 1.0);
  return out;
}

FIPoly perturbation_poly(const ProblemSetup& setup, int max_degree) {
  const int n = setup.n;
  if (setup.f) return *setup.f;
  FIPoly out(n, 0);
  if (!setup.f_oracle) return out;
  const CoefficientOracle& o = *setup.f_oracle;
  const int deg = std::min(max_degree, o.available_degree);
  TrigPoly p(n, deg);
  MultiIndex k(n);
  auto data = p.data();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    p.decode(flat, k);
    const int N = l1_norm(k);
    if (N == 0 || N > deg) continue;
    data[flat] = o.coeff(k);
  }
  out.set_term(zero_exponent(n), std::move(p));
  return out;
}

HamiltonianField::HamiltonianField(const ProblemSetup& setup, int max_degree)
    : setup_(&setup), f_(perturbation_poly(setup, max_degree)) {
  for (int i = 0; i < setup.n; ++i) {
    FIPoly d(setup.n, f_.ideg());
    for (const auto& [m, p] : f_.terms()) d.set_term(m, p.derivative(i));
    dq_.push_back(std::move(d));
  }
}

void HamiltonianField::eval(std::span<const double> q, std::span<const double> p,
                            std::span<double> out) const {
  const int n = setup_->n;
  const RealVec g = setup_->h.gradient(p);
  RealVec x(n);
  for (int i = 0; i < n; ++i) x[i] = p[i] - (setup_->p_center.empty() ? 0.0 : setup_->p_center[i]);
  for (int i = 0; i < n; ++i) out[i] = g[i];
  for (const auto& [m, c] : f_.terms()) {
    if (l1_norm(m) == 0) continue;
    const double v = c.eval(q);
    for (int i = 0; i < n; ++i) {
      if (m[i] == 0) continue;
      double t = v * m[i];
      for (int d = 0; d < n; ++d) t *= std::pow(x[d], m[d] - (d == i ? 1 : 0));
      out[i] += t;
    }
  }
  for (int i = 0; i < n; ++i) out[n + i] = -dq_[i].eval(q, x);
}

}  // namespace kamtori
