#include "kamtori/smoothing.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "kamtori/diophantine.hpp"
#include "kamtori/errors.hpp"

namespace kamtori {

double cutoff(double x) {
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  const double t = x - 1.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

double shell_count(int n, int N) {
  if (N == 0) return 1.0;
  // sum_i 2^i C(n,i) C(N-1,i-1)
  double total = 0.0;
  for (int i = 1; i <= std::min(n, N); ++i) {
    double c1 = 1.0, c2 = 1.0;
    for (int a = 0; a < i; ++a) c1 = c1 * (n - a) / (a + 1);
    for (int a = 0; a < i - 1; ++a) c2 = c2 * (N - 1 - a) / (a + 1);
    total += std::pow(2.0, i) * c1 * c2;
  }
  return total;
}

CoefficientOracle radial_oracle(int dim, double decay, double scale) {
  CoefficientOracle o;
  o.dim = dim;
  o.shell_abs = [decay, scale](int N) { return N == 0 ? 0.0 : scale * std::pow(1.0 + N, -decay); };
  o.coeff = [f = o.shell_abs](const MultiIndex& k) { return cplx(f(l1_norm(k)), 0.0); };
  return o;
}

SmoothableFunction SmoothableFunction::from_poly(FIPoly P, double l, double cl_norm) {
  SmoothableFunction s;
  s.poly = std::move(P);
  s.l = l;
  s.cl_norm = cl_norm;
  return s;
}

SmoothableFunction SmoothableFunction::from_oracle(CoefficientOracle o, double l, double cl_norm) {
  if (!o.coeff) throw KamError("smoothing: oracle without coefficient function");
  SmoothableFunction s;
  s.oracle = std::move(o);
  s.l = l;
  s.cl_norm = cl_norm;
  return s;
}

int SmoothableFunction::dim() const { return poly ? poly->dim() : oracle->dim; }

namespace {

void check_u(double u) {
  if (!(u > 0.0) || u > 1.0) throw KamError("smoothing: need 0 < u <= 1");
}

int kept_degree(double u) {
  // psi(u N) > 0 iff u N < 2
  const double top = 2.0 / u;
  int d = static_cast<int>(std::floor(top));
  if (d > 0 && d * u >= 2.0) --d;
  return d;
}

TrigPoly damp(const TrigPoly& p, double u) {
  TrigPoly out = p;
  auto data = out.data();
  MultiIndex k(p.dim());
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    if (data[flat] == cplx{}) continue;
    out.decode(flat, k);
    data[flat] *= cutoff(u * l1_norm(k));
  }
  return out;
}

// sum over modes of |c_k| |psi(u1|k|) - psi(u0|k|)| e^{|k| s}, straight from the oracle
double oracle_increment(const CoefficientOracle& o, double u0, double u1, double s) {
  const int top = kept_degree(std::min(u0, u1));
  if (o.shell_abs) {
    double acc = 0.0;
    for (int N = 1; N <= top; ++N) {
      const double w = std::abs(cutoff(u1 * N) - cutoff(u0 * N));
      if (w == 0.0) continue;
      acc += shell_count(o.dim, N) * o.shell_abs(N) * w * std::exp(N * s);
    }
    return acc;
  }
  if (top > o.available_degree) throw OracleExhausted("smoothing: oracle degree exhausted");
  TrigPoly box(o.dim, top);
  double acc = 0.0;
  MultiIndex k(o.dim);
  for (std::size_t flat = 0; flat < box.data().size(); ++flat) {
    box.decode(flat, k);
    const int N = l1_norm(k);
    if (N == 0 || N > top) continue;
    const double w = std::abs(cutoff(u1 * N) - cutoff(u0 * N));
    if (w != 0.0) acc += std::abs(o.coeff(k)) * w * std::exp(N * s);
  }
  return acc;
}

double oracle_norm(const CoefficientOracle& o, double u, double s) {
  const int top = kept_degree(u);
  if (!o.shell_abs) {
    const FIPoly p = smooth_at(SmoothableFunction::from_oracle(o, 0, 0), u);
    return strip_norm(p.term(zero_exponent(o.dim)), s);
  }
  double acc = 0.0;
  for (int N = 1; N <= top; ++N)
    acc += shell_count(o.dim, N) * o.shell_abs(N) * cutoff(u * N) * std::exp(N * s);
  return acc;
}

FIPoly action_derivative(const FIPoly& P, int i) {
  FIPoly out(P.dim(), std::max(P.ideg() - 1, 0));
  for (const auto& [m, p] : P.terms()) {
    if (m[i] == 0) continue;
    MultiIndex mm = m;
    --mm[i];
    out.add_term(mm, p * static_cast<double>(m[i]));
  }
  return out;
}

}  // namespace

FIPoly smooth_at(const SmoothableFunction& P, double u) {
  check_u(u);
  if (P.poly) {
    FIPoly out(P.poly->dim(), P.poly->ideg());
    for (const auto& [m, p] : P.poly->terms()) out.set_term(m, damp(p, u));
    return out;
  }
  const CoefficientOracle& o = *P.oracle;
  const int deg = kept_degree(u);
  if (deg > o.available_degree)
    throw OracleExhausted("smoothing: level u = " + std::to_string(u) + " needs degree " +
                          std::to_string(deg) + " beyond the oracle's " +
                          std::to_string(o.available_degree));
  TrigPoly p(o.dim, deg);
  MultiIndex k(o.dim);
  auto data = p.data();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    p.decode(flat, k);
    const int N = l1_norm(k);
    if (N == 0 || N > deg) continue;
    data[flat] = o.coeff(k) * cutoff(u * N);
  }
  FIPoly out(o.dim, 0);
  out.set_term(zero_exponent(o.dim), std::move(p));
  return out;
}

SmoothingSequence build_sequence(const SmoothableFunction& P, double u0, double delta, int J,
                                 const SequenceOptions& opts) {
  if (J < 1) throw KamError("build_sequence: J must be >= 1");
  SmoothingSequence seq;
  for (int j = 0; j <= J; ++j) {
    SmoothingLevel lv;
    lv.u = u0 * std::pow(delta, j);
    check_u(lv.u);
    if (P.poly || kept_degree(lv.u) <= opts.materialize_cap) lv.P = smooth_at(P, lv.u);
    seq.levels.push_back(std::move(lv));
  }
  for (int j = 0; j < J; ++j) {
    const double ua = seq.levels[j].u, ub = seq.levels[j + 1].u;
    if (P.poly) {
      seq.levels[j].increment_norm = fi_norm(*seq.levels[j + 1].P - *seq.levels[j].P, ub, ub);
    } else {
      seq.levels[j].increment_norm = oracle_increment(*P.oracle, ua, ub, ub);
    }
  }
  std::vector<double> x, y;
  for (int j = 0; j < J; ++j) {
    if (seq.levels[j].increment_norm > 0.0) {
      x.push_back(seq.levels[j].u);
      y.push_back(seq.levels[j].increment_norm);
    }
  }
  seq.fitted_exponent = x.size() >= 2 ? loglog_slope(x, y) : 0.0;
  const double u = seq.levels[0].u;
  seq.p0_norm = P.poly ? fi_norm(*seq.levels[0].P, u, u) : oracle_norm(*P.oracle, u, u);
  seq.p0_bound = opts.c_smooth * P.cl_norm;
  return seq;
}

SmoothingSequence build_sequence(const SmoothableFunction& P, const Schedule& sched, int J,
                                 const SequenceOptions& opts) {
  return build_sequence(P, std::min(sched.u0, 1.0), sched.delta, J, opts);
}

double c1_distance(const FIPoly& P, const FIPoly& Q, int grid) {
  const int n = P.dim();
  const FIPoly D = P - Q;
  std::vector<FIPoly> fns = {D};
  for (int i = 0; i < n; ++i) {
    FIPoly dth(n, D.ideg());
    for (const auto& [m, p] : D.terms()) dth.set_term(m, p.derivative(i));
    fns.push_back(dth);
    fns.push_back(action_derivative(D, i));
  }
  const RealVec pts = grid_points(n, grid);
  const std::size_t npts = pts.size() / n;
  const double levels[3] = {-0.5, 0.0, 0.5};
  double worst = 0.0;
  RealVec I(n);
  const int ncorner = static_cast<int>(std::pow(3, n));
  for (const auto& f : fns) {
    int deg = f.trig_degree();
    const ShiftedGridEvaluator ev(n, grid, deg, RealVec(pts.size(), 0.0));
    std::vector<std::pair<MultiIndex, RealVec>> vals;
    for (const auto& [m, p] : f.terms()) vals.emplace_back(m, ev.eval(p));
    for (int c = 0; c < ncorner; ++c) {
      int rem = c;
      for (int d = 0; d < n; ++d, rem /= 3) I[d] = levels[rem % 3];
      for (std::size_t g = 0; g < npts; ++g) {
        double v = 0.0;
        for (const auto& [m, vv] : vals) {
          double mono = 1.0;
          for (int d = 0; d < n; ++d) mono *= std::pow(I[d], m[d]);
          v += vv[g] * mono;
        }
        worst = std::max(worst, std::abs(v));
      }
    }
  }
  return worst;
}

void write_rate_csv(std::ostream& os, const SmoothingSequence& seq) {
  os << "j,u_j,increment_norm,fitted_exponent\n";
  os << std::setprecision(17);
  std::vector<double> x, y;
  for (std::size_t j = 0; j + 1 < seq.levels.size(); ++j) {
    const auto& lv = seq.levels[j];
    if (lv.increment_norm > 0.0) {
      x.push_back(lv.u);
      y.push_back(lv.increment_norm);
    }
    os << j << ',' << lv.u << ',' << lv.increment_norm << ',';
    if (x.size() >= 2)
      os << loglog_slope(x, y);
    else
      os << "nan";
    os << '\n';
  }
}

}  // namespace kamtori
