#include "kamtori/trigpoly.hpp"

#include <algorithm>
#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "kamtori/errors.hpp"

namespace kamtori {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// In-place unnormalized m^dim DFT with sign -1 (forward) or +1 (backward).
// Every axis has the same length, so the axis order of the storage is irrelevant.
void fft_inplace(std::vector<cplx>& buf, int dim, int m, int sign) {
  static std::mutex planner;  // the FFTW planner is not thread safe
  std::vector<int> n(dim, m);
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner);
    plan = fftw_plan_dft(dim, n.data(), p, p, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner);
    fftw_destroy_plan(plan);
  }
}

std::size_t wrap(int k, int m) { return static_cast<std::size_t>(((k % m) + m) % m); }

std::string format_mode(std::span<const int> k) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
  os << ')';
  return os.str();
}

}  // namespace

int l1_norm(std::span<const int> k) {
  int s = 0;
  for (int v : k) s += std::abs(v);
  return s;
}

// ---- TrigPoly ---------------------------------------------------------------

TrigPoly::TrigPoly(int dim, int degree)
    : dim_(dim), degree_(degree), side_(2 * degree + 1) {
  if (dim < 1 || degree < 0) throw KamError("TrigPoly: need dim >= 1 and degree >= 0");
  c_.assign(ipow(side_, dim_), cplx{});
  center_ = 0;
  std::size_t stride = 1;
  for (int d = 0; d < dim_; ++d) {
    center_ += static_cast<std::size_t>(degree_) * stride;
    stride *= side_;
  }
}

TrigPoly TrigPoly::constant(int dim, double value) {
  TrigPoly p(dim, 0);
  p.c_[0] = value;
  return p;
}

TrigPoly TrigPoly::cosine(int dim, const MultiIndex& k, double amplitude) {
  TrigPoly p(dim, l1_norm(k));
  if (l1_norm(k) == 0) {
    p.c_[p.center_] = amplitude;
  } else {
    p.set_coeff(k, amplitude / 2.0);
  }
  return p;
}

TrigPoly TrigPoly::sine(int dim, const MultiIndex& k, double amplitude) {
  TrigPoly p(dim, l1_norm(k));
  if (l1_norm(k) != 0) p.set_coeff(k, cplx(0.0, -amplitude / 2.0));
  return p;
}

std::size_t TrigPoly::flat_index(std::span<const int> k) const {
  std::size_t idx = 0, stride = 1;
  for (int d = 0; d < dim_; ++d) {
    idx += static_cast<std::size_t>(k[d] + degree_) * stride;
    stride *= side_;
  }
  return idx;
}

void TrigPoly::decode(std::size_t flat, MultiIndex& k) const {
  for (int d = 0; d < dim_; ++d) {
    k[d] = static_cast<int>(flat % side_) - degree_;
    flat /= side_;
  }
}

cplx TrigPoly::coeff(std::span<const int> k) const {
  if (static_cast<int>(k.size()) != dim_ || l1_norm(k) > degree_) return {};
  return c_[flat_index(k)];
}

void TrigPoly::set_coeff(std::span<const int> k, cplx value) {
  if (static_cast<int>(k.size()) != dim_) throw KamError("TrigPoly::set_coeff: dimension mismatch");
  if (l1_norm(k) > degree_) throw DegreeOverflow("TrigPoly::set_coeff: mode outside degree");
  MultiIndex neg(k.begin(), k.end());
  for (int& v : neg) v = -v;
  if (l1_norm(k) == 0) {
    c_[center_] = value.real();
    return;
  }
  c_[flat_index(k)] = value;
  c_[flat_index(neg)] = std::conj(value);
}

void TrigPoly::add_coeff(std::span<const int> k, cplx value) {
  set_coeff(k, coeff(k) + value);
}

void TrigPoly::set_mean(double value) { c_[center_] = value; }

double TrigPoly::eval(std::span<const double> theta) const {
  double acc = 0.0;
  for_each([&](const MultiIndex& k, cplx c) {
    if (c == cplx{}) return;
    double phase = 0.0;
    for (int d = 0; d < dim_; ++d) phase += k[d] * theta[d];
    acc += c.real() * std::cos(phase) - c.imag() * std::sin(phase);
  });
  return acc;
}

TrigPoly TrigPoly::derivative(int axis) const {
  TrigPoly out = *this;
  MultiIndex k(dim_);
  for (std::size_t flat = 0; flat < c_.size(); ++flat) {
    decode(flat, k);
    out.c_[flat] = c_[flat] * cplx(0.0, static_cast<double>(k[axis]));
  }
  return out;
}

TrigPoly TrigPoly::with_degree(int degree) const {
  TrigPoly out(dim_, degree);
  for_each([&](const MultiIndex& k, cplx c) {
    if (l1_norm(k) <= degree) out.c_[out.flat_index(k)] = c;
  });
  return out;
}

bool TrigPoly::is_zero() const {
  return std::all_of(c_.begin(), c_.end(), [](cplx c) { return c == cplx{}; });
}

double TrigPoly::l1_coeff_sum() const {
  double s = 0.0;
  for (cplx c : c_) s += std::abs(c);
  return s;
}

double TrigPoly::reality_defect() const {
  double worst = std::abs(c_[center_].imag());
  MultiIndex k(dim_), neg(dim_);
  for (std::size_t flat = 0; flat < c_.size(); ++flat) {
    decode(flat, k);
    for (int d = 0; d < dim_; ++d) neg[d] = -k[d];
    worst = std::max(worst, std::abs(c_[flat] - std::conj(c_[flat_index(neg)])));
  }
  return worst;
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& other) {
  if (other.dim_ != dim_) throw KamError("TrigPoly: dimension mismatch");
  if (other.degree_ > degree_) *this = with_degree(other.degree_);
  other.for_each([&](const MultiIndex& k, cplx c) { c_[flat_index(k)] += c; });
  return *this;
}

TrigPoly& TrigPoly::operator-=(const TrigPoly& other) {
  if (other.dim_ != dim_) throw KamError("TrigPoly: dimension mismatch");
  if (other.degree_ > degree_) *this = with_degree(other.degree_);
  other.for_each([&](const MultiIndex& k, cplx c) { c_[flat_index(k)] -= c; });
  return *this;
}

TrigPoly& TrigPoly::operator*=(double s) {
  for (cplx& c : c_) c *= s;
  return *this;
}

TrigVec zero_vec(int n, int degree) { return TrigVec(n, TrigPoly(n, degree)); }

// ---- norms --------------------------------------------------------------------

double strip_norm(const TrigPoly& f, double s) {
  double acc = 0.0;
  f.for_each([&](const MultiIndex& k, cplx c) {
    if (c != cplx{}) acc += std::abs(c) * std::exp(l1_norm(k) * s);
  });
  return acc;
}

double strip_norm(const TrigVec& f, double s) {
  double m = 0.0;
  for (const auto& p : f) m = std::max(m, strip_norm(p, s));
  return m;
}

double strip_norm(const TrigMat& f, double s) {
  double m = 0.0;
  for (const auto& p : f.entries) m = std::max(m, strip_norm(p, s));
  return m;
}

// ---- grids ----------------------------------------------------------------

RealVec grid_points(int dim, int m) {
  const std::size_t total = ipow(m, dim);
  RealVec pts(total * dim);
  for (std::size_t g = 0; g < total; ++g) {
    std::size_t rem = g;
    for (int d = 0; d < dim; ++d) {
      pts[g * dim + d] = kTwoPi * static_cast<double>(rem % m) / m;
      rem /= m;
    }
  }
  return pts;
}

RealVec to_grid(const TrigPoly& f, int m) {
  const int dim = f.dim();
  const std::size_t total = ipow(m, dim);
  std::vector<cplx> t(total);
  MultiIndex k(dim);
  auto data = f.data();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    if (data[flat] == cplx{}) continue;
    f.decode(flat, k);
    std::size_t g = 0;
    for (int d = dim - 1; d >= 0; --d) g = g * m + wrap(k[d], m);
    t[g] += data[flat];  // modes beyond the grid alias onto it
  }
  fft_inplace(t, dim, m, +1);
  RealVec out(total);
  for (std::size_t i = 0; i < total; ++i) out[i] = t[i].real();
  return out;
}

Reexpansion from_grid(std::span<const double> values, int dim, int m, int degree) {
  const int kmax = (m - 1) / 2;
  const int rows = 2 * kmax + 1;
  std::vector<cplx> t(values.begin(), values.end());
  fft_inplace(t, dim, m, -1);
  const double scale = 1.0 / static_cast<double>(t.size());

  Reexpansion res{TrigPoly(dim, degree), 0.0};
  MultiIndex k(dim);
  std::size_t cells = 1;
  for (int d = 0; d < dim; ++d) cells *= rows;
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t rem = c, g = 0, stride = 1;
    for (int d = 0; d < dim; ++d) {
      k[d] = static_cast<int>(rem % rows) - kmax;
      rem /= rows;
      g += wrap(k[d], m) * stride;
      stride *= m;
    }
    const cplx v = t[g] * scale;
    if (l1_norm(k) <= degree) {
      res.poly.data()[res.poly.flat_index(k)] = v;
    } else {
      res.tail += std::abs(v);
    }
  }
  // enforce exact conjugate symmetry
  auto data = res.poly.data();
  MultiIndex neg(dim);
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    res.poly.decode(flat, k);
    for (int d = 0; d < dim; ++d) neg[d] = -k[d];
    const std::size_t other = res.poly.flat_index(neg);
    if (other < flat) continue;
    const cplx avg = 0.5 * (data[flat] + std::conj(data[other]));
    data[flat] = avg;
    data[other] = std::conj(avg);
  }
  return res;
}

int collocation_size(int degree) { return std::max(4, 4 * degree); }

PointEvaluator::PointEvaluator(int dim, int max_degree, std::span<const double> points)
    : dim_(dim), max_degree_(max_degree), npoints_(points.size() / dim) {
  const std::size_t stride = max_degree_ + 1;
  powers_.resize(npoints_ * dim_ * stride);
  for (std::size_t p = 0; p < npoints_; ++p) {
    for (int d = 0; d < dim_; ++d) {
      cplx* row = &powers_[(p * dim_ + d) * stride];
      const cplx step = std::polar(1.0, points[p * dim_ + d]);
      row[0] = 1.0;
      // direct polar every 16 steps bounds the recurrence drift
      for (int j = 1; j <= max_degree_; ++j)
        row[j] = (j % 16 == 0) ? std::polar(1.0, j * points[p * dim_ + d]) : row[j - 1] * step;
    }
  }
}

RealVec PointEvaluator::eval(const TrigPoly& f) const {
  if (f.degree() > max_degree_) throw DegreeOverflow("PointEvaluator: polynomial degree too high");
  struct Term {
    std::vector<int> k;
    cplx c;
  };
  std::vector<Term> half;
  double c0 = 0.0;
  f.for_each([&](const MultiIndex& k, cplx c) {
    if (c == cplx{}) return;
    int first = 0;
    for (int v : k) {
      if (v != 0) {
        first = v;
        break;
      }
    }
    if (first == 0) {
      c0 = c.real();
    } else if (first > 0) {
      half.push_back({k, c});
    }
  });
  const std::size_t stride = max_degree_ + 1;
  RealVec out(npoints_, c0);
  for (std::size_t p = 0; p < npoints_; ++p) {
    const cplx* base = &powers_[p * dim_ * stride];
    double acc = 0.0;
    for (const Term& t : half) {
      cplx prod = 1.0;
      for (int d = 0; d < dim_; ++d) {
        const int kd = t.k[d];
        if (kd == 0) continue;
        const cplx e = base[d * stride + std::abs(kd)];
        prod *= (kd > 0) ? e : std::conj(e);
      }
      acc += t.c.real() * prod.real() - t.c.imag() * prod.imag();
    }
    out[p] += 2.0 * acc;
  }
  return out;
}

ShiftedGridEvaluator::ShiftedGridEvaluator(int dim, int m, int max_degree,
                                           std::span<const double> shifts)
    : dim_(dim), m_(m), max_degree_(max_degree), npoints_(shifts.size() / dim) {
  if (npoints_ != ipow(m, dim)) throw ConfigError("ShiftedGridEvaluator: one shift per grid point");
  double emax = 0.0;
  for (double e : shifts) emax = std::max(emax, std::abs(e));
  const double t = emax * max_degree;
  constexpr int kMaxOrder = 16;
  double bound = t;  // t^(q+1) / (q+1)!
  while (bound > 1e-17 && order_ < kMaxOrder) {
    ++order_;
    bound *= t / (order_ + 1);
  }
  if (bound > 1e-17) {
    RealVec pts = grid_points(dim, m);
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] += shifts[i];
    direct_.emplace(dim, max_degree, pts);
    return;
  }
  const std::size_t stride = order_ + 1;
  scaled_.resize(npoints_ * dim_ * stride);
  for (std::size_t p = 0; p < npoints_; ++p)
    for (int d = 0; d < dim_; ++d) {
      double* row = &scaled_[(p * dim_ + d) * stride];
      row[0] = 1.0;
      for (int j = 1; j <= order_; ++j) row[j] = row[j - 1] * shifts[p * dim_ + d] / j;
    }
  // every alpha >= 0 with |alpha| <= order
  MultiIndex a(dim_, 0);
  for (;;) {
    alphas_.push_back(a);
    int d = 0;
    for (; d < dim_; ++d) {
      ++a[d];
      if (l1_norm(a) <= order_) break;
      a[d] = 0;
    }
    if (d == dim_) break;
  }
}

RealVec ShiftedGridEvaluator::eval(const TrigPoly& f) const {
  if (f.degree() > max_degree_)
    throw DegreeOverflow("ShiftedGridEvaluator: polynomial degree too high");
  if (direct_) return direct_->eval(f);
  const std::size_t stride = order_ + 1;
  RealVec out(npoints_, 0.0);
  MultiIndex k(dim_);
  for (const MultiIndex& a : alphas_) {
    TrigPoly g = f;
    auto data = g.data();
    for (std::size_t flat = 0; flat < data.size(); ++flat) {
      if (data[flat] == cplx{}) continue;
      g.decode(flat, k);
      cplx c = data[flat];
      for (int d = 0; d < dim_; ++d)
        for (int j = 0; j < a[d]; ++j) c *= cplx(0.0, k[d]);
      data[flat] = c;
    }
    const RealVec v = to_grid(g, m_);
    for (std::size_t p = 0; p < npoints_; ++p) {
      const double* row = &scaled_[p * dim_ * stride];
      double w = v[p];
      for (int d = 0; d < dim_; ++d) w *= row[d * stride + a[d]];
      out[p] += w;
    }
  }
  return out;
}

// ---- algebra ----------------------------------------------------------------

TrigPoly product(const TrigPoly& a, const TrigPoly& b, int out_degree, double* tail) {
  const int full = a.degree() + b.degree();
  const int m = 2 * full + 2;
  RealVec ga = to_grid(a, m), gb = to_grid(b, m);
  for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= gb[i];
  Reexpansion r = from_grid(ga, a.dim(), m, std::min(full, out_degree));
  if (tail) *tail = r.tail;
  return r.poly;
}

TrigPoly directional_derivative(const TrigPoly& f, std::span<const double> omega) {
  TrigPoly out(f.dim(), f.degree());
  auto src = f.data();
  auto dst = out.data();
  MultiIndex k(f.dim());
  for (std::size_t flat = 0; flat < src.size(); ++flat) {
    f.decode(flat, k);
    double kw = 0.0;
    for (int d = 0; d < f.dim(); ++d) kw += k[d] * omega[d];
    dst[flat] = src[flat] * cplx(0.0, kw);
  }
  return out;
}

TrigVec gradient(const TrigPoly& f) {
  TrigVec g;
  g.reserve(f.dim());
  for (int d = 0; d < f.dim(); ++d) g.push_back(f.derivative(d));
  return g;
}

// ---- small divisors -------------------------------------------------------

HomologicalSolution solve_homological(const TrigPoly& A, std::span<const double> omega, int K,
                                      const HomologicalOptions& opts) {
  const int deg = std::min(K, A.degree());
  double wscale = 0.0;
  for (double w : omega) wscale = std::max(wscale, std::abs(w));
  HomologicalSolution sol{TrigPoly(A.dim(), deg), {}};
  auto dst = sol.a.data();
  MultiIndex k(A.dim());
  for (std::size_t flat = 0; flat < dst.size(); ++flat) {
    sol.a.decode(flat, k);
    const int norm = l1_norm(k);
    if (norm == 0 || norm > deg) continue;
    double kw = 0.0;
    for (int d = 0; d < A.dim(); ++d) kw += k[d] * omega[d];
    if (std::abs(kw) <= 1e-14 * norm * wscale) {
      throw ExactResonance(k, "homological equation: exact resonance k.omega = 0 at k = " +
                                  format_mode(k));
    }
    if (opts.gamma > 0.0) {
      const double thr = opts.gamma * std::pow(static_cast<double>(norm), -opts.tau);
      const bool upper = [&] {
        for (int v : k)
          if (v != 0) return v > 0;
        return false;
      }();
      if (upper && std::abs(kw) < thr) sol.near_resonances.push_back({k, std::abs(kw), thr});
    }
    const cplx ak = A.coeff(k) / cplx(0.0, kw);
    dst[flat] = opts.flip_sign ? -ak : ak;
  }
  return sol;
}

// ---- composition ----------------------------------------------------------

double max_jacobian_norm(const TrigVec& E, int m) {
  const int n = static_cast<int>(E.size());
  std::vector<RealVec> jac;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) jac.push_back(to_grid(E[i].derivative(j), m));
  double worst = 0.0;
  for (std::size_t g = 0; g < jac[0].size(); ++g) {
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) row += std::abs(jac[i * n + j][g]);
      worst = std::max(worst, row);
    }
  }
  return worst;
}

namespace {

// E on the m-grid, interleaved per point
RealVec grid_shifts(const TrigVec& E, int m) {
  const int n = static_cast<int>(E.size());
  RealVec out(ipow(m, n) * n);
  for (int d = 0; d < n; ++d) {
    RealVec e = to_grid(E[d], m);
    for (std::size_t g = 0; g < e.size(); ++g) out[g * n + d] = e[g];
  }
  return out;
}

}  // namespace

CompositionResult compose_angle(std::span<const TrigPoly> fs, const TrigVec& E, int out_degree,
                                const CompositionOptions& opts) {
  if (fs.empty()) return {};
  const int n = static_cast<int>(E.size());
  int max_in = 0;
  for (const auto& f : fs) max_in = std::max(max_in, f.degree());
  int deg = std::min(out_degree, opts.max_degree);
  for (;;) {
    const int m = collocation_size(deg);
    if (opts.check_diffeomorphism) {
      const double jn = max_jacobian_norm(E, m);
      if (jn >= 1.0)
        throw NotADiffeomorphism("compose_angle: |d_theta E| = " + std::to_string(jn) +
                                 " >= 1, Id + E is not a certified diffeomorphism");
    }
    const ShiftedGridEvaluator ev(n, m, max_in, grid_shifts(E, m));
    CompositionResult res{{}, deg, 0.0};
    double worst_rel = 0.0;
    for (const auto& f : fs) {
      Reexpansion r = from_grid(ev.eval(f), n, m, deg);
      const double scale = std::max(strip_norm(f, 0.0), 1e-300);
      worst_rel = std::max(worst_rel, r.tail / scale);
      res.tail = std::max(res.tail, r.tail);
      res.values.push_back(std::move(r.poly));
    }
    if (worst_rel <= opts.tail_budget) return res;
    if (deg >= opts.max_degree)
      throw AliasingBudgetExceeded("compose_angle: tail " + std::to_string(worst_rel) +
                                   " of |f| exceeds budget at degree cap " +
                                   std::to_string(opts.max_degree));
    deg = std::min(2 * deg, opts.max_degree);
  }
}

TrigPoly compose_angle(const TrigPoly& f, const TrigVec& E, int out_degree,
                       const CompositionOptions& opts, double* tail) {
  CompositionResult r = compose_angle(std::span<const TrigPoly>(&f, 1), E, out_degree, opts);
  if (tail) *tail = r.tail;
  return std::move(r.values.front());
}

TrigVec invert_near_identity(const TrigVec& E, int out_degree, const InversionOptions& opts) {
  const int n = static_cast<int>(E.size());
  const int m = collocation_size(out_degree);
  const double jn = max_jacobian_norm(E, m);
  if (jn >= 1.0)
    throw NotADiffeomorphism("invert_near_identity: |d_theta E| = " + std::to_string(jn) + " >= 1");
  int max_in = 0;
  for (const auto& e : E) max_in = std::max(max_in, e.degree());

  const RealVec base = grid_points(n, m);
  const std::size_t npts = base.size() / n;
  RealVec y(base.size(), 0.0);  // current E' on the grid
  bool converged = false;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const ShiftedGridEvaluator ev(n, m, max_in, y);
    double inc = 0.0;
    for (int d = 0; d < n; ++d) {
      const RealVec e = ev.eval(E[d]);
      for (std::size_t g = 0; g < npts; ++g) {
        const double next = -e[g];
        inc = std::max(inc, std::abs(next - y[g * n + d]));
        y[g * n + d] = next;
      }
    }
    if (inc < opts.increment_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NoConvergence("invert_near_identity: fixed-point iteration did not settle");

  TrigVec inv;
  for (int d = 0; d < n; ++d) {
    RealVec comp(npts);
    for (std::size_t g = 0; g < npts; ++g) comp[g] = y[g * n + d];
    inv.push_back(from_grid(comp, n, m, out_degree).poly);
  }
  // (Id + E) o (Id + E') = Id, checked with the truncated E'
  const ShiftedGridEvaluator ev(n, m, max_in, grid_shifts(inv, m));
  double err = 0.0;
  for (int d = 0; d < n; ++d) {
    const RealVec e = ev.eval(E[d]);
    const RealVec ei = to_grid(inv[d], m);
    for (std::size_t g = 0; g < npts; ++g) err = std::max(err, std::abs(ei[g] + e[g]));
  }
  if (err > opts.identity_tol)
    throw NoConvergence("invert_near_identity: composition defect " + std::to_string(err) +
                        " above tolerance at degree " + std::to_string(out_degree));
  return inv;
}

}  // namespace kamtori
