#include "kamtori/diophantine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "kamtori/errors.hpp"

namespace kamtori {

namespace {

// Calls fn(k) for every k with 0 < |k|_1 <= K whose first nonzero entry is
// positive (one representative of each +-k pair).
template <class Fn>
void for_each_half_mode(int n, int K, Fn&& fn) {
  MultiIndex k(n, 0);
  auto rec = [&](auto&& self, int axis, int budget, bool leading) -> void {
    if (axis == n) {
      if (!leading) fn(static_cast<const MultiIndex&>(k));
      return;
    }
    const int lo = leading ? 0 : -budget;
    for (int v = lo; v <= budget; ++v) {
      k[axis] = v;
      self(self, axis + 1, budget - std::abs(v), leading && v == 0);
    }
    k[axis] = 0;
  };
  rec(rec, 0, K, true);
}

std::string format_mode(const MultiIndex& k) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
  os << ')';
  return os.str();
}

}  // namespace

DiophantineFrequency diophantine_margin(const RealVec& omega, double tau, int K) {
  if (K < 1) throw KamError("diophantine_margin: K must be >= 1");
  DiophantineFrequency d{omega, 0.0, tau, K, std::numeric_limits<double>::infinity(), {}};
  const int n = static_cast<int>(omega.size());
  if (n == 2 && omega[1] != 0.0) {
    // For fixed k0 the divisor |k0 w0 + k1 w1| grows linearly as k1 leaves the
    // root -k0 w0 / w1, and |k|^tau >= k0^tau, so each row is scanned outward
    // until that lower bound exceeds the running minimum.
    const double w0 = omega[0], w1 = omega[1];
    MultiIndex best(2);
    auto visit = [&](int k0, int k1) {
      const double v = std::abs(k0 * w0 + k1 * w1) * std::pow(k0 + std::abs(k1), tau);
      if (v < d.margin) {
        d.margin = v;
        best = {k0, k1};
      }
    };
    for (int k1 = 1; k1 <= K; ++k1) {
      if (std::abs(k1 * w1) * std::pow(k1, tau) >= d.margin) break;
      visit(0, k1);
    }
    for (int k0 = 1; k0 <= K; ++k0) {
      const int rem = K - k0;
      const double weight = std::pow(static_cast<double>(k0), tau);
      const double root = -k0 * w0 / w1;
      const long up = static_cast<long>(std::ceil(root));
      for (long k1 = std::max<long>(up, -rem); k1 <= rem; ++k1) {
        visit(k0, static_cast<int>(k1));
        if (std::abs(k0 * w0 + k1 * w1) * weight >= d.margin) break;
      }
      for (long k1 = std::min<long>(up - 1, rem); k1 >= -rem; --k1) {
        visit(k0, static_cast<int>(k1));
        if (std::abs(k0 * w0 + k1 * w1) * weight >= d.margin) break;
      }
    }
    d.worst_k = best;
    return d;
  }
  for_each_half_mode(n, K, [&](const MultiIndex& k) {
    double kw = 0.0;
    for (int i = 0; i < n; ++i) kw += k[i] * omega[i];
    const double v = std::abs(kw) * std::pow(l1_norm(k), tau);
    if (v < d.margin) {
      d.margin = v;
      d.worst_k = k;
    }
  });
  return d;
}

DiophantineFrequency certify(const RealVec& omega, double gamma, double tau, int K) {
  DiophantineFrequency d = diophantine_margin(omega, tau, K);
  d.gamma = gamma;
  if (!(d.margin >= gamma)) {
    std::ostringstream os;
    os << "Diophantine condition |k.omega| >= gamma |k|^-tau fails up to |k|_1 <= " << K
       << " at k = " << format_mode(d.worst_k) << " (margin " << d.margin << " < gamma "
       << gamma << ")";
    throw NotDiophantine(K, d.worst_k, d.margin, os.str());
  }
  return d;
}

RealVec golden_vector(int n, double scale) {
  if (n < 2) throw KamError("golden_vector: n must be >= 2");
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  RealVec w(n);
  double p = 1.0;
  for (int i = 0; i < n; ++i, p *= g) w[i] = scale * p;
  return w;
}

double FrequencyDomain::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

double measure_complement(const FrequencyDomain& dom, int K, int grid) {
  if (grid < 1) throw KamError("measure_complement: grid must be positive");
  const int n = static_cast<int>(dom.lo.size());
  if (dom.gamma <= 0.0) return 0.0;

  struct Mode {
    MultiIndex k;
    double t;  // gamma |k|^-tau
  };
  std::vector<Mode> modes;
  for_each_half_mode(n, K, [&](const MultiIndex& k) {
    modes.push_back({k, dom.gamma * std::pow(static_cast<double>(l1_norm(k)), -dom.tau)});
  });

  RealVec h(n);
  for (int d = 0; d < n; ++d) h[d] = (dom.hi[d] - dom.lo[d]) / grid;
  // Cell midpoints, nudged by an irrational fraction of a cell: exact midpoints
  // sit on the rational resonance lines through the origin for every gamma.
  RealVec offset(n);
  for (int d = 0; d < n; ++d) offset[d] = 0.5 + 0.1 * (std::sqrt(2.0) - 1.0) * (d + 1);
  auto mid = [&](int d, long i) { return dom.lo[d] + (i + offset[d]) * h[d]; };
  auto near_boundary = [&](int d, long i) {
    const double x = mid(d, i);
    return dom.boundary_margin && (x - dom.lo[d] < dom.gamma || dom.hi[d] - x < dom.gamma);
  };

  // Work is split over the last axis; each slab's count is independent.
  long slabs = grid;
  std::vector<long> failed(slabs, 0);
  auto work_slab = [&](long j) {
    if (n == 2) {
      std::vector<char> bad(grid, 0);
      const double w1 = mid(1, j);
      bool row_bad = near_boundary(1, j);
      for (long i = 0; i < grid && !row_bad; ++i) bad[i] = near_boundary(0, i);
      for (const Mode& md : modes) {
        if (row_bad) break;
        const int k0 = md.k[0], k1 = md.k[1];
        if (k0 == 0) {
          if (std::abs(k1 * w1) < md.t) row_bad = true;
          continue;
        }
        // k0 > 0: |k0 w0 + k1 w1| < t  <=>  w0 in (a, b)
        const double a = (-md.t - k1 * w1) / k0, b = (md.t - k1 * w1) / k0;
        const double xa = (a - dom.lo[0]) / h[0] - offset[0];
        const double xb = (b - dom.lo[0]) / h[0] - offset[0];
        long i0 = static_cast<long>(std::floor(xa)) + 1, i1 = static_cast<long>(std::ceil(xb)) - 1;
        i0 = std::max(i0, 0L);
        i1 = std::min(i1, static_cast<long>(grid) - 1);
        for (long i = i0; i <= i1; ++i) bad[i] = 1;
      }
      failed[j] = row_bad ? grid : std::count(bad.begin(), bad.end(), 1);
      return;
    }
    // generic dimension: brute force over the slab's points
    long per_slab = 1;
    for (int d = 0; d + 1 < n; ++d) per_slab *= grid;
    RealVec w(n);
    for (long p = 0; p < per_slab; ++p) {
      long rem = p;
      bool bad = near_boundary(n - 1, j);
      for (int d = 0; d + 1 < n; ++d) {
        const long i = rem % grid;
        rem /= grid;
        w[d] = mid(d, i);
        bad = bad || near_boundary(d, i);
      }
      w[n - 1] = mid(n - 1, j);
      for (std::size_t q = 0; q < modes.size() && !bad; ++q) {
        double kw = 0.0;
        for (int d = 0; d < n; ++d) kw += modes[q].k[d] * w[d];
        bad = std::abs(kw) < modes[q].t;
      }
      failed[j] += bad;
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const long nthreads = std::min<long>(hw, slabs);
  std::vector<std::thread> pool;
  for (long t = 0; t < nthreads; ++t)
    pool.emplace_back([&, t] {
      for (long j = t; j < slabs; j += nthreads) work_slab(j);
    });
  for (auto& th : pool) th.join();

  double total = 0.0;
  for (long c : failed) total += static_cast<double>(c);
  return dom.volume() * total / std::pow(static_cast<double>(grid), n);
}

void write_measure_csv(std::ostream& os, const std::vector<MeasureRow>& rows) {
  os << "gamma,tau,K,grid,measure_complement\n";
  os.precision(17);
  for (const auto& r : rows)
    os << r.gamma << ',' << r.tau << ',' << r.K << ',' << r.grid << ',' << r.measure_complement
       << '\n';
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace kamtori
