#include "qlnd/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

namespace qlnd {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double off_at(std::span<const double> e, std::size_t i) { return i < e.size() ? e[i] : 0.0; }

// Gaussian elimination with partial pivoting for T - σI, kept for repeated solves.
class ShiftedTridiagonalLU {
public:
  ShiftedTridiagonalLU(std::span<const double> d, std::span<const double> e, double sigma, double tiny)
      : n_(d.size()), dd_(n_), u1_(n_, 0.0), u2_(n_, 0.0), mult_(n_, 0.0), swapped_(n_, 0), tiny_(tiny) {
    for (std::size_t i = 0; i < n_; ++i) {
      dd_[i] = d[i] - sigma;
      u1_[i] = off_at(e, i);
    }
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      const double sub = e[i];
      if (std::abs(dd_[i]) >= std::abs(sub)) {
        if (dd_[i] == 0.0)
          dd_[i] = tiny_;
        mult_[i] = sub / dd_[i];
        dd_[i + 1] -= mult_[i] * u1_[i];
      } else {
        swapped_[i] = 1;
        mult_[i] = dd_[i] / sub;
        const double next_d = dd_[i + 1];
        const double next_u = off_at(e, i + 1);
        const double old_u1 = u1_[i];
        dd_[i] = sub;
        u1_[i] = next_d;
        u2_[i] = next_u;
        dd_[i + 1] = old_u1 - mult_[i] * next_d;
        if (i + 2 < n_)
          u1_[i + 1] = -mult_[i] * next_u;
      }
    }
    if (dd_[n_ - 1] == 0.0)
      dd_[n_ - 1] = tiny_;
  }

  void solve(std::vector<double> &b) const {
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (swapped_[i])
        std::swap(b[i], b[i + 1]);
      b[i + 1] -= mult_[i] * b[i];
    }
    for (std::size_t k = n_; k-- > 0;) {
      double s = b[k];
      if (k + 1 < n_)
        s -= u1_[k] * b[k + 1];
      if (k + 2 < n_)
        s -= u2_[k] * b[k + 2];
      b[k] = s / dd_[k];
    }
  }

private:
  std::size_t n_;
  std::vector<double> dd_, u1_, u2_, mult_;
  std::vector<char> swapped_;
  double tiny_;
};

double dot(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

} // namespace

std::size_t sturm_count(std::span<const double> d, std::span<const double> e, double x) {
  double emax2 = 1.0;
  for (double v : e)
    emax2 = std::max(emax2, v * v);
  const double pivmin = std::numeric_limits<double>::min() / kEps * emax2;
  std::size_t count = 0;
  double q = d[0] - x;
  for (std::size_t i = 0;; ++i) {
    if (std::abs(q) < pivmin)
      q = -pivmin;
    if (q < 0.0)
      ++count;
    if (i + 1 == d.size())
      break;
    q = d[i + 1] - x - e[i] * e[i] / q;
  }
  return count;
}

TridiagonalEigen tridiagonal_lowest(std::span<const double> d, std::span<const double> e, std::size_t m) {
  const std::size_t n = d.size();
  if (m < 1 || m > n)
    throw std::invalid_argument("tridiagonal_lowest: need 1 <= m <= order");
  if (e.size() + 1 != n)
    throw std::invalid_argument("tridiagonal_lowest: off-diagonal length mismatch");

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double rad = std::abs(off_at(e, i)) + (i > 0 ? std::abs(e[i - 1]) : 0.0);
    lo = std::min(lo, d[i] - rad);
    hi = std::max(hi, d[i] + rad);
  }
  const double norm = std::max(std::abs(lo), std::abs(hi));
  lo -= kEps * norm + std::numeric_limits<double>::min();
  hi += kEps * norm + std::numeric_limits<double>::min();

  TridiagonalEigen out;
  out.values.resize(m);
  double floor = lo;
  for (std::size_t i = 0; i < m; ++i) {
    double a = floor, b = hi;
    for (int it = 0; it < 300; ++it) {
      const double mid = a + 0.5 * (b - a);
      if (mid <= a || mid >= b || b - a <= 2.0 * kEps * std::max(std::abs(a), std::abs(b)))
        break;
      if (sturm_count(d, e, mid) > i)
        b = mid;
      else
        a = mid;
    }
    out.values[i] = a + 0.5 * (b - a);
    floor = a;
  }

  const double tiny = kEps * std::max(norm, std::numeric_limits<double>::min());
  std::mt19937_64 rng(20150817);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  out.vectors.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const ShiftedTridiagonalLU lu(d, e, out.values[i], tiny);
    std::vector<double> x(n);
    for (double &v : x)
      v = 1.0 + 0.5 * dist(rng);
    for (int it = 0; it < 4; ++it) {
      lu.solve(x);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto &prev : out.vectors) {
          const double c = dot(prev, x);
          for (std::size_t j = 0; j < n; ++j)
            x[j] -= c * prev[j];
        }
      const double nrm = std::sqrt(dot(x, x));
      if (!std::isfinite(nrm) || nrm == 0.0) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "inverse iteration failed for eigenvalue %zu", i + 1);
        throw EigenFailure(buf);
      }
      for (double &v : x)
        v /= nrm;
    }
    out.vectors.push_back(std::move(x));
  }
  return out;
}

SpectrumSlice eig_lowest(const SectorMatrix &matrix, std::size_t m) {
  const std::size_t n = matrix.order();
  if (m < 1 || m > n)
    throw std::invalid_argument("eig_lowest: need 1 <= m <= matrix order");
  std::vector<double> d(n), e(n > 0 ? n - 1 : 0), isq(n);
  for (std::size_t i = 0; i < n; ++i) {
    isq[i] = 1.0 / std::sqrt(matrix.mass[i]);
    d[i] = matrix.diag[i] * isq[i] * isq[i];
  }
  for (std::size_t i = 0; i + 1 < n; ++i)
    e[i] = matrix.offdiag[i] * isq[i] * isq[i + 1];

  TridiagonalEigen te;
  try {
    te = tridiagonal_lowest(d, e, m);
  } catch (const EigenFailure &err) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s (operator %s, sector k=%d, h=%.6g, R=%.6g)", err.what(),
                  to_string(matrix.kind), matrix.sector.k, matrix.grid.h(), matrix.grid.radius());
    throw EigenFailure(buf);
  }

  SpectrumSlice s{matrix.kind, matrix.sector, te.values, {}, matrix.grid.h(), matrix.grid.radius()};
  s.eigenvectors.reserve(m);
  for (auto &y : te.vectors) {
    std::size_t big = 0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] *= isq[i];
      if (std::abs(y[i]) > std::abs(y[big]))
        big = i;
    }
    if (y[big] < 0.0)
      for (double &v : y)
        v = -v;
    s.eigenvectors.push_back(matrix.extend(y));
  }
  return s;
}

double orthogonality_audit(const SpectrumSlice &slice) {
  double worst = 0.0;
  for (std::size_t i = 0; i < slice.eigenvectors.size(); ++i)
    for (std::size_t j = i + 1; j < slice.eigenvectors.size(); ++j)
      worst = std::max(worst, std::abs(weighted_dot(slice.eigenvectors[i], slice.eigenvectors[j])));
  return worst;
}

double default_tol_kernel(double h, double omega) { return 50.0 * h * h * std::max(omega, 1.0); }

namespace {

std::size_t nearest_zero(const std::vector<double> &v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) < std::abs(v[best]))
      best = i;
  return best;
}

} // namespace

KernelVerdict kernel_verdict(const SpectrumSlice &coarse, const SpectrumSlice &fine, double tol_kernel) {
  if (coarse.kind != fine.kind || coarse.sector.k != fine.sector.k || coarse.sector.dim != fine.sector.dim)
    throw std::invalid_argument("kernel_verdict: slices belong to different operators");
  if (std::abs(coarse.radius - fine.radius) > 1e-12 * coarse.radius ||
      std::abs(coarse.h - 2.0 * fine.h) > 1e-9 * coarse.h)
    throw std::invalid_argument("kernel_verdict: need grids h and h/2 on the same radius");
  const std::size_t m = std::min(coarse.eigenvalues.size(), fine.eigenvalues.size());
  if (m == 0)
    throw std::invalid_argument("kernel_verdict: empty slice");

  KernelVerdict v;
  v.kind = fine.kind;
  v.sector = fine.sector;
  v.extrapolated_all.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    v.extrapolated_all[i] = (4.0 * fine.eigenvalues[i] - coarse.eigenvalues[i]) / 3.0;
    if (std::abs(v.extrapolated_all[i]) < tol_kernel)
      ++v.dimension;
  }
  const std::vector<double> fv(fine.eigenvalues.begin(), fine.eigenvalues.begin() + static_cast<std::ptrdiff_t>(m));
  const std::vector<double> cv(coarse.eigenvalues.begin(), coarse.eigenvalues.begin() + static_cast<std::ptrdiff_t>(m));
  const std::size_t fi = nearest_zero(fv);
  const std::size_t ci = nearest_zero(cv);
  v.inconclusive = fi != ci;
  v.nearest_index = fi;
  v.raw_nearest_zero = fv[fi];
  v.coarse_nearest_zero = cv[fi];
  v.extrapolated = v.extrapolated_all[fi];
  v.nearest_vector = fine.eigenvectors[fi];
  return v;
}

KernelVerdict kernel_dimension(const GroundState &gs, OperatorKind kind, int k, double tol_kernel,
                               std::size_t m, const SolverOptions &opts) {
  const SectorIndex sec = sector(gs.grid.dim(), k);
  const GroundState fine = find_ground_state(gs.params, gs.grid.refined(), opts);
  return kernel_verdict(eig_lowest(assemble(kind, gs, sec), m), eig_lowest(assemble(kind, fine, sec), m),
                        tol_kernel);
}

const char *to_string(SpectralClass c) { return c == SpectralClass::Discrete ? "discrete" : "continuum"; }

ContinuumProbe continuum_probe(const SpectrumSlice &base, const SpectrumSlice &doubled, double omega,
                               double tol_stable, double tol_edge) {
  if (std::abs(base.h - doubled.h) > 1e-9 * base.h)
    throw std::invalid_argument("continuum_probe: slices must share the mesh size");
  const std::size_t m = std::min(base.eigenvalues.size(), doubled.eigenvalues.size());
  ContinuumProbe out;
  for (std::size_t i = 0; i < m; ++i) {
    const double mu = base.eigenvalues[i];
    const double shift = mu - doubled.eigenvalues[i];
    const SpectralClass c = std::abs(shift) < tol_stable ? SpectralClass::Discrete : SpectralClass::Continuum;
    out.eigenvalues.push_back(mu);
    out.shifts.push_back(shift);
    out.classes.push_back(c);
    (c == SpectralClass::Discrete ? out.stable : out.drifting).push_back(mu);
  }
  if (!out.drifting.empty())
    out.threshold_ok = *std::min_element(out.drifting.begin(), out.drifting.end()) >= omega - tol_edge;
  return out;
}

ContinuumProbe continuum_probe(const GroundState &gs, OperatorKind kind, int k, std::size_t m,
                               double tol_stable, double tol_edge, const SolverOptions &opts) {
  const SectorIndex sec = sector(gs.grid.dim(), k);
  const RadialGrid wide(gs.grid.dim(), 2.0 * gs.grid.radius(), 2 * gs.grid.intervals() + 1);
  const GroundState far = find_ground_state(gs.params, wide, opts);
  return continuum_probe(eig_lowest(assemble(kind, gs, sec), m), eig_lowest(assemble(kind, far, sec), m),
                         gs.params.omega, tol_stable, tol_edge);
}

void write_spectrum_csv(const ContinuumProbe &probe, std::ostream &out) {
  out << "index,eigenvalue,shift_under_R_doubling,classification\n";
  char buf[128];
  for (std::size_t i = 0; i < probe.eigenvalues.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%s\n", i + 1, probe.eigenvalues[i], probe.shifts[i],
                  to_string(probe.classes[i]));
    out << buf;
  }
}

} // namespace qlnd
