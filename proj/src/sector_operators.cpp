#include "qlnd/sector_operators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qlnd {

const char *to_string(OperatorKind kind) {
  switch (kind) {
  case OperatorKind::Lplus:
    return "Lplus";
  case OperatorKind::Lminus:
    return "Lminus";
  case OperatorKind::AplusNLS:
    return "AplusNLS";
  }
  return "?";
}

std::uint64_t harmonic_count(int dim, int k) {
  if (dim < 1)
    throw std::invalid_argument("harmonic_count: dimension must be >= 1");
  if (k < 0)
    return 0;
  // C(N+k-1, k), built so each partial product is an exact binomial.
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(dim - 1 + i);
    if (c > std::numeric_limits<std::uint64_t>::max() / num)
      throw std::overflow_error("harmonic_count: overflow");
    c = c * num / static_cast<std::uint64_t>(i);
  }
  return c;
}

SectorIndex sector(int dim, int k) {
  if (dim < 1)
    throw std::invalid_argument("sector: dimension must be >= 1");
  if (k < 0)
    throw std::invalid_argument("sector: negative harmonic degree");
  SectorIndex s;
  s.dim = dim;
  s.k = k;
  s.lambda = static_cast<double>(k) * (dim + k - 2);
  s.multiplicity = harmonic_count(dim, k) - harmonic_count(dim, k - 2);
  return s;
}

std::vector<double> SectorMatrix::restrict(const GridFunction &f) const {
  if (!(f.grid == grid))
    throw std::invalid_argument("sector matrix: grid mismatch");
  const std::size_t f0 = first();
  return std::vector<double>(f.values.begin() + static_cast<std::ptrdiff_t>(f0),
                             f.values.begin() + static_cast<std::ptrdiff_t>(f0 + order()));
}

GridFunction SectorMatrix::extend(std::span<const double> v) const {
  if (v.size() != order())
    throw std::invalid_argument("sector matrix: vector length mismatch");
  GridFunction f(grid);
  const std::size_t f0 = first();
  for (std::size_t i = 0; i < v.size(); ++i)
    f[f0 + i] = v[i];
  return f;
}

std::vector<double> SectorMatrix::apply(std::span<const double> v) const {
  const std::size_t n = order();
  if (v.size() != n)
    throw std::invalid_argument("sector matrix: vector length mismatch");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * v[i];
    if (i > 0)
      s += offdiag[i - 1] * v[i - 1];
    if (i + 1 < n)
      s += offdiag[i] * v[i + 1];
    out[i] = s;
  }
  return out;
}

double SectorMatrix::form(std::span<const double> v) const {
  const std::vector<double> av = apply(v);
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i)
    s += v[i] * av[i];
  return s;
}

GridFunction SectorMatrix::act(const GridFunction &f) const {
  std::vector<double> av = apply(restrict(f));
  for (std::size_t i = 0; i < av.size(); ++i)
    av[i] /= mass[i];
  return extend(av);
}

namespace {

// Coefficients of ∫[a(v')² + c((uv)')² + (b·λ/r² + V)v²] r^{N-1}dr with a, c constant,
// b and V nodal.
struct FormCoefficients {
  double stiffness = 1.0;
  double coupling = 0.0;
  const GridFunction *coupled = nullptr;
  std::vector<double> angular;
  std::vector<double> potential;
};

// Quadrature weight for ∫ v²/r² r^{N-1}dr at node j >= 1: (w(r+h/2) - w(r-h/2)) / ((N-1)r),
// which approximates ∫ r^{N-3} over the dual cell and makes the free k = 1 row exact on v = r.
double angular_weight(const RadialGrid &grid, std::size_t j) {
  const double r = grid.r(j);
  const double h = grid.h();
  if (grid.dim() == 1)
    return h / (r * r);
  return (grid.weight(r + 0.5 * h) - grid.weight(r - 0.5 * h)) / ((grid.dim() - 1) * r);
}

SectorMatrix assemble_form(OperatorKind kind, const RadialGrid &grid, const SectorIndex &sec,
                           const FormCoefficients &cf) {
  if (sec.dim != grid.dim())
    throw std::invalid_argument("sector assembly: sector dimension does not match the profile");
  if (sec.empty())
    throw std::invalid_argument("sector assembly: sector is empty in this dimension");

  SectorMatrix m{kind, sec, grid, {}, {}, {}};
  const std::size_t last = grid.nodes() - 1; // pinned to zero
  const std::size_t f0 = m.first();
  const std::size_t n = last - f0;
  m.diag.assign(n, 0.0);
  m.offdiag.assign(n > 0 ? n - 1 : 0, 0.0);
  m.mass.assign(n, 0.0);
  const double h = grid.h();

  auto unknown = [&](std::size_t j) { return j >= f0 && j < last; };

  for (std::size_t j = 0; j < last; ++j) {
    const double s = grid.weight(grid.r(j) + 0.5 * h) / h;
    double a = cf.stiffness * s, b = cf.stiffness * s, off = -cf.stiffness * s;
    if (cf.coupling != 0.0) {
      const double ul = (*cf.coupled)[j], ur = (*cf.coupled)[j + 1];
      const double c = cf.coupling * s;
      a += c * ul * ul;
      b += c * ur * ur;
      off -= c * ul * ur;
    }
    if (unknown(j))
      m.diag[j - f0] += a;
    if (unknown(j + 1))
      m.diag[j + 1 - f0] += b;
    if (unknown(j) && unknown(j + 1))
      m.offdiag[j - f0] += off;
  }

  for (std::size_t j = f0; j < last; ++j) {
    const double mj = grid.cell_mass(j);
    double v = mj * cf.potential[j];
    if (sec.lambda != 0.0 && j > 0)
      v += sec.lambda * cf.angular[j] * angular_weight(grid, j);
    m.diag[j - f0] += v;
    m.mass[j - f0] = mj;
  }
  return m;
}

void require_quasilinear(const GroundState &gs) {
  if (gs.params.model != Model::Quasilinear)
    throw std::invalid_argument("L± assembly needs a quasilinear ground state");
}

} // namespace

SectorMatrix assemble_lplus(const GroundState &gs, const SectorIndex &sec) {
  require_quasilinear(gs);
  const std::size_t n = gs.grid.nodes();
  FormCoefficients cf;
  cf.coupling = 2.0;
  cf.coupled = &gs.u;
  cf.angular.resize(n);
  cf.potential.resize(n);
  const double p = gs.params.p;
  for (std::size_t j = 0; j < n; ++j) {
    const double u = gs.u[j];
    cf.angular[j] = 1.0 + 2.0 * u * u;
    cf.potential[j] = gs.params.omega - gs.lap_u2[j] - p * std::pow(std::abs(u), p - 1.0);
  }
  return assemble_form(OperatorKind::Lplus, gs.grid, sec, cf);
}

SectorMatrix assemble_lminus(const GroundState &gs, const SectorIndex &sec) {
  require_quasilinear(gs);
  const std::size_t n = gs.grid.nodes();
  FormCoefficients cf;
  cf.angular.assign(n, 1.0);
  cf.potential.resize(n);
  const double p = gs.params.p;
  for (std::size_t j = 0; j < n; ++j)
    cf.potential[j] = gs.params.omega - gs.lap_u2[j] - std::pow(std::abs(gs.u[j]), p - 1.0);
  return assemble_form(OperatorKind::Lminus, gs.grid, sec, cf);
}

SectorMatrix assemble_aplus(const GroundState &q_profile, const SectorIndex &sec, std::optional<double> q) {
  const double qq = q.value_or(q_profile.params.p);
  const std::size_t n = q_profile.grid.nodes();
  FormCoefficients cf;
  cf.angular.assign(n, 1.0);
  cf.potential.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    cf.potential[j] = q_profile.params.omega - qq * std::pow(std::abs(q_profile.u[j]), qq - 1.0);
  return assemble_form(OperatorKind::AplusNLS, q_profile.grid, sec, cf);
}

SectorMatrix assemble(OperatorKind kind, const GroundState &gs, const SectorIndex &sec) {
  switch (kind) {
  case OperatorKind::Lplus:
    return assemble_lplus(gs, sec);
  case OperatorKind::Lminus:
    return assemble_lminus(gs, sec);
  case OperatorKind::AplusNLS:
    return assemble_aplus(gs, sec);
  }
  throw std::invalid_argument("assemble: unknown operator kind");
}

std::pair<GridFunction, GridFunction> apply_full_linearization(const GroundState &gs,
                                                               const SectorIndex &sec,
                                                               const GridFunction &re,
                                                               const GridFunction &im) {
  if (!(re.grid == gs.grid) || !(im.grid == gs.grid))
    throw std::invalid_argument("apply_full_linearization: grid mismatch");
  return {assemble_lplus(gs, sec).act(re), assemble_lminus(gs, sec).act(im)};
}

double weighted_dot(const GridFunction &f, const GridFunction &g) {
  if (!(f.grid == g.grid))
    throw std::invalid_argument("weighted_dot: grid mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j)
    s += f.grid.cell_mass(j) * f[j] * g[j];
  return s;
}

double weighted_norm(const GridFunction &f) { return std::sqrt(weighted_dot(f, f)); }

double weighted_correlation(const GridFunction &f, const GridFunction &g) {
  const double nf = weighted_norm(f), ng = weighted_norm(g);
  if (nf == 0.0 || ng == 0.0)
    return 0.0;
  return std::abs(weighted_dot(f, g)) / (nf * ng);
}

double lplus_form_of_profile(const GroundState &gs) {
  const SectorMatrix a = assemble_lplus(gs, sector(gs.grid.dim(), 0));
  return a.form(a.restrict(gs.u));
}

double lplus_form_closed(const GroundState &gs) {
  const double p = gs.params.p;
  const GridFunction ql = gs.u * gs.u * gs.du * gs.du;
  GridFunction pw(gs.grid);
  for (std::size_t j = 0; j < pw.size(); ++j)
    pw[j] = std::pow(std::abs(gs.u[j]), p + 1.0);
  return 8.0 * radial_integral(ql) - (p - 1.0) * radial_integral(pw);
}

double lplus_form_2d(const GroundState &gs) {
  const double p = gs.params.p;
  GridFunction pw(gs.grid);
  for (std::size_t j = 0; j < pw.size(); ++j)
    pw[j] = std::pow(std::abs(gs.u[j]), p + 1.0);
  return -2.0 * radial_integral(gs.du * gs.du) - (p - 1.0) * (p - 1.0) / (p + 1.0) * radial_integral(pw);
}

} // namespace qlnd
