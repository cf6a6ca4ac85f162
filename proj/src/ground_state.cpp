#include "qlnd/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace qlnd {

namespace {

double signed_power(double u, double p) { return std::copysign(std::pow(std::abs(u), p), u); }

struct Derivs {
  double du;
  double ddu;
};

Derivs rhs(const Params &params, double r, double u, double v) {
  return {v, radial_curvature(params, r, u, v)};
}

// Least-squares slope of -log(u r^{(N-1)/2}) over [first, last].
double fit_tail_rate(const GroundState &gs, std::size_t first, std::size_t last) {
  const double half = 0.5 * (gs.grid.dim() - 1);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = 0;
  for (std::size_t j = first; j <= last; ++j) {
    const double r = gs.grid.r(j);
    const double y = -(std::log(gs.u[j]) + half * std::log(r));
    sx += r;
    sy += y;
    sxx += r * r;
    sxy += r * y;
    n += 1;
  }
  const double den = n * sxx - sx * sx;
  return den > 0 ? (n * sxy - sx * sy) / den : 0.0;
}

} // namespace

double pmax(int dim) {
  if (dim < 1)
    throw std::invalid_argument("pmax: dimension must be >= 1");
  if (dim <= 2)
    return std::numeric_limits<double>::infinity();
  return (3.0 * dim + 2.0) / (dim - 2.0);
}

double semilinear_pmax(int dim) {
  if (dim < 1)
    throw std::invalid_argument("semilinear_pmax: dimension must be >= 1");
  if (dim <= 2)
    return std::numeric_limits<double>::infinity();
  return (dim + 2.0) / (dim - 2.0);
}

void Params::validate() const {
  if (dim < 1)
    throw std::invalid_argument("params: dimension must be >= 1");
  const double bound = model == Model::Quasilinear ? pmax(dim) : semilinear_pmax(dim);
  if (!(p > 1.0) || !(p < bound) || !std::isfinite(p)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "params: exponent p = %.17g outside (1, %.17g) for N = %d", p,
                  bound, dim);
    throw std::invalid_argument(buf);
  }
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw std::invalid_argument("params: omega must be positive");
}

double Params::rest_amplitude() const { return std::pow(omega, 1.0 / (p - 1.0)); }

const char *to_string(ShotTag tag) {
  switch (tag) {
  case ShotTag::Overshoot:
    return "overshoot";
  case ShotTag::Undershoot:
    return "undershoot";
  case ShotTag::Converged:
    return "converged";
  }
  return "?";
}

double radial_curvature(const Params &params, double r, double u, double du) {
  const double k = params.coupling();
  const double accel =
      (params.omega * u - signed_power(u, params.p) - 2.0 * k * u * du * du) / (1.0 + 2.0 * k * u * u);
  if (r == 0.0)
    return accel / params.dim;
  return accel - (params.dim - 1) * du / r;
}

Shot shoot_ivp(double amplitude, const Params &params, const RadialGrid &grid,
               const SolverOptions &opts) {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude))
    throw std::invalid_argument("shoot_ivp: amplitude must be positive");
  if (grid.dim() != params.dim)
    throw std::invalid_argument("shoot_ivp: grid dimension does not match params");

  const std::size_t n = grid.nodes();
  const double h = grid.h();
  const double threshold = opts.tail_threshold * amplitude;
  const double stag = opts.stagnation_eps * amplitude;
  std::vector<double> u(n, 0.0), v(n, 0.0);
  u[0] = amplitude;

  std::size_t stagnant = 0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double r = grid.r(j);
    const Derivs k1 = rhs(params, r, u[j], v[j]);
    const Derivs k2 = rhs(params, r + 0.5 * h, u[j] + 0.5 * h * k1.du, v[j] + 0.5 * h * k1.ddu);
    const Derivs k3 = rhs(params, r + 0.5 * h, u[j] + 0.5 * h * k2.du, v[j] + 0.5 * h * k2.ddu);
    const Derivs k4 = rhs(params, r + h, u[j] + h * k3.du, v[j] + h * k3.ddu);
    const double un = u[j] + h / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
    const double vn = v[j] + h / 6.0 * (k1.ddu + 2.0 * k2.ddu + 2.0 * k3.ddu + k4.ddu);
    if (!std::isfinite(un) || !std::isfinite(vn) || std::abs(un) > 1e8 * amplitude) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "shoot_ivp: integration blew up at r = %.6g (amplitude %.17g)",
                    grid.r(j + 1), amplitude);
      throw IntegrationFailure(buf);
    }
    u[j + 1] = un;
    v[j + 1] = vn;
    const double rn = grid.r(j + 1);

    auto finish = [&](ShotTag tag) {
      std::fill(u.begin() + static_cast<std::ptrdiff_t>(j) + 2, u.end(), 0.0);
      std::fill(v.begin() + static_cast<std::ptrdiff_t>(j) + 2, v.end(), 0.0);
      return Shot{{tag, rn}, j + 1, GridFunction(grid, std::move(u)), GridFunction(grid, std::move(v))};
    };

    if (un < 0.0)
      return finish(ShotTag::Overshoot);
    if (vn > 0.0)
      return finish(ShotTag::Undershoot);
    if (vn >= -stag && un > threshold) {
      if (++stagnant >= opts.stagnation_run)
        return finish(ShotTag::Undershoot);
    } else {
      stagnant = 0;
    }
  }
  const std::size_t last = n - 1;
  const bool decayed = u[last] < threshold && v[last] < 0.0;
  return Shot{{decayed ? ShotTag::Converged : ShotTag::Undershoot, grid.r(last)}, last,
              GridFunction(grid, std::move(u)), GridFunction(grid, std::move(v))};
}

GroundState GroundState::from_samples(const Params &params, GridFunction u, GridFunction du,
                                      GridFunction ddu) {
  const RadialGrid grid = u.grid;
  if (!(du.grid == grid) || !(ddu.grid == grid))
    throw std::invalid_argument("ground state: samples on different grids");
  const int dim = grid.dim();
  std::vector<double> lap(grid.nodes()), lap2(grid.nodes());
  for (std::size_t j = 0; j < grid.nodes(); ++j) {
    const double r = grid.r(j);
    lap[j] = j == 0 ? dim * ddu[0] : ddu[j] + (dim - 1) * du[j] / r;
    lap2[j] = 2.0 * u[j] * lap[j] + 2.0 * du[j] * du[j];
  }
  GroundState gs{params,
                 grid,
                 std::move(u),
                 std::move(du),
                 std::move(ddu),
                 GridFunction(grid, std::move(lap)),
                 GridFunction(grid, std::move(lap2))};
  gs.amplitude = gs.u[0];
  return gs;
}

GroundState GroundState::coarsened() const {
  GroundState gs = from_samples(params, u.coarsened(), du.coarsened(), ddu.coarsened());
  gs.tail_rate = tail_rate;
  gs.resid_max = resid_max;
  gs.matching_index = matching_index / 2;
  gs.matching_radius = gs.grid.r(gs.matching_index);
  return gs;
}

double far_field_rate(const GroundState &gs) {
  const std::size_t m = gs.matching_index;
  // From where u has dropped three decades down to the matching point.
  std::size_t first = m;
  while (first > 1 && gs.u[first - 1] < 1e-3 * gs.amplitude)
    --first;
  if (m - first < 8)
    first = 3 * m / 4;
  return fit_tail_rate(gs, std::max<std::size_t>(first, 1), m);
}

double default_radius(double omega) { return std::max(15.0, 20.0 / std::sqrt(omega)); }

GroundState find_ground_state(const Params &params, const RadialGrid &grid, const SolverOptions &opts) {
  params.validate();
  if (grid.dim() != params.dim)
    throw std::invalid_argument("find_ground_state: grid dimension does not match params");

  const double rest = params.rest_amplitude();
  double lo = rest;
  Shot lo_shot = shoot_ivp(lo, params, grid, opts);
  if (lo_shot.outcome.tag != ShotTag::Undershoot)
    throw SolverFailure("find_ground_state: rest amplitude did not undershoot");

  double hi = opts.bracket_start * rest;
  std::optional<Shot> hi_shot;
  for (int i = 0; i < opts.doubling_budget; ++i) {
    Shot s = shoot_ivp(hi, params, grid, opts);
    if (s.outcome.tag != ShotTag::Undershoot) {
      hi_shot = std::move(s);
      break;
    }
    lo = hi;
    lo_shot = std::move(s);
    hi *= 2.0;
  }
  if (!hi_shot)
    throw SolverFailure("find_ground_state: no overshoot found within the doubling budget");

  int iterations = 0;
  while (hi_shot->outcome.tag == ShotTag::Overshoot && hi - lo > opts.tol_a * hi) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi)
      break;
    if (++iterations > opts.max_bisections)
      throw SolverFailure("find_ground_state: bisection stagnated");
    Shot s = shoot_ivp(mid, params, grid, opts);
    if (s.outcome.tag == ShotTag::Undershoot) {
      lo = mid;
      lo_shot = std::move(s);
    } else {
      hi = mid;
      hi_shot = std::move(s);
    }
  }

  // The bracket ends agree up to the point where the shot sensitivity takes over.
  // A converged shot is used on its own.
  const bool converged = hi_shot->outcome.tag == ShotTag::Converged;
  const Shot &a = converged ? *hi_shot : lo_shot;
  const Shot &b = *hi_shot;
  const std::size_t n = grid.nodes();
  const double threshold = opts.tail_threshold * a.u[0];
  std::size_t m = 0;
  for (std::size_t j = 1; j < n; ++j) {
    if (j > a.reached || j > b.reached)
      break;
    const double ua = a.u[j], ub = b.u[j];
    if (ua <= threshold || ub <= threshold || a.du[j] >= 0.0 || b.du[j] >= 0.0)
      break;
    if (std::abs(ua - ub) > opts.agree_tol * ua)
      break;
    m = j;
  }
  if (m < 16)
    throw SolverFailure("find_ground_state: matching radius collapsed");

  const double rate = std::sqrt(params.omega);
  const double rm = grid.r(m);
  const double nu = 0.5 * (params.dim - 1);
  std::vector<double> u(n), du(n), ddu(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (j <= m) {
      u[j] = a.u[j];
      du[j] = a.du[j];
      ddu[j] = radial_curvature(params, grid.r(j), u[j], du[j]);
    } else {
      // u ~ r^{-(N-1)/2} e^{-√ω r}, the decaying solution of -Δu + ωu = 0 at large r.
      const double r = grid.r(j);
      const double slope = rate + nu / r;
      u[j] = a.u[m] * std::pow(rm / r, nu) * std::exp(-rate * (r - rm));
      du[j] = -slope * u[j];
      ddu[j] = (slope * slope + nu / (r * r)) * u[j];
    }
  }
  du[0] = 0.0;

  GroundState gs = GroundState::from_samples(params, GridFunction(grid, std::move(u)),
                                             GridFunction(grid, std::move(du)),
                                             GridFunction(grid, std::move(ddu)));
  gs.matching_index = m;
  gs.matching_radius = rm;

  gs.tail_rate = far_field_rate(gs);

  const GridFunction res = ode_residual(gs);
  double worst = 0.0;
  for (std::size_t j = 1; j < m; ++j)
    worst = std::max(worst, std::abs(res[j]));
  gs.resid_max = worst;
  // Gate relative to the size of the reaction terms at the peak.
  const double scale = params.omega * gs.amplitude + std::pow(gs.amplitude, params.p);
  if (!(worst < opts.resid_tol * scale)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "find_ground_state: residual %.3e above tolerance %.3e; increase the node count",
                  worst, opts.resid_tol * scale);
    throw SolverFailure(buf);
  }
  return gs;
}

GridFunction ode_residual(const GroundState &gs) {
  const RadialGrid &g = gs.grid;
  const std::size_t n = g.nodes();
  const double h = g.h();
  const Params &pr = gs.params;
  const double k = pr.coupling();
  const int dim = g.dim();
  std::vector<double> res(n, 0.0);
  auto eval = [&](double u, double lap, double du) {
    return -(1.0 + 2.0 * k * u * u) * lap - 2.0 * k * u * du * du + pr.omega * u - signed_power(u, pr.p);
  };
  const auto &u = gs.u.values;
  // r = 0 by even reflection u_{-1} = u_1
  res[0] = eval(u[0], dim * 2.0 * (u[1] - u[0]) / (h * h), 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double d1 = (u[j + 1] - u[j - 1]) / (2.0 * h);
    const double d2 = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h);
    res[j] = eval(u[j], d2 + (dim - 1) * d1 / g.r(j), d1);
  }
  const std::size_t l = n - 1;
  const double d1 = (3.0 * u[l] - 4.0 * u[l - 1] + u[l - 2]) / (2.0 * h);
  const double d2 = (2.0 * u[l] - 5.0 * u[l - 1] + 4.0 * u[l - 2] - u[l - 3]) / (h * h);
  res[l] = eval(u[l], d2 + (dim - 1) * d1 / g.r(l), d1);
  return GridFunction(g, std::move(res));
}

double radial_integral(const GridFunction &f) {
  return f.grid.intervals() % 2 == 0 ? quad_weighted_extrapolated(f) : quad_weighted(f);
}

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

namespace {

GridFunction pointwise(const GroundState &gs, double (*f)(const GroundState &, std::size_t)) {
  std::vector<double> v(gs.grid.nodes());
  for (std::size_t j = 0; j < v.size(); ++j)
    v[j] = f(gs, j);
  return GridFunction(gs.grid, std::move(v));
}

double grad_sq(const GroundState &gs, std::size_t j) { return gs.du[j] * gs.du[j]; }
double ql_density(const GroundState &gs, std::size_t j) {
  return gs.u[j] * gs.u[j] * gs.du[j] * gs.du[j];
}
double mass_density(const GroundState &gs, std::size_t j) { return gs.u[j] * gs.u[j]; }
double power_density(const GroundState &gs, std::size_t j) {
  return std::pow(std::abs(gs.u[j]), gs.params.p + 1.0);
}

} // namespace

EnergyTerms energy_terms(const GroundState &gs) {
  const Params &pr = gs.params;
  return {0.5 * radial_integral(pointwise(gs, grad_sq)),
          pr.coupling() * radial_integral(pointwise(gs, ql_density)),
          0.5 * pr.omega * radial_integral(pointwise(gs, mass_density)),
          -radial_integral(pointwise(gs, power_density)) / (pr.p + 1.0)};
}

double energy(const GroundState &gs) { return energy_terms(gs).total(); }

IdentityResiduals identity_residuals(const GroundState &gs) {
  const Params &pr = gs.params;
  const double grad = radial_integral(pointwise(gs, grad_sq));
  const double ql = radial_integral(pointwise(gs, ql_density));
  const double mass = radial_integral(pointwise(gs, mass_density));
  const double pw = radial_integral(pointwise(gs, power_density));

  IdentityResiduals out;
  out.virial = relative_gap(grad + 4.0 * pr.coupling() * ql + pr.omega * mass, pw);
  if (gs.grid.dim() == 2)
    out.pohozaev2d = relative_gap(pr.omega * mass, 2.0 / (pr.p + 1.0) * pw);
  return out;
}

void write_profile_csv(const GroundState &gs, std::ostream &out) {
  const GridFunction res = ode_residual(gs);
  out << "r,u,du,residual\n";
  char buf[128];
  for (std::size_t j = 0; j < gs.grid.nodes(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", gs.grid.r(j), gs.u[j], gs.du[j], res[j]);
    out << buf;
  }
}

} // namespace qlnd
