#include "qlnd/nls_baseline.hpp"

#include <cmath>
#include <stdexcept>

namespace qlnd {

void NLSParams::validate() const { as_params().validate(); }

double nls_closed_form(const NLSParams &params, double r) {
  const double q = params.q, w = params.omega;
  const double amp = std::pow((q + 1.0) * w / 2.0, 1.0 / (q - 1.0));
  return amp * std::pow(1.0 / std::cosh(std::sqrt(w) * (q - 1.0) * r / 2.0), 2.0 / (q - 1.0));
}

GroundState kwong_q(const NLSParams &params, const RadialGrid &grid, const SolverOptions &opts) {
  params.validate();
  if (grid.dim() != params.dim)
    throw std::invalid_argument("kwong_q: grid dimension does not match params");
  const Params pr = params.as_params();
  if (params.dim >= 2)
    return find_ground_state(pr, grid, opts);

  const double b = std::sqrt(params.omega) * (params.q - 1.0) / 2.0;
  std::vector<double> u(grid.nodes()), du(grid.nodes()), ddu(grid.nodes());
  for (std::size_t j = 0; j < grid.nodes(); ++j) {
    const double r = grid.r(j);
    u[j] = nls_closed_form(params, r);
    du[j] = -2.0 / (params.q - 1.0) * b * std::tanh(b * r) * u[j];
    ddu[j] = radial_curvature(pr, r, u[j], du[j]);
  }
  GroundState gs = GroundState::from_samples(pr, GridFunction(grid, std::move(u)),
                                             GridFunction(grid, std::move(du)),
                                             GridFunction(grid, std::move(ddu)));
  std::size_t m = grid.nodes() - 1;
  while (m > 16 && gs.u[m] < opts.tail_threshold * gs.amplitude)
    --m;
  gs.matching_index = m;
  gs.matching_radius = grid.r(m);
  gs.tail_rate = far_field_rate(gs);
  const GridFunction res = ode_residual(gs);
  for (std::size_t j = 1; j < m; ++j)
    gs.resid_max = std::max(gs.resid_max, std::abs(res[j]));
  return gs;
}

AplusCheck aplus_spectrum_check(double omega, double radius, std::size_t nodes, double tol, std::size_t m) {
  const NLSParams params{1, 3.0, omega};
  AplusCheck out;
  out.omega = omega;
  out.tolerance = tol;
  const GroundState gs = kwong_q(params, make_grid(1, radius, nodes));

  out.even = eig_lowest(assemble_aplus(gs, sector(1, 0)), m);
  out.odd = eig_lowest(assemble_aplus(gs, sector(1, 1)), m);
  out.mu1 = out.even.eigenvalues.front();
  out.mu2 = out.odd.eigenvalues.front();
  out.mode_correlation = weighted_correlation(out.odd.eigenvectors.front(), gs.du);

  auto form = [](const GroundState &s) {
    const SectorMatrix a = assemble_aplus(s, sector(1, 0));
    return a.form(a.restrict(s.u));
  };
  const double fine = form(gs);
  out.form_value = gs.grid.intervals() % 2 == 0 ? fine + (fine - form(gs.coarsened())) / 3.0 : fine;
  GridFunction pw(gs.grid);
  for (std::size_t j = 0; j < pw.size(); ++j)
    pw[j] = std::pow(gs.u[j], params.q + 1.0);
  out.form_expected = -(params.q - 1.0) * radial_integral(pw);

  const double scale = std::max(1.0, omega);
  out.pass = std::abs(out.mu1 + 3.0 * omega) < tol * scale && std::abs(out.mu2) < tol * scale;
  return out;
}

double weinstein(const GridFunction &f, const GridFunction &df, double q) {
  if (!(f.grid == df.grid))
    throw std::invalid_argument("weinstein: grid mismatch");
  const int n = f.grid.dim();
  GridFunction pw(f.grid);
  for (std::size_t j = 0; j < pw.size(); ++j)
    pw[j] = std::pow(std::abs(f[j]), q + 1.0);
  const double grad = radial_integral(df * df);
  const double mass = radial_integral(f * f);
  const double power = radial_integral(pw);
  if (!(mass > 0.0) || !(power > 0.0))
    throw std::invalid_argument("weinstein: zero input");
  return std::pow(grad, (q - 1.0) * n / 4.0) * std::pow(mass, (n + 2.0 - (n - 2.0) * q) / 4.0) / power;
}

} // namespace qlnd
