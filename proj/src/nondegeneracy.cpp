#include "qlnd/nondegeneracy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <future>
#include <limits>
#include <mutex>

namespace qlnd {

const char *to_string(Verdict v) {
  switch (v) {
  case Verdict::Pass:
    return "pass";
  case Verdict::Fail:
    return "fail";
  case Verdict::Inconclusive:
    return "inconclusive";
  }
  return "?";
}

SignCount sign_changes(const GridFunction &v, double floor_frac) {
  if (!(floor_frac > 0.0 && floor_frac <= 0.1))
    throw std::invalid_argument("sign_changes: floor_frac must lie in (0, 0.1]");
  double vmax = 0.0;
  for (double x : v.values)
    vmax = std::max(vmax, std::abs(x));
  SignCount out;
  if (vmax == 0.0) {
    out.degenerate = true;
    return out;
  }
  const double floor = floor_frac * vmax;
  int last = 0;
  for (double x : v.values) {
    if (std::abs(x) <= floor)
      continue;
    const int s = x > 0.0 ? 1 : -1;
    if (last != 0 && s != last)
      ++out.changes;
    last = s;
  }
  return out;
}

FirstEigenpair first_eigenpair_check(std::span<const SpectrumSlice> slices, double floor_frac) {
  int highest = -1;
  for (const auto &s : slices)
    highest = std::max(highest, s.sector.k);
  if (highest < 2)
    throw std::invalid_argument("first_eigenpair_check: needs sectors k = 0..2");

  const SpectrumSlice *home = nullptr;
  for (const auto &s : slices) {
    if (s.sector.empty() || s.eigenvalues.empty())
      continue;
    if (!home || s.eigenvalues.front() < home->eigenvalues.front())
      home = &s;
  }
  if (!home)
    throw std::invalid_argument("first_eigenpair_check: no eigenvalues");

  FirstEigenpair out;
  out.mu1 = home->eigenvalues.front();
  out.sector_k = home->sector.k;
  out.has_well = out.mu1 < 0.0;

  double next = std::numeric_limits<double>::infinity();
  for (const auto &s : slices) {
    if (s.sector.empty())
      continue;
    for (std::size_t i = (&s == home ? 1 : 0); i < s.eigenvalues.size(); ++i)
      next = std::min(next, s.eigenvalues[i]);
  }
  out.gap = next - out.mu1;

  const SignCount sc = sign_changes(home->eigenvectors.front(), floor_frac);
  out.sign_constant = !sc.degenerate && sc.changes == 0;
  out.simple = out.gap > 0.0 && home->sector.multiplicity == 1;
  return out;
}

double round15(double x) {
  if (!std::isfinite(x) || x == 0.0)
    return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.14e", x);
  return std::strtod(buf, nullptr);
}

namespace {

template <class F> auto staged(const char *stage, F &&f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageFailure &) {
    throw;
  } catch (const std::exception &e) {
    throw StageFailure(stage, e.what());
  }
}

long count_below(const std::vector<SectorSummary> &sectors, double x) {
  long count = 0;
  for (const auto &s : sectors)
    if (s.fine)
      for (double mu : s.fine->eigenvalues)
        if (mu < x)
          count += static_cast<long>(s.sector.multiplicity);
  return count;
}

} // namespace

NondegeneracyReport verify(const Params &params, const VerifyOptions &opts) {
  staged("config", [&] {
    params.validate();
    if (opts.sectors < 2)
      throw std::invalid_argument("verify: need at least sectors k = 0..2");
    if (opts.eig_count < 2)
      throw std::invalid_argument("verify: need at least two eigenpairs per sector");
    return 0;
  });

  NondegeneracyReport rep;
  rep.params = params;
  rep.radius = opts.radius > 0.0 ? opts.radius : default_radius(params.omega);
  rep.nodes = opts.nodes;
  rep.sectors = opts.sectors;
  rep.eig_count = opts.eig_count;

  const RadialGrid grid = staged("grid", [&] { return make_grid(params.dim, rep.radius, opts.nodes); });
  rep.h = grid.h();
  rep.tol_kernel = opts.tol_kernel > 0.0 ? opts.tol_kernel : default_tol_kernel(grid.h(), params.omega);

  const GroundState gs = staged("ground_state", [&] { return find_ground_state(params, grid, opts.solver); });
  const GroundState half =
      staged("ground_state_refined", [&] { return find_ground_state(params, grid.refined(), opts.solver); });
  // Same h on [0, 2^i R]; entries past the first doubling are solved on demand and
  // shared between sector workers.
  std::deque<GroundState> ladder{gs};
  std::mutex ladder_mutex;
  auto rung = [&](std::size_t i) -> const GroundState & {
    std::lock_guard<std::mutex> lock(ladder_mutex);
    while (ladder.size() <= i) {
      const RadialGrid &last = ladder.back().grid;
      ladder.push_back(staged("ground_state_wide", [&] {
        return find_ground_state(params, RadialGrid(params.dim, 2.0 * last.radius(), 2 * last.intervals() + 1),
                                 opts.solver);
      }));
    }
    return ladder[i];
  };
  rung(1);
  rep.amplitude = gs.amplitude;
  rep.matching_radius = gs.matching_radius;
  rep.tail_rate = gs.tail_rate;
  rep.ode_residual_max = gs.resid_max;

  staged("identities", [&] {
    rep.identities = identity_residuals(gs);
    // One Richardson step over the two profile solves removes the O(h²) assembly error.
    const double form = (4.0 * lplus_form_of_profile(half) - lplus_form_of_profile(gs)) / 3.0;
    rep.lplus_form_value = form;
    rep.lplus_form_residual = relative_gap(form, lplus_form_closed(half));
    if (params.dim == 2)
      rep.lplus_form_2d_residual = relative_gap(form, lplus_form_2d(half));
    return 0;
  });

  auto sector_pass = [&](OperatorKind kind, int k) {
    SectorSummary s{sector(params.dim, k), std::nullopt, std::nullopt, std::nullopt, rep.radius};
    if (s.sector.empty())
      return s;
    const SpectrumSlice coarse = eig_lowest(assemble(kind, gs, s.sector), opts.eig_count);
    SpectrumSlice fine = eig_lowest(assemble(kind, half, s.sector), opts.eig_count);
    s.kernel = kernel_verdict(coarse, fine, rep.tol_kernel);
    // A drifting eigenvalue below the edge is usually a weakly bound state that [0, R]
    // cannot hold yet; retry on doubled radii before reporting it.
    SpectrumSlice base = coarse;
    for (int i = 0;; ++i) {
      SpectrumSlice far = eig_lowest(assemble(kind, rung(i + 1), s.sector), opts.eig_count);
      s.continuum = continuum_probe(base, far, params.omega, opts.tol_stable, opts.tol_edge);
      s.continuum_radius = base.radius;
      if (s.continuum->threshold_ok || i >= opts.radius_doublings)
        break;
      base = std::move(far);
    }
    s.fine = std::move(fine);
    return s;
  };
  std::vector<std::future<SectorSummary>> jobs;
  for (OperatorKind kind : {OperatorKind::Lplus, OperatorKind::Lminus})
    for (int k = 0; k <= opts.sectors; ++k)
      jobs.push_back(std::async(std::launch::async, sector_pass, kind, k));
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const bool plus = i <= static_cast<std::size_t>(opts.sectors);
    SectorSummary s = staged(plus ? "spectra_lplus" : "spectra_lminus", [&] { return jobs[i].get(); });
    (plus ? rep.kernel_lplus : rep.kernel_lminus).push_back(s.kernel ? s.kernel->dimension : 0);
    (plus ? rep.continuum_lplus : rep.continuum_lminus).push_back(!s.continuum || s.continuum->threshold_ok);
    (plus ? rep.continuum_radius_lplus : rep.continuum_radius_lminus).push_back(s.continuum_radius);
    rep.kernel_inconclusive = rep.kernel_inconclusive || (s.kernel && s.kernel->inconclusive);
    (plus ? rep.lplus : rep.lminus).push_back(std::move(s));
  }
  rep.continuum_ok = std::all_of(rep.continuum_lplus.begin(), rep.continuum_lplus.end(), [](bool b) { return b; }) &&
                     std::all_of(rep.continuum_lminus.begin(), rep.continuum_lminus.end(), [](bool b) { return b; });

  for (std::size_t k = 0; k < rep.lplus.size(); ++k)
    rep.kernel_total += static_cast<long>(rep.lplus[k].sector.multiplicity) * rep.kernel_lplus[k];
  for (std::size_t k = 0; k < rep.lminus.size(); ++k)
    rep.kernel_total += static_cast<long>(rep.lminus[k].sector.multiplicity) * rep.kernel_lminus[k];

  staged("first_eigenpair", [&] {
    std::vector<SpectrumSlice> fine, coarse;
    for (const auto &s : rep.lplus) {
      if (s.fine) {
        fine.push_back(*s.fine);
        coarse.push_back(eig_lowest(assemble(OperatorKind::Lplus, gs, s.sector), opts.eig_count));
      } else {
        fine.push_back(SpectrumSlice{OperatorKind::Lplus, s.sector, {}, {}, half.grid.h(), rep.radius});
        coarse.push_back(SpectrumSlice{OperatorKind::Lplus, s.sector, {}, {}, grid.h(), rep.radius});
      }
    }
    rep.first = first_eigenpair_check(fine, opts.floor_frac);
    rep.gap_coarse = first_eigenpair_check(coarse, opts.floor_frac).gap;
    rep.gap_change = std::abs(rep.first.gap - rep.gap_coarse) / std::abs(rep.first.gap);
    return 0;
  });

  if (rep.lplus.size() > 1 && rep.lplus[1].kernel && rep.lplus[1].kernel->nearest_vector)
    rep.corr_lplus_k1 = weighted_correlation(*rep.lplus[1].kernel->nearest_vector, half.du);
  if (rep.lminus[0].kernel && rep.lminus[0].kernel->nearest_vector)
    rep.corr_lminus_k0 = weighted_correlation(*rep.lminus[0].kernel->nearest_vector, half.u);

  if (const auto &s0 = rep.lplus[0].fine) {
    rep.shadow_overlap = orthogonality_audit(*s0);
    rep.shadow_min_changes = std::numeric_limits<int>::max();
    for (std::size_t i = 1; i < s0->eigenvectors.size(); ++i)
      rep.shadow_min_changes =
          std::min(rep.shadow_min_changes, sign_changes(s0->eigenvectors[i], opts.floor_frac).changes);
  }

  // Position of 0 in the ordered L₊ spectrum: everything clearly below it, counted with
  // harmonic multiplicity, plus one.
  bool has_zero = false;
  for (const auto &s : rep.lplus)
    has_zero = has_zero || (s.kernel && s.kernel->dimension > 0);
  if (has_zero) {
    rep.zero_index = static_cast<int>(count_below(rep.lplus, -rep.tol_kernel) + 1);
  }

  if (opts.run_baseline) {
    rep.baseline_ok = staged("baseline", [&] { return aplus_spectrum_check().pass; });
  }

  bool dims_ok = true;
  for (std::size_t k = 0; k < rep.kernel_lplus.size(); ++k)
    dims_ok = dims_ok && rep.kernel_lplus[k] == ((k == 1 && !rep.lplus[k].sector.empty()) ? 1 : 0);
  for (std::size_t k = 0; k < rep.kernel_lminus.size(); ++k)
    dims_ok = dims_ok && rep.kernel_lminus[k] == (k == 0 ? 1 : 0);
  const bool perron = rep.first.has_well && rep.first.simple && rep.first.sign_constant;

  if (rep.kernel_inconclusive || (rep.baseline_ok && !*rep.baseline_ok) || rep.gap_change >= opts.gap_drift)
    rep.nd_verdict = Verdict::Inconclusive;
  else
    rep.nd_verdict = dims_ok && perron && rep.continuum_ok ? Verdict::Pass : Verdict::Fail;

  rep.ground_state = gs;
  return rep;
}

namespace {

using ojson = nlohmann::ordered_json;

} // namespace

ojson json_number(double x) {
  if (!std::isfinite(x))
    return nullptr;
  return round15(x);
}

namespace {

ojson num(double x) { return json_number(x); }

ojson opt_num(const std::optional<double> &x) { return x ? num(*x) : ojson(nullptr); }

} // namespace

ojson params_to_json(const Params &p) {
  ojson j;
  j["dim"] = p.dim;
  j["p"] = num(p.p);
  j["omega"] = num(p.omega);
  j["model"] = p.model == Model::Quasilinear ? "quasilinear" : "semilinear";
  return j;
}

namespace {

ojson verdict_json(Verdict v) {
  switch (v) {
  case Verdict::Pass:
    return true;
  case Verdict::Fail:
    return false;
  case Verdict::Inconclusive:
    break;
  }
  return "inconclusive";
}

ojson nearest_zero(const std::vector<SectorSummary> &sectors) {
  ojson arr = ojson::array();
  for (const auto &s : sectors)
    arr.push_back(s.kernel ? num(s.kernel->extrapolated) : ojson(nullptr));
  return arr;
}

} // namespace

ojson report_to_json(const NondegeneracyReport &r) {
  ojson j;
  j["kind"] = "nondegeneracy";
  j["params"] = params_to_json(r.params);
  j["grid"] = {{"radius", num(r.radius)},     {"nodes", r.nodes},           {"h", num(r.h)},
               {"sectors", r.sectors},        {"eig_count", r.eig_count},   {"tol_kernel", num(r.tol_kernel)}};
  j["ground_state"] = {{"amplitude", num(r.amplitude)},
                       {"matching_radius", num(r.matching_radius)},
                       {"tail_rate", num(r.tail_rate)},
                       {"ode_residual_max", num(r.ode_residual_max)}};
  j["residuals"] = {{"virial", num(r.identities.virial)},
                    {"pohozaev2d", opt_num(r.identities.pohozaev2d)},
                    {"lplus_form", num(r.lplus_form_residual)},
                    {"lplus_form_2d", opt_num(r.lplus_form_2d_residual)},
                    {"lplus_form_value", num(r.lplus_form_value)}};
  j["kernel_dims"] = {{"lplus", r.kernel_lplus}, {"lminus", r.kernel_lminus}};
  j["kernel_nearest_zero"] = {{"lplus", nearest_zero(r.lplus)}, {"lminus", nearest_zero(r.lminus)}};
  j["kernel_inconclusive"] = r.kernel_inconclusive;
  j["kernel_total"] = r.kernel_total;
  j["kernel_total_expected"] = r.params.dim + 1;
  j["mu1"] = num(r.first.mu1);
  j["mu1_sector"] = r.first.sector_k;
  j["gap"] = num(r.first.gap);
  j["gap_coarse"] = num(r.gap_coarse);
  j["gap_change"] = num(r.gap_change);
  j["sign_constant"] = r.first.sign_constant;
  j["simple"] = r.first.simple;
  j["correlations"] = {{"lplus_k1_du", num(r.corr_lplus_k1)}, {"lminus_k0_u", num(r.corr_lminus_k0)}};
  j["lplus_k0_shadow"] = {{"max_overlap", num(r.shadow_overlap)}, {"min_sign_changes", r.shadow_min_changes}};
  j["zero_index"] = r.zero_index;
  j["continuum"] = {{"lplus", r.continuum_lplus}, {"lminus", r.continuum_lminus}};
  ojson rl = ojson::array(), rm = ojson::array();
  for (double x : r.continuum_radius_lplus)
    rl.push_back(num(x));
  for (double x : r.continuum_radius_lminus)
    rm.push_back(num(x));
  j["continuum_radius"] = {{"lplus", rl}, {"lminus", rm}};
  j["continuum_ok"] = r.continuum_ok;
  j["baseline_ok"] = r.baseline_ok ? ojson(*r.baseline_ok) : ojson(nullptr);
  j["nd_verdict"] = verdict_json(r.nd_verdict);
  return j;
}

ojson baseline_to_json(const AplusCheck &c) {
  ojson j;
  j["kind"] = "nls_baseline";
  j["params"] = {{"dim", 1}, {"q", 3}, {"omega", num(c.omega)}};
  j["grid"] = {{"radius", num(c.even.radius)}, {"h", num(c.even.h)}};
  j["mu1"] = num(c.mu1);
  j["mu2"] = num(c.mu2);
  j["mu1_expected"] = num(-3.0 * c.omega);
  j["mu2_expected"] = 0;
  j["tolerance"] = num(c.tolerance);
  j["form_value"] = num(c.form_value);
  j["form_expected"] = num(c.form_expected);
  j["form_residual"] = num(relative_gap(c.form_value, c.form_expected));
  j["mode_correlation"] = num(c.mode_correlation);
  j["pass"] = c.pass;
  return j;
}

} // namespace qlnd
