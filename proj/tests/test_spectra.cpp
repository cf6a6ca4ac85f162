#include "qlnd/nondegeneracy.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace qlnd;

namespace {

const Params p221{2, 2.0, 1.0, Model::Quasilinear};

GroundState solve(const Params &p, std::size_t nodes = 3001, double radius = 0.0) {
  return find_ground_state(p, make_grid(p.dim, radius > 0 ? radius : default_radius(p.omega), nodes));
}

GroundState free_profile(int dim, double omega, double radius, std::size_t nodes) {
  const RadialGrid g = make_grid(dim, radius, nodes);
  return GroundState::from_samples({dim, 3.0, omega, Model::Semilinear}, GridFunction(g), GridFunction(g),
                                   GridFunction(g));
}

SpectrumSlice fake_slice(std::vector<double> mu, double h) {
  const RadialGrid g = make_grid(1, 1.0, 17);
  SpectrumSlice s{OperatorKind::Lplus, sector(1, 0), std::move(mu), {}, h, 1.0};
  s.eigenvectors.assign(s.eigenvalues.size(), GridFunction(g));
  return s;
}

} // namespace

TEST_CASE("tridiagonal eigenvalues of a diagonal matrix") {
  const std::vector<double> d{3.0, 1.0, 2.0}, e{0.0, 0.0};
  const TridiagonalEigen r = tridiagonal_lowest(d, e, 2);
  REQUIRE(r.values.size() == 2);
  CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.values[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(r.vectors[0][1]) == doctest::Approx(1.0));
  CHECK(sturm_count(d, e, 2.5) == 2);
  CHECK_THROWS_AS(tridiagonal_lowest(d, e, 4), std::invalid_argument);
  CHECK_THROWS_AS(tridiagonal_lowest(d, e, 0), std::invalid_argument);
}

TEST_CASE("free Dirichlet Laplacian on [0, pi] matches the finite-difference formula") {
  const std::size_t nodes = 201;
  const GroundState z = free_profile(1, 1.0, M_PI, nodes);
  const double h = z.grid.h();
  const SpectrumSlice s = eig_lowest(assemble_aplus(z, sector(1, 1)), 5);
  for (int j = 1; j <= 5; ++j) {
    const double exact = 1.0 + 2.0 / (h * h) * (1.0 - std::cos(j * h));
    CHECK(s.eigenvalues[j - 1] == doctest::Approx(exact).epsilon(1e-12));
    CHECK(std::abs(s.eigenvalues[j - 1] - 1.0 - j * j) < 1e-3 * j * j * j * j);
  }
}

TEST_CASE("slice invariants and orthogonality") {
  const GroundState gs = solve(p221);
  for (OperatorKind kind : {OperatorKind::Lplus, OperatorKind::Lminus})
    for (int k : {0, 1, 2, 3}) {
      const SpectrumSlice s = eig_lowest(assemble(kind, gs, sector(2, k)), 8);
      REQUIRE(s.eigenvalues.size() == 8);
      for (std::size_t i = 1; i < 8; ++i)
        CHECK(s.eigenvalues[i] > s.eigenvalues[i - 1]);
      for (const auto &v : s.eigenvectors)
        CHECK(std::abs(weighted_norm(v) - 1.0) < 1e-10);
      CHECK(orthogonality_audit(s) <= 1e-8);
    }
  const SpectrumSlice one = eig_lowest(assemble_lplus(gs, sector(2, 0)), 1);
  CHECK(orthogonality_audit(one) == 0.0);
}

TEST_CASE("L- ground mode is the profile") {
  const GroundState gs = solve(p221);
  const SpectrumSlice s = eig_lowest(assemble_lminus(gs, sector(2, 0)), 3);
  CHECK(std::abs(s.eigenvalues[0]) < 1e-4);
  CHECK(weighted_correlation(s.eigenvectors[0], gs.u) > 0.9999);
  CHECK(s.eigenvectors[0][0] > 0.0);
}

TEST_CASE("kernel dimensions per sector") {
  const GroundState gs = solve(p221);
  const double tol = default_tol_kernel(gs.grid.h(), 1.0);
  CHECK(tol == doctest::Approx(50.0 * gs.grid.h() * gs.grid.h()));

  const KernelVerdict plus1 = kernel_dimension(gs, OperatorKind::Lplus, 1, tol);
  CHECK(plus1.dimension == 1);
  CHECK_FALSE(plus1.inconclusive);
  REQUIRE(plus1.nearest_vector.has_value());
  const GroundState half = solve(p221, 6001);
  CHECK(weighted_correlation(*plus1.nearest_vector, half.du) > 0.999);
  CHECK(std::abs(plus1.extrapolated) < 1e-8);

  CHECK(kernel_dimension(gs, OperatorKind::Lplus, 0, tol).dimension == 0);
  CHECK(kernel_dimension(gs, OperatorKind::Lplus, 2, tol).dimension == 0);

  const KernelVerdict minus0 = kernel_dimension(gs, OperatorKind::Lminus, 0, tol);
  CHECK(minus0.dimension == 1);
  CHECK(weighted_correlation(*minus0.nearest_vector, half.u) > 0.999);
  CHECK(kernel_dimension(gs, OperatorKind::Lminus, 1, tol).dimension == 0);

  // The k=0 gap clears the tolerance by more than a factor of ten.
  const KernelVerdict plus0 = kernel_dimension(gs, OperatorKind::Lplus, 0, tol);
  for (double mu : plus0.extrapolated_all)
    CHECK(std::abs(mu) > 10.0 * tol);
}

TEST_CASE("kernel_verdict flags disagreement and rejects mismatched grids") {
  const SpectrumSlice coarse = fake_slice({-0.01, 0.02, 0.5}, 0.02);
  const SpectrumSlice fine = fake_slice({-0.03, 0.005, 0.5}, 0.01);
  const KernelVerdict v = kernel_verdict(coarse, fine, 1e-3);
  CHECK(v.inconclusive);

  const SpectrumSlice agree = fake_slice({-0.02, 0.001, 0.5}, 0.01);
  CHECK_FALSE(kernel_verdict(fake_slice({-0.02, 0.004, 0.5}, 0.02), agree, 1e-3).inconclusive);
  CHECK(kernel_verdict(fake_slice({-0.02, 0.004, 0.5}, 0.02), agree, 1e-3).dimension == 1);

  CHECK_THROWS_AS(kernel_verdict(coarse, fake_slice({-0.03, 0.005, 0.5}, 0.015), 1e-3), std::invalid_argument);
}

TEST_CASE("eigenvalue convergence is second order") {
  // Lowest L+ eigenvalue (k=0) and the lowest nonzero L- eigenvalue (k=1) at h, h/2, h/4.
  for (auto [kind, k] : {std::pair{OperatorKind::Lplus, 0}, std::pair{OperatorKind::Lminus, 1},
                         std::pair{OperatorKind::Lplus, 2}}) {
    double mu[3];
    std::size_t nodes = 1501;
    for (double &m : mu) {
      m = eig_lowest(assemble(kind, solve(p221, nodes), sector(2, k)), 1).eigenvalues[0];
      nodes = 2 * nodes - 1;
    }
    const double ratio = (mu[0] - mu[1]) / (mu[1] - mu[2]);
    CAPTURE(k);
    CHECK(ratio >= 3.2);
    CHECK(ratio <= 4.8);
  }
}

TEST_CASE("sector monotonicity of lowest eigenvalues and the Perron candidate") {
  for (const Params &p : {p221, Params{3, 2.5, 1.0, Model::Quasilinear}}) {
    const GroundState gs = solve(p);
    double plus_prev = -1e300, minus_prev = -1e300;
    std::vector<double> plus_low;
    for (int k = 0; k <= 3; ++k) {
      const SpectrumSlice sp = eig_lowest(assemble_lplus(gs, sector(p.dim, k)), 2);
      const SpectrumSlice sm = eig_lowest(assemble_lminus(gs, sector(p.dim, k)), 2);
      plus_low.push_back(sp.eigenvalues[0]);
      if (k >= 1) {
        CHECK(sp.eigenvalues[0] >= plus_prev);
      }
      CHECK(sm.eigenvalues[0] >= minus_prev);
      plus_prev = sp.eigenvalues[0];
      minus_prev = sm.eigenvalues[0];
    }
    CHECK(std::min_element(plus_low.begin(), plus_low.end()) == plus_low.begin());
    const SpectrumSlice s0 = eig_lowest(assemble_lplus(gs, sector(p.dim, 0)), 1);
    CHECK(sign_changes(s0.eigenvectors[0], 1e-5).changes == 0);
  }
}

TEST_CASE("continuum probe") {
  const GroundState gs = solve(p221);
  for (int k : {0, 1, 2, 3}) {
    const ContinuumProbe c = continuum_probe(gs, OperatorKind::Lplus, k);
    CAPTURE(k);
    CHECK(c.threshold_ok);
    for (std::size_t i = 0; i < c.eigenvalues.size(); ++i)
      if (c.eigenvalues[i] < 1.0 - 0.05) {
        CHECK(c.classes[i] == SpectralClass::Discrete);
      }
    CHECK(*std::min_element(c.drifting.begin(), c.drifting.end()) >= 0.95);
  }
  const ContinuumProbe m0 = continuum_probe(gs, OperatorKind::Lminus, 0);
  CHECK(m0.threshold_ok);
  CHECK(std::abs(m0.stable.front()) < 1e-4);

  const GroundState z = free_profile(2, 1.0, 20.0, 1001);
  const GroundState z2 = free_profile(2, 1.0, 40.0, 2001);
  const ContinuumProbe f = continuum_probe(eig_lowest(assemble_aplus(z, sector(2, 0)), 6),
                                           eig_lowest(assemble_aplus(z2, sector(2, 0)), 6), 1.0);
  for (double mu : f.stable)
    CHECK(mu >= 1.0);
  CHECK(f.threshold_ok);

  std::ostringstream os;
  write_spectrum_csv(m0, os);
  CHECK(os.str().rfind("index,eigenvalue,shift_under_R_doubling,classification\n1,", 0) == 0);
  CHECK(os.str().find("discrete") != std::string::npos);
  CHECK(os.str().find("continuum") != std::string::npos);
}

TEST_CASE("eig_lowest reports failures with context") {
  const GroundState z = free_profile(1, 1.0, 1.0, 17);
  SectorMatrix a = assemble_aplus(z, sector(1, 1));
  CHECK_THROWS_AS(eig_lowest(a, a.order() + 1), std::invalid_argument);
  a.diag[3] = std::nan("");
  try {
    eig_lowest(a, 2);
    FAIL("expected EigenFailure");
  } catch (const EigenFailure &e) {
    const std::string what = e.what();
    CHECK(what.find("k=1") != std::string::npos);
    CHECK(what.find("R=") != std::string::npos);
  }
}
