#pragma once

#include "qlnd/ground_state.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace qlnd {

enum class OperatorKind { Lplus, Lminus, AplusNLS };

const char *to_string(OperatorKind kind);

/// Spherical-harmonic sector of degree k in R^N. For N = 1 the sectors are the parity
/// classes: k = 0 even, k = 1 odd, higher k empty.
struct SectorIndex {
  int dim = 1;
  int k = 0;
  double lambda = 0.0;           ///< k(N+k-2)
  std::uint64_t multiplicity = 1; ///< M_k - M_{k-2}

  bool empty() const { return multiplicity == 0; }
  /// Unknowns start at node 1 (v(0) = 0) for odd parity and every k >= 1.
  bool dirichlet_at_origin() const { return k >= 1; }
};

/// M_k = (N+k-1)! / ((N-1)! k!), zero for k < 0.
std::uint64_t harmonic_count(int dim, int k);

SectorIndex sector(int dim, int k);

/// Symmetric tridiagonal A with diagonal mass B such that vᵀAv is the sector quadratic
/// form and B⁻¹Av approximates the operator. Unknowns are the nodes first()..M-1; the
/// value at r = R is pinned to zero, and so is the value at r = 0 when k >= 1.
struct SectorMatrix {
  OperatorKind kind;
  SectorIndex sector;
  RadialGrid grid;
  std::vector<double> diag;
  std::vector<double> offdiag;
  std::vector<double> mass;

  std::size_t order() const { return diag.size(); }
  std::size_t first() const { return sector.dirichlet_at_origin() ? 1 : 0; }

  /// Unknown vector from a grid function (boundary nodes dropped).
  std::vector<double> restrict(const GridFunction &f) const;
  /// Grid function from an unknown vector (boundary nodes zero).
  GridFunction extend(std::span<const double> v) const;

  std::vector<double> apply(std::span<const double> v) const;
  /// vᵀAv
  double form(std::span<const double> v) const;
  /// B⁻¹Av on the grid; the strong-form action of the operator.
  GridFunction act(const GridFunction &f) const;
};

/// L₊,ₖ from the form ∫[(v')² + 2((uv)')² + λ(1+2u²)v²/r² + (ω - Δu² - pu^{p-1})v²] r^{N-1}dr.
SectorMatrix assemble_lplus(const GroundState &gs, const SectorIndex &sec);

/// L₋,ₖ from the form ∫[(v')² + λv²/r² + (ω - Δu² - u^{p-1})v²] r^{N-1}dr.
SectorMatrix assemble_lminus(const GroundState &gs, const SectorIndex &sec);

/// A₊ = -Δ + ω - qQ^{q-1} restricted to a sector; q defaults to the profile's exponent.
SectorMatrix assemble_aplus(const GroundState &q_profile, const SectorIndex &sec,
                            std::optional<double> q = std::nullopt);

SectorMatrix assemble(OperatorKind kind, const GroundState &gs, const SectorIndex &sec);

/// (L₊,ₖ re, L₋,ₖ im): the real and imaginary parts of the second variation applied
/// to re + i·im in sector k.
std::pair<GridFunction, GridFunction> apply_full_linearization(const GroundState &gs,
                                                               const SectorIndex &sec,
                                                               const GridFunction &re,
                                                               const GridFunction &im);

/// Σ m_j f_j g_j with the control-volume masses of the grid.
double weighted_dot(const GridFunction &f, const GridFunction &g);
double weighted_norm(const GridFunction &f);
/// |<f,g>| / (‖f‖‖g‖) in the weighted inner product.
double weighted_correlation(const GridFunction &f, const GridFunction &g);

/// <L₊u,u> through the assembled radial matrix (k = 0).
double lplus_form_of_profile(const GroundState &gs);

/// 8∫u²u'² - (p-1)∫u^{p+1}, the closed form of <L₊u,u>.
double lplus_form_closed(const GroundState &gs);

/// -2∫u'² - (p-1)²/(p+1)∫u^{p+1}, the N = 2 value of <L₊u,u>.
double lplus_form_2d(const GroundState &gs);

} // namespace qlnd
