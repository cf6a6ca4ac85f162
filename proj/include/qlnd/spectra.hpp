#pragma once

#include "qlnd/sector_operators.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace qlnd {

/// Thrown when the tridiagonal eigensolver cannot deliver the requested pairs.
class EigenFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Eigenpairs of a symmetric tridiagonal matrix (diagonal d, off-diagonal e).
struct TridiagonalEigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors; ///< Euclidean-orthonormal
};

/// Lowest m eigenpairs by Sturm-sequence bisection and inverse iteration.
TridiagonalEigen tridiagonal_lowest(std::span<const double> d, std::span<const double> e, std::size_t m);

/// Number of eigenvalues strictly below x.
std::size_t sturm_count(std::span<const double> d, std::span<const double> e, double x);

/// Lowest eigenpairs of one sector operator.
struct SpectrumSlice {
  OperatorKind kind;
  SectorIndex sector;
  std::vector<double> eigenvalues;        ///< ascending
  std::vector<GridFunction> eigenvectors; ///< orthonormal in the weighted inner product
  double h = 0.0;
  double radius = 0.0;
};

/// Lowest m eigenpairs of A v = μ B v, folded to B^{-1/2} A B^{-1/2}.
SpectrumSlice eig_lowest(const SectorMatrix &matrix, std::size_t m);

/// Largest |<v_i, v_j>| over i != j.
double orthogonality_audit(const SpectrumSlice &slice);

struct KernelVerdict {
  OperatorKind kind;
  SectorIndex sector;
  double raw_nearest_zero = 0.0;    ///< eigenvalue closest to 0 on the finer grid
  double coarse_nearest_zero = 0.0; ///< same eigenvalue on the coarser grid
  double extrapolated = 0.0;        ///< Richardson value for that eigenvalue
  std::vector<double> extrapolated_all;
  std::size_t nearest_index = 0;
  int dimension = 0;
  bool inconclusive = false;
  std::optional<GridFunction> nearest_vector; ///< on the finer grid
};

/// Default kernel tolerance 50 h² max(ω, 1).
double default_tol_kernel(double h, double omega);

/// Kernel count from slices on grids h and h/2 sharing the same radius. Eigenvalues are
/// matched by index and extrapolated as (4μ(h/2) - μ(h))/3; disagreement between the two
/// grids about which eigenvalue sits nearest zero makes the verdict inconclusive.
KernelVerdict kernel_verdict(const SpectrumSlice &coarse, const SpectrumSlice &fine, double tol_kernel);

/// Solves the ground state again at h/2 and calls kernel_verdict.
KernelVerdict kernel_dimension(const GroundState &gs, OperatorKind kind, int k, double tol_kernel,
                               std::size_t m = 8, const SolverOptions &opts = {});

enum class SpectralClass { Discrete, Continuum };

const char *to_string(SpectralClass c);

struct ContinuumProbe {
  std::vector<double> eigenvalues; ///< on radius R
  std::vector<double> shifts;      ///< μ(R) - μ(2R), index-matched
  std::vector<SpectralClass> classes;
  std::vector<double> stable;
  std::vector<double> drifting;
  bool threshold_ok = true;
};

/// Index-matched comparison of a slice on [0, R] with one on [0, 2R] at the same h.
ContinuumProbe continuum_probe(const SpectrumSlice &base, const SpectrumSlice &doubled, double omega,
                               double tol_stable = 1e-4, double tol_edge = 0.05);

/// Solves on [0, 2R] with matched h and calls the slice-level probe.
ContinuumProbe continuum_probe(const GroundState &gs, OperatorKind kind, int k, std::size_t m = 8,
                               double tol_stable = 1e-4, double tol_edge = 0.05,
                               const SolverOptions &opts = {});

/// CSV `index,eigenvalue,shift_under_R_doubling,classification`.
void write_spectrum_csv(const ContinuumProbe &probe, std::ostream &out);

} // namespace qlnd
