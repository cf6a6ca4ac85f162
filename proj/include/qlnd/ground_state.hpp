#pragma once

#include "qlnd/radial_grid.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace qlnd {

/// Which stationary equation a profile solves.
///  Quasilinear: -Δu - uΔ(u²) + ωu - |u|^{p-1}u = 0
///  Semilinear:  -Δu + ωu - |u|^{p-1}u = 0   (the NLS baseline)
enum class Model { Quasilinear, Semilinear };

/// Upper end of the admissible exponent range for the quasilinear equation:
/// (3N+2)/(N-2) for N >= 3, +infinity for N = 1, 2.
double pmax(int dim);

/// Sobolev-subcritical bound for the semilinear equation: (N+2)/(N-2), +infinity for N <= 2.
double semilinear_pmax(int dim);

struct Params {
  int dim = 1;
  double p = 2.0;
  double omega = 1.0;
  Model model = Model::Quasilinear;

  /// Throws std::invalid_argument unless N >= 1, 1 < p < p_max(N) and ω > 0.
  void validate() const;
  /// ω^{1/(p-1)}, the positive zero of ωu - u^p.
  double rest_amplitude() const;
  /// 1 for the quasilinear model, 0 for the semilinear one.
  double coupling() const { return model == Model::Quasilinear ? 1.0 : 0.0; }
};

struct SolverOptions {
  double bracket_start = 2.0;   ///< first overshoot candidate, in units of the rest amplitude
  int doubling_budget = 60;
  double tol_a = 1e-12;         ///< bisection width, relative to the amplitude
  int max_bisections = 400;
  double tail_threshold = 1e-7; ///< relative to the amplitude
  double agree_tol = 1e-3;      ///< bracket-end trajectories must agree to this relative level
  double stagnation_eps = 1e-10;
  std::size_t stagnation_run = 64;
  double resid_tol = 1e-2; ///< relative to ω·u(0) + u(0)^p
};

enum class ShotTag { Overshoot, Undershoot, Converged };

const char *to_string(ShotTag tag);

struct ShotOutcome {
  ShotTag tag;
  std::optional<double> turning_radius;
};

/// Result of one initial-value shot. Samples past `reached` are zero.
struct Shot {
  ShotOutcome outcome;
  std::size_t reached;
  GridFunction u;
  GridFunction du;
};

/// Thrown when an integration produces NaN or overflows.
class IntegrationFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the amplitude bracket or bisection cannot be completed.
class SolverFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Right-hand side u'' of the radial ODE at (r, u, u'); r = 0 uses the regular limit.
double radial_curvature(const Params &params, double r, double u, double du);

/// Fixed-step RK4 shot from u(0) = amplitude, u'(0) = 0 over the nodes of `grid`.
Shot shoot_ivp(double amplitude, const Params &params, const RadialGrid &grid,
               const SolverOptions &opts = {});

/// Positive, radial, decreasing profile with its derived coefficient fields.
struct GroundState {
  Params params;
  RadialGrid grid;
  GridFunction u;
  GridFunction du;
  GridFunction ddu;     ///< from the ODE, not from differencing u
  GridFunction lap_u;   ///< Δu = u'' + (N-1)u'/r
  GridFunction lap_u2;  ///< Δ(u²) = 2uΔu + 2u'²
  double amplitude = 0.0;
  double tail_rate = 0.0;
  double resid_max = 0.0;
  std::size_t matching_index = 0;
  double matching_radius = 0.0;

  /// Builds a state from samples, filling the Laplacian fields. Metadata is left for the caller.
  static GroundState from_samples(const Params &params, GridFunction u, GridFunction du,
                                  GridFunction ddu);

  /// The same state on every other node (metadata carried over).
  GroundState coarsened() const;
};

/// Default truncation radius max(15, 20/√ω).
double default_radius(double omega);

/// Shooting plus bisection on the amplitude, then an exponential tail graft past the
/// matching radius.
GroundState find_ground_state(const Params &params, const RadialGrid &grid,
                              const SolverOptions &opts = {});

/// Least-squares decay rate of r^{(N-1)/2}u between u = 1e-3·u(0) and the matching radius.
double far_field_rate(const GroundState &gs);

/// Finite-difference residual of the radial equation at every node.
GridFunction ode_residual(const GroundState &gs);

struct EnergyTerms {
  double gradient;    ///< ½∫u'²
  double quasilinear; ///< ∫u²u'² (0 for the semilinear model)
  double mass;        ///< (ω/2)∫u²
  double potential;   ///< -1/(p+1)∫|u|^{p+1}
  double total() const { return gradient + quasilinear + mass + potential; }
};

/// Radial energy terms, angular surface factor omitted.
EnergyTerms energy_terms(const GroundState &gs);
double energy(const GroundState &gs);

struct IdentityResiduals {
  double virial = 0.0;
  std::optional<double> pohozaev2d;
};

/// |LHS - RHS| / max(|LHS|, |RHS|) for the virial identity and, when N = 2, the
/// Pohozaev identity ω∫u² = 2/(p+1)∫u^{p+1}.
IdentityResiduals identity_residuals(const GroundState &gs);

/// Radial integral used by the identities: Richardson-extrapolated trapezoid when the
/// interval count is even, plain trapezoid otherwise.
double radial_integral(const GridFunction &f);

/// Relative residual |a - b| / max(|a|, |b|), defined as 0 when both vanish.
double relative_gap(double a, double b);

/// CSV `r,u,du,residual`, 17 significant digits.
void write_profile_csv(const GroundState &gs, std::ostream &out);

} // namespace qlnd
