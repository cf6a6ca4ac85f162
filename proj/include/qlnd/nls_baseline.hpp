#pragma once

#include "qlnd/spectra.hpp"

namespace qlnd {

/// Semilinear profile parameters for -ΔQ + ωQ - Q^q = 0.
struct NLSParams {
  int dim = 1;
  double q = 3.0;
  double omega = 1.0;

  /// Throws unless 1 < q < (N+2)/(N-2) (any q > 1 for N <= 2) and ω > 0.
  void validate() const;
  Params as_params() const { return {dim, q, omega, Model::Semilinear}; }
};

/// Closed-form N = 1 profile ((q+1)ω/2)^{1/(q-1)} sech^{2/(q-1)}(√ω(q-1)r/2).
double nls_closed_form(const NLSParams &params, double r);

/// Positive radial NLS ground state: closed form for N = 1, shooting otherwise.
GroundState kwong_q(const NLSParams &params, const RadialGrid &grid, const SolverOptions &opts = {});

/// Pöschl-Teller check of A₊ for N = 1, q = 3: the even sector must bottom out at -3ω and
/// the odd sector at 0, with the odd mode proportional to Q'.
struct AplusCheck {
  double omega = 1.0;
  double mu1 = 0.0;               ///< lowest even-sector eigenvalue
  double mu2 = 0.0;               ///< lowest odd-sector eigenvalue
  double form_value = 0.0;        ///< <A₊Q,Q>, Richardson over (h, 2h)
  double form_expected = 0.0;     ///< -(q-1)∫Q^{q+1}
  double mode_correlation = 0.0;  ///< odd ground mode against Q'
  double tolerance = 1e-3;
  bool pass = false;
  SpectrumSlice even;
  SpectrumSlice odd;
};

AplusCheck aplus_spectrum_check(double omega = 1.0, double radius = 20.0, std::size_t nodes = 2001,
                                double tol = 1e-3, std::size_t m = 8);

/// ‖∇f‖₂^{(q-1)N/2} ‖f‖₂^{(N+2-(N-2)q)/2} / ‖f‖_{q+1}^{q+1} with radial norms.
double weinstein(const GridFunction &f, const GridFunction &df, double q);

} // namespace qlnd
