#pragma once

#include "qlnd/nls_baseline.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qlnd {

enum class Verdict { Pass, Fail, Inconclusive };

const char *to_string(Verdict v);

/// A failure inside verify(), tagged with the pipeline stage that raised it.
class StageFailure : public std::runtime_error {
public:
  StageFailure(std::string stage, const std::string &what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string &stage() const { return stage_; }

private:
  std::string stage_;
};

struct VerifyOptions {
  double radius = 0.0;       ///< 0 selects default_radius(ω)
  std::size_t nodes = 3001;
  int sectors = 3;           ///< K: sectors k = 0..K
  double tol_kernel = 0.0;   ///< 0 selects default_tol_kernel(h, ω)
  std::size_t eig_count = 8;
  double floor_frac = 1e-5;
  double tol_stable = 1e-4;
  double tol_edge = 0.05;
  int radius_doublings = 2;  ///< extra R -> 2R probes when a drifting eigenvalue sits below the edge
  double gap_drift = 0.10;   ///< allowed relative change of μ₂ - μ₁ under h -> h/2
  bool run_baseline = true;
  SolverOptions solver;
};

struct SignCount {
  int changes = 0;
  bool degenerate = false; ///< v vanishes identically
};

/// Strict sign alternations among nodes with |v| > floor_frac·max|v|.
SignCount sign_changes(const GridFunction &v, double floor_frac);

struct FirstEigenpair {
  double mu1 = 0.0;
  double gap = 0.0;        ///< next eigenvalue over all sectors minus μ₁
  int sector_k = 0;        ///< sector holding μ₁
  bool sign_constant = false;
  bool simple = false;     ///< gap > 0 and μ₁ sits in a multiplicity-one sector
  bool has_well = false;   ///< μ₁ < 0; false means the configuration is invalid for L₊
};

/// Needs at least sectors k = 0..2 (empty sectors are skipped).
FirstEigenpair first_eigenpair_check(std::span<const SpectrumSlice> slices, double floor_frac = 1e-5);

struct SectorSummary {
  SectorIndex sector;
  std::optional<KernelVerdict> kernel;     ///< absent for empty sectors
  std::optional<ContinuumProbe> continuum; ///< absent for empty sectors
  std::optional<SpectrumSlice> fine;       ///< slice at h/2
  double continuum_radius = 0.0;           ///< base radius of the accepted continuum probe
};

struct NondegeneracyReport {
  Params params;
  double radius = 0.0;
  std::size_t nodes = 0;
  double h = 0.0;
  int sectors = 0;
  double tol_kernel = 0.0;
  std::size_t eig_count = 0;

  double amplitude = 0.0;
  double matching_radius = 0.0;
  double tail_rate = 0.0;
  double ode_residual_max = 0.0;

  IdentityResiduals identities;
  double lplus_form_value = 0.0;
  double lplus_form_residual = 0.0;
  std::optional<double> lplus_form_2d_residual;

  std::vector<SectorSummary> lplus;
  std::vector<SectorSummary> lminus;
  std::vector<int> kernel_lplus;
  std::vector<int> kernel_lminus;
  bool kernel_inconclusive = false;
  long kernel_total = 0;

  FirstEigenpair first;
  double gap_coarse = 0.0;
  double gap_change = 0.0;
  double corr_lplus_k1 = 0.0;
  double corr_lminus_k0 = 0.0;
  double shadow_overlap = 0.0;     ///< max |<v_i, v_1>| over the L₊,₀ slice
  int shadow_min_changes = 0;      ///< fewest sign changes among L₊,₀ eigenvectors after the first
  int zero_index = 0;              ///< 1-based position of 0 in the ordered L₊ spectrum, 0 if absent

  std::vector<bool> continuum_lplus;
  std::vector<bool> continuum_lminus;
  std::vector<double> continuum_radius_lplus;
  std::vector<double> continuum_radius_lminus;
  bool continuum_ok = false;

  std::optional<bool> baseline_ok;
  Verdict nd_verdict = Verdict::Inconclusive;

  std::optional<GroundState> ground_state;
};

/// Ground state at h, h/2 and on [0, 2R], sector spectra of L₊ and L₋ for k = 0..K,
/// kernel and continuum verdicts, and the three-valued nondegeneracy verdict.
/// Throws StageFailure.
NondegeneracyReport verify(const Params &params, const VerifyOptions &opts = {});

/// Decimal rounding to 15 significant digits; non-finite values pass through.
double round15(double x);

/// round15 as JSON; non-finite values become null.
nlohmann::ordered_json json_number(double x);
nlohmann::ordered_json params_to_json(const Params &params);
nlohmann::ordered_json report_to_json(const NondegeneracyReport &report);
nlohmann::ordered_json baseline_to_json(const AplusCheck &check);

} // namespace qlnd
