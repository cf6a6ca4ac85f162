// One line per acceptance criterion at its stated tolerance. Exit status 0 iff all pass.

#include "qlnd/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

using namespace qlnd;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void line(int id, bool ok, const std::string &title, const std::string &detail) {
  std::printf("criterion %d %s: %s | %s\n", id, ok ? "PASS" : "FAIL", title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok)
    ++failures;
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Run {
  NondegeneracyReport report;
  double seconds;
};

std::string slurp(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string label(const Params &p) { return fmt("(%d,%g,%g)", p.dim, p.p, p.omega); }

} // namespace

int main() {
  const std::vector<Params> identity_set{{1, 2.0, 1.0, Model::Quasilinear},
                                         {2, 2.0, 1.0, Model::Quasilinear},
                                         {2, 2.5, 1.0, Model::Quasilinear},
                                         {3, 2.5, 1.0, Model::Quasilinear}};
  std::vector<Params> kernel_set = identity_set;
  kernel_set.push_back({2, 4.0, 1.0, Model::Quasilinear});

  // 1. Pöschl-Teller baseline.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const AplusCheck c = aplus_spectrum_check(1.0, 20.0, 2001, 1e-3);
    const double t = seconds_since(t0);
    const bool ok = std::abs(c.mu1 + 3.0) < 1e-3 && std::abs(c.mu2) < 1e-3 && t < 5.0;
    line(1, ok, "A+ baseline N=1 q=3 w=1 R=20 h=0.01",
         fmt("mu1=%.9f mu2=%.3e tol=1e-3 time=%.2fs (<5s)", c.mu1, c.mu2, t));
  }

  // 2. Ground-state identities (timed on the solve itself).
  {
    bool ok = true;
    std::string detail;
    for (const Params &p : identity_set) {
      const auto t0 = std::chrono::steady_clock::now();
      const GroundState gs = find_ground_state(p, make_grid(p.dim, default_radius(p.omega), 3001));
      const IdentityResiduals r = identity_residuals(gs);
      const double t = seconds_since(t0);
      ok = ok && r.virial < 1e-6 && t < 30.0;
      detail += fmt("%s virial=%.2e", label(p).c_str(), r.virial);
      if (r.pohozaev2d) {
        ok = ok && *r.pohozaev2d < 1e-6;
        detail += fmt(" pohozaev=%.2e", *r.pohozaev2d);
      }
      detail += fmt(" t=%.2fs; ", t);
    }
    line(2, ok, "virial/Pohozaev residuals < 1e-6, < 30 s each", detail);
  }

  std::map<std::string, Run> runs;
  for (const Params &p : kernel_set) {
    const auto t0 = std::chrono::steady_clock::now();
    NondegeneracyReport r = verify(p);
    runs.emplace(label(p), Run{std::move(r), seconds_since(t0)});
  }

  // 3. <L+u,u> identities.
  {
    bool ok = true;
    std::string detail;
    for (const Params &p : identity_set) {
      const NondegeneracyReport &r = runs.at(label(p)).report;
      ok = ok && r.lplus_form_residual < 1e-6;
      detail += fmt("%s rel=%.2e", label(p).c_str(), r.lplus_form_residual);
      if (p.dim == 2) {
        ok = ok && *r.lplus_form_2d_residual < 1e-6 && r.lplus_form_value < 0.0;
        detail += fmt(" n2rel=%.2e value=%.6f", *r.lplus_form_2d_residual, r.lplus_form_value);
      }
      detail += "; ";
    }
    line(3, ok, "<L+u,u> closed forms within 1e-6, negative for N=2", detail);
  }

  // 4. Kernel structure and zero-mode correlations.
  {
    bool ok = true;
    std::string detail;
    for (const Params &p : kernel_set) {
      const NondegeneracyReport &r = runs.at(label(p)).report;
      const bool dims = r.kernel_lplus == std::vector<int>{0, 1, 0, 0} && r.kernel_lminus == std::vector<int>{1, 0, 0, 0};
      const bool corr = r.corr_lplus_k1 > 0.999 && r.corr_lminus_k0 > 0.999;
      ok = ok && dims && corr && !r.kernel_inconclusive;
      detail += fmt("%s L+=[%d %d %d %d] L-=[%d %d %d %d] corr=%.6f/%.6f; ", label(p).c_str(), r.kernel_lplus[0],
                    r.kernel_lplus[1], r.kernel_lplus[2], r.kernel_lplus[3], r.kernel_lminus[0], r.kernel_lminus[1],
                    r.kernel_lminus[2], r.kernel_lminus[3], r.corr_lplus_k1, r.corr_lminus_k0);
    }
    line(4, ok, "kernel dims L+ (0,1,0,0), L- (1,0,0,0), correlations > 0.999", detail);
  }

  // 5. First eigenpair.
  {
    bool ok = true;
    std::string detail;
    for (const Params &p : kernel_set) {
      const NondegeneracyReport &r = runs.at(label(p)).report;
      ok = ok && r.first.mu1 < 0.0 && r.first.gap > 0.0 && r.gap_change < 0.1 && r.first.sign_constant;
      detail += fmt("%s mu1=%.6f gap=%.6f change=%.1e sign_const=%d; ", label(p).c_str(), r.first.mu1, r.first.gap,
                    r.gap_change, r.first.sign_constant);
    }
    line(5, ok, "mu1 < 0, gap > 0 stable within 10% under h/2, no sign change at floor 1e-5", detail);
  }

  // 6. Continuum proxy at R -> 2R, no radius escalation.
  {
    bool ok = true;
    std::string detail;
    for (const Params &p : {identity_set[0], identity_set[1]}) {
      const GroundState gs = find_ground_state(p, make_grid(p.dim, default_radius(p.omega), 3001));
      for (int k : {0, 1}) {
        const ContinuumProbe c = continuum_probe(gs, OperatorKind::Lplus, k, 8, 1e-4, 0.05);
        double worst = 0.0;
        for (std::size_t i = 0; i < c.shifts.size(); ++i)
          if (c.classes[i] == SpectralClass::Discrete)
            worst = std::max(worst, std::abs(c.shifts[i]));
        const double edge = c.drifting.empty() ? INFINITY : *std::min_element(c.drifting.begin(), c.drifting.end());
        ok = ok && c.threshold_ok && worst < 1e-4 && edge >= p.omega - 0.05;
        detail += fmt("%s k=%d discrete=%zu max_shift=%.1e drift_min=%.4f; ", label(p).c_str(), k, c.stable.size(),
                      worst, edge);
      }
    }
    line(6, ok, "discrete shifts < 1e-4, drifting min >= w - 0.05 (L+ k=0,1)", detail);
  }

  // 7. Convergence order of the L+,1 zero mode.
  {
    const KernelVerdict &v = *runs.at("(2,2,1)").report.lplus[1].kernel;
    const double ratio = std::abs(v.coarse_nearest_zero) / std::abs(v.raw_nearest_zero);
    line(7, ratio >= 3.2 && ratio <= 4.8, "L+,1 near-zero eigenvalue shrinks by [3.2, 4.8] under h/2 for (2,2,1)",
         fmt("|mu(h)|=%.3e |mu(h/2)|=%.3e ratio=%.4f", std::abs(v.coarse_nearest_zero), std::abs(v.raw_nearest_zero),
             ratio));
  }

  // 8. Orthogonality and sign changes of higher L+,0 modes.
  {
    const NondegeneracyReport &r = runs.at("(2,2,1)").report;
    const SpectrumSlice &s = *r.lplus[0].fine;
    double overlap = 0.0;
    int min_changes = 1 << 30;
    for (std::size_t i = 1; i < s.eigenvectors.size(); ++i) {
      overlap = std::max(overlap, std::abs(weighted_dot(s.eigenvectors[i], s.eigenvectors[0])));
      min_changes = std::min(min_changes, sign_changes(s.eigenvectors[i], 1e-5).changes);
    }
    line(8, overlap <= 1e-8 && min_changes >= 1, "L+,0 eigenvectors after the first: orthogonal within 1e-8, >= 1 sign change",
         fmt("modes=%zu max|<v_i,v_1>|=%.2e min_sign_changes=%d", s.eigenvectors.size() - 1, overlap, min_changes));
  }

  // 9. Byte-identical artifacts from two verify runs.
  {
    const fs::path base = fs::temp_directory_path() / "qlnd_acceptance_determinism";
    fs::remove_all(base);
    int codes[2];
    for (int i = 0; i < 2; ++i) {
      RunConfig c = parse_config({"verify", "--dim", "2", "--p", "2", "--omega", "1"});
      c.out = base / std::to_string(i);
      codes[i] = run(c);
    }
    bool same = true;
    std::size_t files = 0;
    for (const auto &e : fs::directory_iterator(base / "0")) {
      ++files;
      const fs::path other = base / "1" / e.path().filename();
      same = same && fs::exists(other) && slurp(e.path()) == slurp(other);
    }
    std::size_t files_b = std::distance(fs::directory_iterator(base / "1"), fs::directory_iterator{});
    same = same && files == files_b && files > 0;
    line(9, same && codes[0] == 0 && codes[1] == 0, "verify --dim 2 --p 2 --omega 1 twice gives identical bytes",
         fmt("files=%zu identical=%d exit=%d/%d", files, same, codes[0], codes[1]));
  }

  std::printf("verify runtimes:");
  for (const auto &[k, r] : runs)
    std::printf(" %s %.2fs", k.c_str(), r.seconds);
  std::printf("\n%s: %d of 9 criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
