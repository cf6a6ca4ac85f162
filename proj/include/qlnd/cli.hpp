#pragma once

#include "qlnd/nondegeneracy.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlnd {

enum class Mode { Solve, Verify, Sweep, Baseline };

const char *to_string(Mode m);

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised for --help; carries the usage text.
class HelpRequested : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Mode mode = Mode::Verify;
  int dim = 1;
  std::vector<double> p_values{2.0};
  double omega = 1.0;
  double radius = 0.0;            ///< filled with default_radius(ω) (20 for baseline)
  std::size_t nodes = 3001;       ///< 2001 for baseline
  int sectors = 3;
  double tol_kernel = 0.0;        ///< filled with 50 h² max(ω, 1)
  std::filesystem::path out = "out";
  unsigned jobs = 0;              ///< sweep workers, 0 = hardware concurrency
};

/// `start:step:stop` (inclusive), a comma list, or a single number.
std::vector<double> parse_p_values(const std::string &text);

/// args excludes the program name. `--config FILE` reads `key = value` lines
/// (# comments allowed); command-line flags win over the file.
RunConfig parse_config(const std::vector<std::string> &args);

/// Runs one mode and writes its artifacts. Returns 0 when every verdict passes,
/// 2 when any is inconclusive and 1 on failure.
int run(const RunConfig &config);

} // namespace qlnd
