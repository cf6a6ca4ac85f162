#include "qlnd/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

namespace qlnd {

const char *to_string(Mode m) {
  switch (m) {
  case Mode::Solve:
    return "solve";
  case Mode::Verify:
    return "verify";
  case Mode::Sweep:
    return "sweep";
  case Mode::Baseline:
    return "baseline";
  }
  return "?";
}

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T> T parse_number(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("invalid value for " + key + ": '" + text + "'");
  return value;
}

Mode parse_mode(const std::string &text) {
  static const std::map<std::string, Mode> modes{
      {"solve", Mode::Solve}, {"verify", Mode::Verify}, {"sweep", Mode::Sweep}, {"baseline", Mode::Baseline}};
  const auto it = modes.find(trim(text));
  if (it == modes.end())
    throw ConfigError("unknown mode '" + text + "'");
  return it->second;
}

// Canonical key names; the file accepts both tol_kernel and tol-kernel.
std::string canonical_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

const std::vector<std::string> &known_keys() {
  static const std::vector<std::string> keys{"mode",    "dim",        "p",   "omega", "radius",
                                             "nodes",   "sectors",    "tol-kernel", "out", "jobs"};
  return keys;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read config file " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    if (trim(line).empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = canonical_key(trim(line.substr(0, eq)));
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": unknown key '" + trim(line.substr(0, eq)) + "'");
    if (kv.count(key))
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

} // namespace

std::vector<double> parse_p_values(const std::string &text) {
  const std::string t = trim(text);
  std::vector<double> out;
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    for (std::string part; std::getline(ss, part, ':');)
      parts.push_back(part);
    if (parts.size() != 3)
      throw ConfigError("p range must be start:step:stop, got '" + text + "'");
    const double start = parse_number<double>("p", parts[0]);
    const double step = parse_number<double>("p", parts[1]);
    const double stop = parse_number<double>("p", parts[2]);
    if (!(step > 0.0) || stop < start)
      throw ConfigError("p range needs step > 0 and stop >= start, got '" + text + "'");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
      // Snap away accumulated binary noise so 1.5:0.1:2 lands on 1.7 exactly as typed.
      const double v = start + static_cast<double>(i) * step;
      out.push_back(std::round(v * 1e12) / 1e12);
    }
  } else if (t.find(',') != std::string::npos) {
    std::stringstream ss(t);
    for (std::string part; std::getline(ss, part, ',');)
      out.push_back(parse_number<double>("p", part));
  } else {
    out.push_back(parse_number<double>("p", t));
  }
  if (out.empty())
    throw ConfigError("empty p specification");
  return out;
}

RunConfig parse_config(const std::vector<std::string> &args) {
  CLI::App app{"Nondegeneracy checks for quasilinear Schrödinger ground states", "qlnd"};
  std::map<std::string, std::string> flags;
  std::string mode_text, config_path;
  app.add_option("mode", mode_text, "solve | verify | sweep | baseline");
  app.add_option("--config", config_path, "key = value file; flags override it");
  const std::vector<std::pair<std::string, std::string>> options{
      {"dim", "space dimension N"},
      {"p", "exponent: scalar, start:step:stop or comma list"},
      {"omega", "frequency ω > 0"},
      {"radius", "truncation radius R (default max(15, 20/sqrt(ω)))"},
      {"nodes", "grid nodes including r = 0 (default 3001)"},
      {"sectors", "highest harmonic sector K >= 2 (default 3)"},
      {"tol-kernel", "kernel tolerance (default 50 h^2 max(ω, 1))"},
      {"out", "output directory (default ./out)"},
      {"jobs", "sweep worker threads (default: hardware)"}};
  for (const auto &[key, help] : options)
    app.add_option("--" + key, flags[key], help);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError &e) {
    throw ConfigError(e.what());
  }

  std::map<std::string, std::string> kv;
  if (!config_path.empty())
    kv = read_config_file(config_path);
  if (!mode_text.empty())
    kv["mode"] = mode_text;
  for (const auto &[key, help] : options)
    if (app.count("--" + key) > 0)
      kv[key] = flags[key];

  if (!kv.count("mode"))
    throw ConfigError("missing mode (solve | verify | sweep | baseline)");
  RunConfig cfg;
  cfg.mode = parse_mode(kv["mode"]);

  if (cfg.mode == Mode::Baseline) {
    for (const char *key : {"dim", "p", "sectors", "tol-kernel"})
      if (kv.count(key))
        throw ConfigError(std::string("conflicting option for baseline mode: ") + key +
                          " (the baseline is fixed at N = 1, q = 3)");
    cfg.p_values = {3.0};
    cfg.nodes = 2001;
  }
  if (kv.count("dim"))
    cfg.dim = parse_number<int>("dim", kv["dim"]);
  if (kv.count("p"))
    cfg.p_values = parse_p_values(kv["p"]);
  if (kv.count("omega"))
    cfg.omega = parse_number<double>("omega", kv["omega"]);
  if (kv.count("radius"))
    cfg.radius = parse_number<double>("radius", kv["radius"]);
  if (kv.count("nodes"))
    cfg.nodes = parse_number<std::size_t>("nodes", kv["nodes"]);
  if (kv.count("sectors"))
    cfg.sectors = parse_number<int>("sectors", kv["sectors"]);
  if (kv.count("tol-kernel"))
    cfg.tol_kernel = parse_number<double>("tol-kernel", kv["tol-kernel"]);
  if (kv.count("out"))
    cfg.out = kv["out"];
  if (kv.count("jobs"))
    cfg.jobs = parse_number<unsigned>("jobs", kv["jobs"]);

  if (cfg.dim < 1)
    throw ConfigError("dim must be >= 1");
  if (!(cfg.omega > 0.0) || !std::isfinite(cfg.omega))
    throw ConfigError("omega must be > 0");
  if (kv.count("radius") && !(cfg.radius > 0.0))
    throw ConfigError("radius must be > 0");
  if (cfg.nodes < 17)
    throw ConfigError("nodes must be >= 17");
  if (cfg.sectors < 2)
    throw ConfigError("sectors must be >= 2");
  if (kv.count("tol-kernel") && !(cfg.tol_kernel > 0.0))
    throw ConfigError("tol-kernel must be > 0");
  if (cfg.mode != Mode::Sweep && cfg.p_values.size() != 1)
    throw ConfigError(std::string("conflicting options: mode ") + to_string(cfg.mode) +
                      " takes a single p; use sweep for ranges");
  if (cfg.mode != Mode::Baseline) {
    const double pm = pmax(cfg.dim);
    for (double p : cfg.p_values)
      if (!(p > 1.0 && p < pm)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "p = %g outside (1, p_max(%d) = %g)", p, cfg.dim, pm);
        throw ConfigError(buf);
      }
  }

  if (cfg.radius == 0.0)
    cfg.radius = cfg.mode == Mode::Baseline ? 20.0 : default_radius(cfg.omega);
  if (cfg.tol_kernel == 0.0)
    cfg.tol_kernel = default_tol_kernel(cfg.radius / static_cast<double>(cfg.nodes - 1), cfg.omega);
  return cfg;
}

namespace {

using ojson = nlohmann::ordered_json;

void write_file(const std::filesystem::path &path, const std::function<void(std::ostream &)> &body) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  body(out);
  if (!out)
    throw std::runtime_error("write failed for " + path.string());
}

void write_json(const std::filesystem::path &path, const ojson &j) {
  write_file(path, [&](std::ostream &o) { o << j.dump(2) << '\n'; });
}

void make_dir(const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

Params params_for(const RunConfig &cfg, double p) { return {cfg.dim, p, cfg.omega, Model::Quasilinear}; }

ojson failure_json(const char *kind, const Params &params, const std::string &stage, const std::string &what) {
  ojson j;
  j["kind"] = kind;
  j["params"] = params_to_json(params);
  j["stage"] = stage;
  j["error"] = what;
  j["nd_verdict"] = false;
  return j;
}

int run_solve(const RunConfig &cfg) {
  const Params params = params_for(cfg, cfg.p_values.front());
  make_dir(cfg.out);
  try {
    const GroundState gs = find_ground_state(params, make_grid(cfg.dim, cfg.radius, cfg.nodes));
    const IdentityResiduals ir = identity_residuals(gs);
    const EnergyTerms e = energy_terms(gs);
    ojson j;
    j["kind"] = "solve";
    j["params"] = params_to_json(params);
    j["grid"] = {{"radius", json_number(cfg.radius)}, {"nodes", cfg.nodes}, {"h", json_number(gs.grid.h())}};
    j["ground_state"] = {{"amplitude", json_number(gs.amplitude)},
                         {"matching_radius", json_number(gs.matching_radius)},
                         {"tail_rate", json_number(gs.tail_rate)},
                         {"ode_residual_max", json_number(gs.resid_max)}};
    j["residuals"] = {{"virial", json_number(ir.virial)},
                      {"pohozaev2d", ir.pohozaev2d ? json_number(*ir.pohozaev2d) : ojson(nullptr)}};
    j["energy"] = json_number(e.total());
    write_file(cfg.out / "profile.csv", [&](std::ostream &o) { write_profile_csv(gs, o); });
    write_json(cfg.out / "report.json", j);
    return 0;
  } catch (const std::exception &ex) {
    write_json(cfg.out / "report.json", failure_json("solve", params, "ground_state", ex.what()));
    return 1;
  }
}

struct ConfigOutcome {
  Params params;
  Verdict verdict = Verdict::Fail;
  std::optional<NondegeneracyReport> report;
  std::string stage;
};

ConfigOutcome verify_into(const RunConfig &cfg, double p, const std::filesystem::path &dir) {
  ConfigOutcome out;
  out.params = params_for(cfg, p);
  make_dir(dir);
  VerifyOptions opts;
  opts.radius = cfg.radius;
  opts.nodes = cfg.nodes;
  opts.sectors = cfg.sectors;
  opts.tol_kernel = cfg.tol_kernel;
  try {
    NondegeneracyReport rep = verify(out.params, opts);
    write_file(dir / "profile.csv", [&](std::ostream &o) { write_profile_csv(*rep.ground_state, o); });
    for (const auto &s : rep.lplus)
      if (s.continuum)
        write_file(dir / ("eigen_k" + std::to_string(s.sector.k) + ".csv"),
                   [&](std::ostream &o) { write_spectrum_csv(*s.continuum, o); });
    for (const auto &s : rep.lminus)
      if (s.continuum)
        write_file(dir / ("eigen_minus_k" + std::to_string(s.sector.k) + ".csv"),
                   [&](std::ostream &o) { write_spectrum_csv(*s.continuum, o); });
    write_json(dir / "report.json", report_to_json(rep));
    out.verdict = rep.nd_verdict;
    out.report = std::move(rep);
  } catch (const StageFailure &e) {
    out.stage = e.stage();
    write_json(dir / "report.json", failure_json("nondegeneracy", out.params, e.stage(), e.what()));
  }
  return out;
}

int exit_code(const std::vector<Verdict> &verdicts) {
  if (std::any_of(verdicts.begin(), verdicts.end(), [](Verdict v) { return v == Verdict::Fail; }))
    return 1;
  if (std::any_of(verdicts.begin(), verdicts.end(), [](Verdict v) { return v == Verdict::Inconclusive; }))
    return 2;
  return 0;
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

std::string join_dims(const std::vector<int> &dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i)
    s += (i ? " " : "") + std::to_string(dims[i]);
  return s;
}

int run_sweep(const RunConfig &cfg) {
  make_dir(cfg.out);
  const std::size_t n = cfg.p_values.size();
  std::vector<std::optional<ConfigOutcome>> results(n);
  std::vector<std::string> errors(n);
  auto dir_for = [&](std::size_t i) { return cfg.out / ("p_" + format_number(cfg.p_values[i])); };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        results[i] = verify_into(cfg, cfg.p_values[i], dir_for(i));
      } catch (const std::exception &e) {
        errors[i] = e.what();
      }
    }
  };
  unsigned jobs = cfg.jobs ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();

  std::vector<Verdict> verdicts;
  write_file(cfg.out / "summary.csv", [&](std::ostream &o) {
    o << "dim,p,omega,mu1,kernel_lplus,kernel_lminus,kernel_total,zero_index,nd_verdict,stage\n";
    for (std::size_t i = 0; i < n; ++i) {
      o << cfg.dim << ',' << format_number(cfg.p_values[i]) << ',' << format_number(cfg.omega) << ',';
      if (results[i] && results[i]->report) {
        const NondegeneracyReport &r = *results[i]->report;
        o << format_number(r.first.mu1) << ',' << join_dims(r.kernel_lplus) << ',' << join_dims(r.kernel_lminus)
          << ',' << r.kernel_total << ',' << r.zero_index << ',';
      } else {
        o << ",,,,,";
      }
      const Verdict v = results[i] ? results[i]->verdict : Verdict::Fail;
      verdicts.push_back(v);
      o << (v == Verdict::Pass ? "true" : v == Verdict::Fail ? "false" : "inconclusive") << ',';
      o << (results[i] ? results[i]->stage : std::string("io")) << '\n';
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    if (!errors[i].empty())
      std::fprintf(stderr, "qlnd: p = %s: %s\n", format_number(cfg.p_values[i]).c_str(), errors[i].c_str());
  return exit_code(verdicts);
}

int run_baseline(const RunConfig &cfg) {
  make_dir(cfg.out);
  const AplusCheck check = aplus_spectrum_check(cfg.omega, cfg.radius, cfg.nodes);
  const NLSParams nls{1, 3.0, cfg.omega};
  const GroundState q = kwong_q(nls, make_grid(1, cfg.radius, cfg.nodes));
  const GroundState far = kwong_q(nls, make_grid(1, 2.0 * cfg.radius, 2 * (cfg.nodes - 1) + 1));
  write_file(cfg.out / "profile.csv", [&](std::ostream &o) { write_profile_csv(q, o); });
  for (int k : {0, 1}) {
    const SectorIndex sec = sector(1, k);
    const ContinuumProbe probe = continuum_probe(eig_lowest(assemble_aplus(q, sec), 8),
                                                 eig_lowest(assemble_aplus(far, sec), 8), cfg.omega);
    write_file(cfg.out / ("eigen_k" + std::to_string(k) + ".csv"),
               [&](std::ostream &o) { write_spectrum_csv(probe, o); });
  }
  write_json(cfg.out / "report.json", baseline_to_json(check));
  return check.pass ? 0 : 1;
}

} // namespace

int run(const RunConfig &cfg) {
  switch (cfg.mode) {
  case Mode::Solve:
    return run_solve(cfg);
  case Mode::Verify:
    make_dir(cfg.out);
    return exit_code({verify_into(cfg, cfg.p_values.front(), cfg.out).verdict});
  case Mode::Sweep:
    return run_sweep(cfg);
  case Mode::Baseline:
    return run_baseline(cfg);
  }
  return 1;
}

} // namespace qlnd
