#pragma once

// Experiment description and its plain-text config format:
//
//   experiment = table1
//   seed = 3
//   [network]
//   snr_h_db = 5
//   [sweep]
//   p0 = 0.4, 0.6
//
// Unknown keys and sections are errors. Values given on the command line are
// applied after the file.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "censornet/network_model.hpp"

namespace censornet {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

inline constexpr std::array<std::string_view, 10> kExperimentIds{
    "table1", "table2", "table3", "table4", "table5",
    "fig_pm_vs_snrh", "fig_pm_vs_beta", "fig_pt_vs_snrh", "fig_pt_vs_beta", "custom"};

enum class ProblemKind { O, S, Mismatch };

inline std::string_view to_string(ProblemKind p) noexcept {
  switch (p) {
    case ProblemKind::O: return "O";
    case ProblemKind::S: return "S";
    case ProblemKind::Mismatch: return "mismatch";
  }
  return "?";
}

inline ProblemKind parse_problem(std::string_view s) {
  if (s == "O" || s == "o") return ProblemKind::O;
  if (s == "S" || s == "s") return ProblemKind::S;
  if (s == "mismatch") return ProblemKind::Mismatch;
  throw ConfigError("problem", "expected O, S or mismatch, got '" + std::string(s) + "'");
}

struct ExperimentSpec {
  std::string id = "custom";
  ProblemKind problem = ProblemKind::O;  // custom only

  // network
  int K = 5;
  double A = 1.0;
  double sigma_v2_dbm = -50.0;
  std::optional<double> snr_h_db, snr_c_db, rho;

  // sweep lists; empty means the experiment's own values
  std::vector<double> sweep_rho, sweep_p0, sweep_alpha, sweep_beta, sweep_snr_h_db, sweep_snr_c_db;

  std::string out_dir = "results";
  std::uint64_t seed = 1;
  std::size_t n_mc_pu = 20000;
  std::size_t n_mc_coarse = 2000;
  std::size_t n_mc_oracle = 1'000'000;
  int tau_grid = 201;
  int f_grid = 41;
  int workers = 0;  // 0: leave the process default

  void validate() const {
    if (std::find(kExperimentIds.begin(), kExperimentIds.end(), id) == kExperimentIds.end())
      throw ConfigError("experiment", "unknown experiment id '" + id + "'");
    if (K < 1 || K > 12) throw ConfigError("K", "sensor count must lie in [1, 12]");
    if (!std::isfinite(A)) throw ConfigError("A", "must be finite");
    auto rho_ok = [](double r) { return r >= 0.0 && r < 1.0; };
    if (rho && !rho_ok(*rho)) throw ConfigError("rho", "correlation must lie in [0, 1)");
    for (double r : sweep_rho)
      if (!rho_ok(r)) throw ConfigError("rho", "correlation must lie in [0, 1)");
    for (double p : sweep_p0)
      if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p0", "must lie in (0, 1]");
    for (double a : sweep_alpha)
      if (!(a > 0.0 && a < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
    for (double b : sweep_beta)
      if (!(b > 0.0 && b < 1.0)) throw ConfigError("beta", "must lie in (0, 1)");
    if (n_mc_pu < 100) throw ConfigError("n_mc_pu", "must be >= 100");
    if (n_mc_coarse < 100) throw ConfigError("n_mc_coarse", "must be >= 100");
    if (n_mc_oracle < 100) throw ConfigError("n_mc_oracle", "must be >= 100");
    if (tau_grid < 5) throw ConfigError("tau_grid", "must be >= 5");
    if (f_grid < 5) throw ConfigError("f_grid", "must be >= 5");
    if (workers < 0) throw ConfigError("workers", "must be >= 0");
    if (out_dir.empty()) throw ConfigError("out", "must not be empty");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& v, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ParseError(line, "'" + key + "' expects a number, got '" + v + "'");
  }
}

inline long long parse_int(const std::string& v, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return i;
  } catch (const std::exception&) {
    throw ParseError(line, "'" + key + "' expects an integer, got '" + v + "'");
  }
}

inline std::vector<double> parse_list(const std::string& v, int line, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ParseError(line, "'" + key + "' has an empty list entry");
    out.push_back(parse_double(item, line, key));
  }
  if (out.empty()) throw ParseError(line, "'" + key + "' needs at least one value");
  return out;
}

inline std::size_t parse_count(const std::string& v, int line, const std::string& key) {
  const long long i = parse_int(v, line, key);
  if (i < 0) throw ParseError(line, "'" + key + "' must be non-negative");
  return static_cast<std::size_t>(i);
}

}  // namespace detail

/// Applies one key. `section` is "", "network", "sweep" or "solver".
inline void apply_key(ExperimentSpec& s, const std::string& section, const std::string& key,
                      const std::string& v, int line = 0) {
  using namespace detail;
  if (section.empty()) {
    if (key == "experiment") s.id = v;
    else if (key == "problem") s.problem = parse_problem(v);
    else if (key == "seed") s.seed = static_cast<std::uint64_t>(parse_count(v, line, key));
    else if (key == "out") s.out_dir = v;
    else if (key == "workers") s.workers = static_cast<int>(parse_int(v, line, key));
    else throw ParseError(line, "unknown key '" + key + "'");
  } else if (section == "network") {
    if (key == "K") s.K = static_cast<int>(parse_int(v, line, key));
    else if (key == "A") s.A = parse_double(v, line, key);
    else if (key == "sigma_v2_dbm") s.sigma_v2_dbm = parse_double(v, line, key);
    else if (key == "snr_h_db") s.snr_h_db = parse_double(v, line, key);
    else if (key == "snr_c_db") s.snr_c_db = parse_double(v, line, key);
    else if (key == "rho") s.rho = parse_double(v, line, key);
    else throw ParseError(line, "unknown key '" + key + "' in [network]");
  } else if (section == "sweep") {
    if (key == "rho") s.sweep_rho = parse_list(v, line, key);
    else if (key == "p0") s.sweep_p0 = parse_list(v, line, key);
    else if (key == "alpha") s.sweep_alpha = parse_list(v, line, key);
    else if (key == "beta") s.sweep_beta = parse_list(v, line, key);
    else if (key == "snr_h_db") s.sweep_snr_h_db = parse_list(v, line, key);
    else if (key == "snr_c_db") s.sweep_snr_c_db = parse_list(v, line, key);
    else throw ParseError(line, "unknown key '" + key + "' in [sweep]");
  } else if (section == "solver") {
    if (key == "n_mc_pu") s.n_mc_pu = parse_count(v, line, key);
    else if (key == "n_mc_coarse") s.n_mc_coarse = parse_count(v, line, key);
    else if (key == "n_mc_oracle") s.n_mc_oracle = parse_count(v, line, key);
    else if (key == "tau_grid") s.tau_grid = static_cast<int>(parse_int(v, line, key));
    else if (key == "f_grid") s.f_grid = static_cast<int>(parse_int(v, line, key));
    else throw ParseError(line, "unknown key '" + key + "' in [solver]");
  } else {
    throw ParseError(line, "unknown section [" + section + "]");
  }
}

/// Parses config text on top of `base`. Does not validate.
inline ExperimentSpec parse_config(std::string_view text, ExperimentSpec base = {}) {
  std::istringstream in{std::string(text)};
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(line, "unterminated section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      if (section != "network" && section != "sweep" && section != "solver")
        throw ParseError(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError(line, "missing key");
    if (val.empty()) throw ParseError(line, "missing value for '" + key + "'");
    apply_key(base, section, key, val, line);
  }
  return base;
}

/// The effective settings in the same format; parse_config reads it back.
inline std::string to_config_text(const ExperimentSpec& s) {
  std::ostringstream o;
  // shortest text that reads back to the same double
  auto num = [](double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
  };
  auto list = [&](const char* key, const std::vector<double>& v) {
    if (v.empty()) return;
    o << key << " = ";
    for (std::size_t i = 0; i < v.size(); ++i) o << (i ? ", " : "") << num(v[i]);
    o << "\n";
  };
  o << "experiment = " << s.id << "\nproblem = " << to_string(s.problem) << "\nseed = " << s.seed
    << "\nout = " << s.out_dir << "\nworkers = " << s.workers << "\n";
  o << "\n[network]\nK = " << s.K << "\nA = " << num(s.A) << "\nsigma_v2_dbm = " << num(s.sigma_v2_dbm) << "\n";
  if (s.snr_h_db) o << "snr_h_db = " << num(*s.snr_h_db) << "\n";
  if (s.snr_c_db) o << "snr_c_db = " << num(*s.snr_c_db) << "\n";
  if (s.rho) o << "rho = " << num(*s.rho) << "\n";
  o << "\n[sweep]\n";
  list("rho", s.sweep_rho);
  list("p0", s.sweep_p0);
  list("alpha", s.sweep_alpha);
  list("beta", s.sweep_beta);
  list("snr_h_db", s.sweep_snr_h_db);
  list("snr_c_db", s.sweep_snr_c_db);
  o << "\n[solver]\nn_mc_pu = " << s.n_mc_pu << "\nn_mc_coarse = " << s.n_mc_coarse
    << "\nn_mc_oracle = " << s.n_mc_oracle << "\ntau_grid = " << s.tau_grid
    << "\nf_grid = " << s.f_grid << "\n";
  return o.str();
}

inline ExperimentSpec load_config(const std::string& path, ExperimentSpec base = {}) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

}  // namespace censornet
