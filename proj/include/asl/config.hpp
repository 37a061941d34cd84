#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "asl/grid.hpp"

namespace asl {

/// Flat key/value document with [sections]; `#` and `;` start comments.
///
///   [experiment]
///   kind = twin_run
///   seed = 7
struct ConfigError {
  int line = 0;  // 0: not tied to a line
  std::string message;
};

inline std::string format_errors(const std::vector<ConfigError>& errs, const std::string& source = "config") {
  std::string s;
  for (const auto& e : errs)
    s += source + (e.line > 0 ? ":" + std::to_string(e.line) : std::string()) + ": " + e.message + "\n";
  return s;
}

struct ConfigParseError : std::runtime_error {
  std::vector<ConfigError> errors;
  explicit ConfigParseError(std::vector<ConfigError> e)
      : std::runtime_error(format_errors(e)), errors(std::move(e)) {}
};

struct ExperimentConfig {
  std::string kind;  // norm_study, harmonic_study, condition_check, single_run, twin_run, contraction_probe
  std::optional<std::uint64_t> seed;
  std::string output;

  int n = 64;
  double length = two_pi;

  std::string equation = "type2";  // type1: divergence form; type2: transport with fractional dissipation
  std::string law = "none";
  std::string diffusion = "none";  // type1 only: none, linear, porous
  double nu = 0.0;
  double m = 2.0;
  double gamma = 1.0;

  double dt = 0.01;
  double t_end = 1.0;

  std::string profile = "random";  // random, log, bump, cosine
  double amplitude = 1.0;
  double spectrum = 2.0;
  int k_max = 6;
  double offset = 0.0;
  double eps = 0.1;

  double perturbation = 0.0;
  double perturbation_spectrum = 2.0;
  int perturbation_k_max = 4;
  std::optional<std::uint64_t> perturbation_seed;

  std::string metric = "l2";
  std::vector<double> p_list{16};
  std::optional<double> q;
  int diag_every = 1;
  std::string check = "envelope";  // envelope, dissipative, none

  std::vector<double> levels{0.5, 1, 2, 4};

  std::vector<double> norm_p{2, 4, 8, 16};
  int depth = -1;
  double p0 = 2.0;

  std::string domain = "square";
  int raster = 64;
  double alpha = 1.0;

  bool stochastic() const {
    return (kind != "harmonic_study" && kind != "condition_check" && profile == "random") ||
           (perturbation > 0.0 && !perturbation_seed) || kind == "condition_check";
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct ConfigEntry {
  std::string value;
  int line;
};

struct FieldSpec {
  enum Type { Int, UInt, Real, Text, Choice, RealList };
  Type type;
  double lo = -HUGE_VAL, hi = HUGE_VAL;
  bool lo_open = false;
  std::vector<std::string> choices;
  std::string range_text;
};

inline const std::map<std::string, FieldSpec>& config_schema() {
  using F = FieldSpec;
  static const std::map<std::string, FieldSpec> s = {
      {"experiment.kind",
       {F::Choice, 0, 0, false,
        {"norm_study", "harmonic_study", "condition_check", "single_run", "twin_run", "contraction_probe"}, ""}},
      {"experiment.seed", {F::UInt, 0, 1.8e19, false, {}, ">= 0"}},
      {"experiment.output", {F::Text}},
      {"grid.n", {F::Int, 8, 4096, false, {}, "a power of two in [8, 4096]"}},
      {"grid.length", {F::Real, 0, HUGE_VAL, true, {}, "> 0"}},
      {"model.equation", {F::Choice, 0, 0, false, {"type1", "type2"}, ""}},
      {"model.law", {F::Text}},
      {"model.diffusion", {F::Choice, 0, 0, false, {"none", "linear", "porous"}, ""}},
      {"model.nu", {F::Real, 0, HUGE_VAL, false, {}, ">= 0"}},
      {"model.m", {F::Real, 1, HUGE_VAL, false, {}, ">= 1"}},
      {"model.gamma", {F::Real, 0, 1, true, {}, "in (0,1]"}},
      {"time.dt", {F::Real, 0, HUGE_VAL, true, {}, "> 0"}},
      {"time.t_end", {F::Real, 0, HUGE_VAL, false, {}, ">= 0"}},
      {"initial.profile", {F::Choice, 0, 0, false, {"random", "log", "bump", "cosine"}, ""}},
      {"initial.amplitude", {F::Real}},
      {"initial.spectrum", {F::Real, 0, HUGE_VAL, false, {}, ">= 0"}},
      {"initial.k_max", {F::Int, 1, 2048, false, {}, "in [1, 2048]"}},
      {"initial.offset", {F::Real}},
      {"initial.eps", {F::Real, 0, HUGE_VAL, true, {}, "> 0"}},
      {"perturbation.amplitude", {F::Real, 0, HUGE_VAL, false, {}, ">= 0"}},
      {"perturbation.spectrum", {F::Real, 0, HUGE_VAL, false, {}, ">= 0"}},
      {"perturbation.k_max", {F::Int, 1, 2048, false, {}, "in [1, 2048]"}},
      {"perturbation.seed", {F::UInt, 0, 1.8e19, false, {}, ">= 0"}},
      {"twin.metric", {F::Choice, 0, 0, false, {"l2", "hminus1"}, ""}},
      {"twin.p", {F::RealList, 2, 1024, false, {}, "in [2, 1024]"}},
      {"twin.q", {F::Real, 1, HUGE_VAL, true, {}, "> 1"}},
      {"twin.diag_every", {F::Int, 1, 10, false, {}, "in [1, 10]"}},
      {"twin.check", {F::Choice, 0, 0, false, {"envelope", "dissipative", "none"}, ""}},
      {"probe.levels", {F::RealList, 0, HUGE_VAL, false, {}, ">= 0"}},
      {"norms.p", {F::RealList, 1, HUGE_VAL, false, {}, ">= 1"}},
      {"norms.depth", {F::Int, -1, 12, false, {}, "in [-1, 12]"}},
      {"norms.p0", {F::Real, 1, HUGE_VAL, false, {}, ">= 1"}},
      {"harmonic.domain", {F::Choice, 0, 0, false, {"square", "halfplane", "lshape", "tworect", "disk"}, ""}},
      {"harmonic.raster", {F::Int, 16, 1024, false, {}, "a power of two in [16, 1024]"}},
      {"harmonic.alpha", {F::Real, 0, HUGE_VAL, true, {}, "> 0"}},
  };
  return s;
}

inline bool parse_real(const std::string& v, double& out) {
  std::istringstream is(v);
  is >> out;
  return !is.fail() && is.eof() && std::isfinite(out);
}

inline bool parse_int(const std::string& v, long long& out) {
  std::istringstream is(v);
  is >> out;
  return !is.fail() && is.eof();
}

}  // namespace detail

/// Parses and validates a config, collecting every error before throwing
/// ConfigParseError. Missing keys take the defaults in ExperimentConfig.
inline ExperimentConfig parse_config(const std::string& text) {
  std::vector<ConfigError> errs;
  std::map<std::string, detail::ConfigEntry> entries;
  std::istringstream is(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string s = raw;
    const auto c = s.find_first_of("#;");
    if (c != std::string::npos) s = s.substr(0, c);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        errs.push_back({line, "malformed section header '" + s + "'"});
        continue;
      }
      section = detail::trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      errs.push_back({line, "expected 'key = value', got '" + s + "'"});
      continue;
    }
    const std::string key = detail::trim(s.substr(0, eq)), value = detail::trim(s.substr(eq + 1));
    if (section.empty()) {
      errs.push_back({line, "key '" + key + "' appears before any [section]"});
      continue;
    }
    const std::string full = section + "." + key;
    if (!detail::config_schema().count(full)) {
      errs.push_back({line, "unknown key '" + key + "' in section [" + section + "]"});
      continue;
    }
    if (auto it = entries.find(full); it != entries.end()) {
      errs.push_back({line, "duplicate key '" + full + "' (first set on line " + std::to_string(it->second.line) +
                                ", again on line " + std::to_string(line) + ")"});
      continue;
    }
    entries[full] = {value, line};
  }

  ExperimentConfig cfg;
  auto check_range = [&](const std::string& key, const detail::FieldSpec& f, double v, int ln) {
    const bool low = f.lo_open ? !(v > f.lo) : !(v >= f.lo);
    if (low || v > f.hi) {
      std::ostringstream m;
      m << key << " = " << v << " is out of range: must be " << f.range_text;
      errs.push_back({ln, m.str()});
      return false;
    }
    return true;
  };
  for (const auto& [key, e] : entries) {
    const auto& f = detail::config_schema().at(key);
    double real = 0.0;
    long long integer = 0;
    std::vector<double> list;
    switch (f.type) {
      case detail::FieldSpec::Int:
      case detail::FieldSpec::UInt:
        if (!detail::parse_int(e.value, integer)) {
          errs.push_back({e.line, key + ": expected an integer, got '" + e.value + "'"});
          continue;
        }
        if (!check_range(key, f, static_cast<double>(integer), e.line)) continue;
        break;
      case detail::FieldSpec::Real:
        if (!detail::parse_real(e.value, real)) {
          errs.push_back({e.line, key + ": expected a number, got '" + e.value + "'"});
          continue;
        }
        if (!check_range(key, f, real, e.line)) continue;
        break;
      case detail::FieldSpec::RealList: {
        std::istringstream ls(e.value);
        std::string item;
        bool bad = false;
        while (std::getline(ls, item, ',')) {
          double v;
          if (!detail::parse_real(detail::trim(item), v)) {
            errs.push_back({e.line, key + ": expected a comma-separated list of numbers, got '" + e.value + "'"});
            bad = true;
            break;
          }
          if (!check_range(key, f, v, e.line)) {
            bad = true;
            break;
          }
          list.push_back(v);
        }
        if (bad) continue;
        if (list.empty()) {
          errs.push_back({e.line, key + ": empty list"});
          continue;
        }
        break;
      }
      case detail::FieldSpec::Choice: {
        bool found = false;
        for (const auto& c : f.choices) found = found || c == e.value;
        if (!found) {
          std::string opts;
          for (const auto& c : f.choices) opts += (opts.empty() ? "" : ", ") + c;
          errs.push_back({e.line, key + " = '" + e.value + "' is not one of: " + opts});
          continue;
        }
        break;
      }
      case detail::FieldSpec::Text:
        if (e.value.empty()) {
          errs.push_back({e.line, key + ": empty value"});
          continue;
        }
        break;
    }
    if (key == "experiment.kind") cfg.kind = e.value;
    else if (key == "experiment.seed") cfg.seed = static_cast<std::uint64_t>(integer);
    else if (key == "experiment.output") cfg.output = e.value;
    else if (key == "grid.n") {
      if (!is_power_of_two(integer)) errs.push_back({e.line, "grid.n = " + e.value + " is out of range: must be " + f.range_text});
      cfg.n = static_cast<int>(integer);
    } else if (key == "grid.length") cfg.length = real;
    else if (key == "model.equation") cfg.equation = e.value;
    else if (key == "model.law") {
      static const char* known[] = {"biot_savart", "sqg", "newtonian_attractive", "newtonian_repulsive", "none"};
      if (std::find(std::begin(known), std::end(known), e.value) == std::end(known) && e.value.rfind("custom:", 0) != 0)
        errs.push_back({e.line, "model.law = '" + e.value +
                                    "' is not one of: biot_savart, sqg, newtonian_attractive, newtonian_repulsive, none, custom:<file>"});
      cfg.law = e.value;
    }
    else if (key == "model.diffusion") cfg.diffusion = e.value;
    else if (key == "model.nu") cfg.nu = real;
    else if (key == "model.m") cfg.m = real;
    else if (key == "model.gamma") cfg.gamma = real;
    else if (key == "time.dt") cfg.dt = real;
    else if (key == "time.t_end") cfg.t_end = real;
    else if (key == "initial.profile") cfg.profile = e.value;
    else if (key == "initial.amplitude") cfg.amplitude = real;
    else if (key == "initial.spectrum") cfg.spectrum = real;
    else if (key == "initial.k_max") cfg.k_max = static_cast<int>(integer);
    else if (key == "initial.offset") cfg.offset = real;
    else if (key == "initial.eps") cfg.eps = real;
    else if (key == "perturbation.amplitude") cfg.perturbation = real;
    else if (key == "perturbation.spectrum") cfg.perturbation_spectrum = real;
    else if (key == "perturbation.k_max") cfg.perturbation_k_max = static_cast<int>(integer);
    else if (key == "perturbation.seed") cfg.perturbation_seed = static_cast<std::uint64_t>(integer);
    else if (key == "twin.metric") cfg.metric = e.value;
    else if (key == "twin.p") cfg.p_list = list;
    else if (key == "twin.q") cfg.q = real;
    else if (key == "twin.diag_every") cfg.diag_every = static_cast<int>(integer);
    else if (key == "twin.check") cfg.check = e.value;
    else if (key == "probe.levels") cfg.levels = list;
    else if (key == "norms.p") cfg.norm_p = list;
    else if (key == "norms.depth") cfg.depth = static_cast<int>(integer);
    else if (key == "norms.p0") cfg.p0 = real;
    else if (key == "harmonic.domain") cfg.domain = e.value;
    else if (key == "harmonic.raster") {
      if (!is_power_of_two(integer))
        errs.push_back({e.line, "harmonic.raster = " + e.value + " is out of range: must be " + f.range_text});
      cfg.raster = static_cast<int>(integer);
    } else if (key == "harmonic.alpha") cfg.alpha = real;
  }

  auto line_of = [&](const std::string& key) {
    auto it = entries.find(key);
    return it == entries.end() ? 0 : it->second.line;
  };
  if (cfg.kind.empty() && !entries.count("experiment.kind")) errs.push_back({0, "missing required key experiment.kind"});
  if (!cfg.kind.empty()) {
    if (!cfg.seed && cfg.stochastic())
      errs.push_back({0, "missing experiment.seed: required because the experiment draws random data"});
    if (cfg.output.empty()) cfg.output = "out/" + cfg.kind;
    const bool twin = cfg.kind == "twin_run" || cfg.kind == "contraction_probe";
    if (twin && cfg.metric == "hminus1" && cfg.equation == "type2" && cfg.check == "envelope")
      errs.push_back({line_of("twin.metric"), "twin.metric = hminus1 with equation type2 has no envelope check; use l2"});
    if (twin && cfg.check == "dissipative" && !cfg.q)
      errs.push_back({line_of("twin.check"), "twin.check = dissipative needs twin.q"});
    if (cfg.equation == "type2" && entries.count("model.diffusion") && cfg.diffusion != "none")
      errs.push_back({line_of("model.diffusion"), "model.diffusion applies to equation type1; type2 uses nu and gamma"});
    if (cfg.equation == "type1" && entries.count("model.gamma"))
      errs.push_back({line_of("model.gamma"), "model.gamma applies to equation type2 only"});
    if (3 * cfg.perturbation_k_max >= cfg.n && cfg.perturbation > 0.0)
      errs.push_back({line_of("perturbation.k_max"), "perturbation.k_max must satisfy 3 k_max < grid.n"});
    if (cfg.profile == "random" && 2 * cfg.k_max >= cfg.n)
      errs.push_back({line_of("initial.k_max"), "initial.k_max must be below grid.n / 2"});
  }
  if (!errs.empty()) {
    std::stable_sort(errs.begin(), errs.end(), [](const auto& a, const auto& b) { return a.line < b.line; });
    throw ConfigParseError(std::move(errs));
  }
  return cfg;
}

/// Canonical text form: every key, in schema order, with its resolved value.
inline std::string canonical_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(17);
  auto list = [](const std::vector<double>& v) {
    std::ostringstream s;
    s.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str();
  };
  os << "[experiment]\nkind = " << c.kind << "\n";
  if (c.seed) os << "seed = " << *c.seed << "\n";
  os << "output = " << c.output << "\n";
  os << "\n[grid]\nn = " << c.n << "\nlength = " << c.length << "\n";
  os << "\n[model]\nequation = " << c.equation << "\nlaw = " << c.law << "\n";
  if (c.equation == "type1") os << "diffusion = " << c.diffusion << "\nm = " << c.m << "\n";
  else os << "gamma = " << c.gamma << "\n";
  os << "nu = " << c.nu << "\n";
  os << "\n[time]\ndt = " << c.dt << "\nt_end = " << c.t_end << "\n";
  os << "\n[initial]\nprofile = " << c.profile << "\namplitude = " << c.amplitude << "\nspectrum = " << c.spectrum
     << "\nk_max = " << c.k_max << "\noffset = " << c.offset << "\neps = " << c.eps << "\n";
  os << "\n[perturbation]\namplitude = " << c.perturbation << "\nspectrum = " << c.perturbation_spectrum
     << "\nk_max = " << c.perturbation_k_max << "\n";
  if (c.perturbation_seed) os << "seed = " << *c.perturbation_seed << "\n";
  os << "\n[twin]\nmetric = " << c.metric << "\np = " << list(c.p_list) << "\n";
  if (c.q) os << "q = " << *c.q << "\n";
  os << "diag_every = " << c.diag_every << "\ncheck = " << c.check << "\n";
  os << "\n[probe]\nlevels = " << list(c.levels) << "\n";
  os << "\n[norms]\np = " << list(c.norm_p) << "\ndepth = " << c.depth << "\np0 = " << c.p0 << "\n";
  os << "\n[harmonic]\ndomain = " << c.domain << "\nraster = " << c.raster << "\nalpha = " << c.alpha << "\n";
  return os.str();
}

}  // namespace asl
