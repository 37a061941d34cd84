// asl: command-line front end for the experiments.
//
//   asl run <config>
//   asl preset <name> [--n N] [--dt DT] [--seed S] [--quick] [--out DIR]
//   asl norms <field-file> [--p 2,4,8] [--depth D]
//   asl verify-all [--quick] [--out DIR]
//
// Exit status: 0 all verdicts pass, 1 some verdict fails, 2 bad input or runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "asl/experiments.hpp"

namespace {

int report_error(const std::string& what, const std::string& message) {
  // One JSON object on stderr so scripts can parse failures.
  std::cerr << nlohmann::json{{"error", what}, {"message", message}}.dump() << "\n";
  return 2;
}

void print_verdict(const asl::Verdict& v) {
  std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", v.preset.c_str(), v.detail.c_str());
}

std::vector<double> parse_p_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double p = std::stod(item, &used);
    if (used != item.size() || !(p >= 1.0)) throw std::invalid_argument("bad p value '" + item + "'");
    out.push_back(p);
  }
  if (out.empty()) throw std::invalid_argument("empty p list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BMO-class stability experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", asl::kVersion);

  std::string config_path;
  auto* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "config file")->required();

  std::string preset_name, preset_out;
  std::optional<int> n;
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
  auto* preset = app.add_subcommand("preset", "run one acceptance preset");
  preset->add_option("name", preset_name, "preset name")->required();
  preset->add_option("--n", n, "grid size (power of two)");
  preset->add_option("--dt", dt, "time step");
  preset->add_option("--seed", seed, "random seed");
  preset->add_option("--out", preset_out, "output directory (default out/<name>)");
  bool preset_quick = false;
  preset->add_flag("--quick", preset_quick, "reduced sizes");

  std::string field_path, p_text = "2,4,8,16";
  int depth = -1;
  auto* norms = app.add_subcommand("norms", "norms of a saved field");
  norms->add_option("field", field_path, "snapshot file")->required();
  norms->add_option("--p", p_text, "comma-separated exponents");
  norms->add_option("--depth", depth, "BMO lattice depth (-1: default)");

  bool quick = false;
  std::string verify_out = "out/verify";
  auto* verify = app.add_subcommand("verify-all", "run every preset");
  verify->add_flag("--quick", quick, "reduced sizes");
  verify->add_option("--out", verify_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) return report_error("io", "cannot read " + config_path);
      std::stringstream buf;
      buf << in.rdbuf();
      asl::ExperimentConfig cfg;
      try {
        cfg = asl::parse_config(buf.str());
      } catch (const asl::ConfigParseError& e) {
        nlohmann::json errs = nlohmann::json::array();
        for (const auto& x : e.errors) errs.push_back({{"line", x.line}, {"message", x.message}});
        std::cerr << asl::format_errors(e.errors, config_path);
        std::cerr << nlohmann::json{{"error", "config"}, {"file", config_path}, {"errors", errs}}.dump() << "\n";
        return 2;
      }
      const auto v = asl::execute(cfg, buf.str());
      print_verdict(v);
      return v.pass ? 0 : 1;
    }
    if (*preset) {
      const auto* p = asl::find_preset(preset_name);
      if (!p) {
        std::string names;
        for (const auto& e : asl::presets()) names += (names.empty() ? "" : ", ") + e.name;
        return report_error("usage", "unknown preset '" + preset_name + "'; choose one of: " + names);
      }
      if (n && (!asl::is_power_of_two(*n) || *n < 8)) return report_error("usage", "--n must be a power of two >= 8");
      if (dt && !(*dt > 0.0)) return report_error("usage", "--dt must be positive");
      asl::RunOptions o{n, dt, seed, preset_quick, preset_out.empty() ? asl::fs::path("out") / preset_name : asl::fs::path(preset_out)};
      const auto v = p->run(o);
      print_verdict(v);
      return v.pass ? 0 : 1;
    }
    if (*norms) {
      const auto f = asl::load_snapshot(field_path);
      std::vector<asl::NormReport> rows;
      for (double p : parse_p_list(p_text)) rows.push_back({"lp", p, 0, asl::lp_norm(f, p)});
      const int d = depth < 0 ? asl::default_bmo_depth(f.n()) : depth;
      rows.push_back({"bmo", 0, d, asl::bmo_norm(f, d)});
      if (asl::is_mean_zero(f)) rows.push_back({"sobolev", -1, 0, asl::sobolev_norm(f, -1.0)});
      asl::write_norm_csv(std::cout, rows);
      return 0;
    }
    if (*verify) {
      const auto r = asl::verify_all(verify_out, quick, asl::thread_cap());
      for (const auto& v : r.verdicts) print_verdict(v);
      return r.all_pass() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    return report_error("runtime", e.what());
  }
  return 2;
}
