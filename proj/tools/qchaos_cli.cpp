#include <iostream>

#include <CLI11.hpp>

#include "qchaos/runner/experiments.hpp"

#ifndef QCHAOS_VERSION
#define QCHAOS_VERSION "dev"
#endif

namespace r = qchaos::runner;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void print_catalog(std::ostream& os) {
  for (const auto& e : r::catalog()) {
    os << e.name << "\n  " << e.description << "\n  anchors:";
    for (const auto& a : e.anchors) os << " " << a;
    os << "\n  criteria:";
    for (int c : e.criteria) os << " " << c;
    os << "\n  params:";
    for (const auto& p : e.params) os << "\n    " << p.name << ": " << r::type_name(p.def) << " = " << r::value_text(p.def) << "  (" << p.help << ")";
    os << "\n";
  }
}

struct Flags {
  std::string config_path, out, format;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("-c,--config", f.config_path, "config file (key: type = value)");
  cmd->add_option("--seed", f.seed, "64-bit seed");
  cmd->add_option("-o,--out", f.out, "output file (default: stdout)");
  cmd->add_option("--format", f.format, "csv or json");
  cmd->add_option("--set", f.sets, "parameter override key=value (repeatable)");
}

int execute(const std::string& subcommand, const Flags& f) {
  r::ExperimentConfig cfg;
  if (!f.config_path.empty()) cfg = r::load_config(f.config_path);
  if (subcommand != "run") {
    if (!cfg.experiment.empty() && cfg.experiment != subcommand)
      throw r::ConfigError("experiment", "config names experiment '" + cfg.experiment + "' but subcommand is " + subcommand);
    cfg.experiment = subcommand;
  }
  if (cfg.experiment.empty()) throw r::ConfigError("experiment", "no experiment given");
  const r::Experiment& e = r::find_experiment(cfg.experiment);
  for (const auto& s : f.sets) {
    auto [k, v] = r::parse_override(e, s);
    cfg.params[k] = v;
  }
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.output_path = f.out;
  if (!f.format.empty()) cfg.format = r::parse_format(f.format);
  const r::RunOutput out = r::run(cfg, QCHAOS_VERSION);
  if (cfg.output_path.empty()) std::cout << out.rendered;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qchaos experiment runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QCHAOS_VERSION);
  app.add_subcommand("list", "print the experiment catalog");
  std::vector<std::pair<CLI::App*, std::string>> runs;
  Flags flags;
  add_run_flags(app.add_subcommand("run", "run the experiment named in the config file"), flags);
  for (const auto& e : r::catalog()) {
    CLI::App* cmd = app.add_subcommand(e.name, e.description);
    add_run_flags(cmd, flags);
    runs.emplace_back(cmd, e.name);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitConfig;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  if (name == "list") {
    print_catalog(std::cout);
    return 0;
  }
  try {
    return execute(name, flags);
  } catch (const r::ConfigError& err) {
    std::cerr << "config error [" << err.key << "]: " << err.what() << "\n";
    return kExitConfig;
  } catch (const qchaos::Error& err) {
    std::cerr << "runtime error [" << name << "]: " << err.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& err) {
    std::cerr << "error [" << name << "]: " << err.what() << "\n";
    return 1;
  }
}
