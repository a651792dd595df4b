#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "hbundle/scenario.hpp"

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kConfigError = 2, kOutputError = 3 };

void print_summary(const hbundle::cli::RunReport& report) {
  using hbundle::cli::format_number;
  for (const auto& c : report.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << format_number(c.value);
    if (c.min) std::cout << "  min " << format_number(*c.min);
    if (c.max) std::cout << "  max " << format_number(*c.max);
    std::cout << '\n';
  }
  for (const auto& w : report.warnings) std::cout << "warning: " << w << '\n';
  std::cout << report.scenario << ": " << (report.pass() ? "pass" : "FAIL") << " in "
            << report.wall_seconds << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame-bundle verification scenarios"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list-scenarios", "List the available scenarios");

  std::string scenario, config_path, out_dir;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Run one scenario and write its report");
  run->add_option("--scenario", scenario, "Scenario name (or 'scenario' in the config)");
  run->add_option("--config", config_path, "JSON config document");
  run->add_option("--set", overrides, "key=value override, repeatable; wins over the config")->take_all();
  run->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  if (list->parsed()) {
    for (const auto& s : hbundle::cli::scenarios()) std::cout << s.name << "  " << s.summary << '\n';
    return kPass;
  }

  hbundle::cli::ScenarioConfig cfg;
  try {
    const hbundle::cli::json doc = config_path.empty() ? hbundle::cli::json() : hbundle::cli::read_config_file(config_path);
    cfg = hbundle::cli::load_config(doc, overrides, scenario);
    cfg.out_dir = out_dir;
  } catch (const hbundle::cli::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  }

  hbundle::cli::RunReport report = hbundle::cli::run(cfg);
  try {
    hbundle::cli::write_outputs(report, cfg);
  } catch (const hbundle::cli::OutputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOutputError;
  }
  print_summary(report);
  return report.pass() ? kPass : kCheckFailed;
}
