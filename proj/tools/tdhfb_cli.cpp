#include "tdhfb/tdhfb.h"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

int report(tdhfb_status s) {
  if (s != TDHFB_OK && *tdhfb_last_error()) std::cerr << "error: " << tdhfb_last_error() << '\n';
  // API-level failures map onto the config exit status.
  return s <= TDHFB_ERR_TRUNCATION ? static_cast<int>(s) : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-dependent Hartree-Fock-Bogoliubov simulator"};
  app.set_version_flag("--version", std::string(tdhfb_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir, scenario;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run a scenario and write its artifacts");
  run->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides out_dir)");
  run->add_option("--scenario", scenario, "Scenario override");
  run->add_option("--seed", seed, "Seed override");

  auto* validate = app.add_subcommand("validate", "Parse and validate a configuration file");
  validate->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  tdhfb_config* cfg = nullptr;
  if (tdhfb_status s = tdhfb_config_load(config_path.c_str(), &cfg); s != TDHFB_OK) return report(s);

  int code = 0;
  if (*validate) {
    code = report(tdhfb_config_validate(cfg));
    if (code == 0) std::cout << config_path << ": ok\n";
  } else {
    tdhfb_status s = TDHFB_OK;
    if (!scenario.empty()) s = tdhfb_config_set_scenario(cfg, scenario.c_str());
    if (s == TDHFB_OK && seed) s = tdhfb_config_set_seed(cfg, *seed);
    if (s == TDHFB_OK && !out_dir.empty()) s = tdhfb_config_set_out_dir(cfg, out_dir.c_str());
    code = report(s == TDHFB_OK ? tdhfb_run(cfg) : s);
  }
  tdhfb_config_free(cfg);
  return code;
}
