// balans: solve 1-D scalar balance laws with a Lax-Friedrichs type scheme
// and audit the solution against its a-priori estimates.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "balans/commands.hpp"
#include "balans/errors.hpp"

namespace {

std::vector<int> parse_cell_list(const std::string& csv) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    std::string item = csv.substr(pos, comma == std::string::npos ? std::string::npos
                                                                  : comma - pos);
    if (item.empty()) throw balans::ConfigError("empty entry in --N list");
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw balans::ConfigError("bad entry '" + item + "' in --N list");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-volume solver and estimate auditor for 1-D scalar balance laws"};
  app.require_subcommand(1);

  std::string cfg, cfg2, cell_list, perturb;

  auto* solve = app.add_subcommand("solve", "run the scheme and write snapshots");
  solve->add_option("config", cfg, "run config (TOML)")->required();

  auto* audit = app.add_subcommand("audit", "run and audit bounds/entropy/boundary residuals");
  audit->add_option("config", cfg, "run config (TOML)")->required();

  auto* conv = app.add_subcommand("convergence", "nested-grid self-convergence study");
  conv->add_option("config", cfg, "run config (TOML)")->required();
  conv->add_option("--N", cell_list, "comma-separated nested cell counts, e.g. 50,100,200")
      ->required();

  auto* stab = app.add_subcommand("stability", "paired solve with flux/source perturbation");
  stab->add_option("config1", cfg, "first run config")->required();
  stab->add_option("config2", cfg2, "second run config (same data)")->required();

  auto* dd = app.add_subcommand("data-dependence", "paired solve with perturbed data");
  dd->add_option("config", cfg, "base run config")->required();
  dd->add_option("--perturb", perturb, "config with perturbed data")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : balans::kExitConfig;
  }

  try {
    if (solve->parsed()) return balans::cmd_solve(cfg, std::cout, std::cerr);
    if (audit->parsed()) return balans::cmd_audit(cfg, std::cout, std::cerr);
    if (conv->parsed())
      return balans::cmd_convergence(cfg, parse_cell_list(cell_list), std::cout, std::cerr);
    if (stab->parsed()) return balans::cmd_stability(cfg, cfg2, std::cout, std::cerr);
    if (dd->parsed()) return balans::cmd_data_dependence(cfg, perturb, std::cout, std::cerr);
  } catch (const balans::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return balans::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return balans::kExitConfig;
  }
  return balans::kExitConfig;
}
