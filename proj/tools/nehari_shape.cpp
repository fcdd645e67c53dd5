// Scenario runner for the rectangle perturbation study: sweeps the
// half-height a over the configured cases and correctors, emitting plot-ready
// CSV plus per-row JSON reports, and runs the oracle validation suite.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "nehari/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Nehari-manifold shape derivative study on the rectangle"};
  app.require_subcommand(1);

  std::string config_path, only_expr, out_csv_override, out_json_override;

  CLI::App* sweep = app.add_subcommand("sweep", "run the configured sweep, write CSV/JSON");
  sweep->add_option("--config", config_path, "configuration file")->required();
  sweep->add_option("--only", only_expr, "restrict to case=...,a=...,corrector=...");
  sweep->add_option("--out-csv", out_csv_override, "override the CSV output path");
  sweep->add_option("--out-json", out_json_override, "override the JSON report directory");

  CLI::App* validate = app.add_subcommand("validate", "run the oracle validation suite");
  validate->add_option("--config", config_path, "configuration file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    nehari::ScenarioConfig cfg = nehari::parse_config_file(config_path);

    if (sweep->parsed()) {
      const nehari::OnlyFilter only = nehari::parse_only(only_expr);
      const nehari::SweepOutcome outcome = nehari::run_sweep(cfg, only);
      const std::string csv_path = out_csv_override.empty() ? cfg.out_csv : out_csv_override;
      std::ofstream csv(csv_path);
      if (!csv) {
        std::cerr << "cannot write CSV to '" << csv_path << "'\n";
        return 1;
      }
      csv << outcome.csv;
      const std::string json_dir =
          out_json_override.empty() ? cfg.out_json_dir : out_json_override;
      if (!json_dir.empty()) {
        std::filesystem::create_directories(json_dir);
        nehari::write_json_reports(outcome, cfg, json_dir);
      }
      for (const auto& d : outcome.diagnostics) std::cerr << d << '\n';
      std::cout << outcome.rows.size() << " rows -> " << csv_path << '\n';
      return outcome.exit_code;
    }

    const nehari::ValidationOutcome v = nehari::run_validate(cfg);
    std::cout << v.table();
    return v.exit_code;
  } catch (const nehari::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
