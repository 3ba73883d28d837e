// Command-line driver: run / verify / sweep / plot.

#include <CLI11.hpp>

#include <string>
#include <vector>

#include "lyz/cli_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"coupled metric-form flow simulator"};
  app.require_subcommand(1);

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "integrate one configured flow");
  run->add_option("config", run_config, "config file (key = value)")->required();

  std::string only;
  CLI::App* verify = app.add_subcommand("verify", "run the invariant table");
  verify->add_option("--only", only, "run a single named check");

  std::string sweep_config;
  std::vector<double> kappas;
  CLI::App* sweep = app.add_subcommand("sweep", "one run per kappa, in parallel");
  sweep->add_option("config", sweep_config, "base config file")->required();
  sweep->add_option("--kappa", kappas, "kappa values")->delimiter(',');

  std::string csv;
  std::vector<std::string> columns;
  bool log_scale = false;
  CLI::App* plot = app.add_subcommand("plot", "SVG line charts from a series CSV");
  plot->add_option("csv", csv, "series.csv from a run")->required();
  plot->add_option("--columns", columns, "columns to plot against t")
      ->required()
      ->delimiter(',');
  plot->add_flag("--log", log_scale, "log10 vertical axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help and version keep exit 0
  }

  if (run->parsed()) return lyz::cmd_run(run_config);
  if (verify->parsed()) return lyz::cmd_verify(only);
  if (sweep->parsed()) return lyz::cmd_sweep(sweep_config, kappas);
  if (plot->parsed()) return lyz::cmd_plot(csv, columns, log_scale);
  return 2;
}
