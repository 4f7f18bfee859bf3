// heatctl: minimal-time / minimal-norm control experiments for the semilinear
// heat equation.
//
//   heatctl <subcommand> --config <file> --out <dir> [--override key=value]...
//   heatctl minnorm <T> --config ...      heatctl mintime <M> --config ...

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "heatctl/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Minimal-time and minimal-norm control of the semilinear heat equation"};
  app.require_subcommand(1);

  heatctl::RunRequest req;
  std::string config;
  std::string out_dir;
  double value = 0.0;

  const std::map<std::string, std::string> help = {
      {"simulate", "uncontrolled trajectory and decay envelope"},
      {"gamma", "free hitting time of the target ball"},
      {"minnorm", "minimal control norm for horizon T"},
      {"mintime", "minimal time for control bound M"},
      {"equivalence", "round trips between the two value functions"},
      {"sweep", "value curves over experiment.T_grid and experiment.M_grid"},
      {"oracle-compare", "solver values against the scalar and brute-force oracles"},
      {"gradcheck", "adjoint gradient against finite differences"},
  };

  for (const auto& name : heatctl::subcommands()) {
    auto it = help.find(name);
    CLI::App* sub = app.add_subcommand(name, it != help.end() ? it->second : "");
    sub->add_option("--config", config, "experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--override", req.overrides, "dotted.key=value applied on top of the config");
    if (name == "minnorm") sub->add_option("T", value, "horizon (overrides experiment.T)");
    if (name == "mintime") sub->add_option("M", value, "control bound (overrides experiment.M)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : heatctl::kExitInvalidConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  req.subcommand = chosen->get_name();
  req.config = config;
  req.out_dir = out_dir;
  for (const char* positional : {"T", "M"}) {
    try {
      if (chosen->get_option(positional)->count() > 0) req.value = value;
    } catch (const CLI::OptionNotFound&) {
    }
  }
  return heatctl::run(req, std::cerr);
}
