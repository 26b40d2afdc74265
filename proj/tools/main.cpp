#include <functional>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sod/csv.hpp"
#include "sodtool/app.hpp"

using namespace sodtool;

namespace {

struct CommonArgs {
  std::string config;
  Overrides overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config, "Scenario JSON file")->required();
  cmd->add_option("--alpha", args.overrides.alpha, "Driver share; replaces the configured list")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--xf", args.overrides.xf_km, "Flexible-route length in km; replaces the configured grid");
  cmd->add_option("--seed", args.overrides.seed, "Base seed");
  cmd->add_option("--reps", args.overrides.replications, "Replication count")->check(CLI::PositiveNumber);
  cmd->add_option("--out", args.overrides.output, "Output directory");
  cmd->add_option("--jobs", args.overrides.jobs, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const sod::SimConfigError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const sod::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-on-demand transit planning and simulation"};
  app.require_subcommand(1);

  CommonArgs args;
  using Command = int (*)(const ScenarioConfig&);
  const std::pair<const char*, std::pair<const char*, Command>> commands[] = {
      {"plan", {"Optimal peak-hour fleet plans for every route and driver share", cmd_plan}},
      {"schedule", {"Detour budgets, schedules and detour-time CDF tables", cmd_schedule}},
      {"simulate", {"Run replications and write per-replication records", cmd_simulate}},
      {"sweep", {"Sweep the flexible-route grid and driver shares", cmd_sweep}},
      {"report", {"Summarise sweep outputs as Markdown", cmd_report}},
  };
  Command selected = nullptr;
  for (const auto& [name, info] : commands) {
    CLI::App* cmd = app.add_subcommand(name, info.first);
    add_common(cmd, args);
    const Command fn = info.second;
    cmd->callback([&selected, fn] { selected = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  return run_guarded([&] { return selected(load_config(args.config, args.overrides)); });
}
