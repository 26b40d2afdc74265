#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sod/demand.hpp"
#include "sod/detour.hpp"
#include "sod/metrics.hpp"
#include "sod/network.hpp"
#include "sod/planning.hpp"
#include "sod/sim.hpp"

namespace sodtool {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kConfigError = 1, kInfeasible = 2, kIoError = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  fs::path base_dir;
  fs::path edges;
  std::optional<fs::path> nodes;
  fs::path route;
  fs::path stops;
  fs::path od;
  std::optional<fs::path> routes_table;  // routes planned by `plan`; defaults to `route`
  sod::CostTable costs = sod::CostTable::defaults();
  std::vector<double> alphas{0.0, 0.75, 1.0};
  std::map<double, double> offpeak_headway_min;  // by α
  std::optional<double> xf_step_km = 1.0;
  std::vector<double> xf_km;  // explicit grid; overrides the step when non-empty
  int replications = 100;
  std::uint64_t seed = 1;
  double horizon_h = 3.0;
  double warmup_h = 1.0;
  double confidence = 0.95;
  double catchment_m = 500.0;
  sod::AccessParams access;
  double planning_speed_kmh = 40.0;
  double dwell_s = 30.0;
  double max_wait_min = 15.0;
  double max_ride_factor = 2.0;
  double walk_speed_kmh = sod::kDefaultWalkSpeedKmh;
  fs::path output = "out";
  int jobs = 0;  // 0: hardware concurrency
  bool write_records = false;
};

struct Overrides {
  std::optional<double> alpha;
  std::optional<double> xf_km;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<fs::path> output;
  std::optional<int> jobs;
};

/// Reads a JSON scenario. Relative paths resolve against the file's
/// directory, except `output`, which resolves against the working directory.
ScenarioConfig load_config(const fs::path& path, const Overrides& overrides = {});

/// Everything `simulate` needs for one (α, x_f) point.
struct ScenarioPoint {
  double alpha = 0.0;
  double xf_km = 0.0;
  sod::FleetPlan plan;
  double offpeak_headway_min = 0.0;
  double requests_per_run = 0.0;
  double required_budget_min = 0.0;
  sod::DetourCap cap;
  sod::SoDSchedule schedule;
  sod::SimConfig sim;
  sod::CostCoefficients coeffs;
  int driver_vehicles = 0;
  std::optional<sod::ServiceArea> area;
};

class Scenario {
 public:
  explicit Scenario(ScenarioConfig config);
  Scenario(const Scenario&) = delete;
  Scenario& operator=(const Scenario&) = delete;

  const ScenarioConfig& config() const { return cfg_; }
  const sod::Network& network() const { return net_; }
  const sod::RoutingTable& routing() const { return routing_; }
  const sod::RouteSpec& route() const { return route_; }
  const std::vector<sod::Node>& stop_nodes() const { return stop_nodes_; }
  const sod::DemandSpec& demand() const { return demand_; }
  const sod::RouteTimetable& timetable() const { return timetable_; }

  /// x_f grid from the config, clipped to [0, route length].
  std::vector<double> xf_grid() const;
  double offpeak_headway(double alpha, const sod::FleetPlan& plan) const;
  ScenarioPoint point(double alpha, double xf_km, bool enforce_latest = true) const;

 private:
  ScenarioConfig cfg_;
  sod::Network net_;
  sod::RoutingTable routing_;
  std::vector<sod::Node> stop_nodes_;  // filled while route_ is loaded
  sod::RouteSpec route_;
  sod::DemandSpec demand_;
  sod::RouteTimetable timetable_;
};

struct Replication {
  sod::ReplicationSummary summary;
  sod::SimResult result;  // kept only when requested
};

/// Runs replications 0..count-1 with `jobs` worker threads. Results are
/// ordered by replication id regardless of completion order.
std::vector<Replication> run_replications(const Scenario& scenario, const ScenarioPoint& point, int count,
                                          std::uint64_t seed, int jobs, bool keep_results);

sod::SimResult simulate_once(const Scenario& scenario, const ScenarioPoint& point, std::uint64_t seed,
                             int replication);

/// Subcommands; each returns a process exit code.
int cmd_plan(const ScenarioConfig& cfg);
int cmd_schedule(const ScenarioConfig& cfg);
int cmd_simulate(const ScenarioConfig& cfg);
int cmd_sweep(const ScenarioConfig& cfg);
int cmd_report(const ScenarioConfig& cfg);

std::string plan_csv(const std::vector<sod::RouteSpec>& routes, const sod::CostTable& costs,
                     const std::vector<double>& alphas, bool* any_infeasible = nullptr);
std::string schedule_csv(const sod::SoDSchedule& s, const std::vector<sod::Node>& stop_nodes,
                         const sod::Network& net);
std::string alpha_tag(double alpha);
std::string xf_tag(double xf_km);

}  // namespace sodtool
