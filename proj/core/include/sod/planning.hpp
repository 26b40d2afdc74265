#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sod {

class PlanningError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One purchasable vehicle size with its hourly costs.
struct VehicleClass {
  int size_pax = 0;
  double operational_cost_per_h = 0.0;  // operating + capital
  double operating_cost_per_h = 0.0;    // operating only
};

struct CostTable {
  std::vector<VehicleClass> classes;
  double current_operational_cost_per_h = 36.3;
  double current_operating_cost_per_h = 24.8;
  double driver_cost_per_h = 15.3;
  double value_of_time_per_h = 16.5;
  double waiting_weight = 1.5;
  double capacity_buffer = 0.9;

  /// Five-size table with the contiguous size-to-cost pairing
  /// {5, 8, 20, 44, 70} -> {4.4, 5.9, 11.05, 16.2, 23.8} / {2.1, 2.6, 4.15, 5.7, 9.5}.
  static CostTable defaults();

  void validate() const;
  const VehicleClass& find(int size_pax) const;
};

struct RouteStop {
  std::int64_t node_id = 0;
  double chainage_km = 0.0;
};

struct RouteSpec {
  std::string id;
  double length_km = 0.0;
  double cycle_time_min = 0.0;
  double peak_demand_pax_h = 0.0;     // boarding demand Λ
  double peak_load_pax_h = 0.0;       // one-direction peak load; defaults to Λ when 0
  double offpeak_demand_pax_h = 0.0;
  double existing_headway_min = 0.0;  // H^0
  int existing_fleet = 0;             // vehicles = drivers today
  int existing_vehicle_size = 0;
  std::vector<RouteStop> stops;       // terminus first, ascending chainage

  double design_load_pax_h() const { return peak_load_pax_h > 0.0 ? peak_load_pax_h : peak_demand_pax_h; }
  void validate() const;
};

enum class ScenarioKind { full_sav, transition };

/// Planning scenario. `driver_share` is α, the fraction of today's drivers
/// kept in the workforce; it is ignored for the full-SAV scenario.
struct PlanningScenario {
  ScenarioKind kind = ScenarioKind::full_sav;
  double driver_share = 0.0;

  static PlanningScenario full_sav() { return {}; }
  static PlanningScenario transition(double alpha) { return {ScenarioKind::transition, alpha}; }
  /// α = 0 maps to the full-SAV scenario, any other α to the transition model.
  static PlanningScenario for_alpha(double alpha);
};

enum class Binding { interior, capacity, budget, infeasible };
const char* to_string(Binding b);

struct FleetPlan {
  int vehicle_size = 0;
  double headway_min = 0.0;
  int fleet_size = 0;
  double retained_drivers = 0.0;  // α·N^{d,0}; 0 for full SAV
  double additional_savs = 0.0;   // s − α·N^{d,0}, not below 0
  double cost_per_h = 0.0;
  Binding binding = Binding::infeasible;
  double unconstrained_headway_min = 0.0;
  double min_headway_min = 0.0;
  double max_headway_min = 0.0;
  std::string diagnostic;
};

struct HeadwayBounds {
  double min_headway_min = 0.0;  // budget bound
  double max_headway_min = 0.0;  // capacity bound
  bool feasible() const { return min_headway_min <= max_headway_min; }
};

struct HeadwayGrid {
  double step_min = 0.5;
};

/// Hourly unit cost used by the scenario: operational cost for full SAV,
/// operating cost during transition.
double unit_cost_per_h(const VehicleClass& cls, const PlanningScenario& scenario);

/// Waiting cost plus fleet cost, €/h, for headway `headway_min`.
double route_cost(int size_pax, double headway_min, const RouteSpec& route, const CostTable& costs,
                  const PlanningScenario& scenario = PlanningScenario::full_sav());

struct OptimalHeadway {
  double headway_min = 0.0;
  double cost_per_h = 0.0;
};

/// Unconstrained minimiser of route_cost and the cost there.
OptimalHeadway optimal_headway(int size_pax, const RouteSpec& route, const CostTable& costs,
                               const PlanningScenario& scenario = PlanningScenario::full_sav());

HeadwayBounds headway_bounds(int size_pax, const RouteSpec& route, const CostTable& costs,
                             const PlanningScenario& scenario);

/// Largest fleet the current operating budget pays for while a share α of
/// drivers is retained. Zero when the retained drivers consume the budget.
double transition_fleet_bound(double alpha, int size_pax, const RouteSpec& route, const CostTable& costs);

/// Fleet needed to run the cycle at the headway (integer vehicles).
int fleet_for_headway(double cycle_time_min, double headway_min);

FleetPlan plan_route(const RouteSpec& route, const CostTable& costs, const PlanningScenario& scenario,
                     const HeadwayGrid& grid = {});

/// Route table with columns
/// `route_id,length_km,cycle_time_min,peak_demand_pax_h,offpeak_demand_pax_h,existing_headway_min,vehicle_size,fleet_size`
/// and an optional trailing `peak_load_pax_h`.
std::vector<RouteSpec> load_routes(std::istream& in);
std::vector<RouteSpec> load_routes(const std::filesystem::path& path);

}  // namespace sod
