#include "sod/planning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "sod/csv.hpp"

namespace sod {
namespace {

constexpr double kGridEps = 1e-9;

double hours(double minutes) { return minutes / 60.0; }

long grid_ceil(double minutes, double step) { return static_cast<long>(std::ceil(minutes / step - kGridEps)); }
long grid_floor(double minutes, double step) { return static_cast<long>(std::floor(minutes / step + kGridEps)); }

// Lowest grid index whose integer fleet respects the transition fleet cap.
long fleet_cap_floor(double cycle_min, double fleet_cap, double step, long from, long to) {
  for (long k = from; k <= to; ++k) {
    if (fleet_for_headway(cycle_min, k * step) <= fleet_cap + 1e-9) return k;
  }
  return to + 1;
}

}  // namespace

CostTable CostTable::defaults() {
  CostTable t;
  t.classes = {
      {5, 4.4, 2.1}, {8, 5.9, 2.6}, {20, 11.05, 4.15}, {44, 16.2, 5.7}, {70, 23.8, 9.5},
  };
  return t;
}

void CostTable::validate() const {
  if (classes.empty()) throw PlanningError("cost table has no vehicle sizes");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto& c = classes[i];
    if (c.size_pax <= 0 || !(c.operational_cost_per_h > 0.0) || !(c.operating_cost_per_h > 0.0)) {
      throw PlanningError("vehicle size " + std::to_string(c.size_pax) + ": costs must be positive");
    }
    if (c.operational_cost_per_h < c.operating_cost_per_h) {
      throw PlanningError("vehicle size " + std::to_string(c.size_pax) +
                          ": operational cost below operating cost");
    }
    if (i > 0) {
      const auto& p = classes[i - 1];
      if (c.size_pax <= p.size_pax || c.operational_cost_per_h <= p.operational_cost_per_h ||
          c.operating_cost_per_h <= p.operating_cost_per_h) {
        throw PlanningError("vehicle sizes and costs must be strictly increasing");
      }
    }
  }
  if (!(current_operational_cost_per_h > 0.0) || !(current_operating_cost_per_h > 0.0) ||
      !(driver_cost_per_h > 0.0) || !(value_of_time_per_h > 0.0) || !(waiting_weight > 0.0)) {
    throw PlanningError("cost coefficients must be positive");
  }
  if (!(capacity_buffer > 0.0) || capacity_buffer > 1.0) throw PlanningError("capacity buffer must be in (0, 1]");
}

const VehicleClass& CostTable::find(int size_pax) const {
  for (const auto& c : classes) {
    if (c.size_pax == size_pax) return c;
  }
  throw PlanningError("unknown vehicle size " + std::to_string(size_pax));
}

void RouteSpec::validate() const {
  if (!(length_km > 0.0) || !(cycle_time_min > 0.0)) throw PlanningError(id + ": length and cycle time must be positive");
  if (!(peak_demand_pax_h > 0.0) || !(design_load_pax_h() > 0.0) || !(existing_headway_min > 0.0)) {
    throw PlanningError(id + ": demand, peak load and existing headway must be positive");
  }
  for (std::size_t i = 1; i < stops.size(); ++i) {
    if (!(stops[i].chainage_km > stops[i - 1].chainage_km)) {
      throw PlanningError(id + ": stops must have strictly increasing chainage");
    }
  }
  if (!stops.empty() && stops.back().chainage_km > length_km + 1e-9) {
    throw PlanningError(id + ": stop chainage beyond route length");
  }
}

PlanningScenario PlanningScenario::for_alpha(double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw PlanningError("driver share must be in [0, 1]");
  return alpha == 0.0 ? full_sav() : transition(alpha);
}

const char* to_string(Binding b) {
  switch (b) {
    case Binding::interior: return "interior";
    case Binding::capacity: return "capacity";
    case Binding::budget: return "budget";
    case Binding::infeasible: return "infeasible";
  }
  return "?";
}

double unit_cost_per_h(const VehicleClass& cls, const PlanningScenario& scenario) {
  return scenario.kind == ScenarioKind::full_sav ? cls.operational_cost_per_h : cls.operating_cost_per_h;
}

double route_cost(int size_pax, double headway_min, const RouteSpec& route, const CostTable& costs,
                  const PlanningScenario& scenario) {
  if (!(headway_min > 0.0)) throw PlanningError("headway must be positive");
  const double unit = unit_cost_per_h(costs.find(size_pax), scenario);
  const double h = hours(headway_min);
  const double waiting = 0.5 * costs.value_of_time_per_h * costs.waiting_weight * route.peak_demand_pax_h * h;
  const double fleet = unit * hours(route.cycle_time_min) / h;
  return waiting + fleet;
}

OptimalHeadway optimal_headway(int size_pax, const RouteSpec& route, const CostTable& costs,
                               const PlanningScenario& scenario) {
  const double unit = unit_cost_per_h(costs.find(size_pax), scenario);
  const double tc = hours(route.cycle_time_min);
  const double demand_weight = costs.value_of_time_per_h * costs.waiting_weight * route.peak_demand_pax_h;
  OptimalHeadway out;
  out.headway_min = 60.0 * std::sqrt(2.0 * unit * tc / demand_weight);
  out.cost_per_h = std::sqrt(2.0 * demand_weight * unit * tc);
  return out;
}

HeadwayBounds headway_bounds(int size_pax, const RouteSpec& route, const CostTable& costs,
                             const PlanningScenario& scenario) {
  const VehicleClass& cls = costs.find(size_pax);
  HeadwayBounds b;
  b.max_headway_min = 60.0 * size_pax * costs.capacity_buffer / route.design_load_pax_h();
  if (scenario.kind == ScenarioKind::full_sav) {
    b.min_headway_min = cls.operational_cost_per_h / costs.current_operational_cost_per_h * route.existing_headway_min;
  } else {
    const double alpha = scenario.driver_share;
    if (alpha < 0.0 || alpha > 1.0) throw PlanningError("driver share must be in [0, 1]");
    const double budget = costs.current_operating_cost_per_h - costs.driver_cost_per_h * (1.0 - alpha);
    if (!(budget > 0.0)) {
      throw PlanningError("operating budget fully consumed by retained drivers");
    }
    b.min_headway_min = cls.operating_cost_per_h / budget * route.existing_headway_min;
  }
  return b;
}

double transition_fleet_bound(double alpha, int size_pax, const RouteSpec& route, const CostTable& costs) {
  if (alpha < 0.0 || alpha > 1.0) throw PlanningError("driver share must be in [0, 1]");
  const double numerator = costs.current_operating_cost_per_h - costs.driver_cost_per_h * (1.0 - alpha);
  if (numerator <= 0.0) return 0.0;
  return numerator / costs.find(size_pax).operating_cost_per_h * route.existing_fleet;
}

int fleet_for_headway(double cycle_time_min, double headway_min) {
  return static_cast<int>(std::ceil(cycle_time_min / headway_min - 1e-9));
}

FleetPlan plan_route(const RouteSpec& route, const CostTable& costs, const PlanningScenario& scenario,
                     const HeadwayGrid& grid) {
  if (costs.classes.empty()) throw PlanningError("cost table has no vehicle sizes");
  if (!(grid.step_min > 0.0)) throw PlanningError("headway grid step must be positive");
  const double step = grid.step_min;
  const bool transition = scenario.kind == ScenarioKind::transition;

  std::optional<FleetPlan> best;
  std::optional<FleetPlan> least_bad;
  long least_violation = std::numeric_limits<long>::max();

  for (const VehicleClass& cls : costs.classes) {
    const int b = cls.size_pax;
    FleetPlan plan;
    plan.vehicle_size = b;
    plan.unconstrained_headway_min = optimal_headway(b, route, costs, scenario).headway_min;

    HeadwayBounds bounds;
    try {
      bounds = headway_bounds(b, route, costs, scenario);
    } catch (const PlanningError& e) {
      plan.binding = Binding::infeasible;
      plan.diagnostic = e.what();
      if (!least_bad) least_bad = plan;
      continue;
    }
    plan.min_headway_min = bounds.min_headway_min;
    plan.max_headway_min = bounds.max_headway_min;

    long lo = std::max<long>(1, grid_ceil(bounds.min_headway_min, step));
    const long hi = grid_floor(bounds.max_headway_min, step);
    bool fleet_limited = false;
    if (transition) {
      const double cap = transition_fleet_bound(scenario.driver_share, b, route, costs);
      const long capped = fleet_cap_floor(route.cycle_time_min, cap, step, lo, std::max(lo, hi));
      fleet_limited = capped > lo;
      lo = capped;
    }

    if (lo > hi) {
      const long violation = lo - hi;
      if (violation < least_violation) {
        least_violation = violation;
        plan.binding = Binding::infeasible;
        plan.headway_min = lo * step;
        plan.fleet_size = fleet_for_headway(route.cycle_time_min, plan.headway_min);
        plan.cost_per_h = route_cost(b, plan.headway_min, route, costs, scenario);
        plan.diagnostic = "no grid headway satisfies both capacity (h <= " + format_fixed(bounds.max_headway_min, 3) +
                          " min) and budget (h >= " + format_fixed(bounds.min_headway_min, 3) + " min" +
                          (fleet_limited ? ", fleet cap" : "") + ")";
        least_bad = plan;
      }
      continue;
    }

    const double star = plan.unconstrained_headway_min / step;
    const long below = std::clamp(static_cast<long>(std::floor(star)), lo, hi);
    const long above = std::clamp(static_cast<long>(std::ceil(star)), lo, hi);
    const double cost_below = route_cost(b, below * step, route, costs, scenario);
    const double cost_above = route_cost(b, above * step, route, costs, scenario);
    const long k = cost_above < cost_below ? above : below;

    plan.headway_min = k * step;
    plan.cost_per_h = std::min(cost_below, cost_above);
    plan.fleet_size = fleet_for_headway(route.cycle_time_min, plan.headway_min);
    if (star < lo) {
      plan.binding = Binding::budget;
    } else if (star > hi) {
      plan.binding = Binding::capacity;
    } else {
      plan.binding = Binding::interior;
    }
    if (!best || plan.cost_per_h < best->cost_per_h) best = plan;
  }

  FleetPlan out = best ? *best : *least_bad;
  if (transition) {
    out.retained_drivers = scenario.driver_share * route.existing_fleet;
    out.additional_savs = std::max(0.0, out.fleet_size - out.retained_drivers);
  } else {
    out.additional_savs = out.fleet_size;
  }
  if (!best && out.diagnostic.empty()) out.diagnostic = "no feasible vehicle size";
  return out;
}

std::vector<RouteSpec> load_routes(std::istream& in) {
  const CsvTable t = CsvTable::parse(in, "routes");
  t.require_columns({"route_id", "length_km", "cycle_time_min", "peak_demand_pax_h", "offpeak_demand_pax_h",
                     "existing_headway_min", "vehicle_size", "fleet_size"});
  const bool has_load = t.has_column("peak_load_pax_h");
  std::vector<RouteSpec> routes;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    RouteSpec s;
    s.id = t.cell(r, 0);
    s.length_km = t.number(r, 1);
    s.cycle_time_min = t.number(r, 2);
    s.peak_demand_pax_h = t.number(r, 3);
    s.offpeak_demand_pax_h = t.number(r, 4);
    s.existing_headway_min = t.number(r, 5);
    s.existing_vehicle_size = static_cast<int>(t.integer(r, 6));
    s.existing_fleet = static_cast<int>(t.integer(r, 7));
    if (has_load) s.peak_load_pax_h = t.number(r, t.column("peak_load_pax_h"));
    s.validate();
    routes.push_back(std::move(s));
  }
  return routes;
}

std::vector<RouteSpec> load_routes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return load_routes(in);
}

}  // namespace sod
