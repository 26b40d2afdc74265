#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "sod/csv.hpp"
#include "sodtool/app.hpp"

namespace sodtool {
namespace {

sod::RouteSpec load_single_route(const fs::path& route_file, const fs::path& stops_file, const sod::Network& net,
                                 std::vector<sod::Node>& stop_nodes) {
  auto routes = sod::load_routes(route_file);
  if (routes.size() != 1) throw ConfigError(route_file.string() + ": expected exactly one route");
  sod::RouteSpec route = std::move(routes.front());

  const sod::CsvTable t = sod::CsvTable::read(stops_file);
  t.require_columns({"seq", "node_id", "chainage_km"});
  for (std::size_t r = 0; r < t.rows(); ++r) {
    if (t.integer(r, 0) != static_cast<long long>(r)) {
      throw ConfigError(stops_file.string() + ":" + std::to_string(t.line_of(r)) + ": stops must be numbered 0, 1, ...");
    }
    const auto id = t.integer(r, 1);
    route.stops.push_back({id, t.number(r, 2)});
    stop_nodes.push_back(net.require(id));
  }
  if (route.stops.size() < 2) throw ConfigError(stops_file.string() + ": a route needs at least two stops");
  route.validate();
  return route;
}

}  // namespace

Scenario::Scenario(ScenarioConfig config)
    : cfg_(std::move(config)),
      net_(sod::load_network(cfg_.edges, cfg_.nodes)),
      routing_(net_),
      route_(load_single_route(cfg_.route, cfg_.stops, net_, stop_nodes_)) {
  demand_.od = sod::load_od(cfg_.od, stop_nodes_.size());
  demand_.catchment_radius_m = cfg_.catchment_m;
  demand_.access = cfg_.access;
  demand_.horizon_s = cfg_.horizon_h * 3600.0;
  demand_.warmup_s = cfg_.warmup_h * 3600.0;
  demand_.walk_speed_kmh = cfg_.walk_speed_kmh;
  demand_.validate();
  timetable_ = sod::make_timetable(stop_nodes_, routing_, cfg_.dwell_s);
}

std::vector<double> Scenario::xf_grid() const {
  std::vector<double> grid;
  if (!cfg_.xf_km.empty()) {
    for (double x : cfg_.xf_km) {
      if (x < 0.0 || x > route_.length_km + 1e-9) {
        throw ConfigError("x_f = " + sod::format_number(x) + " km lies outside [0, " +
                          sod::format_number(route_.length_km) + "]");
      }
      grid.push_back(x);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
  }
  const double step = *cfg_.xf_step_km;
  const int n = static_cast<int>(std::floor(route_.length_km / step + 1e-9));
  for (int i = 0; i <= n; ++i) grid.push_back(i * step);
  if (route_.length_km - grid.back() > 1e-9) grid.push_back(route_.length_km);
  return grid;
}

double Scenario::offpeak_headway(double alpha, const sod::FleetPlan& plan) const {
  for (const auto& [a, h] : cfg_.offpeak_headway_min) {
    if (std::abs(a - alpha) < 1e-9) return h;
  }
  return plan.headway_min;
}

ScenarioPoint Scenario::point(double alpha, double xf_km, bool enforce_latest) const {
  ScenarioPoint p;
  p.alpha = alpha;
  p.xf_km = xf_km;
  p.plan = sod::plan_route(route_, cfg_.costs, sod::PlanningScenario::for_alpha(alpha));
  if (p.plan.binding == sod::Binding::infeasible) {
    throw InfeasibleError("route " + route_.id + ", alpha " + sod::format_number(alpha) + ": " + p.plan.diagnostic);
  }
  p.offpeak_headway_min = offpeak_headway(alpha, p.plan);

  const std::vector<bool> mask = sod::flexible_stop_mask(route_, xf_km);
  p.area.emplace(routing_, stop_nodes_, mask, cfg_.catchment_m);

  if (xf_km > 0.0) {
    const double flexible_per_h = sod::expected_flexible_endpoint_rate(demand_, *p.area);
    p.requests_per_run = flexible_per_h * p.offpeak_headway_min / 60.0;
    sod::DetourParams dp;
    dp.requests_per_run = p.requests_per_run;
    dp.max_walk_m = cfg_.access.max_walk_m;
    dp.planning_speed_kmh = cfg_.planning_speed_kmh;
    dp.dwell_s = cfg_.dwell_s;
    dp.confidence = cfg_.confidence;
    p.required_budget_min = sod::required_detour_budget(dp);
  }
  p.cap = sod::max_detour_budget(route_.cycle_time_min, p.offpeak_headway_min, p.plan.headway_min);

  sod::ScheduleRequest req;
  req.flexible_km = xf_km;
  req.headway_min = p.offpeak_headway_min;
  req.detour_budget_min = p.required_budget_min;
  req.peak_headway_min = p.plan.headway_min;
  p.schedule = sod::build_schedule(route_, timetable_, req);

  const sod::VehicleClass& cls = cfg_.costs.find(p.plan.vehicle_size);
  p.sim.headway_s = p.offpeak_headway_min * 60.0;
  p.sim.fleet_size = p.plan.fleet_size;
  p.sim.capacity = p.plan.vehicle_size;
  p.sim.horizon_s = cfg_.horizon_h * 3600.0;
  p.sim.warmup_s = cfg_.warmup_h * 3600.0;
  p.sim.max_wait_s = cfg_.max_wait_min * 60.0;
  p.sim.max_ride_factor = cfg_.max_ride_factor;
  p.sim.max_walk_m = cfg_.access.max_walk_m;
  p.sim.walk_speed_kmh = cfg_.walk_speed_kmh;
  p.sim.cycle_time_s = route_.cycle_time_min * 60.0;
  p.sim.enforce_latest = enforce_latest;
  p.sim.objective.distance_cost_per_km = cls.operating_cost_per_h / cfg_.planning_speed_kmh;
  p.sim.objective.value_of_time_per_h = cfg_.costs.value_of_time_per_h;

  p.coeffs = sod::CostCoefficients::for_vehicle(cls, cfg_.planning_speed_kmh);
  p.coeffs.value_of_time_per_h = cfg_.costs.value_of_time_per_h;
  p.coeffs.waiting_weight = cfg_.costs.waiting_weight;
  p.coeffs.driver_cost_per_h = cfg_.costs.driver_cost_per_h;
  p.coeffs.walk_speed_kmh = cfg_.walk_speed_kmh;
  if (alpha > 0.0) {
    p.driver_vehicles = std::min(p.plan.fleet_size, static_cast<int>(std::lround(alpha * route_.existing_fleet)));
  }
  return p;
}

sod::SimResult simulate_once(const Scenario& scenario, const ScenarioPoint& point, std::uint64_t seed,
                             int replication) {
  auto requests = sod::generate_requests(scenario.demand(), *point.area, seed, static_cast<std::uint64_t>(replication));
  sod::Simulator sim(*point.area, point.schedule, point.sim, std::move(requests));
  return sim.run();
}

std::vector<Replication> run_replications(const Scenario& scenario, const ScenarioPoint& point, int count,
                                          std::uint64_t seed, int jobs, bool keep_results) {
  std::vector<Replication> out(static_cast<std::size_t>(count));
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, count);

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        sod::SimResult res = simulate_once(scenario, point, seed, i);
        Replication& r = out[static_cast<std::size_t>(i)];
        r.summary = sod::summarize(res, point.coeffs, point.driver_vehicles, i, seed);
        if (keep_results) r.result = std::move(res);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace sodtool
