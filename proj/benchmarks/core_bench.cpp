#include <benchmark/benchmark.h>

#include "sod/demand.hpp"
#include "sod/detour.hpp"
#include "sod/network.hpp"
#include "sod/sim.hpp"

namespace {

void BM_ShortestPath(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const sod::Network net = sod::make_grid(n, n, 200.0, 25.0);
  const sod::Node last = static_cast<sod::Node>(n * n - 1);
  for (auto _ : state) benchmark::DoNotOptimize(sod::shortest_path(net, 0, last));
}
BENCHMARK(BM_ShortestPath)->Arg(16)->Arg(32)->Arg(64);

void BM_RoutingTable(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const sod::Network net = sod::make_grid(n, n, 200.0, 25.0);
  for (auto _ : state) benchmark::DoNotOptimize(sod::RoutingTable(net));
}
BENCHMARK(BM_RoutingTable)->Arg(16)->Arg(31);

void BM_DetourCdf(benchmark::State& state) {
  sod::DetourParams p;
  p.requests_per_run = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sod::detour_cdf(0.8 * p.requests_per_run + 1.0, p));
}
BENCHMARK(BM_DetourCdf)->Arg(2)->Arg(20)->Arg(60);

void BM_RequiredBudget(benchmark::State& state) {
  sod::DetourParams p;
  p.requests_per_run = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sod::required_detour_budget(p));
}
BENCHMARK(BM_RequiredBudget)->Arg(5)->Arg(30);

// Three hours of a 16-stop line on a 31x7 grid with the outer 2 km flexible.
void BM_SimulateRoute(benchmark::State& state) {
  const sod::Network net = sod::make_grid(31, 7, 200.0, 25.0);
  const sod::RoutingTable routing(net);
  std::vector<sod::Node> nodes;
  sod::RouteSpec route;
  route.id = "bench";
  route.length_km = 6.0;
  route.cycle_time_min = 40.0;
  for (int i = 0; i < 16; ++i) {
    const sod::Node node = static_cast<sod::Node>(3 * 31 + 2 * i);
    nodes.push_back(node);
    route.stops.push_back({node, 0.4 * i});
  }
  const sod::RouteTimetable tt = sod::make_timetable(nodes, routing, 30.0);
  sod::ScheduleRequest req;
  req.flexible_km = 2.0;
  req.headway_min = 10.0;
  req.detour_budget_min = 10.0;
  const sod::SoDSchedule schedule = sod::build_schedule(route, tt, req);
  const sod::ServiceArea area(routing, nodes, sod::flexible_stop_mask(route, 2.0), 500.0);

  sod::DemandSpec demand;
  for (std::size_t o = 0; o < nodes.size(); ++o) {
    for (std::size_t d = 0; d < nodes.size(); ++d) {
      if (o != d) demand.od.push_back({o, d, 1.5});
    }
  }
  sod::SimConfig cfg;
  cfg.headway_s = 600.0;
  cfg.fleet_size = 6;
  cfg.capacity = 20;
  cfg.cycle_time_s = tt.run_duration_s;
  std::uint64_t rep = 0;
  for (auto _ : state) {
    auto requests = sod::generate_requests(demand, area, 1, rep++);
    benchmark::DoNotOptimize(sod::Simulator(area, schedule, cfg, std::move(requests)).run());
  }
}
BENCHMARK(BM_SimulateRoute)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
