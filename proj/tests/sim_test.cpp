#include "sod/sim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

namespace sod {
namespace {

constexpr double kEps = 1e-6;

RouteSpec make_route(const std::vector<Node>& nodes, const RoutingTable& routing) {
  RouteSpec r;
  r.id = "toy";
  double km = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0) km += routing.distance_m(nodes[i - 1], nodes[i]) / 1000.0;
    r.stops.push_back({nodes[i], km});
  }
  r.length_km = km;
  return r;
}

Request request(int id, double t, Node origin, Node destination) {
  Request r;
  r.id = id;
  r.request_time_s = t;
  r.origin = origin;
  r.destination = destination;
  return r;
}

// Seven nodes 100 m apart (9 s per hop) with stops at nodes 0, 3 and 6.
// With x_f = 0.3 km stop 2 is flexible, so one run is 0 -> 3 (exit),
// flexible window, 3 (return) -> 0.
class LineSim : public ::testing::Test {
 protected:
  LineSim() : net_(make_grid(7, 1, 100.0, 40.0)), routing_(net_) {
    route_ = make_route(nodes_, routing_);
    timetable_ = make_timetable(nodes_, routing_, 30.0);
  }

  SoDSchedule schedule(double xf, double budget_min = 2.0) const {
    ScheduleRequest r;
    r.flexible_km = xf;
    r.headway_min = 10.0;
    r.detour_budget_min = budget_min;
    return build_schedule(route_, timetable_, r);
  }

  ServiceArea area(const SoDSchedule& s) const {
    return ServiceArea(routing_, nodes_, flexible_stop_mask(route_, s.flexible_km), 150.0);
  }

  SimConfig config(double horizon_s = 1200.0) const {
    SimConfig c;
    c.headway_s = 600.0;
    c.fleet_size = 1;
    c.capacity = 20;
    c.horizon_s = horizon_s;
    c.warmup_s = 0.0;
    c.cycle_time_s = timetable_.run_duration_s;
    return c;
  }

  Network net_;
  RoutingTable routing_;
  std::vector<Node> nodes_{0, 3, 6};
  RouteSpec route_;
  RouteTimetable timetable_;
};

TEST(Objective, Examples) {
  ObjectiveCoeffs c;
  c.distance_cost_per_km = 1.0;
  EXPECT_DOUBLE_EQ(objective(10.0, 0.5, 3, 1, c), -3999981.75);
  EXPECT_EQ(objective(0.0, 0.0, 0, 0, c), 0.0);
}

TEST(SnapRequest, FixedEndpointsGoToTheNearestFixedStop) {
  const Network net = make_grid(6, 1, 60.0, 40.0);
  const RoutingTable routing(net);
  const ServiceArea area(routing, {0, 5}, {false, false}, 500.0);
  const Request r = snap_request(request(0, 0.0, 2, 5), area);
  ASSERT_TRUE(r.origin_stop.has_value());
  EXPECT_EQ(*r.origin_stop, 0);  // 120 m against 180 m
  EXPECT_DOUBLE_EQ(r.origin_walk_m, 120.0);
  EXPECT_EQ(r.destination_stop, 5);
  EXPECT_EQ(r.destination_walk_m, 0.0);
}

TEST_F(LineSim, FlexibleEndpointIsServedDoorToDoor) {
  const SoDSchedule s = schedule(0.3);
  const ServiceArea a = area(s);
  const Request snapped = snap_request(request(0, 0.0, 5, 1), a);
  EXPECT_FALSE(snapped.origin_stop.has_value());
  EXPECT_EQ(snapped.origin_walk_m, 0.0);
  EXPECT_EQ(snapped.destination_stop, 0);
  EXPECT_DOUBLE_EQ(snapped.destination_walk_m, 100.0);
}

TEST_F(LineSim, ScheduleShape) {
  const SoDSchedule s = schedule(0.3);
  ASSERT_EQ(s.stops.size(), 4u);
  EXPECT_TRUE(s.stops[1].flex_exit);
  EXPECT_TRUE(s.stops[2].flex_return);
  EXPECT_DOUBLE_EQ(s.stops[1].earliest_s, 57.0);
  EXPECT_DOUBLE_EQ(s.stops[2].earliest_s, 57.0 + 30.0 + 54.0 + 120.0);
  EXPECT_DOUBLE_EQ(s.run_duration_s, 258.0 - 30.0 + 120.0);
}

TEST_F(LineSim, ZeroDemandFollowsTheTimetable) {
  for (double xf : {0.0, 0.3}) {
    const SoDSchedule s = schedule(xf);
    const ServiceArea a = area(s);
    const SimResult res = Simulator(a, s, config(), {}).run();
    ASSERT_EQ(res.runs.size(), 2u);
    std::map<int, std::size_t> seen;
    for (const StopEvent& e : res.stop_events) {
      const std::size_t k = seen[e.run]++;
      ASSERT_LT(k, s.stops.size());
      EXPECT_DOUBLE_EQ(e.start_s, s.stops[k].earliest_s + 600.0 * e.run) << "run " << e.run << " stop " << k;
      EXPECT_LE(e.arrival_s, e.start_s);
      EXPECT_EQ(e.load_after, 0);
    }
    for (const RunRecord& run : res.runs) {
      EXPECT_TRUE(run.completed);
      // Without requests the flexible portion is skipped entirely.
      EXPECT_DOUBLE_EQ(run.distance_m, xf == 0.0 ? 1200.0 : 600.0);
    }
  }
}

TEST_F(LineSim, FlexibleDropoffPrecedesReturnAndFollowsPickup) {
  const SoDSchedule s = schedule(0.3);
  const ServiceArea a = area(s);
  const SimResult res = Simulator(a, s, config(), {request(0, 300.0, 0, 5)}).run();
  const TripRecord& t = res.trips.at(0);
  ASSERT_EQ(t.state, RequestState::served);
  // Joins run 1 at the terminus (departs 630) and is dropped at node 5 on the way out.
  EXPECT_DOUBLE_EQ(t.board_time_s, 630.0);
  EXPECT_DOUBLE_EQ(t.alight_time_s, 705.0);
  EXPECT_DOUBLE_EQ(t.direct_s, 45.0);
  EXPECT_LE(t.ride_s, 2.0 * t.direct_s + kEps);
  std::vector<Node> run1;
  for (const StopEvent& e : res.stop_events) {
    if (e.run == 1) run1.push_back(e.node);
  }
  EXPECT_EQ(run1, (std::vector<Node>{0, 3, 5, 3, 0}));
  EXPECT_NEAR(res.runs[1].distance_m, 1000.0, kEps);
  EXPECT_LE(res.runs[1].realized_detour_s, res.runs[1].budget_s + kEps);
}

TEST_F(LineSim, FixedToFixedRequestJoinsExistingStops) {
  const SoDSchedule s = schedule(0.3);
  const ServiceArea a = area(s);
  Simulator sim(a, s, config(), {request(0, 100.0, 3, 0)});
  for (double t = 0.0; t < 100.0; t += 1.0) sim.step_to(t);
  const std::size_t before = sim.vehicles()[0].plan.size();
  sim.step_to(100.0);
  EXPECT_EQ(sim.requests()[0].state, RequestState::assigned);
  EXPECT_EQ(sim.vehicles()[0].plan.size(), before);
}

TEST_F(LineSim, EarlyArrivalHoldsUntilTheScheduledTime) {
  const SoDSchedule s = schedule(0.3);
  const ServiceArea a = area(s);
  const SimResult res = Simulator(a, s, config(), {}).run();
  // The return stop is reached right after the exit but may not start before it is due.
  const StopEvent& ret = res.stop_events.at(2);
  EXPECT_DOUBLE_EQ(ret.arrival_s, 87.0);
  EXPECT_DOUBLE_EQ(ret.start_s, s.stops[2].earliest_s);
}

TEST_F(LineSim, CheckPlanFlagsWaitAndCapacity) {
  const SoDSchedule s = schedule(0.3);
  const ServiceArea a = area(s);
  SimConfig c = config(3000.0);
  c.capacity = 1;
  Simulator sim(a, s, c, {request(0, 2000.0, 0, 3), request(1, 2000.0, 0, 3)});
  for (double t = 0.0; t <= 1.0; t += 1.0) sim.step_to(t);
  const VehicleState& v = sim.vehicles()[0];
  ASSERT_GE(v.plan.size(), 8u);
  EXPECT_TRUE(sim.check_plan(v).ok());

  VehicleState crowded = v;
  crowded.plan[4].boarding = {0, 1};
  EXPECT_FALSE(sim.check_plan(crowded).capacity);
  crowded.plan[4].boarding = {0};
  EXPECT_TRUE(sim.check_plan(crowded).capacity);

  for (double minutes : {14.0, 16.0}) {
    VehicleState late = v;
    late.plan[4].boarding = {0};
    late.plan[4].earliest_s = 2000.0 + minutes * 60.0 - 30.0;
    late.plan[4].latest_s = late.plan[4].earliest_s;
    EXPECT_EQ(sim.check_plan(late).wait, minutes < 15.0) << minutes;
  }
}

// 5x5 grid, route along the top row then down the right column.
class GridSim : public ::testing::Test {
 protected:
  GridSim() : net_(make_grid(5, 5, 100.0, 40.0)), routing_(net_) {
    route_ = make_route(nodes_, routing_);
    timetable_ = make_timetable(nodes_, routing_, 30.0);
    ScheduleRequest r;
    r.flexible_km = 0.4;
    r.headway_min = 5.0;
    r.detour_budget_min = 3.0;
    schedule_ = build_schedule(route_, timetable_, r);
    area_.emplace(routing_, nodes_, flexible_stop_mask(route_, 0.4), 150.0);
  }

  std::vector<Request> demand(std::uint64_t seed, std::size_t count) const {
    DemandSpec spec;
    for (std::size_t o = 0; o < nodes_.size(); ++o) {
      for (std::size_t d = 0; d < nodes_.size(); ++d) {
        if (o != d) spec.od.push_back({o, d, 3.0});
      }
    }
    spec.horizon_s = 3600.0;
    spec.warmup_s = 0.0;
    auto reqs = generate_requests(spec, *area_, seed);
    if (reqs.size() > count) reqs.resize(count);
    return reqs;
  }

  SimConfig config() const {
    SimConfig c;
    c.headway_s = 300.0;
    c.fleet_size = 2;
    c.capacity = 4;
    c.horizon_s = 3600.0;
    c.warmup_s = 600.0;
    c.cycle_time_s = timetable_.run_duration_s;
    c.objective.distance_cost_per_km = 1.2;
    return c;
  }

  Network net_;
  RoutingTable routing_;
  std::vector<Node> nodes_{0, 2, 4, 14, 24};
  RouteSpec route_;
  RouteTimetable timetable_;
  SoDSchedule schedule_;
  std::optional<ServiceArea> area_;
};

TEST_F(GridSim, ConservationAndRiderConstraints) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto reqs = demand(seed, 20);
    ASSERT_EQ(reqs.size(), 20u);
    const SimResult res = Simulator(*area_, schedule_, config(), reqs).run();
    ASSERT_EQ(res.trips.size(), reqs.size());
    EXPECT_LE(res.max_load_violation, 0);
    int served = 0;
    int rejected = 0;
    for (const TripRecord& t : res.trips) {
      served += t.state == RequestState::served;
      rejected += t.state == RequestState::rejected;
      if (t.state != RequestState::served) continue;
      EXPECT_GE(t.board_time_s, t.request_time_s);
      EXPECT_GT(t.alight_time_s, t.board_time_s);
      EXPECT_LE(t.wait_s, 900.0 + kEps);
      EXPECT_LE(t.ride_s, 2.0 * t.direct_s + kEps);
    }
    EXPECT_EQ(served + rejected, 20) << seed;
    EXPECT_GT(served, 0) << seed;
    for (const RunRecord& run : res.runs) {
      if (run.completed && !std::isnan(run.realized_detour_s)) { EXPECT_LE(run.realized_detour_s, run.budget_s + kEps); }
    }
    for (const StopEvent& e : res.stop_events) EXPECT_LE(e.load_after, 4);
  }
}

TEST_F(GridSim, RerunIsIdentical) {
  const auto reqs = demand(3, 20);
  const SimResult a = Simulator(*area_, schedule_, config(), reqs).run();
  const SimResult b = Simulator(*area_, schedule_, config(), reqs).run();
  EXPECT_EQ(trips_csv(a.trips), trips_csv(b.trips));
  EXPECT_EQ(vehicles_csv(a.vehicles), vehicles_csv(b.vehicles));
}

TEST_F(GridSim, CommitsTheFirstCheapestFeasibleCandidate) {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto reqs = demand(seed, 20);
    Simulator sim(*area_, schedule_, config(), reqs);
    std::vector<InsertionCandidate> audit;
    sim.set_audit(&audit);
    const double first = reqs[0].request_time_s;
    for (double t = 0.0; t < first + 1.0; t += 1.0) {
      sim.step_to(t);
      if (!audit.empty()) break;
    }
    if (sim.requests()[0].state != RequestState::assigned) continue;
    if (reqs.size() > 1 && reqs[1].request_time_s <= sim.now()) continue;
    const InsertionCandidate* best = nullptr;
    for (const InsertionCandidate& c : audit) {
      if (!c.flags.ok()) continue;
      EXPECT_LT(c.delta_objective, 0.0);  // the service reward outweighs any detour
      if (!best || c.delta_objective < best->delta_objective) best = &c;
    }
    ASSERT_NE(best, nullptr);
    const VehicleState& v = sim.vehicles()[static_cast<std::size_t>(best->vehicle)];
    const bool boarded = std::any_of(v.plan.begin(), v.plan.end(), [](const PlanStop& p) {
      return std::find(p.boarding.begin(), p.boarding.end(), 0) != p.boarding.end();
    });
    EXPECT_TRUE(boarded) << seed;
    ++checked;
  }
  EXPECT_GT(checked, 3);
}

TEST_F(GridSim, VehicleDistanceCountsOnlyAfterWarmup) {
  const SimResult res = Simulator(*area_, schedule_, config(), {}).run();
  for (const VehicleRecord& v : res.vehicles) {
    EXPECT_DOUBLE_EQ(v.deployed_s, 3000.0);
    EXPECT_GT(v.distance_m, 0.0);
  }
  double counted = 0.0;
  double all = 0.0;
  for (const VehicleRecord& v : res.vehicles) counted += v.distance_m;
  for (const RunRecord& r : res.runs) all += r.distance_m;
  EXPECT_LT(counted, all);
}

}  // namespace
}  // namespace sod
