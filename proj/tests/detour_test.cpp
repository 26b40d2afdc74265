#include "sod/detour.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace sod {
namespace {

DetourParams params(double lambda) {
  DetourParams p;
  p.requests_per_run = lambda;
  return p;
}

// n dwell times plus a there-and-back deviation of Uniform(0, max walk) per
// request, driven at the planning speed. Minutes.
class DetourSampler {
 public:
  explicit DetourSampler(std::uint64_t seed) : rng_(seed) {}

  double given_n(int n, const DetourParams& p) {
    std::uniform_real_distribution<double> walk(0.0, p.max_walk_m);
    const double m_per_min = p.planning_speed_kmh * 1000.0 / 60.0;
    double t = n * p.dwell_s / 60.0;
    for (int i = 0; i < n; ++i) t += 2.0 * walk(rng_) / m_per_min;
    return t;
  }

  double draw(const DetourParams& p) {
    std::poisson_distribution<int> count(p.requests_per_run);
    return given_n(count(rng_), p);
  }

 private:
  std::mt19937_64 rng_;
};

TEST(IrwinHall, Examples) {
  EXPECT_DOUBLE_EQ(irwin_hall_cdf(0.5, 1), 0.5);
  EXPECT_NEAR(irwin_hall_cdf(0.5, 2), 0.125, 1e-12);
  for (int n = 1; n <= 40; ++n) EXPECT_DOUBLE_EQ(irwin_hall_cdf(n, n), 1.0) << n;
  EXPECT_EQ(irwin_hall_cdf(0.0, 3), 0.0);
}

TEST(IrwinHall, SymmetricAndMonotone) {
  for (int n : {2, 5, 12, 25}) {
    EXPECT_NEAR(irwin_hall_cdf(0.5 * n, n), 0.5, 1e-9) << n;
    double prev = 0.0;
    for (double x = 0.0; x <= n; x += n / 50.0) {
      const double f = irwin_hall_cdf(x, n);
      EXPECT_GE(f, prev - 1e-12);
      EXPECT_NEAR(f + irwin_hall_cdf(n - x, n), 1.0, 1e-9);
      prev = f;
    }
  }
}

TEST(DetourGivenN, Examples) {
  const DetourParams p = params(1.0);
  EXPECT_EQ(detour_cdf_given_n(1.4, 3, p), 0.0);  // 3 dwell times alone take 1.5 min
  EXPECT_EQ(detour_cdf_given_n(0.0, 0, p), 1.0);
}

TEST(DetourGivenN, MatchesMonteCarlo) {
  const DetourParams p = params(1.0);
  DetourSampler s(11);
  const int samples = 1000000;
  int hits = 0;
  for (int i = 0; i < samples; ++i) hits += s.given_n(3, p) <= 4.0;
  EXPECT_NEAR(detour_cdf_given_n(4.0, 3, p), static_cast<double>(hits) / samples, 0.003);
}

TEST(DetourCdf, Examples) {
  for (double t : {0.0, 1.0, 10.0}) EXPECT_EQ(detour_cdf(t, params(0.0)), 1.0);
  EXPECT_NEAR(detour_cdf(0.0, params(1.0)), std::exp(-1.0), 1e-12);
}

TEST(DetourCdf, MatchesMonteCarloForLambdaTwo) {
  const DetourParams p = params(2.0);
  DetourSampler s(5);
  std::vector<double> draws(1000000);
  for (double& d : draws) d = s.draw(p);
  std::sort(draws.begin(), draws.end());
  for (double t = 0.0; t <= 8.0; t += 0.25) {
    const double empirical =
        static_cast<double>(std::upper_bound(draws.begin(), draws.end(), t) - draws.begin()) / draws.size();
    EXPECT_NEAR(detour_cdf(t, p), empirical, 0.01) << "t = " << t;
  }
}

TEST(RequiredBudget, Examples) {
  EXPECT_EQ(required_detour_budget(params(0.0)), 0.0);

  DetourParams p = params(1.0);
  p.confidence = 0.5;
  DetourSampler s(3);
  std::vector<double> draws(400000);
  for (double& d : draws) d = s.draw(p);
  std::nth_element(draws.begin(), draws.begin() + draws.size() / 2, draws.end());
  EXPECT_NEAR(required_detour_budget(p), draws[draws.size() / 2], 0.05);
}

TEST(RequiredBudget, InvertsTheCdfAndIsMonotone) {
  for (double lambda : {0.5, 2.0, 5.0, 20.0}) {
    double prev = 0.0;
    for (double c : {0.5, 0.8, 0.95}) {
      DetourParams p = params(lambda);
      p.confidence = c;
      const double t = required_detour_budget(p);
      EXPECT_GE(detour_cdf(t, p), c);
      // A zero budget is exact when the no-request atom already covers c.
      if (t > 0.0) { EXPECT_LE(detour_cdf(t, p), c + 0.005); }
      EXPECT_GE(t, prev);
      prev = t;
    }
  }
}

TEST(MaxDetourBudget, Examples) {
  const DetourCap none = max_detour_budget(40, 3.5, 3.5);
  EXPECT_EQ(none.minutes, 0.0);
  EXPECT_FALSE(none.diagnostic.empty());
  EXPECT_NEAR(max_detour_budget(40, 5, 3.5).minutes, 17.14, 0.005);
  EXPECT_NEAR(max_detour_budget(90, 5, 3).minutes, 60.0, 1e-12);
}

TEST(DetourCdfTable, CoversTheRangeMonotonically) {
  const auto rows = detour_cdf_table(params(3.0), 10.0, 0.25);
  ASSERT_EQ(rows.size(), 41u);
  EXPECT_EQ(rows.front().first, 0.0);
  EXPECT_DOUBLE_EQ(rows.back().first, 10.0);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i].second, rows[i - 1].second);
}

// A 6 km line of 16 stops every 400 m on a 200 m grid at 40 km/h.
class ScheduleTest : public ::testing::Test {
 protected:
  ScheduleTest() : net_(make_grid(31, 1, 200.0, 40.0)), routing_(net_) {
    route_.id = "line";
    route_.length_km = 6.0;
    route_.cycle_time_min = 40.0;
    route_.peak_demand_pax_h = 351;
    route_.existing_headway_min = 10;
    route_.existing_fleet = 4;
    for (int i = 0; i < 16; ++i) {
      route_.stops.push_back({2 * i, 0.4 * i});
      nodes_.push_back(2 * i);
    }
    timetable_ = make_timetable(nodes_, routing_, 30.0);
  }

  SoDSchedule build(double xf, double budget, double headway = 5.0, double peak = 0.0) const {
    ScheduleRequest r;
    r.flexible_km = xf;
    r.headway_min = headway;
    r.detour_budget_min = budget;
    r.peak_headway_min = peak;
    return build_schedule(route_, timetable_, r);
  }

  static void expect_ordered(const SoDSchedule& s) {
    for (std::size_t i = 0; i < s.stops.size(); ++i) {
      EXPECT_LE(s.stops[i].earliest_s, s.stops[i].latest_s);
      if (i > 0) { EXPECT_GT(s.stops[i].earliest_s, s.stops[i - 1].earliest_s); }
    }
  }

  Network net_;
  RoutingTable routing_;
  RouteSpec route_;
  std::vector<Node> nodes_;
  RouteTimetable timetable_;
};

TEST_F(ScheduleTest, TimetableVisitsEveryStopOutAndBack) {
  ASSERT_EQ(timetable_.visits.size(), 31u);
  EXPECT_EQ(timetable_.visits[15].stop, 15u);
  EXPECT_TRUE(timetable_.visits[15].outbound);
  EXPECT_FALSE(timetable_.visits[16].outbound);
  // 30 hops of 36 s driving plus 31 dwell times.
  EXPECT_DOUBLE_EQ(timetable_.run_duration_s, 30 * 36.0 + 31 * 30.0);
}

TEST_F(ScheduleTest, ZeroFlexibleLengthKeepsTheTimetable) {
  const SoDSchedule s = build(0.0, 7.0);
  ASSERT_EQ(s.stops.size(), timetable_.visits.size());
  EXPECT_FALSE(s.flexible_portion);
  EXPECT_EQ(s.detour_budget_min, 0.0);
  for (std::size_t i = 0; i < s.stops.size(); ++i) {
    EXPECT_EQ(s.stops[i].stop, timetable_.visits[i].stop);
    EXPECT_DOUBLE_EQ(s.stops[i].earliest_s, timetable_.visits[i].offset_s);
    EXPECT_DOUBLE_EQ(s.stops[i].latest_s, timetable_.visits[i].offset_s);
  }
  EXPECT_DOUBLE_EQ(s.run_duration_s, timetable_.run_duration_s);
  expect_ordered(s);
}

TEST_F(ScheduleTest, FullyFlexibleKeepsOnlyTheTerminus) {
  const SoDSchedule s = build(6.0, 10.0);
  ASSERT_EQ(s.stops.size(), 2u);
  EXPECT_TRUE(s.stops[0].flex_exit);
  EXPECT_TRUE(s.stops[1].flex_return);
  EXPECT_EQ(s.stops[0].stop, 0u);
  EXPECT_EQ(s.stops[1].stop, 0u);
  EXPECT_DOUBLE_EQ(s.flexible_nominal_s, 30 * 36.0);
  EXPECT_DOUBLE_EQ(s.stops[1].earliest_s - (s.stops[0].earliest_s + 30.0), 30 * 36.0 + 600.0);
  expect_ordered(s);
}

TEST_F(ScheduleTest, SlackSitsBetweenExitAndReturn) {
  const SoDSchedule s = build(2.0, 9.0);
  ASSERT_TRUE(s.flexible_portion);
  std::size_t exit = 0;
  std::size_t ret = 0;
  for (std::size_t i = 0; i < s.stops.size(); ++i) {
    if (s.stops[i].flex_exit) exit = i;
    if (s.stops[i].flex_return) ret = i;
  }
  ASSERT_EQ(ret, exit + 1);
  // Stops 11..15 (chainage above 4 km) are flexible; stop 10 is the boundary.
  EXPECT_EQ(s.stops[exit].stop, 10u);
  const double gap = s.stops[ret].earliest_s - (s.stops[exit].earliest_s + s.stops[exit].dwell_s);
  EXPECT_DOUBLE_EQ(s.flexible_nominal_s, 10 * 36.0);
  EXPECT_DOUBLE_EQ(gap, s.flexible_nominal_s + 9.0 * 60.0);
  EXPECT_DOUBLE_EQ(s.run_duration_s, timetable_.run_duration_s - 9 * 30.0 + 9.0 * 60.0);
  expect_ordered(s);
}

TEST_F(ScheduleTest, BudgetIsClippedByTheFleetCap) {
  DetourParams p = params(3.58);
  const double required = required_detour_budget(p);
  const SoDSchedule s = build(2.0, required, 5.0, 3.5);
  EXPECT_DOUBLE_EQ(s.requested_budget_min, required);
  EXPECT_DOUBLE_EQ(s.detour_budget_min, std::min(required, max_detour_budget(40, 5.0, 3.5).minutes));

  const SoDSchedule clipped = build(2.0, 30.0, 5.0, 3.5);
  EXPECT_NEAR(clipped.detour_budget_min, 17.142857, 1e-6);
  EXPECT_FALSE(clipped.diagnostic.empty());
}

TEST_F(ScheduleTest, FlexibleMaskFollowsChainage) {
  const auto mask = flexible_stop_mask(route_, 2.0);
  for (std::size_t i = 0; i < mask.size(); ++i) EXPECT_EQ(mask[i], i > 10) << i;
  EXPECT_THROW(flexible_stop_mask(route_, 7.0), std::invalid_argument);
}

}  // namespace
}  // namespace sod
