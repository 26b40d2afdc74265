#include "sod/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

namespace sod {
namespace {

TripRecord served(double access_m, double wait_s, double ride_s) {
  TripRecord t;
  t.state = RequestState::served;
  t.access_m = access_m;
  t.wait_s = wait_s;
  t.ride_s = ride_s;
  t.board_time_s = 0.0;
  t.alight_time_s = ride_s;
  return t;
}

VehicleRecord vehicle(int id, double distance_m, double deployed_s) {
  VehicleRecord v;
  v.vehicle_id = id;
  v.distance_m = distance_m;
  v.deployed_s = deployed_s;
  return v;
}

CostCoefficients capital_only(double per_h) {
  CostCoefficients c;
  c.vehicle_cost_per_h = per_h;
  return c;
}

TEST(UserCost, WeightsEachComponent) {
  const CostCoefficients c;
  EXPECT_DOUBLE_EQ(user_cost(served(0.0, 0.0, 1800.0), c), 8.25);
  // 300 s walking (weight 2), 600 s waiting (weight 1.5), 30 min riding.
  const double access_m = 5000.0 / 12.0;
  const double expected = 16.5 * (2.0 / 12.0 + 1.5 / 6.0 + 0.5);
  EXPECT_NEAR(user_cost(served(access_m, 600.0, 1800.0), c), expected, 1e-9);
  EXPECT_NEAR(user_cost(served(2 * access_m, 1200.0, 3600.0), c), 2.0 * expected, 1e-9);
  TripRecord rejected;
  rejected.state = RequestState::rejected;
  EXPECT_THROW(user_cost(rejected, c), MetricsError);
}

TEST(VehicleCost, CapitalDistanceAndDriver) {
  const CostCoefficients c = capital_only(4.15);
  EXPECT_DOUBLE_EQ(vehicle_cost(vehicle(0, 0.0, 3600.0), c), 4.15);
  EXPECT_DOUBLE_EQ(vehicle_cost(vehicle(0, 0.0, 3600.0), c, true), 4.15 + 15.3);
  EXPECT_EQ(vehicle_cost(vehicle(0, 0.0, 0.0), c, true), 0.0);
  CostCoefficients d = c;
  d.distance_cost_per_km = 0.2;
  EXPECT_NEAR(vehicle_cost(vehicle(0, 12500.0, 7200.0), d), 0.2 * 12.5 + 2 * 4.15, 1e-12);
}

TEST(CostCoefficients, ForVehicleSplitsOperatingAndCapital) {
  const CostCoefficients c = CostCoefficients::for_vehicle({20, 11.05, 4.15}, 25.0);
  EXPECT_DOUBLE_EQ(c.distance_cost_per_km, 4.15 / 25.0);
  EXPECT_NEAR(c.vehicle_cost_per_h, 6.9, 1e-12);
  EXPECT_THROW(CostCoefficients::for_vehicle({20, 11.05, 4.15}, 0.0), MetricsError);
}

TEST(GeneralizedCost, SumsServedUsersAndVehicles) {
  const CostCoefficients c = capital_only(4.15);
  TripRecord rejected;
  rejected.state = RequestState::rejected;
  std::vector<TripRecord> trips = {served(0.0, 0.0, 1800.0), rejected};
  std::vector<VehicleRecord> fleet = {vehicle(0, 0.0, 3600.0)};
  EXPECT_NEAR(generalized_cost(trips, fleet, c), 12.40, 1e-12);
  EXPECT_NEAR(generalized_cost(trips, fleet, c, 1), 12.40 + 15.3, 1e-12);
}

TEST(GeneralizedCost, InvariantUnderPermutation) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TripRecord> trips;
  for (int i = 0; i < 40; ++i) trips.push_back(served(500.0 * u(rng), 900.0 * u(rng), 1800.0 * u(rng)));
  std::vector<VehicleRecord> fleet;
  for (int i = 0; i < 6; ++i) fleet.push_back(vehicle(i, 40000.0 * u(rng), 7200.0));
  CostCoefficients c = capital_only(6.9);
  c.distance_cost_per_km = 0.17;
  const double before = generalized_cost(trips, fleet, c, 2);
  std::shuffle(trips.begin(), trips.end(), rng);
  std::shuffle(fleet.begin(), fleet.end(), rng);
  EXPECT_NEAR(generalized_cost(trips, fleet, c, 2), before, 1e-9 * before);
}

SimResult synthetic_result() {
  SimResult r;
  r.warmup_s = 600.0;
  TripRecord early = served(0.0, 60.0, 300.0);
  early.in_warmup = true;
  r.trips = {early, served(100.0, 120.0, 600.0), served(200.0, 240.0, 900.0), served(0.0, 0.0, 60.0)};
  TripRecord rejected;
  rejected.state = RequestState::rejected;
  r.trips.push_back(rejected);
  r.vehicles = {vehicle(0, 30000.0, 7200.0), vehicle(1, 25000.0, 7200.0)};
  RunRecord warm;
  warm.start_s = 0.0;
  warm.completed = true;
  warm.pax_from_terminus = 9;
  RunRecord a = warm;
  a.start_s = 900.0;
  a.pax_from_terminus = 2;
  RunRecord b = warm;
  b.start_s = 1500.0;
  b.pax_from_terminus = 3;
  r.runs = {warm, a, b};
  return r;
}

TEST(Summarize, CostsAreAdditive) {
  CostCoefficients c = capital_only(6.9);
  c.distance_cost_per_km = 0.166;
  const SimResult res = synthetic_result();
  const ReplicationSummary s = summarize(res, c, 1, 4, 99);
  EXPECT_EQ(s.requests, 4);
  EXPECT_EQ(s.served, 3);
  EXPECT_EQ(s.rejected, 1);
  EXPECT_NEAR(s.generalized_cost, s.user_cost + s.operator_cost, 1e-9);
  EXPECT_NEAR(s.operator_cost, s.operating_cost + s.capital_cost, 1e-9);
  EXPECT_NEAR(s.capital_cost, 6.9 * 4.0, 1e-9);
  EXPECT_NEAR(s.operating_cost, 0.166 * 55.0 + 15.3 * 2.0, 1e-9);
  EXPECT_DOUBLE_EQ(s.vehicle_km, 55.0);
  EXPECT_DOUBLE_EQ(s.median_wait_s, 120.0);
  EXPECT_DOUBLE_EQ(s.median_ride_s, 600.0);
  EXPECT_DOUBLE_EQ(s.pax_from_terminus_per_run, 2.5);
  std::vector<TripRecord> counted(res.trips.begin() + 1, res.trips.end());
  EXPECT_NEAR(s.generalized_cost, generalized_cost(counted, res.vehicles, c, 1), 1e-9);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile({7}, 0.75), 7.0);
  EXPECT_DOUBLE_EQ(quantile({10, 20, 30, 40, 50}, 0.1), 14.0);
  EXPECT_THROW(quantile({}, 0.5), MetricsError);
}

TEST(EmpiricalCdf, StepsOverDistinctValues) {
  const auto cdf = empirical_cdf({3, 1, 2, 2});
  ASSERT_EQ(cdf.size(), 3u);
  EXPECT_DOUBLE_EQ(cdf[0].cum_prob, 0.25);
  EXPECT_DOUBLE_EQ(cdf[1].value, 2.0);
  EXPECT_DOUBLE_EQ(cdf[1].cum_prob, 0.75);
  EXPECT_EQ(cdf.back().cum_prob, 1.0);
  EXPECT_TRUE(empirical_cdf({}).empty());
}

TEST(Aggregate, SingleReplicationHasNoSpread) {
  const ReplicationSummary s = summarize(synthetic_result(), capital_only(1.0), 0);
  const MetricsSummary m = aggregate({s});
  EXPECT_EQ(m.replications, 1);
  for (const auto& [name, st] : m.stats) {
    EXPECT_EQ(st.q25, st.median) << name;
    EXPECT_EQ(st.q75, st.median) << name;
  }
  EXPECT_EQ(m.cdfs.at("wait_s").back().cum_prob, 1.0);
  const auto j = nlohmann::json::parse(summary_json(m));
  EXPECT_EQ(j["replications"], 1);
  EXPECT_EQ(j["metrics"].size(), summary_metrics().size());
}

MetricsSummary with_cost(double cost, double served = 10.0) {
  MetricsSummary m;
  m.replications = 1;
  for (const std::string& name : summary_metrics()) m.stats[name] = {1.0, 1.0, 1.0};
  m.stats["generalized_cost"] = {cost, cost, cost};
  m.stats["served"] = {served, served, served};
  m.stats["rejected"] = {0.0, 0.0, 0.0};
  return m;
}

std::vector<std::pair<double, MetricsSummary>> sweep_of(const std::vector<double>& costs) {
  std::vector<std::pair<double, MetricsSummary>> out;
  for (std::size_t i = 0; i < costs.size(); ++i) out.emplace_back(static_cast<double>(i), with_cost(costs[i]));
  return out;
}

TEST(SweepAnalysis, ArgminOfMedianCost) {
  EXPECT_EQ(sweep_analysis(sweep_of({5, 5, 5, 5})).best_x_f_km, 0.0);
  EXPECT_EQ(sweep_analysis(sweep_of({9, 8, 7, 6, 5})).best_x_f_km, 4.0);
  EXPECT_EQ(sweep_analysis(sweep_of({9, 7, 6, 4, 6, 8})).best_x_f_km, 3.0);
  EXPECT_EQ(sweep_analysis(sweep_of({9, 4, 6, 4})).best_x_f_km, 1.0);
  auto shuffled = sweep_of({9, 7, 6, 4, 6, 8});
  std::reverse(shuffled.begin(), shuffled.end());
  EXPECT_EQ(sweep_analysis(shuffled).best_x_f_km, 3.0);
  auto no_base = sweep_of({1, 2});
  no_base.erase(no_base.begin());
  EXPECT_THROW(sweep_analysis(no_base), MetricsError);
}

TEST(SweepAnalysis, NormalisesToTheBaseline) {
  auto by_xf = sweep_of({8, 10, 6});
  by_xf[2].second.stats["rejected"] = {3.0, 3.0, 3.0};
  const SweepResult r = sweep_analysis(by_xf);
  ASSERT_EQ(r.rows.size(), 3 * summary_metrics().size());
  for (const SweepRow& row : r.rows) {
    if (row.x_f_km == 0.0) { EXPECT_EQ(row.normalized_pct, 100.0) << row.metric; }
    if (row.metric == "generalized_cost" && row.x_f_km == 1.0) { EXPECT_DOUBLE_EQ(row.normalized_pct, 125.0); }
    if (row.metric == "rejected" && row.x_f_km == 1.0) { EXPECT_EQ(row.normalized_pct, 100.0); }
    if (row.metric == "rejected" && row.x_f_km == 2.0) { EXPECT_TRUE(std::isnan(row.normalized_pct)); }
  }
  const std::string csv = sweep_csv(r.rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(r.rows.size() + 1));
}

}  // namespace
}  // namespace sod
