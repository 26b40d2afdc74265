#include "sod/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "sod/csv.hpp"

namespace sod {
namespace {

double median_of(std::vector<double> v) { return v.empty() ? 0.0 : quantile(std::move(v), 0.5); }

const std::vector<std::string> kCdfMetrics = {"access_s", "wait_s", "ride_s"};

std::string csv_number(double v) { return std::isnan(v) ? std::string() : format_number(v); }

}  // namespace

CostCoefficients CostCoefficients::for_vehicle(const VehicleClass& cls, double planning_speed_kmh) {
  if (!(planning_speed_kmh > 0.0)) throw MetricsError("planning speed must be positive");
  CostCoefficients c;
  c.distance_cost_per_km = cls.operating_cost_per_h / planning_speed_kmh;
  c.vehicle_cost_per_h = cls.operational_cost_per_h - cls.operating_cost_per_h;
  return c;
}

void CostCoefficients::validate() const {
  const double all[] = {access_weight, waiting_weight, value_of_time_per_h, distance_cost_per_km, vehicle_cost_per_h,
                        driver_cost_per_h};
  for (double v : all) {
    if (!(v >= 0.0)) throw MetricsError("cost coefficients must be non-negative");
  }
  if (!(walk_speed_kmh > 0.0)) throw MetricsError("walk speed must be positive");
}

double user_cost(const TripRecord& trip, const CostCoefficients& c) {
  if (trip.state != RequestState::served) {
    throw MetricsError("request " + std::to_string(trip.request_id) + " was not served");
  }
  const double access_h = trip.access_s(c.walk_speed_kmh) / 3600.0;
  const double wait_h = trip.wait_s / 3600.0;
  const double ride_h = trip.ride_s / 3600.0;
  return c.value_of_time_per_h * (c.access_weight * access_h + c.waiting_weight * wait_h + ride_h);
}

double vehicle_cost(const VehicleRecord& vehicle, const CostCoefficients& c, bool driver_operated) {
  const double hours = vehicle.deployed_s / 3600.0;
  double cost = c.distance_cost_per_km * vehicle.distance_m / 1000.0 + c.vehicle_cost_per_h * hours;
  if (driver_operated) cost += c.driver_cost_per_h * hours;
  return cost;
}

double generalized_cost(const std::vector<TripRecord>& trips, const std::vector<VehicleRecord>& vehicles,
                        const CostCoefficients& c, int driver_vehicles) {
  double total = 0.0;
  for (const TripRecord& t : trips) {
    if (t.state == RequestState::served) total += user_cost(t, c);
  }
  for (const VehicleRecord& v : vehicles) total += vehicle_cost(v, c, v.vehicle_id < driver_vehicles);
  return total;
}

double ReplicationSummary::metric(const std::string& name) const {
  if (name == "generalized_cost") return generalized_cost;
  if (name == "user_cost") return user_cost;
  if (name == "operator_cost") return operator_cost;
  if (name == "operating_cost") return operating_cost;
  if (name == "capital_cost") return capital_cost;
  if (name == "requests") return requests;
  if (name == "served") return served;
  if (name == "rejected") return rejected;
  if (name == "median_access_s") return median_access_s;
  if (name == "median_wait_s") return median_wait_s;
  if (name == "median_ride_s") return median_ride_s;
  if (name == "vehicle_km") return vehicle_km;
  if (name == "pax_from_terminus_per_run") return pax_from_terminus_per_run;
  throw MetricsError("unknown metric " + name);
}

const std::vector<std::string>& summary_metrics() {
  static const std::vector<std::string> names = {
      "generalized_cost", "user_cost",       "operator_cost", "operating_cost", "capital_cost",
      "requests",         "served",          "rejected",      "median_access_s", "median_wait_s",
      "median_ride_s",    "vehicle_km",      "pax_from_terminus_per_run"};
  return names;
}

ReplicationSummary summarize(const SimResult& result, const CostCoefficients& c, int driver_vehicles, int replication,
                             std::uint64_t seed) {
  c.validate();
  ReplicationSummary s;
  s.replication = replication;
  s.seed = seed;
  for (const TripRecord& t : result.trips) {
    if (t.in_warmup) continue;
    ++s.requests;
    if (t.state == RequestState::served) {
      ++s.served;
      s.user_cost += user_cost(t, c);
      s.access_s.push_back(t.access_s(c.walk_speed_kmh));
      s.wait_s.push_back(t.wait_s);
      s.ride_s.push_back(t.ride_s);
    } else if (t.state == RequestState::rejected) {
      ++s.rejected;
    } else {
      ++s.in_progress;
    }
  }
  double deployed_h_total = 0.0;
  double driver_h_total = 0.0;
  for (const VehicleRecord& v : result.vehicles) {
    const bool driver = v.vehicle_id < driver_vehicles;
    s.operator_cost += vehicle_cost(v, c, driver);
    s.vehicle_km += v.distance_m / 1000.0;
    deployed_h_total += v.deployed_s / 3600.0;
    if (driver) driver_h_total += v.deployed_s / 3600.0;
  }
  s.capital_cost = c.vehicle_cost_per_h * deployed_h_total;
  s.operating_cost = c.distance_cost_per_km * s.vehicle_km + c.driver_cost_per_h * driver_h_total;
  s.generalized_cost = s.user_cost + s.operator_cost;
  s.median_access_s = median_of(s.access_s);
  s.median_wait_s = median_of(s.wait_s);
  s.median_ride_s = median_of(s.ride_s);

  int runs = 0;
  int pax = 0;
  for (const RunRecord& r : result.runs) {
    if (!r.completed || r.start_s < result.warmup_s) continue;
    ++runs;
    pax += r.pax_from_terminus;
  }
  s.pax_from_terminus_per_run = runs > 0 ? static_cast<double>(pax) / runs : 0.0;
  return s;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw MetricsError("quantile of empty data");
  if (p < 0.0 || p > 1.0) throw MetricsError("quantile level must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
  std::vector<CdfPoint> out;
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    out.push_back({values[i], i + 1 == values.size() ? 1.0 : static_cast<double>(i + 1) / n});
  }
  return out;
}

MetricsSummary aggregate(std::vector<ReplicationSummary> reps) {
  if (reps.empty()) throw MetricsError("no replications to aggregate");
  std::sort(reps.begin(), reps.end(),
            [](const ReplicationSummary& a, const ReplicationSummary& b) { return a.replication < b.replication; });
  MetricsSummary m;
  m.replications = static_cast<int>(reps.size());
  for (const std::string& name : summary_metrics()) {
    std::vector<double> values;
    values.reserve(reps.size());
    for (const auto& r : reps) values.push_back(r.metric(name));
    m.stats[name] = {quantile(values, 0.5), quantile(values, 0.25), quantile(values, 0.75)};
  }
  std::vector<double> access, wait, ride;
  for (const auto& r : reps) {
    access.insert(access.end(), r.access_s.begin(), r.access_s.end());
    wait.insert(wait.end(), r.wait_s.begin(), r.wait_s.end());
    ride.insert(ride.end(), r.ride_s.begin(), r.ride_s.end());
  }
  m.cdfs["access_s"] = empirical_cdf(std::move(access));
  m.cdfs["wait_s"] = empirical_cdf(std::move(wait));
  m.cdfs["ride_s"] = empirical_cdf(std::move(ride));
  m.per_replication = std::move(reps);
  return m;
}

SweepResult sweep_analysis(const std::vector<std::pair<double, MetricsSummary>>& by_xf) {
  std::vector<std::pair<double, const MetricsSummary*>> points;
  for (const auto& [x, m] : by_xf) points.emplace_back(x, &m);
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  if (points.empty() || points.front().first != 0.0) throw MetricsError("sweep has no x_f = 0 baseline");

  SweepResult out;
  const MetricsSummary& base = *points.front().second;
  out.best_x_f_km = 0.0;
  out.best_cost = base.stats.at("generalized_cost").median;
  out.terminus_pax_per_run = base.stats.at("pax_from_terminus_per_run").median;
  for (const auto& [x, m] : points) {
    const double cost = m->stats.at("generalized_cost").median;
    if (cost < out.best_cost) {
      out.best_cost = cost;
      out.best_x_f_km = x;
    }
  }
  for (const auto& [x, m] : points) {
    for (const std::string& name : summary_metrics()) {
      SweepRow row;
      row.x_f_km = x;
      row.metric = name;
      row.stat = m->stats.at(name);
      const double b = base.stats.at(name).median;
      if (m == &base) {
        row.normalized_pct = 100.0;
      } else if (b != 0.0) {
        row.normalized_pct = 100.0 * row.stat.median / b;
      } else {
        row.normalized_pct = row.stat.median == 0.0 ? 100.0 : std::numeric_limits<double>::quiet_NaN();
      }
      out.rows.push_back(row);
    }
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "x_f_km,metric,median,q25,q75,normalized_pct\n";
  for (const SweepRow& r : rows) {
    os << format_number(r.x_f_km) << ',' << r.metric << ',' << format_number(r.stat.median) << ','
       << format_number(r.stat.q25) << ',' << format_number(r.stat.q75) << ',' << csv_number(r.normalized_pct)
       << '\n';
  }
  return os.str();
}

std::string cdf_csv(const MetricsSummary& summary) {
  std::ostringstream os;
  os << "metric,value,cum_prob\n";
  for (const std::string& name : kCdfMetrics) {
    const auto it = summary.cdfs.find(name);
    if (it == summary.cdfs.end()) continue;
    for (const CdfPoint& p : it->second) {
      os << name << ',' << format_number(p.value) << ',' << format_number(p.cum_prob) << '\n';
    }
  }
  return os.str();
}

std::string summary_json(const MetricsSummary& summary, int indent) {
  nlohmann::ordered_json j;
  j["replications"] = summary.replications;
  nlohmann::ordered_json stats = nlohmann::ordered_json::object();
  for (const std::string& name : summary_metrics()) {
    const Stat& s = summary.stats.at(name);
    stats[name] = {{"median", s.median}, {"q25", s.q25}, {"q75", s.q75}};
  }
  j["metrics"] = stats;
  nlohmann::ordered_json reps = nlohmann::ordered_json::array();
  for (const ReplicationSummary& r : summary.per_replication) {
    nlohmann::ordered_json e;
    e["replication"] = r.replication;
    e["seed"] = r.seed;
    for (const std::string& name : summary_metrics()) e[name] = r.metric(name);
    reps.push_back(e);
  }
  j["per_replication"] = reps;
  return j.dump(indent) + "\n";
}

}  // namespace sod
