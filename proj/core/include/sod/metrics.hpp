#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sod/planning.hpp"
#include "sod/sim.hpp"

namespace sod {

class MetricsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CostCoefficients {
  double access_weight = 2.0;         // γa
  double waiting_weight = 1.5;        // γw
  double value_of_time_per_h = 16.5;  // γt
  double distance_cost_per_km = 0.0;  // γo
  double vehicle_cost_per_h = 0.0;    // γv
  double driver_cost_per_h = 15.3;    // γd
  double walk_speed_kmh = kDefaultWalkSpeedKmh;

  /// γo = operating cost / planning speed; γv = operational minus operating
  /// cost, i.e. the capital share.
  static CostCoefficients for_vehicle(const VehicleClass& cls, double planning_speed_kmh);
  void validate() const;
};

/// γt·(γa·t^a + γw·t^w + t^t), times in hours. Throws for unserved trips.
double user_cost(const TripRecord& trip, const CostCoefficients& c);

/// γo·d + γv·t, plus γd·t for a driver-operated vehicle.
double vehicle_cost(const VehicleRecord& vehicle, const CostCoefficients& c, bool driver_operated = false);

/// Σ user_cost over served trips + Σ vehicle_cost. The first
/// `driver_vehicles` vehicles (by id) carry the driver cost.
double generalized_cost(const std::vector<TripRecord>& trips, const std::vector<VehicleRecord>& vehicles,
                        const CostCoefficients& c, int driver_vehicles = 0);

/// Metric values of one replication after dropping warm-up requests.
struct ReplicationSummary {
  int replication = 0;
  std::uint64_t seed = 0;
  double user_cost = 0.0;
  double operator_cost = 0.0;   // Σ vehicle_cost
  double operating_cost = 0.0;  // distance term plus drivers
  double capital_cost = 0.0;    // vehicle-hour term
  double generalized_cost = 0.0;
  int requests = 0;
  int served = 0;
  int rejected = 0;
  int in_progress = 0;
  double median_access_s = 0.0;
  double median_wait_s = 0.0;
  double median_ride_s = 0.0;
  double vehicle_km = 0.0;
  double pax_from_terminus_per_run = 0.0;
  std::vector<double> access_s;  // per served rider
  std::vector<double> wait_s;
  std::vector<double> ride_s;

  double metric(const std::string& name) const;
};

/// Scalar metric names in report order.
const std::vector<std::string>& summary_metrics();

ReplicationSummary summarize(const SimResult& result, const CostCoefficients& c, int driver_vehicles,
                             int replication = 0, std::uint64_t seed = 0);

/// Type-7 (linear interpolation) quantile of unsorted data.
double quantile(std::vector<double> values, double p);

struct Stat {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct CdfPoint {
  double value = 0.0;
  double cum_prob = 0.0;
};

/// Step CDF over the distinct values; the last point has probability 1.
std::vector<CdfPoint> empirical_cdf(std::vector<double> values);

struct MetricsSummary {
  int replications = 0;
  std::map<std::string, Stat> stats;
  std::map<std::string, std::vector<CdfPoint>> cdfs;  // access_s, wait_s, ride_s pooled over replications
  std::vector<ReplicationSummary> per_replication;    // sorted by replication id
};

MetricsSummary aggregate(std::vector<ReplicationSummary> reps);

struct SweepRow {
  double x_f_km = 0.0;
  std::string metric;
  Stat stat;
  double normalized_pct = 0.0;  // NaN when the baseline is 0 and the value is not
};

struct SweepResult {
  double best_x_f_km = 0.0;
  double best_cost = 0.0;
  double terminus_pax_per_run = 0.0;  // at the baseline, paired with best_x_f_km
  std::vector<SweepRow> rows;
};

/// x_f* = argmin of median generalized cost (ties to the smaller x_f) and all
/// metrics normalised to the x_f = 0 baseline.
SweepResult sweep_analysis(const std::vector<std::pair<double, MetricsSummary>>& by_xf);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string cdf_csv(const MetricsSummary& summary);
std::string summary_json(const MetricsSummary& summary, int indent = 2);

}  // namespace sod
