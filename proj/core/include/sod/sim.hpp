#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sod/demand.hpp"
#include "sod/detour.hpp"
#include "sod/network.hpp"

namespace sod {

class SimConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kRequestReward = 1e6;

/// Coefficients of the insertion objective.
struct ObjectiveCoeffs {
  double distance_cost_per_km = 0.0;  // γo
  double value_of_time_per_h = 16.5;  // γt
  double served_reward = kRequestReward;
  double snapped_reward = kRequestReward;
};

/// γo·d + γt·Σ(a − t_r) − γr·n^r − γs·n^s with d in km and travel in hours.
double objective(double distance_km, double rider_time_h, int served, int snapped, const ObjectiveCoeffs& c);

struct SimConfig {
  double headway_s = 600.0;
  int fleet_size = 1;
  int capacity = 20;
  double horizon_s = 3.0 * 3600.0;
  double warmup_s = 3600.0;
  double first_departure_s = 0.0;
  double step_s = 1.0;
  double max_wait_s = 900.0;
  double max_ride_factor = 2.0;
  double max_walk_m = 500.0;
  double walk_speed_kmh = kDefaultWalkSpeedKmh;
  /// Cycle time the fleet must cover per run, without detour slack.
  double cycle_time_s = 0.0;
  /// When false, latest-start windows are not enforced (used to measure
  /// how often the detour budget would be exceeded).
  bool enforce_latest = true;
  ObjectiveCoeffs objective;

  void validate() const;
};

/// Maps a request onto the service area: endpoints outside the flexible
/// portion get the nearest fixed stop and the walk to it.
Request snap_request(Request r, const ServiceArea& area);

enum class StopKind { timetable, flexible };

struct PlanStop {
  Node node = -1;
  double earliest_s = 0.0;
  double latest_s = std::numeric_limits<double>::infinity();
  double dwell_s = 30.0;
  int run = -1;
  StopKind kind = StopKind::timetable;
  bool flex_exit = false;
  bool flex_return = false;
  bool run_first = false;
  bool run_last = false;
  std::vector<int> boarding;
  std::vector<int> alighting;
};

enum class Activity { idle, driving, at_stop };

struct VehicleState {
  int id = 0;
  int capacity = 0;
  Node node = -1;       // last node reached
  Node next_node = -1;  // while driving
  double next_time_s = 0.0;
  double edge_length_m = 0.0;
  Activity activity = Activity::idle;
  double arrival_s = 0.0;  // at the front stop
  bool serving = false;
  double service_start_s = 0.0;
  double service_end_s = 0.0;
  bool in_flex_window = false;  // last departed stop opens a flexible window
  std::deque<PlanStop> plan;
  std::vector<int> onboard;
  double distance_m = 0.0;       // after warm-up
  double total_distance_m = 0.0;
  int runs_completed = 0;
  int runs_counted = 0;          // completed runs that started after warm-up
  int terminus_boardings = 0;    // over counted runs
};

struct FeasibilityFlags {
  bool latest = true;
  bool wait = true;
  bool ride = true;
  bool capacity = true;
  bool ok() const { return latest && wait && ride && capacity; }
};

/// One enumerated insertion. Positions index the vehicle's plan before the
/// insertion; a new stop at position p goes before plan stop p, a join
/// reuses plan stop p.
struct InsertionCandidate {
  int vehicle = -1;
  int pickup_position = 0;
  bool pickup_join = false;
  int dropoff_position = 0;
  bool dropoff_join = false;
  double delta_objective = std::numeric_limits<double>::infinity();
  FeasibilityFlags flags;
};

struct TripRecord {
  int request_id = 0;
  RequestState state = RequestState::pending;
  double request_time_s = 0.0;
  double board_time_s = std::numeric_limits<double>::quiet_NaN();
  double alight_time_s = std::numeric_limits<double>::quiet_NaN();
  double access_m = 0.0;
  double wait_s = std::numeric_limits<double>::quiet_NaN();
  double ride_s = std::numeric_limits<double>::quiet_NaN();
  double direct_s = 0.0;
  bool in_warmup = false;
  bool snapped = false;
  double access_s(double walk_speed_kmh) const { return access_m / (walk_speed_kmh / 3.6); }
};

struct VehicleRecord {
  int vehicle_id = 0;
  double distance_m = 0.0;
  double deployed_s = 0.0;
  int runs_completed = 0;
  double pax_from_terminus_per_run = 0.0;
};

struct RunRecord {
  int run = 0;
  int vehicle = 0;
  double start_s = 0.0;
  double distance_m = 0.0;
  int pax_from_terminus = 0;
  bool flexible = false;
  double exit_departure_s = std::numeric_limits<double>::quiet_NaN();
  double return_arrival_s = std::numeric_limits<double>::quiet_NaN();
  double realized_detour_s = std::numeric_limits<double>::quiet_NaN();
  double budget_s = 0.0;
  bool completed = false;
};

struct StopEvent {
  int vehicle = 0;
  int run = 0;
  Node node = -1;
  double arrival_s = 0.0;
  double start_s = 0.0;
  double departure_s = 0.0;
  int load_after = 0;
};

struct SimResult {
  std::vector<TripRecord> trips;
  std::vector<VehicleRecord> vehicles;
  std::vector<RunRecord> runs;
  std::vector<StopEvent> stop_events;
  std::vector<Request> requests;
  int max_load_violation = 0;  // largest excess of onboard over capacity seen
  double end_time_s = 0.0;
  double warmup_s = 0.0;
};

/// Agent simulation of one route. Vehicles follow a per-run SoD schedule
/// template, launched every headway in round-robin order; requests are
/// inserted greedily in request-time order and never reassigned.
class Simulator {
 public:
  Simulator(const ServiceArea& area, SoDSchedule run_template, SimConfig config, std::vector<Request> requests);

  double now() const { return now_; }
  const std::vector<VehicleState>& vehicles() const { return vehicles_; }
  const std::vector<Request>& requests() const { return requests_; }

  /// Advances the world to `t`: vehicle events up to `t`, then run
  /// launches inside the lookahead, then requests with t_r <= t.
  void step_to(double t);

  /// Enumerates every insertion for request `id` and commits the best
  /// feasible one. Returns the committed candidate, or nothing on rejection.
  std::optional<InsertionCandidate> insert_request(int id, std::vector<InsertionCandidate>* audit = nullptr);

  /// Checks a vehicle plan against the four constraints as projected from
  /// the vehicle's current state.
  FeasibilityFlags check_plan(const VehicleState& v) const;

  /// Runs until the horizon and then drains committed plans.
  SimResult run();

  /// Keeps every enumerated candidate for later inspection.
  void set_audit(std::vector<InsertionCandidate>* audit) { audit_ = audit; }

 private:
  struct StopView {
    const PlanStop* base = nullptr;
    Node node = -1;
    double earliest_s = 0.0;
    double latest_s = 0.0;
    double dwell_s = 0.0;
    int extra_board = -1;
    int extra_alight = -1;
  };
  struct Projection {
    FeasibilityFlags flags;
    double distance_m = 0.0;
    double rider_time_s = 0.0;
  };

  void advance_vehicle(VehicleState& v, double t);
  void begin_next(VehicleState& v, double time);
  void serve_stop(VehicleState& v, double start);
  void depart_stop(VehicleState& v);
  void launch_runs(double t);
  void process_requests(double t);

  Projection project(const VehicleState& v, const std::vector<StopView>& seq, bool stop_on_failure,
                     std::vector<double>* departures) const;
  void base_views(const VehicleState& v, std::vector<StopView>& out) const;
  double ready_time(const Request& r) const;
  double direct_time(const Request& r) const;
  bool gap_in_flex_window(const VehicleState& v, std::size_t gap) const;

  const ServiceArea* area_;
  const RoutingTable* routing_;
  SoDSchedule template_;
  SimConfig cfg_;
  std::vector<Request> requests_;
  std::vector<VehicleState> vehicles_;
  std::vector<RunRecord> runs_;
  std::vector<StopEvent> stop_events_;
  std::vector<double> direct_s_;
  mutable std::vector<double> pickup_departure_;
  std::vector<InsertionCandidate>* audit_ = nullptr;
  double now_ = 0.0;
  int next_run_ = 0;
  std::size_t next_request_ = 0;
  double lookahead_s_ = 0.0;
  int max_load_violation_ = 0;
};

/// Trip CSV `request_id,state,t_request_s,t_board_s,t_alight_s,access_m,wait_s,ride_s,direct_s`.
std::string trips_csv(const std::vector<TripRecord>& trips);
/// Vehicle CSV `vehicle_id,distance_m,deployed_s,runs_completed,pax_from_terminus_per_run`.
std::string vehicles_csv(const std::vector<VehicleRecord>& vehicles);

}  // namespace sod
