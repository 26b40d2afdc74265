#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sod/network.hpp"
#include "sod/planning.hpp"

namespace sod {

/// Inputs of the stochastic detour model. `requests_per_run` is the Poisson
/// mean of flexible-portion stop requests during one run.
struct DetourParams {
  double requests_per_run = 0.0;
  double max_walk_m = 500.0;
  double planning_speed_kmh = 40.0;
  double dwell_s = 30.0;
  double confidence = 0.95;

  void validate() const;
};

/// CDF of the sum of n independent Uniform(0, 1) variables.
///
/// Uses the alternating binomial sum evaluated in log space with sign
/// tracking (and the reflection F(x) = 1 - F(n - x) past the mean). Above
/// kIrwinHallExactMax terms the sum loses precision, so a normal
/// approximation with mean n/2 and variance n/12 is used instead.
double irwin_hall_cdf(double x, int n);
inline constexpr int kIrwinHallExactMax = 25;

/// P(T <= t | N = n): total detour time for n flexible requests, in minutes.
double detour_cdf_given_n(double t_min, int n, const DetourParams& p);

/// Unconditional detour-time CDF, mixing over N ~ Poisson(λ). The series is
/// cut once the remaining Poisson mass drops below `tail_tolerance`.
double detour_cdf(double t_min, const DetourParams& p, double tail_tolerance = 1e-9);

/// Smallest detour budget (minutes) whose CDF reaches `p.confidence`,
/// bracketed by bisection to `resolution_min`. Zero when λ = 0 or when the
/// no-request atom alone meets the confidence level.
double required_detour_budget(const DetourParams& p, double resolution_min = 0.01);

struct DetourCap {
  double minutes = 0.0;
  std::string diagnostic;  // non-empty when the cap collapsed to zero
};

/// Detour slack the peak-sized fleet can absorb when running at an off-peak
/// headway: cycle · (h / h_peak − 1).
DetourCap max_detour_budget(double cycle_time_min, double headway_min, double peak_headway_min);

/// (t, CDF(t)) rows on [0, t_max] with the given step.
std::vector<std::pair<double, double>> detour_cdf_table(const DetourParams& p, double t_max_min, double step_min);

/// Stops whose chainage lies beyond length − x_f belong to the flexible portion.
std::vector<bool> flexible_stop_mask(const RouteSpec& route, double flexible_km);

/// Nominal fixed-route timetable of one run: outbound over every stop, then
/// back to the terminus. Offsets are stop start times relative to the run start.
struct TimetableVisit {
  std::size_t stop = 0;
  bool outbound = true;
  double offset_s = 0.0;
};

struct RouteTimetable {
  std::vector<TimetableVisit> visits;
  double dwell_s = 30.0;
  double run_duration_s = 0.0;  // start of the first visit to the end of the last dwell
};

RouteTimetable make_timetable(const std::vector<Node>& stop_nodes, const RoutingTable& routing, double dwell_s);

struct ScheduledStop {
  std::size_t stop = 0;  // index into the route's stop list
  bool outbound = true;
  double earliest_s = 0.0;
  double latest_s = 0.0;
  double dwell_s = 0.0;
  bool flex_exit = false;    // last fixed stop before the flexible portion
  bool flex_return = false;  // first fixed stop after it
};

struct SoDSchedule {
  std::vector<ScheduledStop> stops;
  double flexible_km = 0.0;
  double headway_min = 0.0;
  double requested_budget_min = 0.0;
  double detour_budget_min = 0.0;  // effective slack after the fleet cap
  double run_start_s = 0.0;
  double flexible_nominal_s = 0.0;  // driving time from flex-exit departure to flex-return arrival
  double run_duration_s = 0.0;      // includes the detour slack
  bool flexible_portion = false;
  std::string diagnostic;
};

struct ScheduleRequest {
  double flexible_km = 0.0;
  double headway_min = 0.0;
  double detour_budget_min = 0.0;
  double peak_headway_min = 0.0;  // > 0 clips the budget by max_detour_budget
  double run_start_s = 0.0;
};

/// One SoD run: fixed stops keep timetable times with zero slack. Flexible
/// stops are dropped from the schedule; the first fixed stop after the
/// flexible portion, and every stop after it, is moved by the detour budget
/// minus the dropped flexible dwell.
SoDSchedule build_schedule(const RouteSpec& route, const RouteTimetable& timetable, const ScheduleRequest& request);

}  // namespace sod
