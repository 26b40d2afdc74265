#include "sod/detour.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sod/csv.hpp"

namespace sod {
namespace {

double speed_m_per_min(const DetourParams& p) { return p.planning_speed_kmh * 1000.0 / 60.0; }

double log_poisson_pmf(int n, double lambda) {
  return -lambda + n * std::log(lambda) - std::lgamma(static_cast<double>(n) + 1.0);
}

double irwin_hall_lower(double x, int n) {
  // Only called with 0 < x <= n / 2.
  long double sum = 0.0L;
  const int top = static_cast<int>(std::floor(x));
  for (int k = 0; k <= top; ++k) {
    const double base = x - k;
    if (base <= 0.0) continue;
    const long double log_term = static_cast<long double>(n) * std::log(base) -
                                 std::lgamma(static_cast<double>(k) + 1.0) -
                                 std::lgamma(static_cast<double>(n - k) + 1.0);
    const long double term = std::exp(log_term);
    sum += (k % 2 == 0) ? term : -term;
  }
  return static_cast<double>(sum);
}

}  // namespace

void DetourParams::validate() const {
  if (!(requests_per_run >= 0.0)) throw std::invalid_argument("request rate must be non-negative");
  if (!(max_walk_m > 0.0) || !(planning_speed_kmh > 0.0) || !(dwell_s > 0.0)) {
    throw std::invalid_argument("walk distance, speed and dwell must be positive");
  }
  if (!(confidence > 0.0) || !(confidence < 1.0)) throw std::invalid_argument("confidence must be in (0, 1)");
}

double irwin_hall_cdf(double x, int n) {
  if (n < 0) throw std::invalid_argument("negative term count");
  if (n == 0) return x >= 0.0 ? 1.0 : 0.0;
  if (x <= 0.0) return 0.0;
  if (x >= n) return 1.0;
  if (n > kIrwinHallExactMax) {
    const double z = (x - 0.5 * n) / std::sqrt(n / 12.0);
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
  }
  const double value = 2.0 * x > n ? 1.0 - irwin_hall_lower(n - x, n) : irwin_hall_lower(x, n);
  return std::clamp(value, 0.0, 1.0);
}

double detour_cdf_given_n(double t_min, int n, const DetourParams& p) {
  const double dwell_min = p.dwell_s / 60.0;
  const double x = speed_m_per_min(p) / (2.0 * p.max_walk_m) * (t_min - n * dwell_min);
  if (n > 0 && t_min < n * dwell_min) return 0.0;
  return irwin_hall_cdf(x, n);
}

double detour_cdf(double t_min, const DetourParams& p, double tail_tolerance) {
  if (t_min < 0.0) return 0.0;
  const double lambda = p.requests_per_run;
  if (lambda <= 0.0) return 1.0;
  const double dwell_min = p.dwell_s / 60.0;
  double total = 0.0;
  double mass = 0.0;
  for (int n = 0;; ++n) {
    const double pmf = std::exp(log_poisson_pmf(n, lambda));
    mass += pmf;
    // Terms with n dwell times exceeding t contribute nothing.
    if (n * dwell_min > t_min) break;
    total += pmf * detour_cdf_given_n(t_min, n, p);
    if (n > lambda && 1.0 - mass < tail_tolerance) break;
  }
  return std::clamp(total, 0.0, 1.0);
}

double required_detour_budget(const DetourParams& p, double resolution_min) {
  p.validate();
  if (!(resolution_min > 0.0)) throw std::invalid_argument("resolution must be positive");
  if (p.requests_per_run <= 0.0) return 0.0;
  if (detour_cdf(0.0, p) >= p.confidence) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (detour_cdf(hi, p) < p.confidence) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > resolution_min) {
    const double mid = 0.5 * (lo + hi);
    if (detour_cdf(mid, p) >= p.confidence) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

DetourCap max_detour_budget(double cycle_time_min, double headway_min, double peak_headway_min) {
  if (!(peak_headway_min > 0.0) || !(cycle_time_min > 0.0)) {
    throw std::invalid_argument("cycle time and peak headway must be positive");
  }
  DetourCap cap;
  if (headway_min < peak_headway_min) {
    cap.diagnostic = "off-peak headway " + format_fixed(headway_min, 2) + " min is below the peak headway " +
                     format_fixed(peak_headway_min, 2) + " min; no detour slack";
    return cap;
  }
  cap.minutes = cycle_time_min * (headway_min / peak_headway_min - 1.0);
  if (cap.minutes <= 0.0) {
    cap.minutes = 0.0;
    cap.diagnostic = "off-peak headway equals the peak headway; no detour slack";
  }
  return cap;
}

std::vector<std::pair<double, double>> detour_cdf_table(const DetourParams& p, double t_max_min, double step_min) {
  if (!(step_min > 0.0)) throw std::invalid_argument("step must be positive");
  std::vector<std::pair<double, double>> rows;
  const long count = static_cast<long>(std::floor(t_max_min / step_min + 1e-9));
  for (long i = 0; i <= count; ++i) {
    const double t = i * step_min;
    rows.emplace_back(t, detour_cdf(t, p));
  }
  return rows;
}

std::vector<bool> flexible_stop_mask(const RouteSpec& route, double flexible_km) {
  if (flexible_km < -1e-12 || flexible_km > route.length_km + 1e-9) {
    throw std::invalid_argument("flexible portion must lie within [0, route length]");
  }
  std::vector<bool> mask(route.stops.size(), false);
  if (flexible_km <= 0.0) return mask;
  const double boundary = route.length_km - flexible_km;
  for (std::size_t i = 0; i < route.stops.size(); ++i) {
    mask[i] = route.stops[i].chainage_km > boundary + 1e-9;
  }
  return mask;
}

RouteTimetable make_timetable(const std::vector<Node>& stop_nodes, const RoutingTable& routing, double dwell_s) {
  if (stop_nodes.size() < 2) throw std::invalid_argument("a route needs at least two stops");
  RouteTimetable tt;
  tt.dwell_s = dwell_s;
  const std::size_t last = stop_nodes.size() - 1;
  std::vector<std::pair<std::size_t, bool>> order;
  for (std::size_t i = 0; i <= last; ++i) order.emplace_back(i, true);
  for (std::size_t i = last; i-- > 0;) order.emplace_back(i, false);

  double t = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0) {
      t += dwell_s + routing.time_s(stop_nodes[order[k - 1].first], stop_nodes[order[k].first]);
    }
    tt.visits.push_back({order[k].first, order[k].second, t});
  }
  tt.run_duration_s = t + dwell_s;
  return tt;
}

SoDSchedule build_schedule(const RouteSpec& route, const RouteTimetable& timetable, const ScheduleRequest& request) {
  if (request.flexible_km < -1e-12 || request.flexible_km > route.length_km + 1e-9) {
    throw std::invalid_argument("flexible portion must lie within [0, route length]");
  }
  if (request.detour_budget_min < 0.0) throw std::invalid_argument("detour budget must be non-negative");
  const std::vector<bool> flexible = flexible_stop_mask(route, request.flexible_km);

  SoDSchedule s;
  s.flexible_km = request.flexible_km;
  s.headway_min = request.headway_min;
  s.run_start_s = request.run_start_s;
  s.requested_budget_min = request.detour_budget_min;
  s.detour_budget_min = request.detour_budget_min;
  if (request.peak_headway_min > 0.0) {
    const DetourCap cap = max_detour_budget(route.cycle_time_min, request.headway_min, request.peak_headway_min);
    if (cap.minutes < s.detour_budget_min) {
      s.detour_budget_min = cap.minutes;
      s.diagnostic = cap.diagnostic.empty() ? "detour budget clipped by fleet size" : cap.diagnostic;
    }
  }

  // Highest fixed stop index; flexible stops form a suffix of the route.
  std::size_t last_fixed = 0;
  while (last_fixed + 1 < flexible.size() && !flexible[last_fixed + 1]) ++last_fixed;
  const bool any_flexible = std::any_of(flexible.begin(), flexible.end(), [](bool f) { return f; });
  if (!any_flexible) {
    if (request.flexible_km > 0.0 && s.diagnostic.empty()) s.diagnostic = "no stops inside the flexible portion";
    s.detour_budget_min = 0.0;
  }
  const double slack_s = s.detour_budget_min * 60.0;
  s.flexible_portion = any_flexible;

  // Flexible stops are only served on request, so their timetable dwell is
  // dropped and replaced by the detour slack.
  double removed_dwell_s = 0.0;
  double exit_departure = 0.0;
  bool returned = false;
  for (const TimetableVisit& v : timetable.visits) {
    if (flexible[v.stop]) {
      removed_dwell_s += timetable.dwell_s;
      continue;
    }
    ScheduledStop stop;
    stop.stop = v.stop;
    stop.outbound = v.outbound;
    stop.dwell_s = timetable.dwell_s;
    if (any_flexible && v.outbound && v.stop == last_fixed) {
      stop.flex_exit = true;
      exit_departure = v.offset_s + timetable.dwell_s;
    }
    if (any_flexible && !v.outbound && v.stop == last_fixed) {
      stop.flex_return = true;
      s.flexible_nominal_s = v.offset_s - removed_dwell_s - exit_departure;
      returned = true;
    }
    double offset = v.offset_s;
    if (returned) offset += slack_s - removed_dwell_s;
    stop.earliest_s = request.run_start_s + offset;
    stop.latest_s = stop.earliest_s;
    s.stops.push_back(stop);
  }
  s.run_duration_s = timetable.run_duration_s - removed_dwell_s + (any_flexible ? slack_s : 0.0);
  return s;
}

}  // namespace sod
