#include "sod/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sod/csv.hpp"

namespace sod {
namespace {

constexpr double kTimeEps = 1e-6;

double mps(double kmh) { return kmh / 3.6; }

std::string csv_time(double v) { return std::isnan(v) ? std::string() : format_fixed(v, 3); }

}  // namespace

double objective(double distance_km, double rider_time_h, int served, int snapped, const ObjectiveCoeffs& c) {
  return c.distance_cost_per_km * distance_km + c.value_of_time_per_h * rider_time_h - c.served_reward * served -
         c.snapped_reward * snapped;
}

void SimConfig::validate() const {
  if (!(headway_s > 0.0)) throw SimConfigError("headway must be positive");
  if (fleet_size < 1) throw SimConfigError("fleet size must be at least 1");
  if (capacity < 1) throw SimConfigError("vehicle capacity must be at least 1");
  if (!(warmup_s >= 0.0) || !(horizon_s > warmup_s)) throw SimConfigError("horizon must exceed warm-up");
  if (!(step_s > 0.0)) throw SimConfigError("time step must be positive");
  if (!(max_wait_s > 0.0) || !(max_ride_factor >= 1.0)) throw SimConfigError("invalid rider constraints");
  if (!(walk_speed_kmh > 0.0) || !(max_walk_m >= 0.0)) throw SimConfigError("invalid walking parameters");
}

Request snap_request(Request r, const ServiceArea& area) {
  r.origin_stop.reset();
  r.destination_stop.reset();
  r.origin_walk_m = 0.0;
  r.destination_walk_m = 0.0;
  if (!area.node_is_flexible(r.origin)) {
    const auto s = area.nearest_fixed_stop(r.origin);
    r.origin_stop = s->stop_node;
    r.origin_walk_m = s->walk_m;
  }
  if (!area.node_is_flexible(r.destination)) {
    const auto s = area.nearest_fixed_stop(r.destination);
    r.destination_stop = s->stop_node;
    r.destination_walk_m = s->walk_m;
  }
  return r;
}

Simulator::Simulator(const ServiceArea& area, SoDSchedule run_template, SimConfig config,
                     std::vector<Request> requests)
    : area_(&area), routing_(&area.routing()), template_(std::move(run_template)), cfg_(config),
      requests_(std::move(requests)) {
  cfg_.validate();
  if (template_.stops.empty()) throw SimConfigError("run schedule has no stops");
  const double slack_s = template_.detour_budget_min * 60.0;
  const double needed_s = std::max(template_.run_duration_s, cfg_.cycle_time_s + slack_s);
  if (cfg_.fleet_size * cfg_.headway_s + kTimeEps < needed_s) {
    throw SimConfigError("fleet of " + std::to_string(cfg_.fleet_size) + " vehicles at headway " +
                         format_fixed(cfg_.headway_s / 60.0, 2) + " min covers " +
                         format_fixed(cfg_.fleet_size * cfg_.headway_s / 60.0, 2) + " min per vehicle; runs need " +
                         format_fixed(needed_s / 60.0, 2) + " min");
  }

  direct_s_.resize(requests_.size());
  pickup_departure_.assign(requests_.size(), 0.0);
  for (std::size_t i = 0; i < requests_.size(); ++i) {
    Request& r = requests_[i];
    if (r.id != static_cast<int>(i)) throw SimConfigError("request ids must equal their stream position");
    if (i > 0 && r.request_time_s < requests_[i - 1].request_time_s) {
      throw SimConfigError("requests must be sorted by request time");
    }
    r = snap_request(r, area);
    direct_s_[i] = routing_->time_s(r.pickup_node(), r.dropoff_node());
  }

  const Node terminus = area.stop_node(template_.stops.front().stop);
  vehicles_.resize(static_cast<std::size_t>(cfg_.fleet_size));
  for (int i = 0; i < cfg_.fleet_size; ++i) {
    vehicles_[static_cast<std::size_t>(i)].id = i;
    vehicles_[static_cast<std::size_t>(i)].capacity = cfg_.capacity;
    vehicles_[static_cast<std::size_t>(i)].node = terminus;
  }
  lookahead_s_ = cfg_.max_wait_s + cfg_.max_walk_m / mps(cfg_.walk_speed_kmh) + cfg_.step_s;
}

double Simulator::ready_time(const Request& r) const {
  return r.request_time_s + r.origin_walk_m / mps(cfg_.walk_speed_kmh);
}

double Simulator::direct_time(const Request& r) const { return direct_s_[static_cast<std::size_t>(r.id)]; }

void Simulator::step_to(double t) {
  for (VehicleState& v : vehicles_) advance_vehicle(v, t);
  now_ = t;
  launch_runs(t);
  process_requests(t);
}

void Simulator::launch_runs(double t) {
  while (true) {
    const double start = cfg_.first_departure_s + next_run_ * cfg_.headway_s;
    if (start >= cfg_.horizon_s || start > t + lookahead_s_) break;
    const int run = next_run_++;
    VehicleState& v = vehicles_[static_cast<std::size_t>(run % cfg_.fleet_size)];
    const double shift = start - template_.run_start_s;
    for (std::size_t i = 0; i < template_.stops.size(); ++i) {
      const ScheduledStop& s = template_.stops[i];
      PlanStop p;
      p.node = area_->stop_node(s.stop);
      p.earliest_s = s.earliest_s + shift;
      p.latest_s = s.latest_s + shift;
      p.dwell_s = s.dwell_s;
      p.run = run;
      p.flex_exit = s.flex_exit;
      p.flex_return = s.flex_return;
      p.run_first = i == 0;
      p.run_last = i + 1 == template_.stops.size();
      v.plan.push_back(std::move(p));
    }
    RunRecord rec;
    rec.run = run;
    rec.vehicle = v.id;
    rec.start_s = start;
    rec.flexible = template_.flexible_portion;
    rec.budget_s = template_.detour_budget_min * 60.0;
    runs_.push_back(rec);
    if (v.activity == Activity::idle) begin_next(v, t);
  }
}

void Simulator::begin_next(VehicleState& v, double time) {
  if (v.plan.empty()) {
    v.activity = Activity::idle;
    return;
  }
  const PlanStop& front = v.plan.front();
  if (front.node == v.node) {
    v.activity = Activity::at_stop;
    v.arrival_s = time;
    v.serving = false;
    if (front.flex_return) {
      RunRecord& run = runs_[static_cast<std::size_t>(front.run)];
      run.return_arrival_s = time;
      run.realized_detour_s = time - run.exit_departure_s - template_.flexible_nominal_s;
    }
    return;
  }
  v.activity = Activity::driving;
  v.next_node = routing_->next_hop(v.node, front.node);
  v.next_time_s = time + routing_->time_s(v.node, v.next_node);
  v.edge_length_m = routing_->distance_m(v.node, v.next_node);
}

void Simulator::serve_stop(VehicleState& v, double start) {
  PlanStop& stop = v.plan.front();
  for (int id : stop.alighting) {
    Request& r = requests_[static_cast<std::size_t>(id)];
    r.alight_time_s = start;
    r.advance(RequestState::served);
    v.onboard.erase(std::find(v.onboard.begin(), v.onboard.end(), id));
  }
  for (int id : stop.boarding) {
    Request& r = requests_[static_cast<std::size_t>(id)];
    r.board_time_s = start + stop.dwell_s;
    r.advance(RequestState::on_board);
    v.onboard.push_back(id);
  }
  max_load_violation_ = std::max(max_load_violation_, static_cast<int>(v.onboard.size()) - v.capacity);
  if (stop.run_first) {
    runs_[static_cast<std::size_t>(stop.run)].pax_from_terminus = static_cast<int>(stop.boarding.size());
  }
  v.serving = true;
  v.service_start_s = start;
  v.service_end_s = start + stop.dwell_s;
}

void Simulator::depart_stop(VehicleState& v) {
  const PlanStop& stop = v.plan.front();
  RunRecord& run = runs_[static_cast<std::size_t>(stop.run)];
  stop_events_.push_back({v.id, stop.run, stop.node, v.arrival_s, v.service_start_s, v.service_end_s,
                          static_cast<int>(v.onboard.size())});
  if (stop.flex_exit) run.exit_departure_s = v.service_end_s;
  v.in_flex_window = stop.flex_exit || stop.kind == StopKind::flexible;
  if (stop.run_last) {
    run.completed = true;
    ++v.runs_completed;
    if (run.start_s >= cfg_.warmup_s) {
      ++v.runs_counted;
      v.terminus_boardings += run.pax_from_terminus;
    }
  }
  v.plan.pop_front();
  v.serving = false;
  begin_next(v, v.service_end_s);
}

void Simulator::advance_vehicle(VehicleState& v, double t) {
  while (true) {
    switch (v.activity) {
      case Activity::idle:
        return;
      case Activity::driving: {
        if (v.next_time_s > t) return;
        const double at = v.next_time_s;
        v.total_distance_m += v.edge_length_m;
        if (at > cfg_.warmup_s && at <= cfg_.horizon_s) v.distance_m += v.edge_length_m;
        runs_[static_cast<std::size_t>(v.plan.front().run)].distance_m += v.edge_length_m;
        v.node = v.next_node;
        v.next_node = -1;
        begin_next(v, at);
        break;
      }
      case Activity::at_stop: {
        if (!v.serving) {
          const double start = std::max(v.arrival_s, v.plan.front().earliest_s);
          if (start > t) return;
          serve_stop(v, start);
        } else {
          if (v.service_end_s > t) return;
          depart_stop(v);
        }
        break;
      }
    }
  }
}

void Simulator::base_views(const VehicleState& v, std::vector<StopView>& out) const {
  out.clear();
  for (const PlanStop& p : v.plan) {
    StopView s;
    s.base = &p;
    s.node = p.node;
    s.earliest_s = p.earliest_s;
    s.latest_s = p.latest_s;
    s.dwell_s = p.dwell_s;
    out.push_back(s);
  }
}

Simulator::Projection Simulator::project(const VehicleState& v, const std::vector<StopView>& seq,
                                         bool stop_on_failure, std::vector<double>* departures) const {
  Projection out;
  Node node = v.node;
  double t = now_;
  if (v.activity == Activity::driving) {
    node = v.next_node;
    t = v.next_time_s;
  } else if (v.activity == Activity::at_stop) {
    t = v.arrival_s;
  }
  int load = static_cast<int>(v.onboard.size());
  if (departures) departures->clear();

  auto fail = [&](bool FeasibilityFlags::*flag) {
    out.flags.*flag = false;
    return stop_on_failure;
  };

  for (std::size_t i = 0; i < seq.size(); ++i) {
    const StopView& s = seq[i];
    const bool locked_front = i == 0 && v.activity == Activity::at_stop && v.serving;
    double start;
    if (locked_front) {
      start = v.service_start_s;
    } else {
      const double arrival = (i == 0 && v.activity == Activity::at_stop) ? v.arrival_s : t + routing_->time_s(node, s.node);
      start = std::max(arrival, s.earliest_s);
    }
    out.distance_m += routing_->distance_m(node, s.node);
    if (cfg_.enforce_latest && start > s.latest_s + kTimeEps && fail(&FeasibilityFlags::latest)) return out;
    const double depart = start + s.dwell_s;

    auto alight = [&](int id) {
      const Request& r = requests_[static_cast<std::size_t>(id)];
      const double board = r.state == RequestState::on_board ? r.board_time_s : pickup_departure_[static_cast<std::size_t>(id)];
      out.rider_time_s += start - r.request_time_s;
      --load;
      return start - board <= cfg_.max_ride_factor * direct_time(r) + kTimeEps;
    };
    auto board = [&](int id) {
      const Request& r = requests_[static_cast<std::size_t>(id)];
      pickup_departure_[static_cast<std::size_t>(id)] = depart;
      ++load;
      return depart - ready_time(r) <= cfg_.max_wait_s + kTimeEps;
    };

    if (locked_front) {
      for (int id : s.base->alighting) out.rider_time_s += start - requests_[static_cast<std::size_t>(id)].request_time_s;
    } else {
      if (s.base) {
        for (int id : s.base->alighting) {
          if (!alight(id) && fail(&FeasibilityFlags::ride)) return out;
        }
      }
      if (s.extra_alight >= 0 && !alight(s.extra_alight) && fail(&FeasibilityFlags::ride)) return out;
      if (s.base) {
        for (int id : s.base->boarding) {
          if (!board(id) && fail(&FeasibilityFlags::wait)) return out;
        }
      }
      if (s.extra_board >= 0 && !board(s.extra_board) && fail(&FeasibilityFlags::wait)) return out;
    }
    if (load > v.capacity && fail(&FeasibilityFlags::capacity)) return out;
    if (departures) departures->push_back(depart);
    t = depart;
    node = s.node;
  }
  return out;
}

FeasibilityFlags Simulator::check_plan(const VehicleState& v) const {
  std::vector<StopView> views;
  base_views(v, views);
  return project(v, views, false, nullptr).flags;
}

bool Simulator::gap_in_flex_window(const VehicleState& v, std::size_t gap) const {
  if (gap >= v.plan.size()) return false;
  const PlanStop& next = v.plan[gap];
  if (!(next.kind == StopKind::flexible || next.flex_return)) return false;
  if (gap == 0) return v.activity == Activity::driving && v.in_flex_window;
  const PlanStop& prev = v.plan[gap - 1];
  return (prev.flex_exit || prev.kind == StopKind::flexible) && prev.run == next.run;
}

std::optional<InsertionCandidate> Simulator::insert_request(int id, std::vector<InsertionCandidate>* audit) {
  Request& r = requests_[static_cast<std::size_t>(id)];
  const Node pick = r.pickup_node();
  const Node drop = r.dropoff_node();
  const bool pick_flex = !r.origin_stop.has_value();
  const bool drop_flex = !r.destination_stop.has_value();
  const int snapped = (r.origin_stop || r.destination_stop) ? 1 : 0;
  const double ready = ready_time(r);
  const double pickup_limit = ready + cfg_.max_wait_s;
  const double dropoff_limit = pickup_limit + cfg_.max_ride_factor * direct_time(r);

  std::optional<InsertionCandidate> best;
  std::vector<StopView> views;
  std::vector<StopView> seq;
  std::vector<double> base_depart;

  for (const VehicleState& v : vehicles_) {
    const std::size_t n = v.plan.size();
    if (n == 0) continue;
    base_views(v, views);
    const Projection old = project(v, views, false, &base_depart);
    if (base_depart.size() != n) continue;  // unreachable when the committed plan is projected
    const double old_phi = objective(old.distance_m / 1000.0, old.rider_time_s / 3600.0, 0, 0, cfg_.objective);
    const std::size_t join_first = (v.activity == Activity::at_stop && v.serving) ? 1 : 0;
    const std::size_t gap_first = v.activity == Activity::at_stop ? 1 : 0;

    auto evaluate = [&](std::size_t p, bool p_join, std::size_t q, bool q_join) {
      seq.clear();
      seq.reserve(n + 2);
      for (std::size_t i = 0; i <= n; ++i) {
        if (!p_join && i == p) {
          StopView s;
          s.node = pick;
          s.earliest_s = ready;
          s.latest_s = std::numeric_limits<double>::infinity();
          s.dwell_s = template_.stops.front().dwell_s;
          s.extra_board = id;
          seq.push_back(s);
        }
        if (!q_join && i == q) {
          StopView s;
          s.node = drop;
          s.latest_s = std::numeric_limits<double>::infinity();
          s.dwell_s = template_.stops.front().dwell_s;
          s.extra_alight = id;
          seq.push_back(s);
        }
        if (i == n) break;
        StopView s = views[i];
        if (p_join && i == p) {
          s.extra_board = id;
          s.earliest_s = std::max(s.earliest_s, ready);
        }
        if (q_join && i == q) s.extra_alight = id;
        seq.push_back(s);
      }
      const Projection pr = project(v, seq, audit == nullptr, nullptr);
      InsertionCandidate c;
      c.vehicle = v.id;
      c.pickup_position = static_cast<int>(p);
      c.pickup_join = p_join;
      c.dropoff_position = static_cast<int>(q);
      c.dropoff_join = q_join;
      c.flags = pr.flags;
      if (pr.flags.ok()) {
        c.delta_objective =
            objective(pr.distance_m / 1000.0, pr.rider_time_s / 3600.0, 1, snapped, cfg_.objective) - old_phi;
      }
      if (audit) audit->push_back(c);
      if (pr.flags.ok() && (!best || c.delta_objective < best->delta_objective)) best = c;
    };

    // Dropoff options after a pickup at position p (new stop before plan[p], or join of plan[p]).
    auto dropoffs = [&](std::size_t p, bool p_join) {
      for (std::size_t q = p_join ? p + 1 : p; q <= n; ++q) {
        if (q > 0 && base_depart[q - 1] > dropoff_limit) break;
        if (drop_flex && gap_in_flex_window(v, q)) evaluate(p, p_join, q, false);
        if (q < n && v.plan[q].node == drop) evaluate(p, p_join, q, true);
      }
    };

    for (std::size_t p = 0; p <= n; ++p) {
      if (p > 0 && base_depart[p - 1] > pickup_limit) break;
      if (pick_flex && p >= gap_first && gap_in_flex_window(v, p)) dropoffs(p, false);
      if (p < n && p >= join_first && v.plan[p].node == pick) dropoffs(p, true);
    }
  }

  if (!best) {
    r.advance(RequestState::rejected);
    return std::nullopt;
  }

  VehicleState& v = vehicles_[static_cast<std::size_t>(best->vehicle)];
  const auto p = static_cast<std::size_t>(best->pickup_position);
  const auto q = static_cast<std::size_t>(best->dropoff_position);
  auto new_stop = [&](Node node, std::size_t gap) {
    PlanStop s;
    s.node = node;
    s.dwell_s = template_.stops.front().dwell_s;
    s.kind = StopKind::flexible;
    s.run = gap < v.plan.size() ? v.plan[gap].run : v.plan.back().run;
    return s;
  };
  // Apply the dropoff first so that the pickup position still refers to the old plan.
  if (best->dropoff_join) {
    v.plan[q].alighting.push_back(id);
  } else {
    PlanStop s = new_stop(drop, q);
    s.alighting.push_back(id);
    v.plan.insert(v.plan.begin() + static_cast<std::ptrdiff_t>(q), std::move(s));
  }
  if (best->pickup_join) {
    v.plan[p].boarding.push_back(id);
    v.plan[p].earliest_s = std::max(v.plan[p].earliest_s, ready);
  } else {
    PlanStop s = new_stop(pick, p);
    s.earliest_s = ready;
    s.boarding.push_back(id);
    v.plan.insert(v.plan.begin() + static_cast<std::ptrdiff_t>(p), std::move(s));
  }
  r.advance(RequestState::assigned);
  return best;
}

void Simulator::process_requests(double t) {
  while (next_request_ < requests_.size() && requests_[next_request_].request_time_s <= t) {
    insert_request(static_cast<int>(next_request_), audit_);
    ++next_request_;
  }
}

SimResult Simulator::run() {
  // Generous drain limit; every committed plan ends within a few cycles.
  const double hard_stop = cfg_.horizon_s + 24.0 * 3600.0;
  for (double t = now_;; t += cfg_.step_s) {
    step_to(t);
    const bool drained = std::all_of(vehicles_.begin(), vehicles_.end(),
                                     [](const VehicleState& v) { return v.plan.empty(); });
    if (t >= cfg_.horizon_s && drained && next_request_ == requests_.size()) break;
    if (t > hard_stop) throw std::logic_error("simulation did not drain");
  }

  SimResult res;
  res.end_time_s = now_;
  res.warmup_s = cfg_.warmup_s;
  res.max_load_violation = max_load_violation_;
  res.trips.reserve(requests_.size());
  for (const Request& r : requests_) {
    TripRecord tr;
    tr.request_id = r.id;
    tr.state = r.state;
    tr.request_time_s = r.request_time_s;
    tr.access_m = r.access_m();
    tr.direct_s = direct_time(r);
    tr.in_warmup = r.request_time_s < cfg_.warmup_s;
    tr.snapped = r.origin_stop || r.destination_stop;
    if (r.state == RequestState::served || r.state == RequestState::on_board) {
      tr.board_time_s = r.board_time_s;
      tr.wait_s = r.board_time_s - ready_time(r);
    }
    if (r.state == RequestState::served) {
      tr.alight_time_s = r.alight_time_s;
      tr.ride_s = r.alight_time_s - r.board_time_s;
    }
    res.trips.push_back(tr);
  }
  for (const VehicleState& v : vehicles_) {
    VehicleRecord vr;
    vr.vehicle_id = v.id;
    vr.distance_m = v.distance_m;
    vr.deployed_s = cfg_.horizon_s - cfg_.warmup_s;
    vr.runs_completed = v.runs_completed;
    vr.pax_from_terminus_per_run =
        v.runs_counted > 0 ? static_cast<double>(v.terminus_boardings) / v.runs_counted : 0.0;
    res.vehicles.push_back(vr);
  }
  res.runs = runs_;
  res.stop_events = stop_events_;
  res.requests = requests_;
  return res;
}

std::string trips_csv(const std::vector<TripRecord>& trips) {
  std::ostringstream os;
  os << "request_id,state,t_request_s,t_board_s,t_alight_s,access_m,wait_s,ride_s,direct_s\n";
  for (const TripRecord& t : trips) {
    os << t.request_id << ',' << to_string(t.state) << ',' << csv_time(t.request_time_s) << ','
       << csv_time(t.board_time_s) << ',' << csv_time(t.alight_time_s) << ',' << format_fixed(t.access_m, 1) << ','
       << csv_time(t.wait_s) << ',' << csv_time(t.ride_s) << ',' << csv_time(t.direct_s) << '\n';
  }
  return os.str();
}

std::string vehicles_csv(const std::vector<VehicleRecord>& vehicles) {
  std::ostringstream os;
  os << "vehicle_id,distance_m,deployed_s,runs_completed,pax_from_terminus_per_run\n";
  for (const VehicleRecord& v : vehicles) {
    os << v.vehicle_id << ',' << format_fixed(v.distance_m, 1) << ',' << format_fixed(v.deployed_s, 1) << ','
       << v.runs_completed << ',' << format_fixed(v.pax_from_terminus_per_run, 4) << '\n';
  }
  return os.str();
}

}  // namespace sod
