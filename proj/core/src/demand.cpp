#include "sod/demand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "sod/csv.hpp"
#include "sod/rng.hpp"

namespace sod {
namespace {

int state_rank(RequestState s) {
  switch (s) {
    case RequestState::pending: return 0;
    case RequestState::assigned: return 1;
    case RequestState::on_board: return 2;
    case RequestState::served: return 3;
    case RequestState::rejected: return 3;
  }
  return 0;
}

struct EndpointStats {
  double participation = 0.0;           // E[p]
  double flexible_participation = 0.0;  // E[1{flexible} p]
};

EndpointStats catchment_stats(const ServiceArea& area, std::size_t stop, const AccessParams& access) {
  EndpointStats s;
  const auto nodes = area.catchment(stop);
  if (nodes.empty()) return s;
  for (Node n : nodes) {
    const auto sp = area.service_point(n);
    const double p = access_probability(sp.walk_m, access);
    s.participation += p;
    if (area.node_is_flexible(n)) s.flexible_participation += p;
  }
  s.participation /= static_cast<double>(nodes.size());
  s.flexible_participation /= static_cast<double>(nodes.size());
  return s;
}

}  // namespace

double access_probability(double walk_m, const AccessParams& params) {
  if (walk_m < 0.0) throw DemandError("walking distance must be non-negative");
  if (walk_m > params.max_walk_m) return 0.0;
  if (params.model == AccessModel::linear) {
    return 1.0 - (1.0 - params.min_probability) * walk_m / params.max_walk_m;
  }
  const double at_zero = 1.0 / (1.0 + std::exp(-params.logit_midpoint_m / params.logit_scale_m));
  const double p = 1.0 / (1.0 + std::exp((walk_m - params.logit_midpoint_m) / params.logit_scale_m));
  return std::min(1.0, p / at_zero);
}

void DemandSpec::validate() const {
  if (od.empty()) throw DemandError("OD table is empty");
  for (const auto& r : od) {
    if (!(r.rate_pax_h >= 0.0) || !std::isfinite(r.rate_pax_h)) throw DemandError("OD rates must be non-negative");
  }
  if (!(warmup_s >= 0.0) || !(horizon_s > warmup_s)) throw DemandError("horizon must exceed warm-up");
  if (!(catchment_radius_m > 0.0) || !(walk_speed_kmh > 0.0)) throw DemandError("catchment and walk speed must be positive");
  if (!(access.max_walk_m > 0.0) || access.min_probability < 0.0 || access.min_probability > 1.0) {
    throw DemandError("invalid access parameters");
  }
}

const char* to_string(RequestState s) {
  switch (s) {
    case RequestState::pending: return "pending";
    case RequestState::assigned: return "assigned";
    case RequestState::on_board: return "on_board";
    case RequestState::served: return "served";
    case RequestState::rejected: return "rejected";
  }
  return "?";
}

void Request::advance(RequestState next) {
  const bool terminal = state == RequestState::served || state == RequestState::rejected;
  const bool ok = !terminal && (state_rank(next) == state_rank(state) + 1 ||
                                (next == RequestState::rejected && state == RequestState::pending));
  if (!ok) {
    throw std::logic_error(std::string("request ") + std::to_string(id) + ": illegal transition " +
                           to_string(state) + " -> " + to_string(next));
  }
  state = next;
}

std::vector<Request> generate_requests(const DemandSpec& spec, const ServiceArea& area, std::uint64_t seed,
                                       std::uint64_t replication) {
  spec.validate();
  struct Draw {
    double t;
    std::size_t od;
    std::size_t seq;
    Request r;
  };
  std::vector<Draw> draws;
  for (std::size_t k = 0; k < spec.od.size(); ++k) {
    const OdRate& od = spec.od[k];
    if (od.origin_stop >= area.stop_count() || od.destination_stop >= area.stop_count()) {
      throw DemandError("OD row references an unknown stop");
    }
    if (od.rate_pax_h <= 0.0) continue;
    const auto from = area.catchment(od.origin_stop);
    const auto to = area.catchment(od.destination_stop);
    if (from.empty() || to.empty()) continue;
    KeyedStream rng(seed, replication, k);
    const double rate_per_s = od.rate_pax_h / 3600.0;
    double t = 0.0;
    std::size_t seq = 0;
    while (true) {
      t += rng.exponential(rate_per_s);
      if (t >= spec.horizon_s) break;
      // Always consume the same draws per candidate so that streams stay
      // aligned when only the service layout changes.
      const Node o = from[rng.index(from.size())];
      const Node d = to[rng.index(to.size())];
      const double u = rng.uniform();
      const auto sp_o = area.service_point(o);
      const auto sp_d = area.service_point(d);
      const double p = access_probability(sp_o.walk_m, spec.access) * access_probability(sp_d.walk_m, spec.access);
      ++seq;
      if (!(u < p)) continue;
      if (sp_o.stop_node == sp_d.stop_node) continue;
      Request r;
      r.request_time_s = t;
      r.origin = o;
      r.destination = d;
      r.origin_walk_m = sp_o.walk_m;
      r.destination_walk_m = sp_d.walk_m;
      r.od_index = k;
      draws.push_back({t, k, seq, r});
    }
  }
  std::sort(draws.begin(), draws.end(), [](const Draw& a, const Draw& b) {
    return std::tie(a.t, a.od, a.seq) < std::tie(b.t, b.od, b.seq);
  });
  std::vector<Request> out;
  out.reserve(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    out.push_back(draws[i].r);
    out.back().id = static_cast<int>(i);
  }
  return out;
}

double expected_flexible_endpoint_rate(const DemandSpec& spec, const ServiceArea& area) {
  std::vector<std::optional<EndpointStats>> cache(area.stop_count());
  auto stats = [&](std::size_t stop) -> const EndpointStats& {
    if (!cache[stop]) cache[stop] = catchment_stats(area, stop, spec.access);
    return *cache[stop];
  };
  double rate = 0.0;
  for (const OdRate& od : spec.od) {
    if (od.rate_pax_h <= 0.0) continue;
    const EndpointStats& o = stats(od.origin_stop);
    const EndpointStats& d = stats(od.destination_stop);
    rate += od.rate_pax_h * (o.flexible_participation * d.participation + o.participation * d.flexible_participation);
  }
  return rate;
}

std::vector<OdRate> load_od(std::istream& in, std::size_t stop_count) {
  const CsvTable t = CsvTable::parse(in, "od");
  t.require_columns({"origin_stop", "destination_stop", "rate_pax_per_h"});
  std::vector<OdRate> od;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const auto o = t.integer(r, 0);
    const auto d = t.integer(r, 1);
    const double rate = t.number(r, 2);
    if (o < 0 || d < 0 || static_cast<std::size_t>(o) >= stop_count || static_cast<std::size_t>(d) >= stop_count) {
      throw DemandError("od:" + std::to_string(t.line_of(r)) + ": unknown stop");
    }
    if (rate < 0.0) throw DemandError("od:" + std::to_string(t.line_of(r)) + ": negative rate");
    od.push_back({static_cast<std::size_t>(o), static_cast<std::size_t>(d), rate});
  }
  if (od.empty()) throw DemandError("OD table is empty");
  return od;
}

std::vector<OdRate> load_od(const std::filesystem::path& path, std::size_t stop_count) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return load_od(in, stop_count);
}

std::string requests_csv(const std::vector<Request>& requests, const Network& net) {
  std::ostringstream os;
  os << "request_id,t_request_s,origin_node,destination_node,origin_walk_m,destination_walk_m\n";
  for (const Request& r : requests) {
    os << r.id << ',' << format_fixed(r.request_time_s, 3) << ',' << net.node(r.origin).id << ','
       << net.node(r.destination).id << ',' << format_fixed(r.origin_walk_m, 1) << ','
       << format_fixed(r.destination_walk_m, 1) << '\n';
  }
  return os.str();
}

}  // namespace sod
