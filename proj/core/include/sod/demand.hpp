#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sod/network.hpp"

namespace sod {

class DemandError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Stop-to-stop demand rate. Stops are indices into the route's stop list.
struct OdRate {
  std::size_t origin_stop = 0;
  std::size_t destination_stop = 0;
  double rate_pax_h = 0.0;
};

enum class AccessModel { linear, logit };

/// Participation as a function of walking distance to the service point.
/// Linear: 1 at 0 m falling to `min_probability` at `max_walk_m`. Logit:
/// a logistic curve normalised to 1 at 0 m. Both are 0 beyond `max_walk_m`.
struct AccessParams {
  AccessModel model = AccessModel::linear;
  double max_walk_m = 500.0;
  double min_probability = 0.5;
  double logit_midpoint_m = 400.0;
  double logit_scale_m = 100.0;
};

double access_probability(double walk_m, const AccessParams& params);

struct DemandSpec {
  std::vector<OdRate> od;
  double catchment_radius_m = 500.0;
  AccessParams access;
  double horizon_s = 3.0 * 3600.0;
  double warmup_s = 3600.0;
  double walk_speed_kmh = kDefaultWalkSpeedKmh;

  void validate() const;
};

enum class RequestState { pending, assigned, on_board, served, rejected };
const char* to_string(RequestState s);

struct Request {
  int id = 0;
  double request_time_s = 0.0;
  Node origin = -1;
  Node destination = -1;
  std::optional<Node> origin_stop;       // set when the origin is in the fixed portion
  std::optional<Node> destination_stop;  // likewise for the destination
  double origin_walk_m = 0.0;
  double destination_walk_m = 0.0;
  std::size_t od_index = 0;
  RequestState state = RequestState::pending;
  double board_time_s = std::numeric_limits<double>::quiet_NaN();
  double alight_time_s = std::numeric_limits<double>::quiet_NaN();

  Node pickup_node() const { return origin_stop.value_or(origin); }
  Node dropoff_node() const { return destination_stop.value_or(destination); }
  double access_m() const { return origin_walk_m + destination_walk_m; }

  /// Moves the lifecycle forward; throws std::logic_error on a backward or
  /// skipped transition.
  void advance(RequestState next);
};

/// Poisson arrivals per OD pair with endpoints drawn uniformly from the
/// stops' catchments, thinned by the access-decay participation model.
/// Deterministic in (spec, area, seed, replication); sorted by request time.
std::vector<Request> generate_requests(const DemandSpec& spec, const ServiceArea& area, std::uint64_t seed,
                                       std::uint64_t replication = 0);

/// Expected flexible-portion stop requests (pickups plus drop-offs) per hour
/// after participation thinning.
double expected_flexible_endpoint_rate(const DemandSpec& spec, const ServiceArea& area);

/// OD table `origin_stop,destination_stop,rate_pax_per_h` (stop sequence numbers).
std::vector<OdRate> load_od(std::istream& in, std::size_t stop_count);
std::vector<OdRate> load_od(const std::filesystem::path& path, std::size_t stop_count);

/// Audit export: `request_id,t_request_s,origin_node,destination_node,origin_walk_m,destination_walk_m`.
std::string requests_csv(const std::vector<Request>& requests, const Network& net);

}  // namespace sod
