#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace sod {

/// Dense node index into a Network. External ids from input files are kept
/// on NodeRecord and mapped through Network::index_of.
using Node = std::int32_t;

inline constexpr double kDefaultWalkSpeedKmh = 5.0;

struct NodeRecord {
  std::int64_t id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
};

struct Edge {
  Node from = 0;
  Node to = 0;
  double length_m = 0.0;
  double time_s = 0.0;
};

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnreachableError : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

/// Immutable directed street graph. Construction validates positive weights,
/// node references and strong connectivity, so a Network that exists is
/// always usable for routing between any two nodes.
class Network {
 public:
  Network(std::vector<NodeRecord> nodes, std::vector<Edge> edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const NodeRecord& node(Node n) const { return nodes_[static_cast<std::size_t>(n)]; }
  std::span<const NodeRecord> nodes() const { return nodes_; }
  std::span<const Edge> edges() const { return edges_; }

  /// Outgoing edges of `n`, ordered by target index.
  std::span<const Edge> out_edges(Node n) const;

  std::optional<Node> index_of(std::int64_t external_id) const;
  Node require(std::int64_t external_id) const;

  bool contains(Node n) const { return n >= 0 && static_cast<std::size_t>(n) < nodes_.size(); }

 private:
  std::vector<NodeRecord> nodes_;
  std::vector<Edge> edges_;  // sorted by (from, to)
  std::vector<std::size_t> offsets_;
  std::unordered_map<std::int64_t, Node> by_id_;
};

/// Reads `from_id,to_id,length_m,travel_time_s` edges and, optionally,
/// `node_id,x_m,y_m` nodes. Without a node table, nodes are created from the
/// ids referenced by edges (in ascending id order) at the origin.
Network load_network(std::istream& edges, std::istream* nodes = nullptr);
Network load_network(const std::filesystem::path& edges,
                     const std::optional<std::filesystem::path>& nodes = std::nullopt);

/// Rectangular grid with bidirectional edges between 4-neighbours.
/// Node ids are row * cols + col, coordinates col * spacing, row * spacing.
Network make_grid(int cols, int rows, double spacing_m, double speed_kmh);

struct PathResult {
  std::vector<Node> nodes;  // empty when origin == destination
  double distance_m = 0.0;
  double time_s = 0.0;
};

/// Time-minimal path. Among equal-time alternatives the predecessor with the
/// smaller index wins, which makes repeated queries return identical paths.
PathResult shortest_path(const Network& net, Node origin, Node destination);

/// Length-minimal walking distance on the same graph (meters).
double walk_distance(const Network& net, Node point, Node stop);

/// All-pairs travel table computed once per network. Read-only after
/// construction, so one instance can be shared across threads.
class RoutingTable {
 public:
  explicit RoutingTable(const Network& net);

  const Network& network() const { return *net_; }
  std::size_t size() const { return n_; }

  double time_s(Node a, Node b) const { return time_[at(a, b)]; }
  /// Length of the time-minimal path.
  double distance_m(Node a, Node b) const { return dist_[at(a, b)]; }
  double walk_m(Node a, Node b) const { return walk_[at(a, b)]; }
  /// First node after `a` on the path to `b`; `b` itself when adjacent, -1 when a == b.
  Node next_hop(Node a, Node b) const { return hop_[at(a, b)]; }

  PathResult path(Node a, Node b) const;

 private:
  std::size_t at(Node a, Node b) const {
    return static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b);
  }

  const Network* net_;
  std::size_t n_ = 0;
  std::vector<double> time_;
  std::vector<double> dist_;
  std::vector<double> walk_;
  std::vector<Node> hop_;
};

/// Route stops over the network with their catchment geometry. A stop is
/// either fixed (served on timetable) or flexible (inside the door-to-door
/// portion). Every node is assigned to its nearest stop by walking distance.
class ServiceArea {
 public:
  ServiceArea(const RoutingTable& routing, std::vector<Node> stop_nodes, std::vector<bool> flexible,
              double catchment_radius_m);

  std::size_t stop_count() const { return stops_.size(); }
  Node stop_node(std::size_t stop) const { return stops_[stop]; }
  bool stop_is_flexible(std::size_t stop) const { return flexible_[stop]; }

  /// Nodes within walking distance `catchment_radius_m` of the stop, ascending.
  std::span<const Node> catchment(std::size_t stop) const { return catchments_[stop]; }

  /// True when the node's nearest stop lies in the flexible portion.
  bool node_is_flexible(Node n) const { return node_flexible_[static_cast<std::size_t>(n)]; }

  struct Snap {
    Node stop_node = -1;
    std::size_t stop = 0;
    double walk_m = 0.0;
  };
  /// Nearest fixed stop by walking distance (ties to the lower stop index).
  /// Empty when the route has no fixed stop.
  std::optional<Snap> nearest_fixed_stop(Node n) const;

  /// Where a rider at `n` is served: the node itself in the flexible portion,
  /// the nearest fixed stop otherwise. walk_m is 0 for door-to-door service.
  Snap service_point(Node n) const;

  const RoutingTable& routing() const { return *routing_; }

 private:
  const RoutingTable* routing_;
  std::vector<Node> stops_;
  std::vector<bool> flexible_;
  std::vector<std::vector<Node>> catchments_;
  std::vector<bool> node_flexible_;
  std::vector<std::optional<Snap>> nearest_fixed_;
};

}  // namespace sod
