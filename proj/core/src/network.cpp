#include "sod/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <string>

#include "sod/csv.hpp"

namespace sod {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tree {
  std::vector<double> cost;
  std::vector<double> other;  // secondary accumulated weight along the chosen path
  std::vector<Node> pred;
  std::vector<Node> order;  // settle order
};

// Dijkstra from `source` on either edge time (primary = time) or edge length.
// Equal-cost ties keep the smaller predecessor index.
Tree dijkstra(const Network& net, Node source, bool by_time) {
  const std::size_t n = net.node_count();
  Tree t;
  t.cost.assign(n, kInf);
  t.other.assign(n, 0.0);
  t.pred.assign(n, -1);
  t.order.reserve(n);
  std::vector<char> done(n, 0);

  using Item = std::pair<double, Node>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  t.cost[static_cast<std::size_t>(source)] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [c, u] = heap.top();
    heap.pop();
    const auto ui = static_cast<std::size_t>(u);
    if (done[ui] || c > t.cost[ui]) continue;
    done[ui] = 1;
    t.order.push_back(u);
    for (const Edge& e : net.out_edges(u)) {
      const auto vi = static_cast<std::size_t>(e.to);
      if (done[vi]) continue;
      const double w = by_time ? e.time_s : e.length_m;
      const double nc = c + w;
      if (nc < t.cost[vi] || (nc == t.cost[vi] && u < t.pred[vi])) {
        const bool improved = nc < t.cost[vi];
        t.cost[vi] = nc;
        t.pred[vi] = u;
        if (improved) heap.emplace(nc, e.to);
      }
    }
  }
  // Secondary weight along the final predecessor tree.
  for (Node v : t.order) {
    const Node p = t.pred[static_cast<std::size_t>(v)];
    if (p < 0) continue;
    for (const Edge& e : net.out_edges(p)) {
      if (e.to == v) {
        t.other[static_cast<std::size_t>(v)] =
            t.other[static_cast<std::size_t>(p)] + (by_time ? e.length_m : e.time_s);
        break;
      }
    }
  }
  return t;
}

// Strong connectivity via forward and reverse reachability from node 0.
bool strongly_connected(const Network& net) {
  const std::size_t n = net.node_count();
  if (n <= 1) return true;
  std::vector<std::vector<Node>> rev(n);
  for (const Edge& e : net.edges()) rev[static_cast<std::size_t>(e.to)].push_back(e.from);
  auto reach = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::vector<Node> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      Node u = stack.back();
      stack.pop_back();
      auto visit = [&](Node v) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          ++count;
          stack.push_back(v);
        }
      };
      if (forward) {
        for (const Edge& e : net.out_edges(u)) visit(e.to);
      } else {
        for (Node v : rev[static_cast<std::size_t>(u)]) visit(v);
      }
    }
    return count == n;
  };
  return reach(true) && reach(false);
}

}  // namespace

Network::Network(std::vector<NodeRecord> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  if (nodes_.empty()) throw NetworkError("network has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto [it, inserted] = by_id_.emplace(nodes_[i].id, static_cast<Node>(i));
    if (!inserted) throw NetworkError("duplicate node id " + std::to_string(nodes_[i].id));
  }
  for (const Edge& e : edges_) {
    if (!contains(e.from) || !contains(e.to)) throw NetworkError("edge references a node that does not exist");
    if (e.from == e.to) throw NetworkError("self-loop at node " + std::to_string(node(e.from).id));
    if (!(e.length_m > 0.0) || !(e.time_s > 0.0) || !std::isfinite(e.length_m) || !std::isfinite(e.time_s)) {
      throw NetworkError("non-positive weight on edge " + std::to_string(node(e.from).id) + "->" +
                         std::to_string(node(e.to).id));
    }
  }
  std::stable_sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  offsets_.assign(nodes_.size() + 1, 0);
  for (const Edge& e : edges_) ++offsets_[static_cast<std::size_t>(e.from) + 1];
  for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
  if (!strongly_connected(*this)) throw NetworkError("service area is not strongly connected");
}

std::span<const Edge> Network::out_edges(Node n) const {
  const auto i = static_cast<std::size_t>(n);
  return std::span<const Edge>(edges_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

std::optional<Node> Network::index_of(std::int64_t external_id) const {
  auto it = by_id_.find(external_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

Node Network::require(std::int64_t external_id) const {
  auto n = index_of(external_id);
  if (!n) throw NetworkError("unknown node id " + std::to_string(external_id));
  return *n;
}

Network load_network(std::istream& edges_in, std::istream* nodes_in) {
  const CsvTable edge_table = CsvTable::parse(edges_in, "edges");
  edge_table.require_columns({"from_id", "to_id", "length_m", "travel_time_s"});

  std::vector<NodeRecord> nodes;
  if (nodes_in != nullptr) {
    const CsvTable node_table = CsvTable::parse(*nodes_in, "nodes");
    node_table.require_columns({"node_id", "x_m", "y_m"});
    for (std::size_t r = 0; r < node_table.rows(); ++r) {
      nodes.push_back({node_table.integer(r, 0), node_table.number(r, 1), node_table.number(r, 2)});
    }
  } else {
    std::set<std::int64_t> ids;
    for (std::size_t r = 0; r < edge_table.rows(); ++r) {
      ids.insert(edge_table.integer(r, 0));
      ids.insert(edge_table.integer(r, 1));
    }
    for (auto id : ids) nodes.push_back({id, 0.0, 0.0});
  }

  std::unordered_map<std::int64_t, Node> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i].id, static_cast<Node>(i));

  std::vector<Edge> edges;
  edges.reserve(edge_table.rows());
  for (std::size_t r = 0; r < edge_table.rows(); ++r) {
    const auto from = edge_table.integer(r, 0);
    const auto to = edge_table.integer(r, 1);
    auto f = index.find(from);
    auto t = index.find(to);
    if (f == index.end() || t == index.end()) {
      throw NetworkError("edges:" + std::to_string(edge_table.line_of(r)) + ": dangling node reference " +
                         std::to_string(f == index.end() ? from : to));
    }
    const double length = edge_table.number(r, 2);
    const double time = edge_table.number(r, 3);
    if (!(length > 0.0) || !(time > 0.0)) {
      throw NetworkError("edges:" + std::to_string(edge_table.line_of(r)) + ": non-positive weight");
    }
    edges.push_back({f->second, t->second, length, time});
  }
  return Network(std::move(nodes), std::move(edges));
}

Network load_network(const std::filesystem::path& edges,
                     const std::optional<std::filesystem::path>& nodes) {
  std::ifstream edges_in(edges);
  if (!edges_in) throw IoError("cannot open " + edges.string());
  if (nodes) {
    std::ifstream nodes_in(*nodes);
    if (!nodes_in) throw IoError("cannot open " + nodes->string());
    return load_network(edges_in, &nodes_in);
  }
  return load_network(edges_in, nullptr);
}

Network make_grid(int cols, int rows, double spacing_m, double speed_kmh) {
  if (cols < 1 || rows < 1 || !(spacing_m > 0.0) || !(speed_kmh > 0.0)) {
    throw NetworkError("invalid grid dimensions");
  }
  const double time_s = spacing_m / (speed_kmh / 3.6);
  std::vector<NodeRecord> nodes;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      nodes.push_back({static_cast<std::int64_t>(r) * cols + c, c * spacing_m, r * spacing_m});
    }
  }
  std::vector<Edge> edges;
  auto id = [cols](int r, int c) { return static_cast<Node>(r * cols + c); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) {
        edges.push_back({id(r, c), id(r, c + 1), spacing_m, time_s});
        edges.push_back({id(r, c + 1), id(r, c), spacing_m, time_s});
      }
      if (r + 1 < rows) {
        edges.push_back({id(r, c), id(r + 1, c), spacing_m, time_s});
        edges.push_back({id(r + 1, c), id(r, c), spacing_m, time_s});
      }
    }
  }
  return Network(std::move(nodes), std::move(edges));
}

PathResult shortest_path(const Network& net, Node origin, Node destination) {
  if (!net.contains(origin) || !net.contains(destination)) throw NetworkError("query node out of range");
  PathResult result;
  if (origin == destination) return result;
  const Tree t = dijkstra(net, origin, true);
  const auto di = static_cast<std::size_t>(destination);
  if (!std::isfinite(t.cost[di])) throw UnreachableError("destination unreachable");
  for (Node v = destination; v != -1; v = t.pred[static_cast<std::size_t>(v)]) result.nodes.push_back(v);
  std::reverse(result.nodes.begin(), result.nodes.end());
  result.time_s = t.cost[di];
  result.distance_m = t.other[di];
  return result;
}

double walk_distance(const Network& net, Node point, Node stop) {
  if (!net.contains(point) || !net.contains(stop)) throw NetworkError("query node out of range");
  if (point == stop) return 0.0;
  const Tree t = dijkstra(net, point, false);
  const double d = t.cost[static_cast<std::size_t>(stop)];
  if (!std::isfinite(d)) throw UnreachableError("stop unreachable on foot");
  return d;
}

RoutingTable::RoutingTable(const Network& net) : net_(&net), n_(net.node_count()) {
  time_.assign(n_ * n_, kInf);
  dist_.assign(n_ * n_, kInf);
  walk_.assign(n_ * n_, kInf);
  hop_.assign(n_ * n_, -1);
  std::vector<Node> first(n_, -1);
  for (std::size_t s = 0; s < n_; ++s) {
    const Node src = static_cast<Node>(s);
    const Tree t = dijkstra(net, src, true);
    std::fill(first.begin(), first.end(), -1);
    for (Node v : t.order) {
      const auto vi = static_cast<std::size_t>(v);
      const Node p = t.pred[vi];
      if (p < 0) continue;
      first[vi] = p == src ? v : first[static_cast<std::size_t>(p)];
    }
    for (std::size_t v = 0; v < n_; ++v) {
      time_[s * n_ + v] = t.cost[v];
      dist_[s * n_ + v] = t.other[v];
      hop_[s * n_ + v] = first[v];
    }
    const Tree w = dijkstra(net, src, false);
    std::copy(w.cost.begin(), w.cost.end(), walk_.begin() + static_cast<std::ptrdiff_t>(s * n_));
  }
}

PathResult RoutingTable::path(Node a, Node b) const {
  PathResult r;
  if (a == b) return r;
  r.nodes.push_back(a);
  for (Node u = a; u != b;) {
    u = next_hop(u, b);
    if (u < 0) throw UnreachableError("destination unreachable");
    r.nodes.push_back(u);
  }
  r.time_s = time_s(a, b);
  r.distance_m = distance_m(a, b);
  return r;
}

ServiceArea::ServiceArea(const RoutingTable& routing, std::vector<Node> stop_nodes, std::vector<bool> flexible,
                         double catchment_radius_m)
    : routing_(&routing), stops_(std::move(stop_nodes)), flexible_(std::move(flexible)) {
  if (stops_.size() != flexible_.size()) throw NetworkError("stop/flexible mask size mismatch");
  if (stops_.empty()) throw NetworkError("route has no stops");
  const std::size_t n = routing.size();
  catchments_.resize(stops_.size());
  node_flexible_.assign(n, false);
  nearest_fixed_.assign(n, std::nullopt);
  for (std::size_t v = 0; v < n; ++v) {
    const Node node = static_cast<Node>(v);
    double best_any = kInf;
    std::size_t best_any_stop = 0;
    for (std::size_t s = 0; s < stops_.size(); ++s) {
      const double w = routing.walk_m(node, stops_[s]);
      if (w <= catchment_radius_m) catchments_[s].push_back(node);
      if (w < best_any) {
        best_any = w;
        best_any_stop = s;
      }
      if (!flexible_[s] && (!nearest_fixed_[v] || w < nearest_fixed_[v]->walk_m)) {
        nearest_fixed_[v] = Snap{stops_[s], s, w};
      }
    }
    node_flexible_[v] = flexible_[best_any_stop];
  }
}

std::optional<ServiceArea::Snap> ServiceArea::nearest_fixed_stop(Node n) const {
  return nearest_fixed_[static_cast<std::size_t>(n)];
}

ServiceArea::Snap ServiceArea::service_point(Node n) const {
  if (node_is_flexible(n)) return Snap{n, 0, 0.0};
  return *nearest_fixed_[static_cast<std::size_t>(n)];
}

}  // namespace sod
