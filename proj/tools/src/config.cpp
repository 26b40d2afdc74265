#include <cmath>
#include <fstream>

#include <json.hpp>

#include "sod/csv.hpp"
#include "sodtool/app.hpp"

namespace sodtool {
namespace {

using nlohmann::json;

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

double parse_alpha_key(const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(key, &used);
    if (used != key.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("offpeak_headway_min: key '" + key + "' is not a driver share");
  }
}

sod::CostTable parse_costs(const json& j) {
  sod::CostTable t = sod::CostTable::defaults();
  if (j.contains("classes")) {
    t.classes.clear();
    for (const json& c : j.at("classes")) {
      t.classes.push_back({c.at("size_pax").get<int>(), c.at("operational_cost_per_h").get<double>(),
                           c.at("operating_cost_per_h").get<double>()});
    }
  }
  t.current_operational_cost_per_h = get_or(j, "current_operational_cost_per_h", t.current_operational_cost_per_h);
  t.current_operating_cost_per_h = get_or(j, "current_operating_cost_per_h", t.current_operating_cost_per_h);
  t.driver_cost_per_h = get_or(j, "driver_cost_per_h", t.driver_cost_per_h);
  t.value_of_time_per_h = get_or(j, "value_of_time_per_h", t.value_of_time_per_h);
  t.waiting_weight = get_or(j, "waiting_weight", t.waiting_weight);
  t.capacity_buffer = get_or(j, "capacity_buffer", t.capacity_buffer);
  try {
    t.validate();
  } catch (const sod::PlanningError& e) {
    throw ConfigError(std::string("costs: ") + e.what());
  }
  return t;
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw sod::IoError(std::string(what) + " file not found: " + p.string());
}

}  // namespace

ScenarioConfig load_config(const fs::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw sod::IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path.string() + ": top level must be an object");

  ScenarioConfig c;
  c.base_dir = fs::absolute(path).parent_path();
  try {
    const json& net = j.at("network");
    c.edges = resolve(c.base_dir, net.at("edges").get<std::string>());
    if (net.contains("nodes")) c.nodes = resolve(c.base_dir, net.at("nodes").get<std::string>());
    c.route = resolve(c.base_dir, j.at("route").get<std::string>());
    c.stops = resolve(c.base_dir, j.at("stops").get<std::string>());
    c.od = resolve(c.base_dir, j.at("od").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": missing input path (" + e.what() + ")");
  }
  if (j.contains("routes_table")) c.routes_table = resolve(c.base_dir, j.at("routes_table").get<std::string>());
  if (j.contains("costs")) c.costs = parse_costs(j.at("costs"));

  c.alphas = get_or(j, "alphas", c.alphas);
  if (j.contains("offpeak_headway_min")) {
    for (const auto& [k, v] : j.at("offpeak_headway_min").items()) c.offpeak_headway_min[parse_alpha_key(k)] = v.get<double>();
  }
  if (j.contains("xf_km")) c.xf_km = j.at("xf_km").get<std::vector<double>>();
  c.xf_step_km = get_or(j, "xf_step_km", *c.xf_step_km);
  c.replications = get_or(j, "replications", c.replications);
  c.seed = get_or(j, "seed", c.seed);
  c.horizon_h = get_or(j, "horizon_h", c.horizon_h);
  c.warmup_h = get_or(j, "warmup_h", c.warmup_h);
  c.confidence = get_or(j, "confidence", c.confidence);
  c.catchment_m = get_or(j, "catchment_m", c.catchment_m);
  c.planning_speed_kmh = get_or(j, "planning_speed_kmh", c.planning_speed_kmh);
  c.dwell_s = get_or(j, "dwell_s", c.dwell_s);
  c.max_wait_min = get_or(j, "max_wait_min", c.max_wait_min);
  c.max_ride_factor = get_or(j, "max_ride_factor", c.max_ride_factor);
  c.walk_speed_kmh = get_or(j, "walk_speed_kmh", c.walk_speed_kmh);
  c.jobs = get_or(j, "jobs", c.jobs);
  c.write_records = get_or(j, "write_records", c.write_records);
  if (j.contains("output")) c.output = j.at("output").get<std::string>();
  if (j.contains("access")) {
    const json& a = j.at("access");
    const std::string model = get_or<std::string>(a, "model", "linear");
    if (model == "linear") {
      c.access.model = sod::AccessModel::linear;
    } else if (model == "logit") {
      c.access.model = sod::AccessModel::logit;
    } else {
      throw ConfigError("access.model must be 'linear' or 'logit'");
    }
    c.access.max_walk_m = get_or(a, "max_walk_m", c.access.max_walk_m);
    c.access.min_probability = get_or(a, "min_probability", c.access.min_probability);
    c.access.logit_midpoint_m = get_or(a, "logit_midpoint_m", c.access.logit_midpoint_m);
    c.access.logit_scale_m = get_or(a, "logit_scale_m", c.access.logit_scale_m);
  }

  if (overrides.alpha) c.alphas = {*overrides.alpha};
  if (overrides.xf_km) c.xf_km = {*overrides.xf_km};
  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.replications) c.replications = *overrides.replications;
  if (overrides.output) c.output = *overrides.output;
  if (overrides.jobs) c.jobs = *overrides.jobs;

  if (c.replications < 1) throw ConfigError("replications must be at least 1");
  if (c.alphas.empty()) throw ConfigError("alphas must not be empty");
  for (double a : c.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("driver share must be in [0, 1]");
  }
  if (!(c.horizon_h > c.warmup_h) || c.warmup_h < 0.0) throw ConfigError("horizon must exceed warm-up");
  if (!(c.confidence > 0.0 && c.confidence < 1.0)) throw ConfigError("confidence must be in (0, 1)");
  if (c.xf_km.empty() && !(*c.xf_step_km > 0.0)) throw ConfigError("xf_step_km must be positive");
  if (c.jobs < 0) throw ConfigError("jobs must be non-negative");

  require_file(c.edges, "edges");
  if (c.nodes) require_file(*c.nodes, "nodes");
  require_file(c.route, "route");
  require_file(c.stops, "stops");
  require_file(c.od, "od");
  if (c.routes_table) require_file(*c.routes_table, "routes_table");
  return c;
}

}  // namespace sodtool
