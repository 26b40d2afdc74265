#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "sod/csv.hpp"
#include "sodtool/app.hpp"

namespace sodtool {
namespace {

using sod::format_fixed;
using sod::format_number;

std::string csv_escape(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c == ',' || c == '\n') c = ';';
  }
  return out;
}

std::string point_tag(double alpha, double xf) { return "alpha" + alpha_tag(alpha) + "_xf" + xf_tag(xf); }

std::vector<sod::RouteSpec> plan_routes(const ScenarioConfig& cfg) {
  return sod::load_routes(cfg.routes_table ? *cfg.routes_table : cfg.route);
}

void write_records(const fs::path& dir, const Replication& r) {
  char name[32];
  std::snprintf(name, sizeof name, "rep_%04d", r.summary.replication);
  sod::write_text_file(dir / (std::string(name) + "_trips.csv"), sod::trips_csv(r.result.trips));
  sod::write_text_file(dir / (std::string(name) + "_vehicles.csv"), sod::vehicles_csv(r.result.vehicles));
}

sod::MetricsSummary summarize_point(const Scenario& scenario, const ScenarioPoint& p, const fs::path& record_dir,
                                    bool records) {
  const ScenarioConfig& cfg = scenario.config();
  auto reps = run_replications(scenario, p, cfg.replications, cfg.seed, cfg.jobs, records);
  std::vector<sod::ReplicationSummary> summaries;
  for (auto& r : reps) {
    if (records) write_records(record_dir, r);
    summaries.push_back(std::move(r.summary));
  }
  return sod::aggregate(std::move(summaries));
}

}  // namespace

std::string alpha_tag(double alpha) { return format_number(alpha); }
std::string xf_tag(double xf_km) { return format_number(xf_km); }

std::string plan_csv(const std::vector<sod::RouteSpec>& routes, const sod::CostTable& costs,
                     const std::vector<double>& alphas, bool* any_infeasible) {
  std::ostringstream os;
  os << "route_id,alpha,scenario,vehicle_size,headway_min,fleet_size,retained_drivers,additional_savs,cost_per_h,"
        "binding,unconstrained_headway_min,min_headway_min,max_headway_min,diagnostic\n";
  for (const sod::RouteSpec& r : routes) {
    for (double a : alphas) {
      const auto scenario = sod::PlanningScenario::for_alpha(a);
      const sod::FleetPlan p = sod::plan_route(r, costs, scenario);
      if (p.binding == sod::Binding::infeasible && any_infeasible) *any_infeasible = true;
      os << r.id << ',' << format_number(a) << ','
         << (scenario.kind == sod::ScenarioKind::full_sav ? "full_sav" : "transition") << ',' << p.vehicle_size << ','
         << format_number(p.headway_min) << ',' << p.fleet_size << ',' << format_fixed(p.retained_drivers, 2) << ','
         << format_fixed(p.additional_savs, 2) << ',' << format_fixed(p.cost_per_h, 2) << ','
         << sod::to_string(p.binding) << ',' << format_fixed(p.unconstrained_headway_min, 3) << ','
         << format_fixed(p.min_headway_min, 3) << ',' << format_fixed(p.max_headway_min, 3) << ','
         << csv_escape(p.diagnostic) << '\n';
    }
  }
  return os.str();
}

std::string schedule_csv(const sod::SoDSchedule& s, const std::vector<sod::Node>& stop_nodes, const sod::Network& net) {
  std::ostringstream os;
  os << "seq,stop,node_id,direction,earliest_s,latest_s,dwell_s,flex_exit,flex_return\n";
  for (std::size_t i = 0; i < s.stops.size(); ++i) {
    const sod::ScheduledStop& st = s.stops[i];
    os << i << ',' << st.stop << ',' << net.node(stop_nodes[st.stop]).id << ',' << (st.outbound ? "out" : "in") << ','
       << format_fixed(st.earliest_s, 1) << ',' << format_fixed(st.latest_s, 1) << ',' << format_number(st.dwell_s)
       << ',' << (st.flex_exit ? 1 : 0) << ',' << (st.flex_return ? 1 : 0) << '\n';
  }
  return os.str();
}

int cmd_plan(const ScenarioConfig& cfg) {
  bool infeasible = false;
  const std::string csv = plan_csv(plan_routes(cfg), cfg.costs, cfg.alphas, &infeasible);
  sod::write_text_file(cfg.output / "plan.csv", csv);
  std::cout << "wrote " << (cfg.output / "plan.csv").string() << '\n';
  if (infeasible) {
    std::cerr << "warning: at least one route has no feasible vehicle size; see the diagnostic column\n";
    return kInfeasible;
  }
  return kOk;
}

int cmd_schedule(const ScenarioConfig& cfg) {
  const Scenario scenario(cfg);
  std::ostringstream budgets;
  std::ostringstream cdf;
  budgets << "alpha,x_f_km,offpeak_headway_min,requests_per_run,required_budget_min,cap_min,budget_min,diagnostic\n";
  cdf << "alpha,x_f_km,t_min,cum_prob\n";
  for (double a : cfg.alphas) {
    for (double x : scenario.xf_grid()) {
      const ScenarioPoint p = scenario.point(a, x);
      std::string diag = p.schedule.diagnostic;
      if (p.cap.minutes <= 0.0) {
        std::cerr << "warning: alpha " << format_number(a) << ": " << p.cap.diagnostic << '\n';
        if (diag.empty()) diag = p.cap.diagnostic;
      }
      budgets << format_number(a) << ',' << format_number(x) << ',' << format_number(p.offpeak_headway_min) << ','
              << format_fixed(p.requests_per_run, 4) << ',' << format_fixed(p.required_budget_min, 2) << ','
              << format_fixed(p.cap.minutes, 2) << ',' << format_fixed(p.schedule.detour_budget_min, 2) << ','
              << csv_escape(diag) << '\n';
      if (x > 0.0) {
        sod::DetourParams dp;
        dp.requests_per_run = p.requests_per_run;
        dp.max_walk_m = cfg.access.max_walk_m;
        dp.planning_speed_kmh = cfg.planning_speed_kmh;
        dp.dwell_s = cfg.dwell_s;
        dp.confidence = cfg.confidence;
        const double t_max = std::max(1.0, 1.5 * std::max(p.required_budget_min, p.cap.minutes));
        for (const auto& [t, f] : sod::detour_cdf_table(dp, t_max, 0.25)) {
          cdf << format_number(a) << ',' << format_number(x) << ',' << format_number(t) << ',' << format_fixed(f, 6)
              << '\n';
        }
      }
      sod::write_text_file(cfg.output / "schedule" / (point_tag(a, x) + ".csv"),
                           schedule_csv(p.schedule, scenario.stop_nodes(), scenario.network()));
    }
  }
  sod::write_text_file(cfg.output / "schedule" / "budgets.csv", budgets.str());
  sod::write_text_file(cfg.output / "schedule" / "detour_cdf.csv", cdf.str());
  std::cout << "wrote " << (cfg.output / "schedule").string() << '\n';
  return kOk;
}

int cmd_simulate(const ScenarioConfig& cfg) {
  const Scenario scenario(cfg);
  for (double a : cfg.alphas) {
    for (double x : scenario.xf_grid()) {
      const ScenarioPoint p = scenario.point(a, x);
      const fs::path dir = cfg.output / "simulate" / point_tag(a, x);
      const sod::MetricsSummary m = summarize_point(scenario, p, dir, true);
      sod::write_text_file(dir / "aggregate.json", sod::summary_json(m));
      sod::write_text_file(dir / "cdf.csv", sod::cdf_csv(m));
      std::cout << "alpha " << format_number(a) << " x_f " << format_number(x) << " km: served "
                << format_number(m.stats.at("served").median) << ", rejected "
                << format_number(m.stats.at("rejected").median) << ", generalized cost "
                << format_fixed(m.stats.at("generalized_cost").median, 2) << " (median of " << m.replications
                << ")\n";
    }
  }
  return kOk;
}

int cmd_sweep(const ScenarioConfig& cfg) {
  const Scenario scenario(cfg);
  std::ostringstream summary;
  summary << "alpha,best_x_f_km,best_generalized_cost,terminus_pax_per_run\n";
  for (double a : cfg.alphas) {
    std::vector<std::pair<double, sod::MetricsSummary>> by_xf;
    for (double x : scenario.xf_grid()) {
      const ScenarioPoint p = scenario.point(a, x);
      const fs::path dir = cfg.output / "sweep" / point_tag(a, x);
      sod::MetricsSummary m = summarize_point(scenario, p, dir, cfg.write_records);
      sod::write_text_file(cfg.output / "sweep" / (point_tag(a, x) + ".json"), sod::summary_json(m));
      sod::write_text_file(cfg.output / "sweep" / (point_tag(a, x) + "_cdf.csv"), sod::cdf_csv(m));
      by_xf.emplace_back(x, std::move(m));
    }
    const sod::SweepResult s = sod::sweep_analysis(by_xf);
    sod::write_text_file(cfg.output / ("sweep_alpha" + alpha_tag(a) + ".csv"), sod::sweep_csv(s.rows));
    summary << format_number(a) << ',' << format_number(s.best_x_f_km) << ',' << format_fixed(s.best_cost, 2) << ','
            << format_fixed(s.terminus_pax_per_run, 3) << '\n';
    std::cout << "alpha " << format_number(a) << ": x_f* = " << format_number(s.best_x_f_km) << " km\n";
  }
  sod::write_text_file(cfg.output / "sweep_summary.csv", summary.str());
  return kOk;
}

int cmd_report(const ScenarioConfig& cfg) {
  const fs::path summary_path = cfg.output / "sweep_summary.csv";
  const sod::CsvTable summary = sod::CsvTable::read(summary_path);
  summary.require_columns({"alpha", "best_x_f_km", "best_generalized_cost", "terminus_pax_per_run"});
  const std::vector<std::string> shown = {"generalized_cost", "user_cost", "operator_cost", "served",
                                          "median_access_s",  "median_wait_s", "median_ride_s"};
  std::ostringstream md;
  md << "# Sweep report\n";
  for (std::size_t r = 0; r < summary.rows(); ++r) {
    const std::string alpha = summary.cell(r, 0);
    md << "\n## alpha = " << alpha << "\n\n";
    md << "Optimal flexible portion: " << summary.cell(r, 1) << " km (median generalized cost "
       << summary.cell(r, 2) << "); passengers from the terminus per run at x_f = 0: " << summary.cell(r, 3)
       << ".\n\n";
    const sod::CsvTable sweep = sod::CsvTable::read(cfg.output / ("sweep_alpha" + alpha + ".csv"));
    sweep.require_columns({"x_f_km", "metric", "median", "q25", "q75", "normalized_pct"});
    std::map<double, std::map<std::string, std::string>> table;
    for (std::size_t i = 0; i < sweep.rows(); ++i) {
      const std::string& metric = sweep.cell(i, 1);
      if (std::find(shown.begin(), shown.end(), metric) == shown.end()) continue;
      const std::string& pct = sweep.cell(i, 5);
      std::string cell = format_fixed(sweep.number(i, 2), 2);
      if (!pct.empty()) cell += " (" + format_fixed(std::stod(pct), 1) + "%)";
      table[sweep.number(i, 0)][metric] = cell;
    }
    md << "| x_f (km) |";
    for (const auto& m : shown) md << ' ' << m << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < shown.size(); ++i) md << "---|";
    md << '\n';
    for (const auto& [x, row] : table) {
      md << "| " << format_number(x) << " |";
      for (const auto& m : shown) {
        const auto it = row.find(m);
        md << ' ' << (it == row.end() ? std::string("-") : it->second) << " |";
      }
      md << '\n';
    }
  }
  sod::write_text_file(cfg.output / "report.md", md.str());
  std::cout << md.str();
  return kOk;
}

}  // namespace sodtool
