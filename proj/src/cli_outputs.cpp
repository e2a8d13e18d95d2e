#include "loadshift/cli/outputs.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "loadshift/core/csv.hpp"
#include "loadshift/core/errors.hpp"

namespace loadshift::cli {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file " + path);
  return out;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

std::string num(double value) { return csv::format_number(value); }

json load_json_if_present(const std::string& path) {
  std::ifstream in(path);
  if (!in) return json();
  json j;
  try {
    in >> j;
  } catch (const json::exception&) {
    return json();
  }
  return j;
}

}  // namespace

std::string prepare_run_dir(const std::string& output_dir,
                            const std::string& study,
                            const std::string& label) {
  if (output_dir.empty() || study.empty() || label.empty())
    throw ConfigError("output directory, study and label must be nonempty");
  std::filesystem::path dir =
      std::filesystem::path(output_dir) / study / label;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw ConfigError("cannot create run directory " + dir.string() + ": " +
                      ec.message());
  return dir.string();
}

void write_manifest(const std::string& dir, const ManifestInfo& info) {
  json j;
  j["study"] = info.study;
  j["label"] = info.label;
  j["command"] = info.command;
  j["config"] = {{"path", info.config_path},
                 {"digest_fnv1a64", info.config_digest}};
  j["seed"] = info.seed;
  j["threads"] = info.threads;
  j["version"] = {{"app", "0.1.0"}, {"manifest_format", 1}};
  json inputs = json::object();
  for (const auto& [name, digest] : info.inputs)
    inputs[name] = digest;
  j["inputs"] = inputs;
  json notes = json::object();
  for (const auto& [key, value] : info.notes) notes[key] = value;
  j["notes"] = notes;
  write_json_file(dir + "/manifest.json", j);
}

void write_plan_csv(const std::string& path, const Plan& plan,
                    const Instance& inst) {
  std::ofstream out = open_out(path);
  out << "job,site,slot,cpus,rate,service\n";
  for (int j = 0; j < plan.jobs(); ++j)
    for (int s = 0; s < plan.sites(); ++s)
      for (int t = 0; t < plan.slots(); ++t) {
        int x = plan.x(j, s, t);
        if (x == 0) continue;
        double c = plan.c(j, s, t);
        out << inst.jobs[static_cast<size_t>(j)].id << ","
            << inst.sites[static_cast<size_t>(s)].id << "," << t << "," << x
            << "," << num(c / x) << "," << num(c) << "\n";
      }
}

namespace {

json breakdown_json(const CostBreakdown& b) {
  json j;
  j["revenue"] = b.revenue;
  j["electricity"] = b.electricity;
  j["ramp_charge"] = b.ramp_charge;
  j["grid_cost"] = b.grid_cost;
  j["realloc_penalty"] = b.realloc_penalty;
  j["delay_penalty"] = b.delay_penalty;
  j["termination_penalty"] = b.termination_penalty;
  j["qos_total"] = b.qos_total;
  j["net_objective"] = b.net_objective;
  return j;
}

}  // namespace

void write_breakdown_json(const std::string& path,
                          const CostBreakdown& breakdown) {
  write_json_file(path, breakdown_json(breakdown));
}

void write_solve_json(const std::string& path,
                      const scenario::PolicyOutcome& outcome) {
  json j;
  j["status"] = to_string(outcome.status);
  j["relaxed"] = outcome.relaxed;
  j["objective"] = outcome.breakdown.net_objective;
  j["bound"] = outcome.bound;
  j["nodes"] = outcome.nodes;
  j["breakdown"] = breakdown_json(outcome.breakdown);
  write_json_file(path, j);
}

void write_power_csv(const std::string& path, const SitePowerSeries& series,
                     const std::vector<Site>& sites) {
  std::ofstream out = open_out(path);
  out << "site,slot,load,power_mw\n";
  for (int s = 0; s < series.power_mw.rows; ++s)
    for (int t = 0; t < series.power_mw.cols; ++t)
      out << sites[static_cast<size_t>(s)].id << "," << t << ","
          << num(series.load.at(s, t)) << "," << num(series.power_mw.at(s, t))
          << "\n";
}

SlotTable read_power_csv(const std::string& path,
                         const std::vector<Site>& sites, int slots) {
  csv::Table table = csv::read_file(path);
  int c_site = table.require_column("site");
  int c_slot = table.require_column("slot");
  int c_power = table.require_column("power_mw");

  std::map<std::string, int> index;
  for (size_t s = 0; s < sites.size(); ++s)
    index[sites[s].id] = static_cast<int>(s);

  SlotTable power(static_cast<int>(sites.size()), slots);
  std::set<std::pair<int, int>> seen;
  for (const auto& row : table.rows) {
    const std::string& id = row.fields[static_cast<size_t>(c_site)];
    auto it = index.find(id);
    if (it == index.end())
      throw ParseError(path, row.line, "unknown site \"" + id + "\"");
    int slot = static_cast<int>(csv::to_int(table, row, c_slot));
    if (slot < 0 || slot >= slots)
      throw ParseError(path, row.line,
                       "slot " + std::to_string(slot) +
                           " outside horizon of " + std::to_string(slots));
    if (!seen.insert({it->second, slot}).second)
      throw ParseError(path, row.line,
                       "duplicate entry for site " + id + " slot " +
                           std::to_string(slot));
    power.at(it->second, slot) = csv::to_double(table, row, c_power);
  }
  if (static_cast<int>(seen.size()) != power.rows * power.cols)
    throw ParseError(path, 0,
                     "power series incomplete: " +
                         std::to_string(seen.size()) + " of " +
                         std::to_string(power.rows * power.cols) +
                         " site-slot entries present");
  return power;
}

void write_security_json(const std::string& path,
                         const grid::SecurityReport& report) {
  json j;
  j["band"] = {{"v_min_pu", report.v_min_pu}, {"v_max_pu", report.v_max_pu}};
  j["slots_total"] = report.slots_total;
  j["slots_converged"] = report.slots_converged;
  j["slots_skipped"] = report.slots_skipped;
  j["violation_bus_hours"] = report.violation_bus_hours;
  j["congestion_line_hours"] = report.congestion_line_hours;
  j["worst_hour_buses"] = report.worst_hour_buses;
  j["avdi_pct"] = report.avdi_pct;
  j["mvdi_pct"] = report.mvdi_pct;
  j["generation_cost"] = report.generation_cost;
  j["per_slot_bus_violations"] = report.per_slot_bus_violations;
  write_json_file(path, j);
}

void write_violations_csv(const std::string& path,
                          const grid::SecurityReport& report) {
  std::ofstream out = open_out(path);
  out << "slot,bus_or_line,kind,magnitude\n";
  for (const auto& event : report.events)
    out << event.slot << "," << event.element << "," << event.kind << ","
        << num(event.magnitude) << "\n";
}

void write_convergence_csv(const std::string& path,
                           const std::vector<grid::SlotSolution>& slots) {
  std::ofstream out = open_out(path);
  out << "slot,converged,iterations,max_mismatch_pu\n";
  for (size_t t = 0; t < slots.size(); ++t)
    out << t << "," << (slots[t].converged ? 1 : 0) << ","
        << slots[t].iterations << "," << num(slots[t].max_mismatch_pu)
        << "\n";
}

void write_compare_csv(const std::string& path,
                       const std::vector<scenario::CompareRow>& rows) {
  std::ofstream out = open_out(path);
  out << "label,status,relaxed,pooled,objective,revenue,delta_revenue_pct,"
         "electricity,delta_elec_pct,ramp_charge,realloc_penalty,"
         "delay_penalty,termination_penalty,violation_bus_hours,"
         "congestion_line_hours,avdi_pct,mvdi_pct,generation_cost,error\n";
  for (const auto& row : rows) {
    out << row.label << ",";
    if (row.ok) {
      const CostBreakdown& b = row.breakdown;
      out << to_string(row.status) << "," << (row.relaxed ? 1 : 0) << ","
          << (row.pooled ? 1 : 0) << "," << num(b.net_objective) << ","
          << num(b.revenue) << "," << num(row.delta_revenue_pct) << ","
          << num(b.electricity) << "," << num(row.delta_elec_pct) << ","
          << num(b.ramp_charge) << "," << num(b.realloc_penalty) << ","
          << num(b.delay_penalty) << "," << num(b.termination_penalty) << ",";
      if (row.has_grid)
        out << row.grid.violation_bus_hours << ","
            << row.grid.congestion_line_hours << "," << num(row.grid.avdi_pct)
            << "," << num(row.grid.mvdi_pct) << ","
            << num(row.grid.generation_cost) << ",";
      else
        out << ",,,,,";
      out << row.error << "\n";
    } else {
      out << "failed,,,,,,,,,,,,,,,,," << row.error << "\n";
    }
  }
}

void write_mc_csv(const std::string& path,
                  const scenario::McResult& result) {
  std::ofstream out = open_out(path);
  out << "trial,seed,metric,baseline,variant,delta\n";
  const char* names[3] = {"violation_bus_hours", "avdi_pct", "mvdi_pct"};
  for (const auto& trial : result.trials) {
    if (!trial.ok) continue;
    double base[3] = {trial.baseline_violation_hours, trial.baseline_avdi_pct,
                      trial.baseline_mvdi_pct};
    double var[3] = {trial.variant_violation_hours, trial.variant_avdi_pct,
                     trial.variant_mvdi_pct};
    for (int k = 0; k < 3; ++k)
      out << trial.trial << "," << trial.seed << "," << names[k] << ","
          << num(base[k]) << "," << num(var[k]) << ","
          << num(var[k] - base[k]) << "\n";
  }
}

namespace {

json summary_json(const scenario::McSummary& s) {
  json j;
  j["mean"] = s.mean;
  j["q10"] = s.q10;
  j["q25"] = s.q25;
  j["median"] = s.median;
  j["q75"] = s.q75;
  j["q90"] = s.q90;
  j["negative_share"] = s.negative_share;
  return j;
}

}  // namespace

void write_mc_json(const std::string& path,
                   const scenario::McResult& result) {
  json j;
  j["trials_run"] = result.trials_run;
  j["trials_ok"] = result.trials_ok;
  j["trials_failed"] = result.trials_failed;
  j["delta_violation_bus_hours"] = summary_json(result.delta_violation_hours);
  j["delta_avdi_pct"] = summary_json(result.delta_avdi);
  j["delta_mvdi_pct"] = summary_json(result.delta_mvdi);
  json failures = json::array();
  for (const auto& trial : result.trials)
    if (!trial.ok)
      failures.push_back({{"trial", trial.trial},
                          {"seed", trial.seed},
                          {"error", trial.error}});
  j["failures"] = failures;
  write_json_file(path, j);
}

void write_sweep_csv(const std::string& path,
                     const scenario::SweepResult& result) {
  std::ofstream out = open_out(path);
  out << "coef_value,P_realloc,P_delay,P_term,sum_g,C_ramp,objective\n";
  for (const auto& row : result.rows) {
    if (!row.ok) continue;
    out << num(row.value) << "," << num(row.realloc_penalty) << ","
        << num(row.delay_penalty) << "," << num(row.termination_penalty)
        << "," << num(row.sum_g_mw) << "," << num(row.ramp_charge) << ","
        << num(row.objective) << "\n";
  }
}

void write_sweep_json(const std::string& path,
                      const scenario::SweepResult& result) {
  json j;
  j["coefficient"] = scenario::to_string(result.coefficient);
  j["reference_sum_g_mw"] = result.reference_sum_g_mw;
  json points = json::array();
  for (const auto& row : result.rows) {
    json p;
    p["value"] = row.value;
    p["ok"] = row.ok;
    if (!row.ok) p["error"] = row.error;
    points.push_back(p);
  }
  j["points"] = points;
  write_json_file(path, j);
}

void write_instance_json(const std::string& path, const Instance& inst,
                         const JobIngest& ingest) {
  json j;
  j["jobs"] = inst.jobs.size();
  j["sites"] = inst.sites.size();
  j["horizon"] = {{"slots", inst.horizon.slots_original},
                  {"slots_with_slack", inst.horizon.slots_total},
                  {"slot_hours", inst.horizon.slot_hours}};
  double total_work = 0.0;
  int max_cpus = 0;
  for (const auto& job : inst.jobs) {
    total_work += job.total_work;
    max_cpus = std::max(max_cpus, job.max_cpus);
  }
  j["total_work"] = total_work;
  j["largest_job_cpus"] = max_cpus;
  json sites = json::array();
  for (const auto& site : inst.sites)
    sites.push_back({{"id", site.id},
                     {"zone", site.zone},
                     {"cpu_capacity", site.cpu_capacity},
                     {"bus", site.bus_id},
                     {"max_facility_mw", site.pue * site.p_busy_mw}});
  j["fleet"] = sites;
  j["rejected_rows"] = ingest.rejected;
  write_json_file(path, j);
}

std::string render_report(const std::string& run_dir) {
  std::ostringstream out;
  out << "Run report: " << run_dir << "\n";

  json manifest = load_json_if_present(run_dir + "/manifest.json");
  if (!manifest.is_null()) {
    out << "\n[manifest]\n";
    out << "  study: " << manifest.value("study", std::string()) << "\n";
    out << "  label: " << manifest.value("label", std::string()) << "\n";
    out << "  command: " << manifest.value("command", std::string()) << "\n";
    out << "  seed: " << manifest.value("seed", 0ULL) << "\n";
  }

  json solve = load_json_if_present(run_dir + "/solve.json");
  if (!solve.is_null()) {
    out << "\n[schedule]\n";
    out << "  status: " << solve.value("status", std::string()) << "\n";
    out << "  objective: " << num(solve.value("objective", 0.0)) << "\n";
    out << "  bound: " << num(solve.value("bound", 0.0)) << "\n";
    if (solve.contains("breakdown")) {
      const json& b = solve["breakdown"];
      out << "  revenue: " << num(b.value("revenue", 0.0)) << "\n";
      out << "  electricity: " << num(b.value("electricity", 0.0)) << "\n";
      out << "  qos_total: " << num(b.value("qos_total", 0.0)) << "\n";
    }
  }

  json security = load_json_if_present(run_dir + "/security.json");
  if (!security.is_null()) {
    out << "\n[grid]\n";
    out << "  slots: " << security.value("slots_converged", 0) << "/"
        << security.value("slots_total", 0) << " converged\n";
    out << "  violation_bus_hours: "
        << security.value("violation_bus_hours", 0) << "\n";
    out << "  congestion_line_hours: "
        << security.value("congestion_line_hours", 0) << "\n";
    out << "  avdi_pct: " << num(security.value("avdi_pct", 0.0)) << "\n";
    out << "  mvdi_pct: " << num(security.value("mvdi_pct", 0.0)) << "\n";
    out << "  generation_cost: "
        << num(security.value("generation_cost", 0.0)) << "\n";
  }

  std::ifstream compare(run_dir + "/compare.csv");
  if (compare) {
    out << "\n[compare]\n";
    std::string line;
    while (std::getline(compare, line)) out << "  " << line << "\n";
  }

  json mc = load_json_if_present(run_dir + "/mc_summary.json");
  if (!mc.is_null()) {
    out << "\n[montecarlo]\n";
    out << "  trials: " << mc.value("trials_ok", 0) << " ok / "
        << mc.value("trials_failed", 0) << " failed\n";
    if (mc.contains("delta_violation_bus_hours"))
      out << "  mean delta violation_bus_hours: "
          << num(mc["delta_violation_bus_hours"].value("mean", 0.0)) << "\n";
    if (mc.contains("delta_avdi_pct"))
      out << "  mean delta avdi_pct: "
          << num(mc["delta_avdi_pct"].value("mean", 0.0)) << "\n";
  }

  json sweep = load_json_if_present(run_dir + "/sweep_summary.json");
  if (!sweep.is_null()) {
    out << "\n[sweep]\n";
    out << "  coefficient: " << sweep.value("coefficient", std::string())
        << "\n";
    out << "  reference_sum_g_mw: "
        << num(sweep.value("reference_sum_g_mw", 0.0)) << "\n";
  }

  return out.str();
}

}  // namespace loadshift::cli
