#include "loadshift/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"
#include "loadshift/core/errors.hpp"
#include "loadshift/core/ingest.hpp"
#include "loadshift/scenario/profiles.hpp"

namespace loadshift::cli {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) known = true;
    if (!known)
      throw ConfigError("unknown config key: " + path + "." + it.key());
  }
}

const json& member(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ConfigError("missing config key: " + path + "." + key);
  return *it;
}

template <typename T>
T fetch(const json& obj, const std::string& path, const char* key) {
  try {
    return member(obj, path, key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key " + path + "." + key +
                      " has the wrong type");
  }
}

template <typename T>
T fetch_or(const json& obj, const std::string& path, const char* key,
           T fallback) {
  if (obj.find(key) == obj.end()) return fallback;
  return fetch<T>(obj, path, key);
}

RampForm parse_ramp_form(const std::string& text, const std::string& path) {
  if (text == "off") return RampForm::off;
  if (text == "linear") return RampForm::linear;
  if (text == "quadratic") return RampForm::quadratic;
  throw ConfigError(path + ": unknown ramp form \"" + text +
                    "\" (expected off, linear or quadratic)");
}

std::string resolve(const std::filesystem::path& base,
                    const std::string& path) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return p.string();
  return (base / p).lexically_normal().string();
}

void require_file(const std::string& path, const std::string& key) {
  if (path.empty()) throw ConfigError("config key " + key + " is empty");
  if (!std::filesystem::exists(path))
    throw ConfigError("config key " + key + " names a missing file: " + path);
}

}  // namespace

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " +
                      e.what());
  }
  if (!root.is_object())
    throw ConfigError("config file " + path + " must hold a JSON object");

  StudyConfig cfg;
  const std::filesystem::path base =
      std::filesystem::path(path).parent_path();
  check_keys(root, "$",
             {"study", "paths", "horizon", "sites", "portfolio", "solver",
              "grid", "scenario", "sweep", "output_dir"});

  cfg.study = fetch_or<std::string>(root, "$", "study", cfg.study);
  cfg.output_dir = fetch_or<std::string>(root, "$", "output_dir",
                                         cfg.output_dir);

  const json& paths = member(root, "$", "paths");
  check_keys(paths, "paths",
             {"jobs", "electricity_prices", "service_prices", "case"});
  cfg.jobs_path = resolve(base, fetch<std::string>(paths, "paths", "jobs"));
  cfg.electricity_path = resolve(
      base, fetch<std::string>(paths, "paths", "electricity_prices"));
  cfg.service_path =
      resolve(base, fetch<std::string>(paths, "paths", "service_prices"));
  cfg.grid.case_path =
      resolve(base, fetch_or<std::string>(paths, "paths", "case", ""));
  require_file(cfg.jobs_path, "paths.jobs");
  require_file(cfg.electricity_path, "paths.electricity_prices");
  require_file(cfg.service_path, "paths.service_prices");
  if (!cfg.grid.case_path.empty())
    require_file(cfg.grid.case_path, "paths.case");

  const json& horizon = member(root, "$", "horizon");
  check_keys(horizon, "horizon", {"slots", "slot_hours"});
  cfg.slots = fetch<int>(horizon, "horizon", "slots");
  cfg.slot_hours = fetch_or<double>(horizon, "horizon", "slot_hours", 1.0);
  if (cfg.slots <= 0) throw ConfigError("horizon.slots must be positive");
  if (cfg.slot_hours <= 0)
    throw ConfigError("horizon.slot_hours must be positive");

  const json& sites = member(root, "$", "sites");
  if (!sites.is_array() || sites.empty())
    throw ConfigError("sites must be a nonempty array");
  for (size_t i = 0; i < sites.size(); ++i) {
    const std::string spath = "sites[" + std::to_string(i) + "]";
    const json& js = sites[i];
    check_keys(js, spath,
               {"id", "zone", "cpu_capacity", "rate_lo", "rate_hi",
                "p_idle_mw", "p_busy_mw", "pue", "ramp_tolerance_mw", "bus"});
    Site site;
    site.id = fetch<std::string>(js, spath, "id");
    site.zone = fetch<std::string>(js, spath, "zone");
    site.cpu_capacity = fetch<int>(js, spath, "cpu_capacity");
    site.rate_lo = fetch<double>(js, spath, "rate_lo");
    site.rate_hi = fetch<double>(js, spath, "rate_hi");
    site.p_idle_mw = fetch<double>(js, spath, "p_idle_mw");
    site.p_busy_mw = fetch<double>(js, spath, "p_busy_mw");
    site.pue = fetch<double>(js, spath, "pue");
    site.ramp_tolerance_mw =
        fetch_or<double>(js, spath, "ramp_tolerance_mw", 0.0);
    site.bus_id = fetch_or<int>(js, spath, "bus", 0);
    if (site.cpu_capacity <= 0)
      throw ConfigError(spath + ".cpu_capacity must be positive");
    if (site.rate_lo <= 0 || site.rate_hi < site.rate_lo)
      throw ConfigError(spath + ": rates must satisfy 0 < rate_lo <= rate_hi");
    if (site.p_idle_mw < 0 || site.p_busy_mw < site.p_idle_mw)
      throw ConfigError(spath +
                        ": powers must satisfy 0 <= p_idle_mw <= p_busy_mw");
    if (site.pue < 1.0) throw ConfigError(spath + ".pue must be >= 1");
    if (site.ramp_tolerance_mw < 0)
      throw ConfigError(spath + ".ramp_tolerance_mw must be >= 0");
    cfg.sites.push_back(site);
  }

  if (root.find("portfolio") != root.end()) {
    const json& jp = root["portfolio"];
    check_keys(jp, "portfolio",
               {"slack", "realloc", "termination", "rho", "eta", "phi",
                "gamma", "ramp_form"});
    Portfolio& pf = cfg.portfolio;
    pf.slack = fetch_or<bool>(jp, "portfolio", "slack", pf.slack);
    pf.realloc = fetch_or<bool>(jp, "portfolio", "realloc", pf.realloc);
    pf.termination =
        fetch_or<bool>(jp, "portfolio", "termination", pf.termination);
    pf.rho = fetch_or<double>(jp, "portfolio", "rho", pf.rho);
    pf.eta = fetch_or<double>(jp, "portfolio", "eta", pf.eta);
    pf.phi = fetch_or<double>(jp, "portfolio", "phi", pf.phi);
    pf.gamma = fetch_or<double>(jp, "portfolio", "gamma", pf.gamma);
    pf.ramp_form = parse_ramp_form(
        fetch_or<std::string>(jp, "portfolio", "ramp_form",
                              pf.ramp_form == RampForm::off ? "off"
                              : pf.ramp_form == RampForm::linear
                                  ? "linear"
                                  : "quadratic"),
        "portfolio.ramp_form");
    if (pf.rho < 0 || pf.eta < 0 || pf.phi < 0 || pf.gamma < 0)
      throw ConfigError("portfolio coefficients must be nonnegative");
  }

  if (root.find("solver") != root.end()) {
    const json& js = root["solver"];
    check_keys(js, "solver",
               {"gap_tol", "node_limit", "time_limit_s", "pwl_segments",
                "relax"});
    SolveOptions& so = cfg.solver;
    so.gap_tol = fetch_or<double>(js, "solver", "gap_tol", so.gap_tol);
    so.node_limit = fetch_or<int>(js, "solver", "node_limit", so.node_limit);
    so.time_limit_s =
        fetch_or<double>(js, "solver", "time_limit_s", so.time_limit_s);
    so.pwl_segments =
        fetch_or<int>(js, "solver", "pwl_segments", so.pwl_segments);
    so.relax = fetch_or<bool>(js, "solver", "relax", so.relax);
    if (so.pwl_segments <= 0)
      throw ConfigError("solver.pwl_segments must be positive");
  }

  if (root.find("grid") != root.end()) {
    const json& jg = root["grid"];
    check_keys(jg, "grid",
               {"v_min", "v_max", "pf_tolerance", "max_iterations",
                "max_nonconverged_fraction"});
    GridConfig& g = cfg.grid;
    g.v_min_pu = fetch_or<double>(jg, "grid", "v_min", g.v_min_pu);
    g.v_max_pu = fetch_or<double>(jg, "grid", "v_max", g.v_max_pu);
    g.pf_tolerance_pu =
        fetch_or<double>(jg, "grid", "pf_tolerance", g.pf_tolerance_pu);
    g.max_iterations =
        fetch_or<int>(jg, "grid", "max_iterations", g.max_iterations);
    g.max_nonconverged_fraction =
        fetch_or<double>(jg, "grid", "max_nonconverged_fraction",
                         g.max_nonconverged_fraction);
    if (g.v_min_pu >= g.v_max_pu)
      throw ConfigError("grid: v_min must be below v_max");
    if (g.pf_tolerance_pu <= 0)
      throw ConfigError("grid.pf_tolerance must be positive");
    if (g.max_iterations <= 0)
      throw ConfigError("grid.max_iterations must be positive");
    if (g.max_nonconverged_fraction < 0 || g.max_nonconverged_fraction > 1)
      throw ConfigError("grid.max_nonconverged_fraction must lie in [0, 1]");
  }

  if (root.find("scenario") != root.end()) {
    const json& js = root["scenario"];
    check_keys(js, "scenario",
               {"sigma", "seed", "trials", "dimension", "background", "pv"});
    ScenarioConfig& sc = cfg.scenario;
    sc.sigma = fetch_or<double>(js, "scenario", "sigma", sc.sigma);
    sc.seed = fetch_or<std::uint64_t>(js, "scenario", "seed", sc.seed);
    sc.trials = fetch_or<int>(js, "scenario", "trials", sc.trials);
    sc.dimension =
        fetch_or<std::string>(js, "scenario", "dimension", sc.dimension);
    if (sc.sigma < 0) throw ConfigError("scenario.sigma must be >= 0");
    if (sc.trials <= 0) throw ConfigError("scenario.trials must be positive");
    if (sc.dimension != "background" && sc.dimension != "placement")
      throw ConfigError(
          "scenario.dimension must be \"background\" or \"placement\"");
    if (js.find("background") != js.end()) {
      const json& bg = js["background"];
      if (!bg.is_array())
        throw ConfigError("scenario.background must be an array");
      for (size_t i = 0; i < bg.size(); ++i) {
        const std::string bpath =
            "scenario.background[" + std::to_string(i) + "]";
        check_keys(bg[i], bpath, {"bus", "category", "anchor_mw"});
        BackgroundAssign assign;
        assign.bus = fetch<int>(bg[i], bpath, "bus");
        assign.category = fetch<std::string>(bg[i], bpath, "category");
        assign.anchor_mw = fetch<double>(bg[i], bpath, "anchor_mw");
        if (assign.anchor_mw < 0)
          throw ConfigError(bpath + ".anchor_mw must be >= 0");
        scenario::builtin_template(assign.category, assign.anchor_mw);
        sc.background.push_back(assign);
      }
    }
    if (js.find("pv") != js.end()) {
      const json& pv = js["pv"];
      check_keys(pv, "scenario.pv", {"category", "anchor_mw"});
      sc.pv_category =
          fetch_or<std::string>(pv, "scenario.pv", "category", sc.pv_category);
      sc.pv_anchor_mw = fetch<double>(pv, "scenario.pv", "anchor_mw");
      if (sc.pv_anchor_mw < 0)
        throw ConfigError("scenario.pv.anchor_mw must be >= 0");
      scenario::builtin_template(sc.pv_category, sc.pv_anchor_mw);
    }
  }

  if (root.find("sweep") != root.end()) {
    const json& js = root["sweep"];
    check_keys(js, "sweep", {"coefficient", "values"});
    cfg.sweep.coefficient =
        fetch_or<std::string>(js, "sweep", "coefficient",
                              cfg.sweep.coefficient);
    if (cfg.sweep.coefficient != "rho" && cfg.sweep.coefficient != "eta" &&
        cfg.sweep.coefficient != "phi" && cfg.sweep.coefficient != "gamma")
      throw ConfigError("sweep.coefficient must be rho, eta, phi or gamma");
    cfg.sweep.values = fetch_or<std::vector<double>>(js, "sweep", "values",
                                                     cfg.sweep.values);
  }

  return cfg;
}

Instance build_instance(const StudyConfig& config) {
  JobIngest ingest = ingest_jobs(config.jobs_path, config.slot_hours);
  if (ingest.jobs.empty())
    throw ConfigError("job file " + config.jobs_path +
                      " holds no usable jobs");

  Instance inst;
  inst.jobs = ingest.jobs;
  inst.sites = config.sites;
  inst.portfolio = config.portfolio;

  int top_slack = 0;
  for (const auto& job : inst.jobs) {
    if (job.end_slot > config.slots)
      throw ConfigError("job " + job.id + " ends at slot " +
                        std::to_string(job.end_slot) +
                        " beyond the configured horizon of " +
                        std::to_string(config.slots));
    top_slack = std::max(top_slack, job.slack_slots);
  }
  inst.horizon = {config.slots, config.slots + top_slack, config.slot_hours};
  inst.prices =
      ingest_prices(config.electricity_path, config.service_path, inst.sites,
                    inst.horizon.slots_total);
  return inst;
}

scenario::GridWiring build_wiring(const StudyConfig& config,
                                  const grid::NetworkCase& net, int threads) {
  scenario::GridWiring wiring;
  wiring.net = &net;
  for (const auto& site : config.sites) {
    if (site.bus_id <= 0)
      throw ConfigError("site " + site.id +
                        " has no bus assignment for grid evaluation");
    if (net.bus_index(site.bus_id) < 0)
      throw ConfigError("site " + site.id + " references bus " +
                        std::to_string(site.bus_id) +
                        " which is not in the case");
    wiring.site_bus_ids.push_back(site.bus_id);
  }
  for (const auto& assign : config.scenario.background) {
    if (net.bus_index(assign.bus) < 0)
      throw ConfigError("scenario.background references bus " +
                        std::to_string(assign.bus) +
                        " which is not in the case");
    wiring.background.push_back(
        {assign.bus,
         scenario::builtin_template(assign.category, assign.anchor_mw)});
  }
  wiring.pv = scenario::builtin_template(config.scenario.pv_category,
                                         config.scenario.pv_anchor_mw);
  wiring.sigma = config.scenario.sigma;
  wiring.seed = config.scenario.seed;
  wiring.pf.tolerance_pu = config.grid.pf_tolerance_pu;
  wiring.pf.max_iterations = config.grid.max_iterations;
  wiring.band.v_min_pu = config.grid.v_min_pu;
  wiring.band.v_max_pu = config.grid.v_max_pu;
  wiring.threads = threads;
  return wiring;
}

scenario::SchedulePolicy parse_portfolio(const std::string& text,
                                         const Portfolio& base) {
  scenario::SchedulePolicy policy;
  policy.portfolio = base;
  policy.portfolio.slack = false;
  policy.portfolio.realloc = false;
  policy.portfolio.termination = false;

  std::string lowered;
  for (char c : text)
    lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lowered == "baseline") {
    policy.label = "FCFS Baseline";
    policy.use_fcfs = true;
    return policy;
  }
  if (lowered == "none") {
    policy.label = "None";
    return policy;
  }

  std::stringstream ss(lowered);
  std::string token;
  bool any = false;
  while (std::getline(ss, token, ',')) {
    token.erase(0, token.find_first_not_of(" \t"));
    token.erase(token.find_last_not_of(" \t") + 1);
    if (token.empty()) continue;
    any = true;
    if (token == "ralc" || token == "realloc")
      policy.portfolio.realloc = true;
    else if (token == "slack")
      policy.portfolio.slack = true;
    else if (token == "term" || token == "termination")
      policy.portfolio.termination = true;
    else
      throw ConfigError("unknown portfolio lever \"" + token +
                        "\" (expected ralc, slack or term)");
  }
  if (!any)
    throw ConfigError("portfolio override is empty; use baseline, none or a "
                      "comma list of ralc, slack, term");
  std::string label;
  auto add = [&label](const char* part) {
    if (!label.empty()) label += "+";
    label += part;
  };
  if (policy.portfolio.realloc) add("Ralc");
  if (policy.portfolio.slack) add("Slack");
  if (policy.portfolio.termination) add("Term");
  policy.label = label;
  return policy;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file for digest: " + path);
  std::uint64_t hash = 14695981039346656037ULL;
  char c;
  while (in.get(c)) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string(buf);
}

}  // namespace loadshift::cli
