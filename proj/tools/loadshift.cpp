#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "loadshift/cli/config.hpp"
#include "loadshift/cli/outputs.hpp"
#include "loadshift/core/errors.hpp"

namespace {

using namespace loadshift;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitSolverLimit = 4;
constexpr int kExitGrid = 5;

struct GlobalArgs {
  std::string config_path;
  std::string out_override;
  std::string label = "run";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
};

cli::StudyConfig load(const GlobalArgs& args) {
  if (args.config_path.empty())
    throw ConfigError("--config is required");
  cli::StudyConfig cfg = cli::load_config(args.config_path);
  if (!args.out_override.empty()) cfg.output_dir = args.out_override;
  if (args.seed_set) cfg.scenario.seed = args.seed;
  return cfg;
}

cli::ManifestInfo manifest_base(const GlobalArgs& args,
                                const cli::StudyConfig& cfg,
                                const std::string& command) {
  cli::ManifestInfo info;
  info.study = cfg.study;
  info.label = args.label;
  info.command = command;
  info.config_path = args.config_path;
  info.config_digest = cli::file_digest(args.config_path);
  info.seed = cfg.scenario.seed;
  info.threads = args.threads;
  info.inputs.emplace_back("jobs", cli::file_digest(cfg.jobs_path));
  info.inputs.emplace_back("electricity_prices",
                           cli::file_digest(cfg.electricity_path));
  info.inputs.emplace_back("service_prices",
                           cli::file_digest(cfg.service_path));
  if (!cfg.grid.case_path.empty())
    info.inputs.emplace_back("case", cli::file_digest(cfg.grid.case_path));
  return info;
}

grid::NetworkCase load_case(const cli::StudyConfig& cfg) {
  if (cfg.grid.case_path.empty())
    throw ConfigError("this command needs paths.case in the config");
  grid::NetworkCase net = grid::parse_case(cfg.grid.case_path);
  grid::validate_case(net);
  return net;
}

int exit_code_for(const scenario::PolicyOutcome& outcome, bool relax) {
  if (outcome.status == SolveStatus::infeasible) return kExitInfeasible;
  if (outcome.status == SolveStatus::optimal || relax) return kExitOk;
  return kExitSolverLimit;
}

int cmd_ingest(const GlobalArgs& args) {
  cli::StudyConfig cfg = load(args);
  JobIngest ingest = ingest_jobs(cfg.jobs_path, cfg.slot_hours);
  Instance inst = cli::build_instance(cfg);
  std::string dir = cli::prepare_run_dir(cfg.output_dir, cfg.study, args.label);
  cli::write_manifest(dir, manifest_base(args, cfg, "ingest"));
  cli::write_instance_json(dir + "/instance.json", inst, ingest);
  write_jobs_csv(inst.jobs, dir + "/jobs_normalized.csv", cfg.slot_hours);
  std::cout << dir << "/instance.json: " << inst.jobs.size() << " jobs, "
            << ingest.rejected.size() << " rejected rows\n";
  return kExitOk;
}

int cmd_schedule(const GlobalArgs& args, const std::string& portfolio_text) {
  cli::StudyConfig cfg = load(args);
  Instance inst = cli::build_instance(cfg);
  scenario::SchedulePolicy policy;
  if (portfolio_text.empty()) {
    policy.label = "config";
    policy.portfolio = cfg.portfolio;
  } else {
    policy = cli::parse_portfolio(portfolio_text, cfg.portfolio);
  }

  scenario::PolicyOutcome outcome;
  try {
    outcome = scenario::schedule_with_policy(inst, policy, cfg.solver);
  } catch (const StructuralError& e) {
    std::cerr << "schedule failed: " << e.what() << "\n";
    return kExitInfeasible;
  }

  std::string dir = cli::prepare_run_dir(cfg.output_dir, cfg.study, args.label);
  cli::ManifestInfo info = manifest_base(args, cfg, "schedule");
  info.notes.emplace_back("portfolio", policy.label);
  cli::write_manifest(dir, info);

  Instance scoped = inst;
  scoped.portfolio = policy.portfolio;
  cli::write_plan_csv(dir + "/plan.csv", outcome.plan, scoped);
  cli::write_breakdown_json(dir + "/breakdown.json", outcome.breakdown);
  cli::write_solve_json(dir + "/solve.json", outcome);
  cli::write_power_csv(dir + "/power.csv",
                       power_series(outcome.plan, scoped), scoped.sites);
  std::cout << dir << ": status " << to_string(outcome.status)
            << ", objective " << outcome.breakdown.net_objective << "\n";
  return exit_code_for(outcome, cfg.solver.relax);
}

int cmd_evaluate(const GlobalArgs& args, const std::string& power_path,
                 bool zero_dc, double vmin_override, double vmax_override) {
  cli::StudyConfig cfg = load(args);
  if (vmin_override > 0) cfg.grid.v_min_pu = vmin_override;
  if (vmax_override > 0) cfg.grid.v_max_pu = vmax_override;
  if (cfg.grid.v_min_pu >= cfg.grid.v_max_pu)
    throw ConfigError("voltage band override is empty");
  Instance inst = cli::build_instance(cfg);
  grid::NetworkCase net = load_case(cfg);
  scenario::GridWiring wiring = cli::build_wiring(cfg, net, args.threads);

  const int slots = inst.horizon.slots_total;
  SlotTable dc(static_cast<int>(cfg.sites.size()), slots);
  if (!zero_dc) {
    if (power_path.empty())
      throw ConfigError("evaluate needs --power <power.csv> or --zero-dc");
    dc = cli::read_power_csv(power_path, cfg.sites, slots);
  }

  scenario::Rng rng = scenario::Rng::stream(cfg.scenario.seed, 0);
  scenario::Realization realization = scenario::realize_profiles(
      wiring, slots, inst.horizon.slot_hours, cfg.scenario.sigma, rng);
  auto injections = grid::build_timeseries_case(
      net, dc, wiring.site_bus_ids, realization.background_p_mw,
      realization.pv_p_mw);
  auto solutions =
      grid::solve_series(net, injections, wiring.pf, args.threads);
  grid::SecurityReport report =
      grid::security_metrics(net, solutions, wiring.band);
  if (report.slots_converged > 0)
    report.generation_cost =
        grid::generation_cost(net, solutions, inst.horizon.slot_hours);

  std::string dir = cli::prepare_run_dir(cfg.output_dir, cfg.study, args.label);
  cli::ManifestInfo info = manifest_base(args, cfg, "evaluate");
  info.notes.emplace_back("power", zero_dc ? "zero" : power_path);
  cli::write_manifest(dir, info);
  cli::write_security_json(dir + "/security.json", report);
  cli::write_violations_csv(dir + "/violations.csv", report);
  cli::write_convergence_csv(dir + "/convergence.csv", solutions);
  std::cout << dir << ": " << report.slots_converged << "/"
            << report.slots_total << " slots converged, generation cost "
            << report.generation_cost << "\n";

  double skipped_fraction =
      static_cast<double>(report.slots_skipped) / report.slots_total;
  if (skipped_fraction > cfg.grid.max_nonconverged_fraction) {
    std::cerr << "warning: " << report.slots_skipped << " of "
              << report.slots_total << " slots did not converge\n";
    return kExitGrid;
  }
  return kExitOk;
}

int cmd_compare(const GlobalArgs& args) {
  cli::StudyConfig cfg = load(args);
  Instance inst = cli::build_instance(cfg);
  std::vector<scenario::SchedulePolicy> policies =
      scenario::standard_policies(cfg.portfolio);

  std::vector<scenario::CompareRow> rows;
  if (!cfg.grid.case_path.empty()) {
    grid::NetworkCase net = load_case(cfg);
    scenario::GridWiring wiring = cli::build_wiring(cfg, net, args.threads);
    rows = scenario::compare_portfolios(inst, &wiring, policies, cfg.solver);
  } else {
    rows = scenario::compare_portfolios(inst, nullptr, policies, cfg.solver);
  }

  std::string dir = cli::prepare_run_dir(cfg.output_dir, cfg.study, args.label);
  cli::write_manifest(dir, manifest_base(args, cfg, "compare"));
  cli::write_compare_csv(dir + "/compare.csv", rows);

  int ok = 0;
  for (const auto& row : rows)
    if (row.ok) ++ok;
  std::cout << dir << "/compare.csv: " << ok << "/" << rows.size()
            << " portfolios evaluated\n";
  return ok > 0 ? kExitOk : kExitSolverLimit;
}

int cmd_montecarlo(const GlobalArgs& args, int trials_override,
                   const std::string& baseline_text,
                   const std::string& variant_text) {
  cli::StudyConfig cfg = load(args);
  Instance inst = cli::build_instance(cfg);
  grid::NetworkCase net = load_case(cfg);
  scenario::GridWiring wiring = cli::build_wiring(cfg, net, args.threads);

  scenario::McConfig mc;
  mc.trials = trials_override > 0 ? trials_override : cfg.scenario.trials;
  mc.seed = cfg.scenario.seed;
  mc.sigma = cfg.scenario.sigma;
  mc.dimension = cfg.scenario.dimension == "placement"
                     ? scenario::McDimension::placement
                     : scenario::McDimension::background;
  mc.baseline = cli::parse_portfolio(baseline_text, cfg.portfolio);
  mc.variant = cli::parse_portfolio(variant_text, cfg.portfolio);
  mc.solve = cfg.solver;

  scenario::McResult result = scenario::run_monte_carlo(inst, wiring, mc);

  std::string dir = cli::prepare_run_dir(cfg.output_dir, cfg.study, args.label);
  cli::ManifestInfo info = manifest_base(args, cfg, "montecarlo");
  info.notes.emplace_back("baseline", mc.baseline.label);
  info.notes.emplace_back("variant", mc.variant.label);
  info.notes.emplace_back("dimension", cfg.scenario.dimension);
  info.notes.emplace_back("trials", std::to_string(mc.trials));
  cli::write_manifest(dir, info);
  cli::write_mc_csv(dir + "/montecarlo.csv", result);
  cli::write_mc_json(dir + "/mc_summary.json", result);
  std::cout << dir << "/montecarlo.csv: " << result.trials_ok << "/"
            << result.trials_run << " trials ok\n";
  return result.trials_ok > 0 ? kExitOk : kExitGrid;
}

int cmd_sweep(const GlobalArgs& args, const std::string& portfolio_text) {
  cli::StudyConfig cfg = load(args);
  Instance inst = cli::build_instance(cfg);
  if (cfg.sweep.values.empty())
    throw ConfigError("sweep.values must list at least one coefficient value");

  scenario::SweepCoef coef = scenario::SweepCoef::gamma;
  if (cfg.sweep.coefficient == "rho") coef = scenario::SweepCoef::rho;
  if (cfg.sweep.coefficient == "eta") coef = scenario::SweepCoef::eta;
  if (cfg.sweep.coefficient == "phi") coef = scenario::SweepCoef::phi;

  scenario::SchedulePolicy policy;
  if (portfolio_text.empty()) {
    policy.label = "config";
    policy.portfolio = cfg.portfolio;
  } else {
    policy = cli::parse_portfolio(portfolio_text, cfg.portfolio);
  }

  scenario::SweepResult result =
      scenario::sweep_coefficient(inst, coef, cfg.sweep.values, policy,
                                  cfg.solver);

  std::string dir = cli::prepare_run_dir(cfg.output_dir, cfg.study, args.label);
  cli::ManifestInfo info = manifest_base(args, cfg, "sweep");
  info.notes.emplace_back("coefficient", cfg.sweep.coefficient);
  info.notes.emplace_back("portfolio", policy.label);
  cli::write_manifest(dir, info);
  cli::write_sweep_csv(dir + "/sweep.csv", result);
  cli::write_sweep_json(dir + "/sweep_summary.json", result);

  int ok = 0;
  for (const auto& row : result.rows)
    if (row.ok) ++ok;
  std::cout << dir << "/sweep.csv: " << ok << "/" << result.rows.size()
            << " points solved\n";
  return ok > 0 ? kExitOk : kExitSolverLimit;
}

int cmd_report(const GlobalArgs& args, const std::string& dir_flag) {
  std::string dir = dir_flag;
  if (dir.empty()) {
    cli::StudyConfig cfg = load(args);
    dir = cfg.output_dir + "/" + cfg.study + "/" + args.label;
  }
  if (!std::ifstream(dir + "/manifest.json"))
    throw ConfigError("no manifest.json under " + dir +
                      "; run a study command first");
  std::string text = cli::render_report(dir);
  std::ofstream out(dir + "/report.txt", std::ios::binary);
  if (!out) throw ConfigError("cannot write " + dir + "/report.txt");
  out << text;
  std::cout << text;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-center flexibility scheduling and grid impact studies"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs args;
  app.add_option("--config", args.config_path, "Study config JSON");
  app.add_option("--out", args.out_override, "Override output directory");
  app.add_option("--label", args.label, "Run label under out/<study>/");
  auto* seed_opt =
      app.add_option("--seed", args.seed, "Override the scenario seed");
  app.add_option("--threads", args.threads, "Power-flow worker threads")
      ->check(CLI::PositiveNumber);

  auto* ingest = app.add_subcommand("ingest", "Validate and snapshot inputs");
  std::string portfolio_text;
  auto* schedule =
      app.add_subcommand("schedule", "Solve one portfolio's schedule");
  schedule->add_option("--portfolio", portfolio_text,
                       "baseline, none or comma list of ralc,slack,term");
  std::string power_path;
  bool zero_dc = false;
  double vmin_override = 0.0, vmax_override = 0.0;
  auto* evaluate =
      app.add_subcommand("evaluate", "Grid security metrics for a series");
  evaluate->add_option("--power", power_path,
                       "power.csv from a schedule run");
  evaluate->add_flag("--zero-dc", zero_dc,
                     "Evaluate background load only");
  evaluate->add_option("--vmin", vmin_override, "Voltage band floor, pu");
  evaluate->add_option("--vmax", vmax_override, "Voltage band cap, pu");
  auto* compare =
      app.add_subcommand("compare", "All eight control portfolios");
  int trials_override = 0;
  std::string baseline_text = "baseline";
  std::string variant_text = "ralc,slack,term";
  auto* montecarlo =
      app.add_subcommand("montecarlo", "Paired sampling study");
  montecarlo->add_option("--trials", trials_override, "Trial count override");
  montecarlo->add_option("--baseline", baseline_text, "Baseline policy");
  montecarlo->add_option("--variant", variant_text, "Variant policy");
  auto* sweep =
      app.add_subcommand("sweep", "Penalty coefficient sweep");
  sweep->add_option("--portfolio", portfolio_text,
                    "Portfolio the sweep re-solves under");
  std::string report_dir;
  auto* report = app.add_subcommand("report", "Summarize a run directory");
  report->add_option("--dir", report_dir, "Run directory to summarize");

  CLI11_PARSE(app, argc, argv);
  args.seed_set = seed_opt->count() > 0;

  try {
    if (app.got_subcommand(ingest)) return cmd_ingest(args);
    if (app.got_subcommand(schedule)) return cmd_schedule(args, portfolio_text);
    if (app.got_subcommand(evaluate))
      return cmd_evaluate(args, power_path, zero_dc, vmin_override,
                          vmax_override);
    if (app.got_subcommand(compare)) return cmd_compare(args);
    if (app.got_subcommand(montecarlo))
      return cmd_montecarlo(args, trials_override, baseline_text,
                            variant_text);
    if (app.got_subcommand(sweep)) return cmd_sweep(args, portfolio_text);
    if (app.got_subcommand(report)) return cmd_report(args, report_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SearchSpaceError& e) {
    std::cerr << "solver limit: " << e.what() << "\n";
    return kExitSolverLimit;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
