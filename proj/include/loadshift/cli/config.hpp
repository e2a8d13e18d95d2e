#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loadshift/core/types.hpp"
#include "loadshift/opt/solve.hpp"
#include "loadshift/scenario/study.hpp"

namespace loadshift::cli {

struct GridConfig {
  std::string case_path;  // empty disables grid evaluation
  double v_min_pu = 0.94;
  double v_max_pu = 1.06;
  double pf_tolerance_pu = 1e-8;
  int max_iterations = 20;
  /// Largest tolerated share of non-converged slots before an evaluation
  /// exits with the grid warning code.
  double max_nonconverged_fraction = 0.0;
};

struct BackgroundAssign {
  int bus = 0;
  std::string category;
  double anchor_mw = 0.0;
};

struct ScenarioConfig {
  double sigma = 0.05;
  std::uint64_t seed = 1;
  int trials = 20;
  std::string dimension = "background";  // or "placement"
  std::vector<BackgroundAssign> background;
  std::string pv_category = "pv";
  double pv_anchor_mw = 0.0;  // 0 disables the solar series
};

struct SweepConfig {
  std::string coefficient = "gamma";
  std::vector<double> values;
};

/// One study definition: input paths, the physical fleet, the control
/// portfolio, solver and grid settings.  Loaded strictly: unknown keys fail
/// with their dotted path, and referenced files must exist.
struct StudyConfig {
  std::string study = "study";
  std::string jobs_path;
  std::string electricity_path;
  std::string service_path;
  int slots = 24;
  double slot_hours = 1.0;
  std::vector<Site> sites;
  Portfolio portfolio;
  SolveOptions solver;
  GridConfig grid;
  ScenarioConfig scenario;
  SweepConfig sweep;
  std::string output_dir = "out";
};

StudyConfig load_config(const std::string& path);

/// Ingests jobs and prices and assembles the scheduling instance.  The
/// horizon always reserves the largest job slack as extension slots so every
/// portfolio shares one plan shape; price files must cover the extended
/// horizon.
Instance build_instance(const StudyConfig& config);

/// Builds the grid wiring (case, site buses, background and solar profiles)
/// for a loaded config.  The case stays owned by the caller.
scenario::GridWiring build_wiring(const StudyConfig& config,
                                  const grid::NetworkCase& net, int threads);

/// Parses a `--portfolio` override: "baseline" for the dispatcher, "none"
/// for the optimizer without levers, or a comma list of ralc, slack, term.
scenario::SchedulePolicy parse_portfolio(const std::string& text,
                                         const Portfolio& base);

/// FNV-1a 64-bit digest of a file's bytes, hex-encoded; stable fingerprint
/// for manifests.
std::string file_digest(const std::string& path);

}  // namespace loadshift::cli
