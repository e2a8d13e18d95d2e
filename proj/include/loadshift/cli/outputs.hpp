#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "loadshift/cli/config.hpp"
#include "loadshift/core/ingest.hpp"
#include "loadshift/core/plan.hpp"
#include "loadshift/econ/costs.hpp"
#include "loadshift/grid/metrics.hpp"
#include "loadshift/grid/powerflow.hpp"
#include "loadshift/scenario/study.hpp"

namespace loadshift::cli {

/// Creates `<output_dir>/<study>/<label>/` (parents included) and returns
/// the directory path.
std::string prepare_run_dir(const std::string& output_dir,
                            const std::string& study,
                            const std::string& label);

/// Provenance of one run; serialized to manifest.json.  Contains no clocks
/// or machine state, so reruns with the same inputs are byte-identical.
struct ManifestInfo {
  std::string study;
  std::string label;
  std::string command;
  std::string config_path;
  std::string config_digest;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<std::pair<std::string, std::string>> inputs;  // name, digest
  std::vector<std::pair<std::string, std::string>> notes;   // key, value
};
void write_manifest(const std::string& dir, const ManifestInfo& info);

void write_plan_csv(const std::string& path, const Plan& plan,
                    const Instance& inst);
void write_breakdown_json(const std::string& path,
                          const CostBreakdown& breakdown);
void write_solve_json(const std::string& path,
                      const scenario::PolicyOutcome& outcome);
void write_power_csv(const std::string& path, const SitePowerSeries& series,
                     const std::vector<Site>& sites);

/// Reads a facility power series back: every (site, slot) pair must appear
/// exactly once, sites must match the configured fleet by id, slots must
/// cover 0..slots-1.
SlotTable read_power_csv(const std::string& path,
                         const std::vector<Site>& sites, int slots);

void write_security_json(const std::string& path,
                         const grid::SecurityReport& report);
void write_violations_csv(const std::string& path,
                          const grid::SecurityReport& report);
void write_convergence_csv(const std::string& path,
                           const std::vector<grid::SlotSolution>& slots);

void write_compare_csv(const std::string& path,
                       const std::vector<scenario::CompareRow>& rows);
void write_mc_csv(const std::string& path,
                  const scenario::McResult& result);
void write_mc_json(const std::string& path,
                   const scenario::McResult& result);
void write_sweep_csv(const std::string& path,
                     const scenario::SweepResult& result);
void write_sweep_json(const std::string& path,
                      const scenario::SweepResult& result);
void write_instance_json(const std::string& path, const Instance& inst,
                         const JobIngest& ingest);

/// Renders a human-readable digest of whatever artifacts exist in a run
/// directory (manifest, solve results, security metrics, study tables).
std::string render_report(const std::string& run_dir);

}  // namespace loadshift::cli
