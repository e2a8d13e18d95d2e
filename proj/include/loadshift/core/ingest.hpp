#pragma once

#include <string>
#include <vector>

#include "loadshift/core/types.hpp"

namespace loadshift {

/// Result of reading a job trace: accepted jobs in file order plus one
/// message per rejected row (degenerate rows such as non-positive duration
/// are skipped, not fatal).
struct JobIngest {
  std::vector<Job> jobs;
  std::vector<std::string> rejected;
};

/// Reads a job trace CSV with columns
/// `job_id,release_slot,end_slot,cpus,slack_slots,svc_price_scale`.
/// Work budgets are calibrated as W = cpus * duration_slots * slot_hours *
/// nominal_rate and the per-slot CPU cap as the traced request.  Malformed
/// rows raise ParseError with the line number; rows with end <= release are
/// rejected and logged.
JobIngest ingest_jobs(const std::string& path, double slot_hours = 1.0,
                      double nominal_rate = 1.0);

/// Writes jobs back in the trace format accepted by ingest_jobs.
void write_jobs_csv(const std::vector<Job>& jobs, const std::string& path,
                    double slot_hours = 1.0, double nominal_rate = 1.0);

/// Reads a zonal electricity price CSV `zone,slot,price_usd_per_mwh` and
/// expands it to one row per site via each site's settlement zone.  Every
/// (zone, slot) must appear exactly once for slots 0..slots-1 over the zones
/// the sites reference; gaps and duplicates raise ParseError naming the
/// offending pair.
SlotTable ingest_zone_prices(const std::string& path,
                             const std::vector<Site>& sites, int slots);

/// Reads a per-site service price CSV `site,slot,price_usd_per_cpu_hour`
/// with the same coverage rules keyed by site id.
SlotTable ingest_service_prices(const std::string& path,
                                const std::vector<Site>& sites, int slots);

/// Convenience wrapper filling both tables of a PriceTable.
PriceTable ingest_prices(const std::string& electricity_path,
                         const std::string& service_path,
                         const std::vector<Site>& sites, int slots);

}  // namespace loadshift
