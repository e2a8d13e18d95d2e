#include "loadshift/core/ingest.hpp"

#include <fstream>
#include <map>
#include <set>

#include "loadshift/core/csv.hpp"
#include "loadshift/core/errors.hpp"

namespace loadshift {

JobIngest ingest_jobs(const std::string& path, double slot_hours,
                      double nominal_rate) {
  csv::Table table = csv::read_file(path);
  int col_id = table.require_column("job_id");
  int col_release = table.require_column("release_slot");
  int col_end = table.require_column("end_slot");
  int col_cpus = table.require_column("cpus");
  int col_slack = table.require_column("slack_slots");
  int col_scale = table.require_column("svc_price_scale");

  JobIngest out;
  std::set<std::string> seen;
  for (const csv::Row& row : table.rows) {
    Job job;
    job.id = row.fields[col_id];
    job.release_slot = static_cast<int>(csv::to_int(table, row, col_release));
    job.end_slot = static_cast<int>(csv::to_int(table, row, col_end));
    job.max_cpus = static_cast<int>(csv::to_int(table, row, col_cpus));
    job.slack_slots = static_cast<int>(csv::to_int(table, row, col_slack));
    job.svc_price_scale = csv::to_double(table, row, col_scale);

    if (job.id.empty())
      throw ParseError(path, row.line, "empty job_id");
    if (!seen.insert(job.id).second)
      throw ParseError(path, row.line, "duplicate job_id '" + job.id + "'");
    if (job.release_slot < 0)
      throw ParseError(path, row.line, "negative release_slot");
    if (job.max_cpus <= 0)
      throw ParseError(path, row.line, "cpus must be positive");
    if (job.slack_slots < 0)
      throw ParseError(path, row.line, "negative slack_slots");
    if (job.svc_price_scale < 0)
      throw ParseError(path, row.line, "negative svc_price_scale");

    int duration = job.end_slot - job.release_slot;
    if (duration <= 0) {
      out.rejected.push_back(path + ":" + std::to_string(row.line) +
                             ": job '" + job.id +
                             "' rejected: non-positive duration");
      continue;
    }
    job.total_work = job.max_cpus * duration * slot_hours * nominal_rate;
    out.jobs.push_back(std::move(job));
  }
  return out;
}

void write_jobs_csv(const std::vector<Job>& jobs, const std::string& path,
                    double /*slot_hours*/, double /*nominal_rate*/) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out << "job_id,release_slot,end_slot,cpus,slack_slots,svc_price_scale\n";
  for (const Job& job : jobs) {
    out << job.id << ',' << job.release_slot << ',' << job.end_slot << ','
        << job.max_cpus << ',' << job.slack_slots << ','
        << csv::format_number(job.svc_price_scale) << '\n';
  }
}

namespace {

/// Shared reader for key,slot,value price files.  `keys_per_site` maps each
/// site row of the output table to the key it draws prices from.
SlotTable read_keyed_prices(const std::string& path,
                            const std::string& key_column,
                            const std::string& value_column,
                            const std::vector<std::string>& keys_per_site,
                            int slots) {
  csv::Table table = csv::read_file(path);
  int col_key = table.require_column(key_column);
  int col_slot = table.require_column("slot");
  int col_value = table.require_column(value_column);

  std::set<std::string> wanted(keys_per_site.begin(), keys_per_site.end());
  std::map<std::pair<std::string, int>, double> values;
  for (const csv::Row& row : table.rows) {
    const std::string& key = row.fields[col_key];
    if (!wanted.count(key))
      throw ParseError(path, row.line,
                       "unknown " + key_column + " '" + key +
                           "': not referenced by any configured site");
    int slot = static_cast<int>(csv::to_int(table, row, col_slot));
    if (slot < 0)
      throw ParseError(path, row.line, "negative slot");
    if (slot >= slots) continue;
    auto inserted = values.emplace(std::make_pair(key, slot),
                                   csv::to_double(table, row, col_value));
    if (!inserted.second)
      throw ParseError(path, row.line,
                       "duplicate price for (" + key + ", slot " +
                           std::to_string(slot) + ")");
  }

  std::string gaps;
  int gap_count = 0;
  for (const std::string& key : wanted) {
    for (int t = 0; t < slots; ++t) {
      if (!values.count({key, t})) {
        if (gap_count < 5) {
          if (!gaps.empty()) gaps += ", ";
          gaps += "(" + key + ", slot " + std::to_string(t) + ")";
        }
        ++gap_count;
      }
    }
  }
  if (gap_count > 0)
    throw ParseError(path, 0,
                     "missing " + std::to_string(gap_count) +
                         " price entries: " + gaps +
                         (gap_count > 5 ? ", ..." : ""));

  SlotTable out(static_cast<int>(keys_per_site.size()), slots);
  for (size_t s = 0; s < keys_per_site.size(); ++s)
    for (int t = 0; t < slots; ++t)
      out.at(static_cast<int>(s), t) = values.at({keys_per_site[s], t});
  return out;
}

}  // namespace

SlotTable ingest_zone_prices(const std::string& path,
                             const std::vector<Site>& sites, int slots) {
  std::vector<std::string> zones;
  for (const Site& site : sites) {
    if (site.zone.empty())
      throw ConfigError("site '" + site.id + "' has no settlement zone");
    zones.push_back(site.zone);
  }
  return read_keyed_prices(path, "zone", "price_usd_per_mwh", zones, slots);
}

SlotTable ingest_service_prices(const std::string& path,
                                const std::vector<Site>& sites, int slots) {
  std::vector<std::string> ids;
  for (const Site& site : sites) ids.push_back(site.id);
  return read_keyed_prices(path, "site", "price_usd_per_cpu_hour", ids, slots);
}

PriceTable ingest_prices(const std::string& electricity_path,
                         const std::string& service_path,
                         const std::vector<Site>& sites, int slots) {
  PriceTable table;
  table.electricity = ingest_zone_prices(electricity_path, sites, slots);
  table.service = ingest_service_prices(service_path, sites, slots);
  return table;
}

}  // namespace loadshift
