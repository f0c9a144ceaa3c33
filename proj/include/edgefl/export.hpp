#pragma once

// CSV / JSON writers for run logs and sweep tables.
//
// CSV schema "edgefl.events/1" (one row per decided round, or per participant
// in synchronous rounds):
//   round,sim_time_s,completed_device,staleness,selected_device,power_case,
//   power_w,omega,time_total_s,energy_total_j,oracle_omega,regret,queue_sum,
//   queue_max,loss,accuracy
// Missing device ids are -1; missing reals are written as "nan".
//
// CSV schema "edgefl.sweep/1":
//   parameter,value,policy,seed,rounds,selections,sim_time_s,mean_omega,
//   final_regret,queue_sum_final,max_queue_per_round,min_service_rate,
//   max_staleness,time_to_target_s,final_loss,final_accuracy
//
// Reals use 17 significant digits so every value round-trips exactly.

#include <string>
#include <vector>

#include "edgefl/harness.hpp"

namespace edgefl {

inline constexpr const char* kEventsSchema = "edgefl.events/1";
inline constexpr const char* kSweepSchema = "edgefl.sweep/1";
inline constexpr const char* kRunJsonSchema = "edgefl.run/1";
inline constexpr const char* kSweepJsonSchema = "edgefl.sweep-json/1";

enum class ExportFormat { kCsv, kJson };
ExportFormat parse_format(const std::string& name);

std::string format_real(double value);

const std::vector<std::string>& events_header();
const std::vector<std::string>& sweep_header();

std::string events_csv(const MetricsLog& log);
std::string summary_csv(const MetricsLog& log);
std::string sweep_csv(const std::vector<SweepRow>& table);
nlohmann::json run_json(const MetricsLog& log);
nlohmann::json sweep_json(const std::vector<SweepRow>& table, const SimConfig& base);

// Writes `log` to `path` in the requested format (overwrites).
void export_log(const MetricsLog& log, const std::string& path, ExportFormat format);
void export_table(const std::vector<SweepRow>& table, const SimConfig& base, const std::string& path,
                  ExportFormat format);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

}  // namespace edgefl
