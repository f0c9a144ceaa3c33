#include "edgefl/export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "edgefl/error.hpp"

namespace edgefl {
namespace {

using nlohmann::json;

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

json summary_json(const Summary& s) {
  return {{"rounds", s.rounds},
          {"selections", s.selections},
          {"sim_time_s", s.sim_time_s},
          {"mean_omega", s.mean_omega},
          {"final_regret", real_or_null(s.final_regret)},
          {"queue_sum_final", s.queue_sum_final},
          {"max_queue_per_round", s.max_queue_per_round},
          {"min_service_rate", s.min_service_rate},
          {"max_staleness", s.max_staleness},
          {"time_to_target_s", real_or_null(s.time_to_target_s)},
          {"final_loss", real_or_null(s.final_loss)},
          {"final_accuracy", real_or_null(s.final_accuracy)},
          {"queue_sum_deciles", s.queue_sum_deciles}};
}

std::vector<std::string> summary_cells(const Summary& s) {
  return {std::to_string(s.rounds),       std::to_string(s.selections),     format_real(s.sim_time_s),
          format_real(s.mean_omega),      format_real(s.final_regret),      format_real(s.queue_sum_final),
          format_real(s.max_queue_per_round), format_real(s.min_service_rate), std::to_string(s.max_staleness),
          format_real(s.time_to_target_s), format_real(s.final_loss),       format_real(s.final_accuracy)};
}

}  // namespace

ExportFormat parse_format(const std::string& name) {
  if (name == "csv") return ExportFormat::kCsv;
  if (name == "json") return ExportFormat::kJson;
  throw Error(ErrorCode::kConfig, "unknown output format '" + name + "' (expected csv or json)");
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& events_header() {
  static const std::vector<std::string> h = {
      "round",  "sim_time_s",   "completed_device", "staleness",     "selected_device", "power_case",
      "power_w", "omega",       "time_total_s",     "energy_total_j", "oracle_omega",   "regret",
      "queue_sum", "queue_max", "loss",             "accuracy"};
  return h;
}

const std::vector<std::string>& sweep_header() {
  static const std::vector<std::string> h = {
      "parameter",     "value",          "policy",           "seed",          "rounds",
      "selections",    "sim_time_s",     "mean_omega",       "final_regret",  "queue_sum_final",
      "max_queue_per_round", "min_service_rate", "max_staleness", "time_to_target_s", "final_loss",
      "final_accuracy"};
  return h;
}

std::string events_csv(const MetricsLog& log) {
  std::string out = join(events_header());
  const bool has_regret = log.regret.size() == log.rows.size() && !log.regret.empty();
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    const fl::EventRow& r = log.rows[i];
    out += join({std::to_string(r.round), format_real(r.sim_time_s), std::to_string(r.completed_device),
                 std::to_string(r.staleness), std::to_string(r.selected_device), power::to_string(r.power_case),
                 format_real(r.power_w), format_real(r.omega), format_real(r.time_total_s),
                 format_real(r.energy_total_j), format_real(has_regret ? log.oracle_omega[i] : NAN),
                 format_real(has_regret ? log.regret[i] : NAN), format_real(r.queue_sum), format_real(r.queue_max),
                 format_real(r.loss), format_real(r.accuracy)});
  }
  return out;
}

std::string summary_csv(const MetricsLog& log) {
  std::vector<std::string> header = {"policy", "seed", "rounds", "selections", "sim_time_s", "mean_omega",
                                     "final_regret", "queue_sum_final", "max_queue_per_round", "min_service_rate",
                                     "max_staleness", "time_to_target_s", "final_loss", "final_accuracy"};
  std::vector<std::string> cells = {std::string(sched::to_string(log.config.run.policy)),
                                    std::to_string(log.config.run.seed)};
  for (std::string& c : summary_cells(log.summary)) cells.push_back(std::move(c));
  return join(header) + join(cells);
}

std::string sweep_csv(const std::vector<SweepRow>& table) {
  std::string out = join(sweep_header());
  for (const SweepRow& row : table) {
    std::vector<std::string> cells = {row.parameter, row.value, std::string(sched::to_string(row.policy)),
                                      std::to_string(row.seed)};
    for (std::string& c : summary_cells(row.summary)) cells.push_back(std::move(c));
    out += join(cells);
  }
  return out;
}

json run_json(const MetricsLog& log) {
  json j;
  j["schema"] = kRunJsonSchema;
  j["version"] = EDGEFL_VERSION;
  j["seed"] = log.config.run.seed;
  j["config"] = to_json(log.config);
  j["summary"] = summary_json(log.summary);
  j["selection_counts"] = log.selection_counts;
  j["final_queues"] = log.final_queues;
  json devices = json::array();
  for (const DeviceProfile& p : log.profiles) {
    devices.push_back({{"id", p.id}, {"distance_m", p.distance_m}, {"dataset_size", p.dataset_size},
                       {"mean_cpu_hz", p.mean_cpu_hz}});
  }
  j["devices"] = devices;
  json rows = json::array();
  const bool has_regret = log.regret.size() == log.rows.size() && !log.regret.empty();
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    const fl::EventRow& r = log.rows[i];
    rows.push_back({{"round", r.round},
                    {"sim_time_s", r.sim_time_s},
                    {"completed_device", r.completed_device},
                    {"staleness", r.staleness},
                    {"selected_device", r.selected_device},
                    {"power_case", power::to_string(r.power_case)},
                    {"power_w", r.power_w},
                    {"omega", r.omega},
                    {"time_total_s", r.time_total_s},
                    {"energy_total_j", r.energy_total_j},
                    {"oracle_omega", has_regret ? real_or_null(log.oracle_omega[i]) : json(nullptr)},
                    {"regret", has_regret ? real_or_null(log.regret[i]) : json(nullptr)},
                    {"queue_sum", r.queue_sum},
                    {"queue_max", r.queue_max},
                    {"loss", real_or_null(r.loss)},
                    {"accuracy", real_or_null(r.accuracy)}});
  }
  j["rows"] = rows;
  return j;
}

json sweep_json(const std::vector<SweepRow>& table, const SimConfig& base) {
  json j;
  j["schema"] = kSweepJsonSchema;
  j["version"] = EDGEFL_VERSION;
  j["config"] = to_json(base);
  json rows = json::array();
  for (const SweepRow& row : table) {
    rows.push_back({{"parameter", row.parameter},
                    {"value", row.value},
                    {"policy", std::string(sched::to_string(row.policy))},
                    {"seed", row.seed},
                    {"summary", summary_json(row.summary)}});
  }
  j["rows"] = rows;
  return j;
}

void export_log(const MetricsLog& log, const std::string& path, ExportFormat format) {
  write_text(path, format == ExportFormat::kCsv ? events_csv(log) : run_json(log).dump(2) + "\n");
}

void export_table(const std::vector<SweepRow>& table, const SimConfig& base, const std::string& path,
                  ExportFormat format) {
  write_text(path, format == ExportFormat::kCsv ? sweep_csv(table) : sweep_json(table, base).dump(2) + "\n");
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace edgefl
