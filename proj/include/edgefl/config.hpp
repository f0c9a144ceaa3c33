#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "edgefl/learning.hpp"
#include "edgefl/scheduler.hpp"
#include "edgefl/system_model.hpp"

#include <json.hpp>

namespace edgefl {

struct TopologyConfig {
  std::size_t num_devices = 30;
  std::size_t num_subchannels = 15;
  double radius_m = 500.0;
  double min_distance_m = 10.0;
};

struct ChannelConfig {
  double bandwidth_hz = 1e6;
  double noise_dbm_per_mhz = -154.0;
  PathLoss pathloss;
};

struct DeviceConfig {
  DeviceRanges ranges;
  double cpu_floor_hz = 1e8;
};

struct ObjectiveConfig {
  double lambda_t = 0.5;
  double lambda_e = 0.5;
  double t_max_s = 1.0;
  double e_max_j = 1.2;
  double d_min = 80.0;
  std::optional<double> v_weight;  // required, no default
};

struct LearningConfig {
  bool enabled = false;
  fl::TaskSpec task;
  std::uint64_t eval_every = 1;
  std::optional<double> target_loss;  // stop once the test loss reaches it
};

struct RunConfig {
  sched::Policy policy = sched::Policy::kCuUcb;
  std::uint64_t rounds = 10000;
  double sim_seconds = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 1;
  bool compute_regret = true;
};

struct OutputConfig {
  std::string dir = "out";
  std::string format = "csv";
};

struct SimConfig {
  TopologyConfig topology;
  ChannelConfig channel;
  DeviceConfig devices;
  ObjectiveConfig objective;
  LearningConfig learning;
  RunConfig run;
  OutputConfig output;

  ObjectiveWeights weights() const {
    return {objective.lambda_t, objective.lambda_e, objective.t_max_s, objective.e_max_j};
  }
  ChannelParams channel_params() const;

  // Throws Error(kConfig / kWeight / kDegenerateWeight) on invalid settings.
  // Soft problems (e.g. a D_min no schedule can meet) are appended to `warnings`.
  void validate(std::vector<std::string>* warnings = nullptr) const;
};

// Reads the YAML key/value format documented in config/default.yaml. Keys
// that are absent keep their defaults; unknown keys are rejected.
SimConfig parse_config(const std::string& yaml_text);
SimConfig load_config(const std::string& path);

nlohmann::json to_json(const SimConfig& config);

}  // namespace edgefl
