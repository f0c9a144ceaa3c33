#include "edgefl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "edgefl/error.hpp"

namespace edgefl {
namespace {

// Walks one YAML mapping, reading known keys and rejecting the rest.
class Section {
 public:
  Section(const YAML::Node& node, std::string name) : node_(node), name_(std::move(name)) {
    if (node_ && !node_.IsMap()) throw Error(ErrorCode::kConfig, "config: section '" + name_ + "' must be a mapping");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!node_ || !node_[key]) return;
    try {
      out = node_[key].as<T>();
    } catch (const YAML::Exception& e) {
      throw Error(ErrorCode::kConfig, "config: bad value for " + name_ + "." + key + ": " + e.what());
    }
  }

  template <typename T>
  void read_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!node_ || !node_[key] || node_[key].IsNull()) return;
    T value{};
    read(key, value);
    out = value;
  }

  Section child(const char* key) {
    seen_.insert(key);
    return Section(node_ ? node_[key] : YAML::Node(), name_.empty() ? key : name_ + "." + key);
  }

  void finish() const {
    if (!node_) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) {
        throw Error(ErrorCode::kConfig, "config: unknown key '" + (name_.empty() ? key : name_ + "." + key) + "'");
      }
    }
  }

 private:
  YAML::Node node_;
  std::string name_;
  std::set<std::string> seen_;
};

double read_double_or_inf(Section& s, const char* key, double fallback) {
  std::string text;
  s.read(key, text);
  if (text.empty()) return fallback;
  if (text == "inf" || text == ".inf") return std::numeric_limits<double>::infinity();
  try {
    return std::stod(text);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, std::string("config: bad number for ") + key + ": " + text);
  }
}

}  // namespace

ChannelParams SimConfig::channel_params() const {
  ChannelParams p;
  p.bandwidth_hz = channel.bandwidth_hz;
  p.noise_power_w = noise_power_w(channel.noise_dbm_per_mhz, channel.bandwidth_hz);
  p.num_subchannels = topology.num_subchannels;
  p.pathloss = channel.pathloss;
  return p;
}

void SimConfig::validate(std::vector<std::string>* warnings) const {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfig, "config: " + what); };
  if (topology.num_devices == 0) fail("topology.num_devices must be >= 1");
  if (topology.num_subchannels == 0) fail("topology.num_subchannels must be >= 1");
  if (topology.num_subchannels > topology.num_devices) {
    fail("topology.num_subchannels (M) must not exceed topology.num_devices (N)");
  }
  if (!(topology.min_distance_m > 0.0 && topology.radius_m > topology.min_distance_m)) {
    fail("topology needs 0 < min_distance_m < radius_m");
  }
  if (!(channel.bandwidth_hz > 0.0)) fail("channel.bandwidth_hz must be > 0");
  weights().validate();
  if (!(objective.lambda_e > 0.0)) {
    throw Error(ErrorCode::kDegenerateWeight, "config: objective.lambda_e must be > 0 for the power optimizer");
  }
  if (!objective.v_weight) fail("objective.v_weight is required");
  if (*objective.v_weight < 0.0) fail("objective.v_weight must be >= 0");
  if (!(objective.d_min > 0.0)) fail("objective.d_min must be > 0");
  if (devices.ranges.dataset_size_min < 1 || devices.ranges.dataset_size_min > devices.ranges.dataset_size_max) {
    fail("devices: need 1 <= dataset_size_min <= dataset_size_max");
  }
  if (!(devices.ranges.mean_cpu_hz_min > 0.0) || devices.ranges.mean_cpu_hz_min > devices.ranges.mean_cpu_hz_max) {
    fail("devices: need 0 < mean_cpu_hz_min <= mean_cpu_hz_max");
  }
  if (!(devices.cpu_floor_hz > 0.0)) fail("devices.cpu_floor_hz must be > 0");
  if (learning.enabled) learning.task.validate();
  if (learning.eval_every == 0) fail("learning.eval_every must be >= 1");
  if (output.format != "csv" && output.format != "json") fail("output.format must be csv or json");

  if (warnings) {
    const double expected_min_d = devices.ranges.dataset_size_min;
    if (objective.d_min > expected_min_d) {
      warnings->push_back("objective.d_min exceeds the smallest possible D_n; the sample constraint cannot hold");
    }
    // With one selection per round, sum_n D_min / D_n <= 1 is necessary.
    const double load = topology.num_devices * objective.d_min / ((devices.ranges.dataset_size_min +
                                                                   devices.ranges.dataset_size_max) / 2.0);
    if (!sched::is_synchronous(run.policy) && load > 1.0) {
      std::ostringstream msg;
      msg << "objective.d_min requests " << load
          << "x the samples one selection per round can serve; the virtual queues will grow without bound";
      warnings->push_back(msg.str());
    }
  }
}

SimConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kConfig, std::string("config: YAML parse error: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  SimConfig c;
  Section top(root, "");

  {
    Section s = top.child("topology");
    s.read("num_devices", c.topology.num_devices);
    s.read("num_subchannels", c.topology.num_subchannels);
    s.read("radius_m", c.topology.radius_m);
    s.read("min_distance_m", c.topology.min_distance_m);
    s.finish();
  }
  {
    Section s = top.child("channel");
    s.read("bandwidth_hz", c.channel.bandwidth_hz);
    s.read("noise_dbm_per_mhz", c.channel.noise_dbm_per_mhz);
    s.read("pathloss_offset_db", c.channel.pathloss.offset_db);
    s.read("pathloss_slope_db", c.channel.pathloss.slope_db);
    s.finish();
  }
  {
    Section s = top.child("devices");
    DeviceRanges& r = c.devices.ranges;
    s.read("dataset_size_min", r.dataset_size_min);
    s.read("dataset_size_max", r.dataset_size_max);
    s.read("mean_cpu_hz_min", r.mean_cpu_hz_min);
    s.read("mean_cpu_hz_max", r.mean_cpu_hz_max);
    s.read("cpu_std_hz", r.cpu_std_hz);
    s.read("cpu_floor_hz", c.devices.cpu_floor_hz);
    s.read("cycles_per_sample", r.cycles_per_sample);
    s.read("model_bits", r.model_bits);
    s.read("p_max_w", r.p_max_w);
    s.read("capacitance", r.capacitance);
    s.finish();
  }
  {
    Section s = top.child("objective");
    s.read("lambda_t", c.objective.lambda_t);
    s.read("lambda_e", c.objective.lambda_e);
    s.read("t_max_s", c.objective.t_max_s);
    s.read("e_max_j", c.objective.e_max_j);
    s.read("d_min", c.objective.d_min);
    s.read_optional("v_weight", c.objective.v_weight);
    s.finish();
  }
  {
    Section s = top.child("learning");
    fl::TaskSpec& t = c.learning.task;
    s.read("enabled", c.learning.enabled);
    s.read("num_classes", t.num_classes);
    s.read("feature_dim", t.feature_dim);
    s.read("samples_per_class", t.samples_per_class);
    s.read("test_samples_per_class", t.test_samples_per_class);
    s.read("class_separation", t.class_separation);
    s.read("dirichlet_gamma", t.dirichlet_gamma);
    s.read("local_steps", t.local_steps);
    s.read("learning_rate", t.learning_rate);
    s.read("prox_m", t.prox_m);
    s.read("rho", t.rho);
    s.read("staleness_exponent", t.staleness_exponent);
    s.read("eval_every", c.learning.eval_every);
    s.read_optional("target_loss", c.learning.target_loss);
    s.finish();
  }
  {
    Section s = top.child("run");
    std::string policy(sched::to_string(c.run.policy));
    s.read("policy", policy);
    c.run.policy = sched::parse_policy(policy);
    s.read("rounds", c.run.rounds);
    c.run.sim_seconds = read_double_or_inf(s, "sim_seconds", c.run.sim_seconds);
    s.read("seed", c.run.seed);
    s.read("compute_regret", c.run.compute_regret);
    s.finish();
  }
  {
    Section s = top.child("output");
    s.read("dir", c.output.dir);
    s.read("format", c.output.format);
    s.finish();
  }
  top.finish();
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

nlohmann::json to_json(const SimConfig& c) {
  using nlohmann::json;
  const auto num_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["topology"] = {{"num_devices", c.topology.num_devices},
                   {"num_subchannels", c.topology.num_subchannels},
                   {"radius_m", c.topology.radius_m},
                   {"min_distance_m", c.topology.min_distance_m}};
  j["channel"] = {{"bandwidth_hz", c.channel.bandwidth_hz},
                  {"noise_dbm_per_mhz", c.channel.noise_dbm_per_mhz},
                  {"pathloss_offset_db", c.channel.pathloss.offset_db},
                  {"pathloss_slope_db", c.channel.pathloss.slope_db}};
  const DeviceRanges& r = c.devices.ranges;
  j["devices"] = {{"dataset_size_min", r.dataset_size_min}, {"dataset_size_max", r.dataset_size_max},
                  {"mean_cpu_hz_min", r.mean_cpu_hz_min},   {"mean_cpu_hz_max", r.mean_cpu_hz_max},
                  {"cpu_std_hz", r.cpu_std_hz},             {"cpu_floor_hz", c.devices.cpu_floor_hz},
                  {"cycles_per_sample", r.cycles_per_sample}, {"model_bits", r.model_bits},
                  {"p_max_w", r.p_max_w},                   {"capacitance", r.capacitance}};
  j["objective"] = {{"lambda_t", c.objective.lambda_t},
                    {"lambda_e", c.objective.lambda_e},
                    {"t_max_s", c.objective.t_max_s},
                    {"e_max_j", c.objective.e_max_j},
                    {"d_min", c.objective.d_min},
                    {"v_weight", c.objective.v_weight ? json(*c.objective.v_weight) : json(nullptr)}};
  const fl::TaskSpec& t = c.learning.task;
  j["learning"] = {{"enabled", c.learning.enabled},
                   {"num_classes", t.num_classes},
                   {"feature_dim", t.feature_dim},
                   {"samples_per_class", t.samples_per_class},
                   {"test_samples_per_class", t.test_samples_per_class},
                   {"class_separation", t.class_separation},
                   {"dirichlet_gamma", t.dirichlet_gamma},
                   {"local_steps", t.local_steps},
                   {"learning_rate", t.learning_rate},
                   {"prox_m", t.prox_m},
                   {"rho", t.rho},
                   {"staleness_exponent", t.staleness_exponent},
                   {"eval_every", c.learning.eval_every},
                   {"target_loss", c.learning.target_loss ? json(*c.learning.target_loss) : json(nullptr)}};
  j["run"] = {{"policy", std::string(sched::to_string(c.run.policy))},
              {"rounds", c.run.rounds},
              {"sim_seconds", num_or_null(c.run.sim_seconds)},
              {"seed", c.run.seed},
              {"compute_regret", c.run.compute_regret}};
  j["output"] = {{"dir", c.output.dir}, {"format", c.output.format}};
  return j;
}

}  // namespace edgefl
