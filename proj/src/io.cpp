#include "cpgbo/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace cpgbo {

namespace {

Json yaml_node_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      Json out = Json::array();
      for (const auto& item : node) out.push_back(yaml_node_to_json(item));
      return out;
    }
    case YAML::NodeType::Map: {
      Json out = Json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = yaml_node_to_json(kv.second);
      return out;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const std::string s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted
  if (s == "true") return true;
  if (s == "false") return false;
  if (s == "null" || s == "~") return nullptr;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  std::int64_t i = 0;
  if (auto [p, ec] = std::from_chars(first, last, i); ec == std::errc() && p == last) return i;
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(first, last, d); ec == std::errc() && p == last) return d;
  return s;
}

// Strict view of one mapping: every key has to be consumed.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected a mapping");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const Json& raw(const char* key) {
    used_.insert(key);
    return j_.at(key);
  }

  void get(const char* key, double& out) {
    if (!has(key)) return;
    const Json& v = raw(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    out = v.get<double>();
  }
  void get(const char* key, int& out) {
    if (!has(key)) return;
    const Json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    out = v.get<int>();
  }
  void get(const char* key, std::uint64_t& out) {
    if (!has(key)) return;
    const Json& v = raw(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(where(key) + ": expected a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }
  void get(const char* key, bool& out) {
    if (!has(key)) return;
    const Json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    out = v.get<bool>();
  }
  void get(const char* key, std::string& out) {
    if (!has(key)) return;
    const Json& v = raw(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    out = v.get<std::string>();
  }
  void get(const char* key, Eigen::Vector3d& out) {
    if (!has(key)) return;
    out = vector3(raw(key), where(key));
  }
  void get(const char* key, Range& out) {
    if (!has(key)) return;
    const Json& v = raw(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ConfigError(where(key) + ": expected [lo, hi]");
    }
    out = {v[0].get<double>(), v[1].get<double>()};
  }
  void get(const char* key, Eigen::Matrix4d& out) {
    if (!has(key)) return;
    const Json& v = raw(key);
    if (!v.is_array() || v.size() != 4) throw ConfigError(where(key) + ": expected a 4x4 matrix");
    for (int r = 0; r < 4; ++r) {
      if (!v[r].is_array() || v[r].size() != 4) throw ConfigError(where(key) + ": expected a 4x4 matrix");
      for (int c = 0; c < 4; ++c) {
        if (!v[r][c].is_number()) throw ConfigError(where(key) + ": expected numbers");
        out(r, c) = v[r][c].get<double>();
      }
    }
  }

  std::optional<Section> sub(const char* key) {
    if (!has(key)) return std::nullopt;
    return Section(raw(key), where(key));
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.contains(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
    }
  }

  static Eigen::Vector3d vector3(const Json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) throw ConfigError(where + ": expected [x, y, z]");
    Eigen::Vector3d out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) throw ConfigError(where + ": expected numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Json vec3(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json mat4(const Eigen::Matrix4d& m) {
  Json out = Json::array();
  for (int r = 0; r < 4; ++r) out.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2), m(r, 3)}));
  return out;
}

Json params_json(const CpgParams& p) {
  Json out = Json::object();
  const auto v = p.optimized();
  for (std::size_t d = 0; d < v.size(); ++d) out[kOptimizedNames[d]] = v[d];
  return out;
}

CpgParams params_from_json(const Json& j, const std::string& where, CpgParams base) {
  Section s(j, where);
  auto v = base.optimized();
  for (std::size_t d = 0; d < v.size(); ++d) s.get(kOptimizedNames[d], v[d]);
  s.finish();
  base.set_optimized(v);
  return base;
}

template <typename Event, typename Fill>
std::vector<Event> parse_events(Section& parent, const char* key, Fill fill) {
  std::vector<Event> out;
  if (!parent.has(key)) return out;
  const Json& arr = parent.raw(key);
  const std::string where = parent.where(key);
  if (!arr.is_array()) throw ConfigError(where + ": expected a list");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Section s(arr[i], where + "[" + std::to_string(i) + "]");
    Event e;
    if (!s.has("trial")) throw ConfigError(s.where("trial") + ": required");
    s.get("trial", e.trial);
    fill(s, e);
    s.finish();
    out.push_back(e);
  }
  return out;
}

}  // namespace

Json yaml_to_json(const std::string& text) {
  try {
    return yaml_node_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML: ") + e.what());
  }
}

Json load_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string ext = path.extension().string();
  if (ext == ".yaml" || ext == ".yml") return yaml_to_json(buf.str());
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ScenarioConfig scenario_from_json(const Json& doc) {
  ScenarioConfig c;
  Section root(doc, "");
  std::string format = kScenarioFormat;
  root.get("format", format);
  if (format != kScenarioFormat) throw ConfigError("format: expected " + std::string(kScenarioFormat));
  root.get("name", c.name);
  std::string variant = to_string(c.variant);
  root.get("controller", variant);
  try {
    c.variant = parse_variant(variant);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("controller: ") + e.what());
  }
  root.get("budget", c.budget);
  root.get("seed", c.seed);
  root.get("inference", c.inference_mode);

  if (auto s = root.sub("robot")) {
    RobotModel& r = c.robot;
    s->get("trunk_mass", r.trunk_mass);
    s->get("trunk_inertia", r.trunk_inertia);
    s->get("payload_mass", r.payload_mass);
    s->get("payload_size", r.payload_size);
    s->get("gravity", r.gravity);
    s->get("joint_reflected_inertia", r.joint_reflected_inertia);
    s->get("joint_damping", r.joint_damping);
    s->get("torque_limit", r.torque_limit);
    s->get("thigh_length", r.geom.l_thigh);
    s->get("calf_length", r.geom.l_calf);
    s->get("hip_offset_y", r.geom.hip_offset_y);
    if (s->has("hip_positions")) {
      const Json& h = s->raw("hip_positions");
      const std::string where = s->where("hip_positions");
      if (!h.is_array() || h.size() != kNumLegs) throw ConfigError(where + ": expected 4 points");
      for (int leg = 0; leg < kNumLegs; ++leg) r.geom.hip_positions[leg] = Section::vector3(h[leg], where);
    }
    s->finish();
  }

  if (auto s = root.sub("terrain")) {
    Terrain& t = c.terrain;
    double slope_deg = t.slope_angle * 180.0 / std::numbers::pi;
    s->get("slope_deg", slope_deg);
    t.slope_angle = slope_deg * std::numbers::pi / 180.0;
    s->get("friction", t.friction_coefficient);
    s->get("contact_stiffness", t.contact_stiffness);
    s->get("contact_damping", t.contact_damping);
    s->get("tangential_damping", t.tangential_damping);
    s->get("max_substep", c.step_options.max_substep);
    s->finish();
  }

  if (auto s = root.sub("control")) {
    s->get("kp", c.control.joint_gains.kp);
    s->get("kd", c.control.joint_gains.kd);
    s->get("k_dir", c.control.vmc_gains.k_dir);
    s->get("k_att_roll", c.control.vmc_gains.k_att_r);
    s->get("k_att_pitch", c.control.vmc_gains.k_att_p);
    s->get("vmc_damping_ratio", c.control.vmc_gains.damping_ratio);
    CpgParams& p = c.initial_params;
    s->get("alpha", p.alpha);
    s->get("step_length", p.step_length);
    s->get("body_height", p.body_height);
    s->get("coupling_weights", p.coupling_weights);
    s->get("phase_lags", p.phase_lags);
    if (s->has("initial_params")) p = params_from_json(s->raw("initial_params"), s->where("initial_params"), p);
    s->finish();
  }

  if (auto s = root.sub("protocol")) {
    s->get("transition_duration", c.protocol.transition_duration);
    s->get("steady_duration", c.protocol.steady_duration);
    s->get("control_rate", c.protocol.control_rate);
    s->finish();
  }
  if (!(c.protocol.control_rate > 0.0)) throw ConfigError("protocol.control_rate: must be positive");
  c.control.dt = c.protocol.dt();
  c.objective.dt = c.protocol.dt();
  c.objective.steps = c.protocol.steady_steps();

  if (auto s = root.sub("objective")) {
    ObjectiveConfig& o = c.objective;
    s->get("w1", o.w1);
    s->get("w2", o.w2);
    s->get("reward_cap", o.reward_cap);
    s->get("velocity_bandwidth", o.velocity_bandwidth);
    s->get("cot_cap", o.cot_cap);
    s->get("min_distance", o.min_distance);
    s->get("abort_objective", o.abort_objective);
    s->finish();
  }
  c.objective.gravity = c.robot.gravity;

  if (auto s = root.sub("optimizer")) {
    s->get("beta_init", c.beta.beta_init);
    s->get("beta_init_c", c.beta.beta_init_c);
    s->get("gamma", c.beta.gamma);
    s->get("n_decay", c.beta.n_decay);
    s->get("n_decay_c", c.beta.n_decay_c);
    s->get("t_load", c.sharing.t_load);
    s->get("t_slope", c.sharing.t_slope);
    s->get("r_load", c.sharing.r_load);
    s->get("r_slope", c.sharing.r_slope);
    s->get("random_trials", c.random_trials);
    s->get("change_window", c.change_window);
    s->get("candidates", c.acquisition.candidates);
    s->get("refine_starts", c.acquisition.refine_starts);
    s->get("refine_steps", c.acquisition.refine_steps);
    s->get("initial_step", c.acquisition.initial_step);
    s->get("optimize_hyperparameters", c.fit.optimize_hyperparameters);
    s->get("restarts", c.fit.restarts);
    s->get("iterations", c.fit.iterations);
    s->get("learning_rate", c.fit.learning_rate);
    if (auto r = s->sub("ranges")) {
      for (std::size_t d = 0; d < CpgParams::kNumOptimized; ++d) r->get(kOptimizedNames[d], c.ranges.params[d]);
      r->get("c_load", c.ranges.load);
      r->get("c_slope", c.ranges.slope);
      r->finish();
    }
    s->finish();
  }

  if (auto s = root.sub("schedule")) {
    if (s->has("velocity")) {
      c.velocity_schedule = parse_events<VelocityEvent>(*s, "velocity", [](Section& e, VelocityEvent& v) {
        if (!e.has("v_star")) throw ConfigError(e.where("v_star") + ": required");
        e.get("v_star", v.v_star);
      });
    }
    c.terrain_schedule = parse_events<TerrainEvent>(*s, "terrain", [&](Section& e, TerrainEvent& t) {
      t.friction = c.terrain.friction_coefficient;
      t.slope_deg = c.terrain.slope_angle * 180.0 / std::numbers::pi;
      e.get("friction", t.friction);
      e.get("slope_deg", t.slope_deg);
    });
    c.payload_schedule = parse_events<PayloadEvent>(*s, "payload", [](Section& e, PayloadEvent& p) {
      if (!e.has("mass")) throw ConfigError(e.where("mass") + ": required");
      e.get("mass", p.mass);
    });
    s->finish();
  }
  root.finish();

  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

Json scenario_to_json(const ScenarioConfig& c) {
  Json j;
  j["format"] = kScenarioFormat;
  j["name"] = c.name;
  j["controller"] = to_string(c.variant);
  j["budget"] = c.budget;
  j["seed"] = c.seed;
  j["inference"] = c.inference_mode;

  const RobotModel& r = c.robot;
  Json hips = Json::array();
  for (const auto& h : r.geom.hip_positions) hips.push_back(vec3(h));
  j["robot"] = {{"trunk_mass", r.trunk_mass},
                {"trunk_inertia", vec3(r.trunk_inertia)},
                {"payload_mass", r.payload_mass},
                {"payload_size", vec3(r.payload_size)},
                {"gravity", r.gravity},
                {"joint_reflected_inertia", r.joint_reflected_inertia},
                {"joint_damping", r.joint_damping},
                {"torque_limit", r.torque_limit},
                {"thigh_length", r.geom.l_thigh},
                {"calf_length", r.geom.l_calf},
                {"hip_offset_y", r.geom.hip_offset_y},
                {"hip_positions", hips}};

  const Terrain& t = c.terrain;
  j["terrain"] = {{"slope_deg", t.slope_angle * 180.0 / std::numbers::pi},
                  {"friction", t.friction_coefficient},
                  {"contact_stiffness", t.contact_stiffness},
                  {"contact_damping", t.contact_damping},
                  {"tangential_damping", t.tangential_damping},
                  {"max_substep", c.step_options.max_substep}};

  const CpgParams& p = c.initial_params;
  j["control"] = {{"kp", c.control.joint_gains.kp},
                  {"kd", c.control.joint_gains.kd},
                  {"k_dir", c.control.vmc_gains.k_dir},
                  {"k_att_roll", c.control.vmc_gains.k_att_r},
                  {"k_att_pitch", c.control.vmc_gains.k_att_p},
                  {"vmc_damping_ratio", c.control.vmc_gains.damping_ratio},
                  {"alpha", p.alpha},
                  {"step_length", p.step_length},
                  {"body_height", p.body_height},
                  {"coupling_weights", mat4(p.coupling_weights)},
                  {"phase_lags", mat4(p.phase_lags)},
                  {"initial_params", params_json(p)}};

  j["protocol"] = {{"transition_duration", c.protocol.transition_duration},
                   {"steady_duration", c.protocol.steady_duration},
                   {"control_rate", c.protocol.control_rate}};

  const ObjectiveConfig& o = c.objective;
  j["objective"] = {{"w1", o.w1},
                    {"w2", o.w2},
                    {"reward_cap", o.reward_cap},
                    {"velocity_bandwidth", o.velocity_bandwidth},
                    {"cot_cap", o.cot_cap},
                    {"min_distance", o.min_distance},
                    {"abort_objective", o.abort_objective}};

  Json ranges = Json::object();
  for (std::size_t d = 0; d < CpgParams::kNumOptimized; ++d) {
    ranges[kOptimizedNames[d]] = Json::array({c.ranges.params[d].lo, c.ranges.params[d].hi});
  }
  ranges["c_load"] = Json::array({c.ranges.load.lo, c.ranges.load.hi});
  ranges["c_slope"] = Json::array({c.ranges.slope.lo, c.ranges.slope.hi});
  j["optimizer"] = {{"beta_init", c.beta.beta_init},
                    {"beta_init_c", c.beta.beta_init_c},
                    {"gamma", c.beta.gamma},
                    {"n_decay", c.beta.n_decay},
                    {"n_decay_c", c.beta.n_decay_c},
                    {"t_load", c.sharing.t_load},
                    {"t_slope", c.sharing.t_slope},
                    {"r_load", c.sharing.r_load},
                    {"r_slope", c.sharing.r_slope},
                    {"random_trials", c.random_trials},
                    {"change_window", c.change_window},
                    {"candidates", c.acquisition.candidates},
                    {"refine_starts", c.acquisition.refine_starts},
                    {"refine_steps", c.acquisition.refine_steps},
                    {"initial_step", c.acquisition.initial_step},
                    {"optimize_hyperparameters", c.fit.optimize_hyperparameters},
                    {"restarts", c.fit.restarts},
                    {"iterations", c.fit.iterations},
                    {"learning_rate", c.fit.learning_rate},
                    {"ranges", ranges}};

  Json vel = Json::array(), ter = Json::array(), pay = Json::array();
  for (const auto& e : c.velocity_schedule) vel.push_back({{"trial", e.trial}, {"v_star", e.v_star}});
  for (const auto& e : c.terrain_schedule) {
    ter.push_back({{"trial", e.trial}, {"friction", e.friction}, {"slope_deg", e.slope_deg}});
  }
  for (const auto& e : c.payload_schedule) pay.push_back({{"trial", e.trial}, {"mass", e.mass}});
  j["schedule"] = {{"velocity", vel}, {"terrain", ter}, {"payload", pay}};
  return j;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(load_document(path));
}

namespace {

Json row_json(const ReportRow& r) {
  return {{"trial", r.trial},
          {"params", params_json(r.params)},
          {"c_load", r.context.load},
          {"c_slope", r.context.slope},
          {"mean_vx", r.mean_vx},
          {"cost_of_transport", r.cost_of_transport},
          {"objective", r.objective},
          {"beta", r.beta},
          {"aborted", r.aborted},
          {"v_star", r.v_star},
          {"payload", r.payload},
          {"friction", r.friction},
          {"slope_deg", r.slope_deg},
          {"random", r.random},
          {"context_changed", r.context_changed},
          {"same_context", r.same_context}};
}

Json summary_json(const Summary& s) {
  return {{"trials", s.count},
          {"mean_vx", s.mean_vx},
          {"cost_of_transport", s.cost_of_transport},
          {"objective", s.objective}};
}

Json trial_json(const TrialRecord& t, const ReportRow& row) {
  Json nf = Json::array();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    std::vector<double> series;
    series.reserve(t.normal_force.size());
    for (const auto& f : t.normal_force) series.push_back(f[leg]);
    nf.push_back(series);
  }
  return {{"trial", row.trial},
          {"aborted", t.aborted},
          {"distance", t.distance},
          {"total_mass", t.total_mass},
          {"v_star", row.v_star},
          {"objective", row.objective},
          {"objective_recalibrated", t.objective},
          {"v_star_recalibrated", t.v_star},
          {"cost_of_transport", t.cost_of_transport},
          {"traces",
           {{"vx", t.velocity_x},
            {"vy", t.velocity_y},
            {"pitch", t.pitch},
            {"joint_power", t.joint_power},
            {"normal_force", nf}}}};
}

std::vector<double> doubles(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected a list");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(where + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Json run_log(const ScenarioConfig& config, const ScenarioResult& result) {
  Json log;
  log["format"] = kRunLogFormat;
  log["config"] = scenario_to_json(config);
  Json rows = Json::array();
  for (const auto& r : result.report.rows) rows.push_back(row_json(r));
  log["rows"] = rows;
  log["summary"] = summary_json(result.report.summary());
  Json trials = Json::array();
  const auto& rec = result.history.trials;
  for (std::size_t i = 0; i < rec.size() && i < result.report.rows.size(); ++i) {
    trials.push_back(trial_json(rec[i], result.report.rows[i]));
  }
  log["trials"] = trials;
  return log;
}

LoggedRun parse_run_log(const Json& log) {
  if (!log.is_object() || log.value("format", "") != kRunLogFormat) {
    throw ConfigError("run log: expected format " + std::string(kRunLogFormat));
  }
  LoggedRun out;
  out.config = scenario_from_json(log.at("config"));
  out.report.name = out.config.name;
  out.report.variant = out.config.variant;
  out.report.seed = out.config.seed;

  for (const auto& r : log.at("rows")) {
    ReportRow row;
    row.trial = r.at("trial").get<int>();
    row.params = params_from_json(r.at("params"), "rows.params", out.config.initial_params);
    row.context = {r.at("c_load").get<double>(), r.at("c_slope").get<double>()};
    row.mean_vx = r.at("mean_vx").get<double>();
    row.cost_of_transport = r.at("cost_of_transport").get<double>();
    row.objective = r.at("objective").get<double>();
    row.beta = r.at("beta").get<double>();
    row.aborted = r.at("aborted").get<bool>();
    row.v_star = r.at("v_star").get<double>();
    row.payload = r.at("payload").get<double>();
    row.friction = r.at("friction").get<double>();
    row.slope_deg = r.at("slope_deg").get<double>();
    row.random = r.at("random").get<bool>();
    row.context_changed = r.at("context_changed").get<bool>();
    row.same_context = r.at("same_context").get<int>();
    out.report.rows.push_back(row);
  }

  const Json& trials = log.at("trials");
  if (trials.size() != out.report.rows.size()) throw ConfigError("run log: trials and rows differ in length");
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Json& t = trials[i];
    const ReportRow& row = out.report.rows[i];
    TrialRecord r;
    r.params = row.params;
    r.context = row.context;
    r.aborted = t.at("aborted").get<bool>();
    r.distance = t.at("distance").get<double>();
    r.total_mass = t.at("total_mass").get<double>();
    r.v_star = t.at("v_star").get<double>();
    r.objective = t.at("objective").get<double>();
    r.cost_of_transport = t.at("cost_of_transport").get<double>();
    const Json& tr = t.at("traces");
    r.velocity_x = doubles(tr.at("vx"), "traces.vx");
    r.velocity_y = doubles(tr.at("vy"), "traces.vy");
    r.pitch = doubles(tr.at("pitch"), "traces.pitch");
    r.joint_power = doubles(tr.at("joint_power"), "traces.joint_power");
    const Json& nf = tr.at("normal_force");
    if (!nf.is_array() || nf.size() != kNumLegs) throw ConfigError("traces.normal_force: expected 4 series");
    std::array<std::vector<double>, kNumLegs> legs;
    for (int leg = 0; leg < kNumLegs; ++leg) legs[leg] = doubles(nf[leg], "traces.normal_force");
    r.normal_force.resize(legs[0].size());
    for (std::size_t k = 0; k < legs[0].size(); ++k) {
      for (int leg = 0; leg < kNumLegs; ++leg) r.normal_force[k][leg] = legs[leg].at(k);
    }
    out.trials.push_back(std::move(r));
  }
  return out;
}

LoggedRun read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return parse_run_log(Json::parse(in));
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string trials_csv(const RunReport& report) {
  std::string out = "trial";
  for (const char* name : kOptimizedNames) out += std::string(",") + name;
  out += ",c_load,c_slope,mean_vx,cot,J,beta,aborted\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.trial);
    for (double v : r.params.optimized()) out += "," + fmt(v);
    out += "," + fmt(r.context.load) + "," + fmt(r.context.slope) + "," + fmt(r.mean_vx) + "," +
           fmt(r.cost_of_transport) + "," + fmt(r.objective) + "," + fmt(r.beta) + "," +
           (r.aborted ? "1" : "0") + "\n";
  }
  return out;
}

std::string plot_csv(const RunReport& report) {
  std::string out =
      "trial,v_star,mean_vx,cot,J,c_load,c_slope,beta,payload,friction,slope_deg,aborted\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.trial) + "," + fmt(r.v_star) + "," + fmt(r.mean_vx) + "," +
           fmt(r.cost_of_transport) + "," + fmt(r.objective) + "," + fmt(r.context.load) + "," +
           fmt(r.context.slope) + "," + fmt(r.beta) + "," + fmt(r.payload) + "," + fmt(r.friction) +
           "," + fmt(r.slope_deg) + "," + (r.aborted ? "1" : "0") + "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

ExportPaths export_results(const std::filesystem::path& out_dir, const ScenarioConfig& config,
                           const ScenarioResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  ExportPaths p{out_dir / "trials.csv", out_dir / "run_log.json", out_dir / "plot.csv"};
  write_text(p.trials_csv, trials_csv(result.report));
  write_text(p.log_json, run_log(config, result).dump());
  write_text(p.plot_csv, plot_csv(result.report));
  return p;
}

Stat describe(std::vector<double> values) {
  Stat s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  s.median = values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
  return s;
}

std::vector<AblationRow> ablation_table(const std::vector<RunReport>& reports) {
  std::vector<ControllerVariant> order;
  for (const auto& r : reports) {
    if (std::find(order.begin(), order.end(), r.variant) == order.end()) order.push_back(r.variant);
  }
  std::vector<AblationRow> out;
  for (ControllerVariant v : order) {
    std::vector<double> vx, cot, j;
    for (const auto& r : reports) {
      if (r.variant != v) continue;
      const Summary s = r.summary();
      vx.push_back(s.mean_vx);
      cot.push_back(s.cost_of_transport);
      j.push_back(s.objective);
    }
    out.push_back({v, static_cast<int>(vx.size()), describe(vx), describe(cot), describe(j)});
  }
  return out;
}

std::string format_ablation(const std::vector<AblationRow>& rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-14s %4s  %-22s %-22s %-22s\n", "controller", "runs",
                "velocity [m/s]", "CoT", "objective");
  out += buf;
  for (const auto& r : rows) {
    auto cell = [](const Stat& s) {
      char c[64];
      std::snprintf(c, sizeof c, "%.3f +- %.3f (%.3f)", s.mean, s.stddev, s.median);
      return std::string(c);
    };
    std::snprintf(buf, sizeof buf, "%-14s %4d  %-22s %-22s %-22s\n", to_string(r.variant).c_str(),
                  r.runs, cell(r.mean_vx).c_str(), cell(r.cost_of_transport).c_str(),
                  cell(r.objective).c_str());
    out += buf;
  }
  out += "mean +- std (median) of per-run last-5 averages\n";
  return out;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out =
      "controller,runs,vx_mean,vx_std,vx_median,cot_mean,cot_std,cot_median,J_mean,J_std,J_median\n";
  for (const auto& r : rows) {
    out += to_string(r.variant) + "," + std::to_string(r.runs);
    for (const Stat* s : {&r.mean_vx, &r.cost_of_transport, &r.objective}) {
      out += "," + fmt(s->mean) + "," + fmt(s->stddev) + "," + fmt(s->median);
    }
    out += "\n";
  }
  return out;
}

}  // namespace cpgbo
