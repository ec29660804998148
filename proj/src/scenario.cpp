#include "csm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <future>
#include <sstream>
#include <stdexcept>

#include "csm/csv.hpp"
#include "csm/doa.hpp"
#include "csm/error.hpp"
#include "json_config.hpp"

namespace csm {

Trajectory::Trajectory(std::vector<Waypoint> waypoints, double max_speed)
    : waypoints_(std::move(waypoints)) {
  if (waypoints_.empty()) {
    throw std::invalid_argument("Trajectory: no waypoints");
  }
  for (std::size_t k = 0; k < waypoints_.size(); ++k) {
    const Waypoint& w = waypoints_[k];
    if (!std::isfinite(w.t) || !w.pose.position.allFinite() || !w.pose.orientation.is_unit()) {
      throw std::invalid_argument("Trajectory: waypoint " + std::to_string(k) +
                                  " is not finite or has a non-unit orientation");
    }
    if (k > 0 && !(w.t > waypoints_[k - 1].t)) {
      throw std::invalid_argument("Trajectory: waypoint times must be strictly increasing");
    }
  }
  if (peak_speed() > max_speed * (1.0 + 1e-9)) {
    throw std::invalid_argument("Trajectory: segment speed " + csv::format(peak_speed()) +
                                " m/s exceeds the " + csv::format(max_speed) + " m/s limit");
  }
}

double Trajectory::peak_speed() const {
  double v = 0.0;
  for (std::size_t k = 1; k < waypoints_.size(); ++k) {
    const double dist = (waypoints_[k].pose.position - waypoints_[k - 1].pose.position).norm();
    v = std::max(v, dist / (waypoints_[k].t - waypoints_[k - 1].t));
  }
  return v;
}

Pose Trajectory::pose_at(double t) const {
  if (stationary()) {
    return waypoints_.front().pose;
  }
  if (!(t >= start() && t <= end())) {
    throw std::out_of_range("Trajectory: t = " + csv::format(t) + " outside [" +
                            csv::format(start()) + ", " + csv::format(end()) + "]");
  }
  const auto it = std::lower_bound(waypoints_.begin(), waypoints_.end(), t,
                                   [](const Waypoint& w, double v) { return w.t < v; });
  if (it->t == t) {
    return it->pose;
  }
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double s = (t - a.t) / (b.t - a.t);
  Pose p;
  p.position = a.pose.position + s * (b.pose.position - a.pose.position);
  p.orientation = slerp(a.pose.orientation, b.pose.orientation, s);
  return p;
}

void PoseNoiseModel::validate() const {
  if (!(sigma_pos >= 0.0) || !(sigma_yaw_deg >= 0.0)) {
    throw std::invalid_argument("PoseNoiseModel: sigmas must be nonnegative");
  }
}

Pose RobotConfig::array_pose(double t) const {
  Pose base = trajectory.pose_at(t);
  base.position += base.orientation.rotate(Vec3(0.0, 0.0, geometry.mount_height()));
  return base;
}

namespace scenario {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a simple combination.
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ b);
}

Pose perturb_pose(const Pose& pose, const PoseNoiseModel& model, double t) {
  model.validate();
  if (model.sigma_pos == 0.0 && model.sigma_yaw_deg == 0.0) {
    return pose;
  }
  std::uint64_t bits = 0;
  std::memcpy(&bits, &t, sizeof bits);
  std::mt19937_64 rng(derive_seed(model.rng_seed, bits));
  std::normal_distribution<double> unit(0.0, 1.0);
  const double dx = unit(rng) * model.sigma_pos;
  const double dy = unit(rng) * model.sigma_pos;
  const double dyaw = unit(rng) * deg2rad(model.sigma_yaw_deg);
  Pose out = pose;
  out.position += Vec3(dx, dy, 0.0);
  out.orientation = Quaternion::from_yaw(dyaw) * pose.orientation;
  out.orientation = Quaternion::normalized(out.orientation.w, out.orientation.x,
                                           out.orientation.y, out.orientation.z);
  return out;
}

UnitVec3 perturb_direction(const UnitVec3& dir, double rms_deg, std::mt19937_64& rng) {
  if (rms_deg <= 0.0) {
    return dir;
  }
  const Vec3& u = dir.vec();
  const Vec3 helper = std::abs(u.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 e1 = u.cross(helper).normalized();
  const Vec3 e2 = u.cross(e1);
  std::normal_distribution<double> tangent(0.0, deg2rad(rms_deg) / std::sqrt(2.0));
  const double a = tangent(rng);
  const double b = tangent(rng);
  const double phi = std::hypot(a, b);
  if (phi == 0.0) {
    return dir;
  }
  return UnitVec3::normalized(std::cos(phi) * u + std::sin(phi) * (a * e1 + b * e2) / phi);
}

}  // namespace scenario

void TrialConfig::validate() const {
  if (!(record_rate > 0.0) || !std::isfinite(record_rate)) {
    throw std::invalid_argument("TrialConfig: record_rate must be positive");
  }
  if (!(duration > 0.0)) {
    throw std::invalid_argument("TrialConfig: duration must be positive");
  }
  if (robots.size() < 2) {
    throw std::invalid_argument("TrialConfig: at least two robots are required");
  }
  if (mode == TrialMode::Static && !source.stationary()) {
    throw std::invalid_argument("TrialConfig: static trials need a single source waypoint");
  }
  if (!(doa_noise_deg >= 0.0)) {
    throw std::invalid_argument("TrialConfig: doa_noise_deg must be nonnegative");
  }
  const double last = tick_time(tick_count() - 1);
  auto covers = [&](const Trajectory& tr) {
    return tr.stationary() || (tr.start() <= 0.0 && tr.end() >= last);
  };
  if (!covers(source)) {
    throw std::invalid_argument("TrialConfig: source trajectory does not cover the trial");
  }
  for (const RobotConfig& r : robots) {
    if (!covers(r.trajectory)) {
      throw std::invalid_argument("TrialConfig: trajectory of robot '" + r.name +
                                  "' does not cover the trial");
    }
    if (r.trajectory.peak_speed() > kMaxRobotSpeed * (1.0 + 1e-9)) {
      throw std::invalid_argument("TrialConfig: robot '" + r.name + "' exceeds 2 m/s");
    }
    r.pose_noise.validate();
  }
  tracker.validate();
}

std::size_t TrialConfig::tick_count() const {
  return static_cast<std::size_t>(std::llround(duration * record_rate));
}

namespace scenario {
namespace {

// Upper bound of the SRP score: every pair perfectly coherent.
constexpr double kSyntheticPower = kMicCount * (kMicCount - 1) / 2;

std::vector<RobotObservation> run_robot(const TrialConfig& config, std::size_t index,
                                        const doa::SrpSearch* search) {
  const RobotConfig& robot = config.robots[index];
  const bool bypass = config.doa_mode == DoaMode::Bypass;
  PoseNoiseModel noise = robot.pose_noise;
  noise.rng_seed = derive_seed(config.seed, 0x705Eu, index);
  if (bypass) {
    noise.sigma_pos = 0.0;
    noise.sigma_yaw_deg = 0.0;
  }
  track::DoaTracker tracker(config.tracker);
  std::vector<RobotObservation> out;
  out.reserve(config.tick_count());

  for (std::size_t k = 0; k < config.tick_count(); ++k) {
    const double t = config.tick_time(k);
    try {
      const Pose pose = robot.array_pose(t);
      const Vec3 source = config.source.pose_at(t).position;
      const UnitVec3 truth_body =
          geom::rotate_to_body(pose, UnitVec3::normalized(source - pose.position));

      RobotObservation obs;
      obs.t = t;
      obs.pose = perturb_pose(pose, noise, t);
      if (bypass) {
        obs.doa_body = truth_body;
        obs.power = kSyntheticPower;
        out.push_back(obs);
        continue;
      }

      PotentialSource potential;
      potential.timestamp = t;
      if (config.doa_mode == DoaMode::Perturbed) {
        std::mt19937_64 rng(derive_seed(config.seed, 0xD0A0u + index, k));
        potential.direction = perturb_direction(truth_body, config.doa_noise_deg, rng);
        potential.power = kSyntheticPower;
      } else {
        SceneFrame scene;
        scene.source_position = source;
        scene.array_pose = pose;
        scene.sample_rate = config.sample_rate;
        scene.frame_length = config.frame_length;
        scene.snr_db = config.snr_db;
        scene.rng_seed = derive_seed(config.seed, 0xA0D10u + index, k);
        scene.timestamp = t;
        scene.speed_of_sound = config.speed_of_sound;
        potential = search->estimate(synth::synthesize_frame(scene, robot.geometry));
      }
      if (auto tracked = tracker.push(potential)) {
        obs.doa_body = tracked->direction;
        obs.power = tracked->power;
        out.push_back(obs);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("robot '" + robot.name + "' tick " + std::to_string(k) +
                               " (t = " + csv::format(t) + " s): " + e.what());
    }
  }
  return out;
}

}  // namespace

TrialOutput run_trial(const TrialConfig& config) {
  config.validate();
  TrialOutput out;
  const std::size_t n_robots = config.robots.size();

  std::vector<std::unique_ptr<doa::SrpSearch>> searches(n_robots);
  if (config.doa_mode == DoaMode::Acoustic) {
    const SphericalGrid grid = SphericalGrid::icosahedral();
    for (std::size_t r = 0; r < n_robots; ++r) {
      searches[r] = std::make_unique<doa::SrpSearch>(config.robots[r].geometry, grid,
                                                     config.sample_rate, config.speed_of_sound);
    }
    std::vector<std::future<std::vector<RobotObservation>>> jobs;
    for (std::size_t r = 0; r < n_robots; ++r) {
      jobs.push_back(std::async(std::launch::async, run_robot, std::cref(config), r,
                                searches[r].get()));
    }
    for (auto& j : jobs) {
      out.streams.push_back(j.get());
    }
  } else {
    for (std::size_t r = 0; r < n_robots; ++r) {
      out.streams.push_back(run_robot(config, r, nullptr));
    }
  }

  out.truth.reserve(config.tick_count());
  for (std::size_t k = 0; k < config.tick_count(); ++k) {
    const double t = config.tick_time(k);
    GroundTruthSample g;
    g.t = t;
    g.source = config.source.pose_at(t).position;
    for (const RobotConfig& r : config.robots) {
      g.robots.push_back(r.array_pose(t).position);
    }
    out.truth.push_back(std::move(g));
  }
  return out;
}

TrialConfig with_bypass(TrialConfig config) {
  config.doa_mode = DoaMode::Bypass;
  return config;
}

namespace {

using detail::json;

Quaternion orientation_from_json(const json& w, const std::string& what) {
  if (w.contains("orientation")) {
    const json& q = w.at("orientation");
    if (!q.is_array() || q.size() != 4) {
      throw ConfigError(what + ".orientation: expected [w, x, y, z]");
    }
    const Quaternion raw{q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                         q[3].get<double>()};
    if (std::abs(raw.norm() - 1.0) > 1e-6) {
      throw ConfigError(what + ".orientation: quaternion is not unit-norm");
    }
    return Quaternion::normalized(raw.w, raw.x, raw.y, raw.z);
  }
  return Quaternion::from_yaw(deg2rad(w.value("yaw_deg", 0.0)));
}

Trajectory trajectory_from_json(const json& j, const std::string& what, double max_speed,
                                bool ground) {
  const json& list = j.is_array() ? j : j.at("waypoints");
  std::vector<Waypoint> wps;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const json& w = list[k];
    const std::string name = what + "[" + std::to_string(k) + "]";
    Waypoint wp;
    wp.t = w.value("t", 0.0);
    const json& p = w.at("position");
    if (ground && p.is_array() && p.size() == 2) {
      wp.pose.position = Vec3(p[0].get<double>(), p[1].get<double>(), 0.0);
    } else {
      wp.pose.position = detail::vec3_from_json(p, name + ".position");
    }
    wp.pose.orientation = orientation_from_json(w, name);
    wps.push_back(wp);
  }
  try {
    return Trajectory(std::move(wps), max_speed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

TrialConfig trial_from_json(const json& j) {
  TrialConfig c;
  const std::string mode = j.value("mode", std::string("static"));
  if (mode == "static") {
    c.mode = TrialMode::Static;
  } else if (mode == "moving") {
    c.mode = TrialMode::Moving;
  } else {
    throw ConfigError("mode: expected 'static' or 'moving', got '" + mode + "'");
  }
  c.record_rate = j.value("record_rate", c.mode == TrialMode::Static ? 10.0 : 100.0);
  const std::string doa_mode = j.value("doa_mode", std::string("acoustic"));
  if (doa_mode == "acoustic") {
    c.doa_mode = DoaMode::Acoustic;
  } else if (doa_mode == "perturbed") {
    c.doa_mode = DoaMode::Perturbed;
  } else if (doa_mode == "bypass") {
    c.doa_mode = DoaMode::Bypass;
  } else {
    throw ConfigError("doa_mode: expected 'acoustic', 'perturbed' or 'bypass'");
  }
  c.doa_noise_deg = j.value("doa_noise_deg", c.doa_noise_deg);
  c.snr_db = j.value("snr_db", c.snr_db);
  c.sample_rate = j.value("sample_rate", c.sample_rate);
  c.frame_length = j.value("frame_length", c.frame_length);
  c.speed_of_sound = j.value("speed_of_sound", c.speed_of_sound);
  c.sync_tolerance = j.value("sync_tolerance", c.sync_tolerance);
  c.seed = j.value("seed", c.seed);

  if (j.contains("tracker")) {
    const json& t = j.at("tracker");
    c.tracker.sigma_r_sq = t.value("sigma_r_sq", c.tracker.sigma_r_sq);
    c.tracker.sigma_q_sq = t.value("sigma_q_sq", c.tracker.sigma_q_sq);
    c.tracker.power_gate = t.value("power_gate", c.tracker.power_gate);
    c.tracker.initial_velocity_var = t.value("initial_velocity_var", c.tracker.initial_velocity_var);
  }

  PoseNoiseModel default_noise;
  if (j.contains("pose_noise")) {
    const json& n = j.at("pose_noise");
    default_noise.sigma_pos = n.value("sigma_pos", default_noise.sigma_pos);
    default_noise.sigma_yaw_deg = n.value("sigma_yaw_deg", default_noise.sigma_yaw_deg);
  }

  const json& src = j.at("source");
  c.source = trajectory_from_json(src, "source", src.is_object() ? src.value("max_speed", kMaxRobotSpeed) : kMaxRobotSpeed,
                                  /*ground=*/false);

  const json& robots = j.at("robots");
  for (std::size_t k = 0; k < robots.size(); ++k) {
    const json& r = robots[k];
    const std::string name = r.value("name", "robot" + std::to_string(k + 1));
    MicArrayGeometry geometry = detail::geometry_from_json(r.value("array", json::object()));
    RobotConfig rc{name, trajectory_from_json(r, "robots[" + std::to_string(k) + "]",
                                              kMaxRobotSpeed, /*ground=*/true),
                   geometry, default_noise};
    c.robots.push_back(std::move(rc));
  }

  if (j.contains("duration")) {
    c.duration = j.at("duration").get<double>();
  } else {
    double end = INFINITY;
    for (const RobotConfig& r : c.robots) {
      if (!r.trajectory.stationary()) {
        end = std::min(end, r.trajectory.end());
      }
    }
    c.duration = std::isfinite(end) ? end : 0.0;
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

TrialConfig parse_checked(const json& j) {
  try {
    return trial_from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("trial config: ") + e.what());
  }
}

}  // namespace

TrialConfig load_trial_config(const std::string& path) {
  try {
    return parse_checked(detail::parse_json_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

TrialConfig trial_config_from_text(const std::string& text) {
  return parse_checked(detail::parse_json_text(text, "<trial config>"));
}

void write_truth_csv(const std::string& path, const std::vector<GroundTruthSample>& truth) {
  using csv::format;
  std::ostringstream s;
  s << "t,sx,sy,sz";
  const std::size_t n = truth.empty() ? 0 : truth.front().robots.size();
  for (std::size_t r = 1; r <= n; ++r) {
    s << ",r" << r << "x,r" << r << "y,r" << r << "z";
  }
  s << '\n';
  for (const GroundTruthSample& g : truth) {
    s << format(g.t) << ',' << format(g.source.x()) << ',' << format(g.source.y()) << ','
      << format(g.source.z());
    for (const Vec3& p : g.robots) {
      s << ',' << format(p.x()) << ',' << format(p.y()) << ',' << format(p.z());
    }
    s << '\n';
  }
  csv::write_file(path, s.str());
}

}  // namespace scenario
}  // namespace csm
