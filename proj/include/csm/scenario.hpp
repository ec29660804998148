#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "csm/array.hpp"
#include "csm/geom.hpp"
#include "csm/mapper.hpp"
#include "csm/synth.hpp"
#include "csm/track.hpp"

namespace csm {

inline constexpr double kMaxRobotSpeed = 2.0;    // m/s
inline constexpr double kStaticSourceHeight = 1.12;  // m

struct Waypoint {
  double t = 0.0;
  Pose pose;
};

/// Time-ordered waypoints; a single waypoint is a stationary trajectory.
class Trajectory {
 public:
  /// Throws std::invalid_argument for empty/unordered/non-finite waypoints or
  /// for a segment faster than `max_speed`.
  explicit Trajectory(std::vector<Waypoint> waypoints, double max_speed = kMaxRobotSpeed);

  /// Linear position, slerp orientation; exact at waypoints. Throws
  /// std::out_of_range outside [start, end] unless stationary.
  Pose pose_at(double t) const;

  const std::vector<Waypoint>& waypoints() const { return waypoints_; }
  double start() const { return waypoints_.front().t; }
  double end() const { return waypoints_.back().t; }
  bool stationary() const { return waypoints_.size() == 1; }
  double peak_speed() const;

 private:
  std::vector<Waypoint> waypoints_;
};

/// Gaussian horizontal position and yaw noise standing in for SLAM error.
struct PoseNoiseModel {
  double sigma_pos = 0.05;     // m, per horizontal axis
  double sigma_yaw_deg = 1.0;  // degrees
  std::uint64_t rng_seed = 0;

  void validate() const;
};

namespace scenario {

/// Deterministic in (model.rng_seed, t).
Pose perturb_pose(const Pose& pose, const PoseNoiseModel& model, double t);

/// Random rotation of `dir` by an angle whose RMS is `rms_deg`, about a
/// uniformly random axis perpendicular to `dir`.
UnitVec3 perturb_direction(const UnitVec3& dir, double rms_deg, std::mt19937_64& rng);

/// Mixes a seed with stream indices into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace scenario

enum class TrialMode { Static, Moving };

/// How each robot's DoA stream is produced.
enum class DoaMode {
  Acoustic,   // synthesize, GCC-PHAT/SRP search, track
  Perturbed,  // analytic DoA + angular noise, track
  Bypass,     // analytic DoA, no tracking, no pose noise
};

struct RobotConfig {
  std::string name;
  Trajectory trajectory;  // robot base on the ground plane
  MicArrayGeometry geometry = MicArrayGeometry::from_spacings(ArraySpacings::pioneer2dx());
  PoseNoiseModel pose_noise;

  /// Array origin: base pose raised by the mount height.
  Pose array_pose(double t) const;
};

struct TrialConfig {
  TrialMode mode = TrialMode::Static;
  Trajectory source{{Waypoint{0.0, Pose{Vec3(0.0, 0.0, kStaticSourceHeight), {}}}}};
  std::vector<RobotConfig> robots;
  double record_rate = 10.0;  // Hz
  double duration = 0.0;      // s
  DoaMode doa_mode = DoaMode::Acoustic;
  double doa_noise_deg = 2.0;  // RMS, Perturbed mode
  double snr_db = 20.0;
  double sample_rate = kDefaultSampleRate;
  std::size_t frame_length = kDefaultFrameLength;
  double speed_of_sound = kSpeedOfSound;
  TrackerConfig tracker;
  double sync_tolerance = mapper::kDefaultSyncTolerance;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t tick_count() const;
  double tick_time(std::size_t k) const { return static_cast<double>(k) / record_rate; }
};

struct GroundTruthSample {
  double t = 0.0;
  Vec3 source = Vec3::Zero();
  std::vector<Vec3> robots;  // true array positions
};

struct TrialOutput {
  std::vector<std::vector<RobotObservation>> streams;  // one per robot
  std::vector<GroundTruthSample> truth;
};

namespace scenario {

/// Drives every robot pipeline over the tick grid. Deterministic given seeds.
TrialOutput run_trial(const TrialConfig& config);

/// Same configuration with the bypass switch applied.
TrialConfig with_bypass(TrialConfig config);

/// Parses the JSON trial schema documented in the README. Throws csm::ConfigError.
TrialConfig load_trial_config(const std::string& path);
TrialConfig trial_config_from_text(const std::string& text);

// t,sx,sy,sz,r1x,r1y,r1z,r2x,...
void write_truth_csv(const std::string& path, const std::vector<GroundTruthSample>& truth);

}  // namespace scenario
}  // namespace csm
