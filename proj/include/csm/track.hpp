#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

#include "csm/doa.hpp"
#include "csm/geom.hpp"

namespace csm {

struct TrackerConfig {
  static constexpr double kDefaultSigmaRSq = 0.01;
  static constexpr double kDefaultSigmaQSq = 0.05;
  // 95th percentile of pure-noise SRP scores (Pioneer2-DX, 16 kHz, 1024
  // samples), from doa::noise_power_percentile with seed 1 over 2000 frames.
  static constexpr double kDefaultPowerGate = 1.1324;

  double sigma_r_sq = kDefaultSigmaRSq;      // observation noise variance per axis
  double sigma_q_sq = kDefaultSigmaQSq;      // white-acceleration process noise, 1/s^2
  double power_gate = kDefaultPowerGate;     // minimum SRP power accepted as an observation
  double initial_velocity_var = 1.0;         // (1/s)^2

  void validate() const;
};

using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Constant-velocity state in R^3; `direction` is projected to S^2 on read.
struct TrackerState {
  Vec3 direction = Vec3::UnitX();
  Vec3 velocity = Vec3::Zero();
  Matrix6 covariance = Matrix6::Identity();
  double last_update = 0.0;

  UnitVec3 unit_direction() const { return UnitVec3::normalized(direction); }
};

/// Tracked loudest-source direction (the per-robot DoA stream).
struct DirectionOfArrival {
  double t = 0.0;
  UnitVec3 direction;
  double power = 0.0;
};

namespace track {

TrackerState initialize(const PotentialSource& obs, const TrackerConfig& config);

/// Constant-velocity prediction. dt = 0 is the identity; throws on dt < 0.
TrackerState predict(const TrackerState& state, double dt, const TrackerConfig& config);

/// Kalman update with R = sigma_r_sq * I. Observations below the power gate
/// leave the state unchanged.
TrackerState update(const TrackerState& state, const PotentialSource& obs,
                    const TrackerConfig& config);

/// Position block of the Kalman gain for the given prior (diagnostics).
Eigen::Matrix3d position_gain(const TrackerState& state, const TrackerConfig& config);

/// Single-track smoother over a time-ordered observation stream.
class DoaTracker {
 public:
  explicit DoaTracker(TrackerConfig config = {});

  /// Returns nothing until the first observation passing the gate.
  std::optional<DirectionOfArrival> push(const PotentialSource& obs);
  bool initialized() const { return state_.has_value(); }
  const std::optional<TrackerState>& state() const { return state_; }

 private:
  TrackerConfig config_;
  std::optional<TrackerState> state_;
};

/// Throws std::invalid_argument when timestamps decrease.
std::vector<DirectionOfArrival> track_stream(std::span<const PotentialSource> observations,
                                             const TrackerConfig& config);

}  // namespace track
}  // namespace csm
