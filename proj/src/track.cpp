#include "csm/track.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace csm {

void TrackerConfig::validate() const {
  if (!(sigma_r_sq > 0.0) || !(sigma_q_sq > 0.0) || !(initial_velocity_var > 0.0)) {
    throw std::invalid_argument("TrackerConfig: variances must be positive");
  }
  if (!std::isfinite(power_gate)) {
    throw std::invalid_argument("TrackerConfig: power gate must be finite");
  }
}

namespace track {

TrackerState initialize(const PotentialSource& obs, const TrackerConfig& config) {
  config.validate();
  TrackerState s;
  s.direction = obs.direction.vec();
  s.velocity = Vec3::Zero();
  s.covariance = Matrix6::Zero();
  s.covariance.topLeftCorner<3, 3>() = config.sigma_r_sq * Eigen::Matrix3d::Identity();
  s.covariance.bottomRightCorner<3, 3>() =
      config.initial_velocity_var * Eigen::Matrix3d::Identity();
  s.last_update = obs.timestamp;
  return s;
}

TrackerState predict(const TrackerState& state, double dt, const TrackerConfig& config) {
  if (!(dt >= 0.0)) {
    throw std::invalid_argument("track::predict: negative time step");
  }
  if (dt == 0.0) {
    return state;
  }
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  Matrix6 F = Matrix6::Identity();
  F.topRightCorner<3, 3>() = dt * I;
  Matrix6 Q;
  Q << dt * dt * dt / 3.0 * I, dt * dt / 2.0 * I, dt * dt / 2.0 * I, dt * I;
  Q *= config.sigma_q_sq;

  TrackerState out = state;
  out.direction = state.direction + dt * state.velocity;
  out.covariance = F * state.covariance * F.transpose() + Q;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  out.last_update = state.last_update + dt;
  return out;
}

Eigen::Matrix3d position_gain(const TrackerState& state, const TrackerConfig& config) {
  const Eigen::Matrix3d S =
      state.covariance.topLeftCorner<3, 3>() + config.sigma_r_sq * Eigen::Matrix3d::Identity();
  return state.covariance.topLeftCorner<3, 3>() * S.inverse();
}

TrackerState update(const TrackerState& state, const PotentialSource& obs,
                    const TrackerConfig& config) {
  if (obs.power < config.power_gate) {
    return state;
  }
  const Eigen::Matrix3d R = config.sigma_r_sq * Eigen::Matrix3d::Identity();
  const Matrix6& P = state.covariance;
  const Eigen::Matrix3d S = P.topLeftCorner<3, 3>() + R;
  // K = P H^T S^-1 with H = [I 0].
  const Eigen::Matrix<double, 6, 3> K = P.leftCols<3>() * S.inverse();
  const Vec3 innovation = obs.direction.vec() - state.direction;

  TrackerState out = state;
  Eigen::Matrix<double, 6, 1> x;
  x << state.direction, state.velocity;
  x += K * innovation;

  Eigen::Matrix<double, 6, 6> IKH = Matrix6::Identity();
  IKH.leftCols<3>() -= K;
  out.covariance = IKH * P * IKH.transpose() + K * R * K.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());

  const double n = x.head<3>().norm();
  out.direction = n > 0.0 ? Vec3(x.head<3>() / n) : state.direction;
  out.velocity = x.tail<3>();
  return out;
}

DoaTracker::DoaTracker(TrackerConfig config) : config_(config) { config_.validate(); }

std::optional<DirectionOfArrival> DoaTracker::push(const PotentialSource& obs) {
  if (!state_) {
    if (obs.power < config_.power_gate) {
      return std::nullopt;
    }
    state_ = initialize(obs, config_);
    return DirectionOfArrival{obs.timestamp, state_->unit_direction(), obs.power};
  }
  const double dt = obs.timestamp - state_->last_update;
  if (dt < 0.0) {
    throw std::invalid_argument("DoaTracker: observation timestamps must be nondecreasing");
  }
  state_ = update(predict(*state_, dt, config_), obs, config_);
  state_->last_update = obs.timestamp;
  return DirectionOfArrival{obs.timestamp, state_->unit_direction(), obs.power};
}

std::vector<DirectionOfArrival> track_stream(std::span<const PotentialSource> observations,
                                             const TrackerConfig& config) {
  DoaTracker tracker(config);
  std::vector<DirectionOfArrival> out;
  out.reserve(observations.size());
  for (const PotentialSource& obs : observations) {
    if (auto doa = tracker.push(obs)) {
      out.push_back(*doa);
    }
  }
  return out;
}

}  // namespace track
}  // namespace csm
