#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "csm/geom.hpp"

namespace csm {

/// One robot's tracked DoA with the pose it was observed from.
struct RobotObservation {
  double t = 0.0;
  Pose pose;          // array origin in the map frame
  UnitVec3 doa_body;  // tracked direction, body frame
  double power = 0.0;
};

struct SourceEstimate {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  double gap = 0.0;
  double theta_est = 0.0;  // degrees between the two map-frame DoAs
  bool degenerate = false;
  bool behind = false;
};

struct ObservationPair {
  double t = 0.0;  // mean of the two observation times
  RobotObservation first;
  RobotObservation second;
};

struct SyncResult {
  std::vector<ObservationPair> pairs;
  std::size_t dropped_first = 0;
  std::size_t dropped_second = 0;
};

namespace mapper {

inline constexpr double kDefaultSyncTolerance = 0.05;  // s
inline constexpr double kMinBaseline = 1e-6;           // m

/// Pairs mutually-nearest timestamps with |t1 - t2| <= tolerance. Ties go
/// to the earlier observation. Throws if a stream is not time-ordered.
SyncResult synchronize(std::span<const RobotObservation> stream1,
                       std::span<const RobotObservation> stream2,
                       double tolerance = kDefaultSyncTolerance);

/// Rotates both DoAs to the map frame and triangulates. Near-parallel rays
/// and coincident robots are flagged degenerate.
SourceEstimate map_source(const RobotObservation& obs1, const RobotObservation& obs2,
                          double eps = geom::kDefaultDegeneracyEps);

std::vector<SourceEstimate> map_stream(std::span<const ObservationPair> pairs,
                                       double eps = geom::kDefaultDegeneracyEps);

// t,px,py,pz,qw,qx,qy,qz,dx,dy,dz,power
void write_observations_csv(const std::string& path, std::span<const RobotObservation> obs);
std::vector<RobotObservation> read_observations_csv(const std::string& path);

// t,x,y,z,gap,theta,degenerate
void write_estimates_csv(const std::string& path, std::span<const SourceEstimate> estimates);
std::vector<SourceEstimate> read_estimates_csv(const std::string& path);

}  // namespace mapper
}  // namespace csm
