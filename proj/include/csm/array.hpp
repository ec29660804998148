#pragma once

#include <span>
#include <string>
#include <vector>

#include "csm/geom.hpp"

namespace csm {

inline constexpr int kMicCount = 16;
inline constexpr double kSpeedOfSound = 343.0;  // m/s at 20 C
inline constexpr double kMountHeight = 0.48;    // m above ground

/// Table of rectangle spacings describing a 16-mic array, in meters.
/// Inner ring: dx1 x dy1 at height dz1; outer ring: dx2 x dy2 at height dz2.
struct ArraySpacings {
  double dx1 = 0.0;
  double dx2 = 0.0;
  double dy1 = 0.0;
  double dy2 = 0.0;
  double dz1 = 0.0;
  double dz2 = 0.0;

  static ArraySpacings pioneer2dx();
  static ArraySpacings turtlebot2();

  /// Throws std::invalid_argument unless all positive and inner < outer.
  void validate() const;
};

struct MicPair {
  int i = 0;
  int j = 0;
  bool operator==(const MicPair&) const = default;
};

/// All unordered pairs (i < j) of `mic_count` microphones, row-major.
std::vector<MicPair> mic_pairs(int mic_count = kMicCount);

class MicArrayGeometry {
 public:
  static constexpr double kMaxSpacing = 0.5;

  /// Two concentric 8-mic rectangles (corners + edge midpoints).
  static MicArrayGeometry from_spacings(const ArraySpacings& spacings,
                                        double mount_height = kMountHeight);
  /// Explicit body-frame coordinates. Enforces the 16-mic invariants.
  static MicArrayGeometry from_positions(std::span<const Vec3> positions,
                                         double mount_height = kMountHeight);

  const std::vector<Vec3>& positions() const { return positions_; }
  const Vec3& position(int mic) const { return positions_.at(static_cast<std::size_t>(mic)); }
  int size() const { return static_cast<int>(positions_.size()); }
  double mount_height() const { return mount_height_; }
  double max_spacing() const;
  /// Radius of the smallest origin-centred sphere containing every mic.
  double enclosing_radius() const;

 private:
  MicArrayGeometry(std::vector<Vec3> positions, double mount_height);
  std::vector<Vec3> positions_;
  double mount_height_ = kMountHeight;
};

struct PairDelays {
  std::vector<MicPair> pairs;
  std::vector<double> tau;  // seconds; positive when mic j lags mic i
};

/// Plane-wave delay per pair: tau_ij = (m_i - m_j) . direction / c.
double pair_tdoa(const MicArrayGeometry& geometry, const MicPair& pair,
                 const UnitVec3& direction, double speed_of_sound = kSpeedOfSound);

PairDelays far_field_tdoa(const MicArrayGeometry& geometry, const UnitVec3& direction,
                          double speed_of_sound = kSpeedOfSound);

/// Reads {"mic_positions": [[x, y, z], ...], "mount_height": h} (meters)
/// or {"spacings": {"dx1": ..}} / {"preset": "pioneer2dx" | "turtlebot2"}.
MicArrayGeometry load_geometry(const std::string& path);
MicArrayGeometry geometry_from_json_text(const std::string& text);

}  // namespace csm
