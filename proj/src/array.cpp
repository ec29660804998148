#include "csm/array.hpp"

#include <cmath>
#include <stdexcept>

#include "csm/error.hpp"
#include "json_config.hpp"

namespace csm {

ArraySpacings ArraySpacings::pioneer2dx() {
  return {0.191, 0.332, 0.245, 0.360, 0.025, 0.040};
}

ArraySpacings ArraySpacings::turtlebot2() {
  return {0.185, 0.310, 0.193, 0.284, 0.026, 0.039};
}

void ArraySpacings::validate() const {
  const double all[] = {dx1, dx2, dy1, dy2, dz1, dz2};
  for (double v : all) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw std::invalid_argument("ArraySpacings: spacings must be finite and positive");
    }
  }
  if (!(dx1 < dx2 && dy1 < dy2 && dz1 < dz2)) {
    throw std::invalid_argument("ArraySpacings: inner ring must be strictly smaller than outer ring");
  }
}

std::vector<MicPair> mic_pairs(int mic_count) {
  std::vector<MicPair> pairs;
  pairs.reserve(static_cast<std::size_t>(mic_count * (mic_count - 1) / 2));
  for (int i = 0; i < mic_count; ++i) {
    for (int j = i + 1; j < mic_count; ++j) {
      pairs.push_back({i, j});
    }
  }
  return pairs;
}

namespace {

// Corners and edge midpoints of a centred rectangle, counter-clockwise from +x.
void append_ring(std::vector<Vec3>& out, double dx, double dy, double z) {
  const double hx = 0.5 * dx;
  const double hy = 0.5 * dy;
  const double ring[8][2] = {{hx, 0.0}, {hx, hy},   {0.0, hy},  {-hx, hy},
                             {-hx, 0.0}, {-hx, -hy}, {0.0, -hy}, {hx, -hy}};
  for (const auto& p : ring) {
    out.emplace_back(p[0], p[1], z);
  }
}

}  // namespace

MicArrayGeometry::MicArrayGeometry(std::vector<Vec3> positions, double mount_height)
    : positions_(std::move(positions)), mount_height_(mount_height) {
  if (positions_.size() != static_cast<std::size_t>(kMicCount)) {
    throw std::invalid_argument("MicArrayGeometry: expected exactly 16 microphones, got " +
                                std::to_string(positions_.size()));
  }
  if (!std::isfinite(mount_height_) || mount_height_ < 0.0) {
    throw std::invalid_argument("MicArrayGeometry: mount height must be finite and >= 0");
  }
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : positions_) {
    if (!p.allFinite()) {
      throw std::invalid_argument("MicArrayGeometry: non-finite microphone position");
    }
    centroid += p;
  }
  centroid /= static_cast<double>(positions_.size());
  if (std::hypot(centroid.x(), centroid.y()) > 1e-6) {
    throw std::invalid_argument("MicArrayGeometry: array must be horizontally centred on the body origin");
  }
  if (max_spacing() > kMaxSpacing) {
    throw std::invalid_argument("MicArrayGeometry: pairwise spacing exceeds 0.5 m");
  }
}

MicArrayGeometry MicArrayGeometry::from_spacings(const ArraySpacings& spacings,
                                                 double mount_height) {
  spacings.validate();
  std::vector<Vec3> positions;
  positions.reserve(kMicCount);
  append_ring(positions, spacings.dx1, spacings.dy1, spacings.dz1);
  append_ring(positions, spacings.dx2, spacings.dy2, spacings.dz2);
  return MicArrayGeometry(std::move(positions), mount_height);
}

MicArrayGeometry MicArrayGeometry::from_positions(std::span<const Vec3> positions,
                                                  double mount_height) {
  return MicArrayGeometry(std::vector<Vec3>(positions.begin(), positions.end()), mount_height);
}

double MicArrayGeometry::max_spacing() const {
  double best = 0.0;
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    for (std::size_t j = i + 1; j < positions_.size(); ++j) {
      best = std::max(best, (positions_[i] - positions_[j]).norm());
    }
  }
  return best;
}

double MicArrayGeometry::enclosing_radius() const {
  double r = 0.0;
  for (const Vec3& p : positions_) {
    r = std::max(r, p.norm());
  }
  return r;
}

double pair_tdoa(const MicArrayGeometry& geometry, const MicPair& pair,
                 const UnitVec3& direction, double speed_of_sound) {
  return (geometry.position(pair.i) - geometry.position(pair.j)).dot(direction.vec()) /
         speed_of_sound;
}

PairDelays far_field_tdoa(const MicArrayGeometry& geometry, const UnitVec3& direction,
                          double speed_of_sound) {
  if (!(speed_of_sound > 0.0)) {
    throw std::invalid_argument("far_field_tdoa: speed of sound must be positive");
  }
  PairDelays out;
  out.pairs = mic_pairs(geometry.size());
  out.tau.reserve(out.pairs.size());
  for (const MicPair& p : out.pairs) {
    out.tau.push_back(pair_tdoa(geometry, p, direction, speed_of_sound));
  }
  return out;
}

MicArrayGeometry load_geometry(const std::string& path) {
  return detail::geometry_from_json(detail::parse_json_file(path));
}

MicArrayGeometry geometry_from_json_text(const std::string& text) {
  return detail::geometry_from_json(detail::parse_json_text(text, "<geometry>"));
}

}  // namespace csm
