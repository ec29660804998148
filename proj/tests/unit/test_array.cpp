#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csm/array.hpp"
#include "csm/error.hpp"

using namespace csm;

namespace {

bool has_mic(const MicArrayGeometry& g, const Vec3& p) {
  for (const Vec3& m : g.positions()) {
    if ((m - p).norm() < 1e-12) return true;
  }
  return false;
}

}  // namespace

TEST(BuildArray, PioneerInnerCorners) {
  const auto g = MicArrayGeometry::from_spacings(ArraySpacings::pioneer2dx());
  ASSERT_EQ(g.size(), 16);
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      EXPECT_TRUE(has_mic(g, Vec3(sx * 0.0955, sy * 0.1225, 0.025)));
      EXPECT_TRUE(has_mic(g, Vec3(sx * 0.166, sy * 0.180, 0.040)));
    }
  }
  EXPECT_DOUBLE_EQ(g.mount_height(), 0.48);
}

TEST(BuildArray, TurtleBotOuterCorners) {
  const auto g = MicArrayGeometry::from_spacings(ArraySpacings::turtlebot2());
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      EXPECT_TRUE(has_mic(g, Vec3(sx * 0.155, sy * 0.142, 0.039)));
      EXPECT_TRUE(has_mic(g, Vec3(sx * 0.0925, sy * 0.0965, 0.026)));
    }
  }
}

TEST(BuildArray, EdgeMidpoints) {
  const auto g = MicArrayGeometry::from_spacings(ArraySpacings::pioneer2dx());
  EXPECT_TRUE(has_mic(g, Vec3(0.166, 0.0, 0.040)));
  EXPECT_TRUE(has_mic(g, Vec3(0.0, -0.1225, 0.025)));
}

TEST(BuildArray, InvalidSpacingsRejected) {
  ArraySpacings s = ArraySpacings::pioneer2dx();
  s.dx1 = s.dx2;
  EXPECT_THROW(MicArrayGeometry::from_spacings(s), std::invalid_argument);
  s = ArraySpacings::pioneer2dx();
  s.dz1 = -0.01;
  EXPECT_THROW(MicArrayGeometry::from_spacings(s), std::invalid_argument);
  s = ArraySpacings::pioneer2dx();
  s.dy2 = NAN;
  EXPECT_THROW(MicArrayGeometry::from_spacings(s), std::invalid_argument);
  // Outer diagonal above 0.5 m violates the aperture bound.
  s = {0.3, 0.45, 0.3, 0.45, 0.02, 0.04};
  EXPECT_THROW(MicArrayGeometry::from_spacings(s), std::invalid_argument);
}

TEST(BuildArray, ExplicitPositionsValidated) {
  auto pos = MicArrayGeometry::from_spacings(ArraySpacings::pioneer2dx()).positions();
  EXPECT_NO_THROW(MicArrayGeometry::from_positions(pos));
  auto shifted = pos;
  for (Vec3& p : shifted) p.x() += 0.01;
  EXPECT_THROW(MicArrayGeometry::from_positions(shifted), std::invalid_argument);
  pos.pop_back();
  EXPECT_THROW(MicArrayGeometry::from_positions(pos), std::invalid_argument);
}

TEST(BuildArray, SymmetricUnderHalfTurn) {
  for (const auto& s : {ArraySpacings::pioneer2dx(), ArraySpacings::turtlebot2()}) {
    const auto g = MicArrayGeometry::from_spacings(s);
    for (const Vec3& m : g.positions()) {
      EXPECT_TRUE(has_mic(g, Vec3(-m.x(), -m.y(), m.z())));
    }
  }
}

TEST(BuildArray, GeometryFromJson) {
  const auto a = geometry_from_json_text(R"({"preset": "turtlebot2", "mount_height": 0.5})");
  EXPECT_DOUBLE_EQ(a.mount_height(), 0.5);
  EXPECT_TRUE(has_mic(a, Vec3(0.155, 0.142, 0.039)));
  const auto b = geometry_from_json_text(
      R"({"spacings": {"dx1": 0.191, "dx2": 0.332, "dy1": 0.245, "dy2": 0.360, "dz1": 0.025, "dz2": 0.040}})");
  EXPECT_TRUE(has_mic(b, Vec3(0.0955, 0.1225, 0.025)));
  EXPECT_THROW(geometry_from_json_text(R"({"mic_positions": [[0, 0, 0]]})"), ConfigError);
  EXPECT_THROW(geometry_from_json_text("{not json"), ConfigError);
  EXPECT_THROW(load_geometry("/nonexistent/geometry.json"), IoError);
}

TEST(MicPairs, CountAndOrder) {
  const auto pairs = mic_pairs();
  ASSERT_EQ(pairs.size(), 120u);
  EXPECT_EQ(pairs.front(), (MicPair{0, 1}));
  EXPECT_EQ(pairs.back(), (MicPair{14, 15}));
}

TEST(FarField, BroadsideZeroForEqualHeights) {
  const auto g = MicArrayGeometry::from_spacings(ArraySpacings::pioneer2dx());
  const UnitVec3 up = UnitVec3::normalized(Vec3::UnitZ());
  // Mics 0 and 4 share the inner ring height.
  EXPECT_NEAR(pair_tdoa(g, {0, 4}, up), 0.0, 1e-18);
}

TEST(FarField, AxialPairDelay) {
  // Outer-ring edge midpoints at x = +/-0.166 are 0.332 m apart on x.
  const auto g = MicArrayGeometry::from_spacings(ArraySpacings::pioneer2dx());
  const UnitVec3 x = UnitVec3::normalized(Vec3::UnitX());
  EXPECT_NEAR(pair_tdoa(g, {8, 12}, x, 343.0), 0.332 / 343.0, 1e-15);
  EXPECT_NEAR(0.332 / 343.0, 9.679e-4, 1e-7);
}

TEST(FarField, AntisymmetricBoundedAndLinear) {
  const auto g = MicArrayGeometry::from_spacings(ArraySpacings::turtlebot2());
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n;
  for (int k = 0; k < 200; ++k) {
    const Vec3 a(n(rng), n(rng), n(rng)), b(n(rng), n(rng), n(rng));
    const double alpha = n(rng), beta = n(rng);
    const UnitVec3 dir = UnitVec3::normalized(alpha * a + beta * b);
    const PairDelays d = far_field_tdoa(g, dir);
    ASSERT_EQ(d.pairs.size(), 120u);
    for (std::size_t p = 0; p < d.pairs.size(); ++p) {
      const auto [i, j] = d.pairs[p];
      EXPECT_NEAR(d.tau[p], -pair_tdoa(g, {j, i}, dir), 1e-18);
      EXPECT_LE(std::abs(d.tau[p]), g.max_spacing() / kSpeedOfSound + 1e-15);
      const Vec3 diff = g.position(i) - g.position(j);
      const double ref = (alpha * diff.dot(a) + beta * diff.dot(b)) /
                         (alpha * a + beta * b).norm() / kSpeedOfSound;
      EXPECT_NEAR(d.tau[p], ref, 1e-15);
    }
  }
}
