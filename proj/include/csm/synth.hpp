#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "csm/array.hpp"
#include "csm/geom.hpp"

namespace csm {

inline constexpr double kDefaultSampleRate = 16000.0;
inline constexpr std::size_t kDefaultFrameLength = 1024;
inline constexpr std::size_t kDefaultHop = 512;

struct SceneFrame {
  Vec3 source_position = Vec3::Zero();  // map frame
  Pose array_pose;                      // array origin in the map frame
  double sample_rate = kDefaultSampleRate;
  std::size_t frame_length = kDefaultFrameLength;
  double snr_db = std::numeric_limits<double>::infinity();  // +inf disables sensor noise
  std::uint64_t rng_seed = 0;
  double timestamp = 0.0;
  double speed_of_sound = kSpeedOfSound;

  void validate() const;
};

struct MultichannelFrame {
  std::vector<std::vector<double>> channels;
  double timestamp = 0.0;
  double sample_rate = kDefaultSampleRate;

  std::size_t num_channels() const { return channels.size(); }
  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
};

namespace synth {

/// Taps of the windowed-sinc fractional delay filter (order 31).
inline constexpr int kDelayTaps = 32;

/// Delays `signal` by `delay` seconds (negative advances). Samples outside
/// the input are taken as zero. Integer-sample delays are an exact shift.
/// Throws std::invalid_argument when |delay| is not shorter than the signal.
std::vector<double> fractional_delay(std::span<const double> signal, double delay,
                                     double sample_rate);

/// Seeded white Gaussian noise band-limited to 0.8 x Nyquist, unit variance.
std::vector<double> source_noise(std::size_t length, std::uint64_t seed);

/// Spherical-wave propagation delay (s) and range (m) from the source to each mic.
struct Propagation {
  std::vector<double> delay;
  std::vector<double> range;
};
Propagation propagation(const SceneFrame& scene, const MicArrayGeometry& geometry);

/// Sixteen channels of the band-limited white-noise source as heard at each
/// mic (exact delay, 1/r spreading) plus independent white sensor noise at
/// scene.snr_db. Bit-identical for identical inputs.
MultichannelFrame synthesize_frame(const SceneFrame& scene, const MicArrayGeometry& geometry);

}  // namespace synth
}  // namespace csm
