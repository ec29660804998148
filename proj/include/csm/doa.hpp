#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csm/array.hpp"
#include "csm/geom.hpp"
#include "csm/synth.hpp"

namespace csm {

/// Circular GCC-PHAT correlation of one mic pair over integer lags [-L, L].
struct GccSpectrum {
  MicPair pair;
  int max_lag = 0;
  std::vector<double> values;  // values[lag + max_lag]

  double at(int lag) const;
  /// Linear interpolation at a fractional lag; zero outside [-L, L].
  double interpolate(double lag) const;
  int argmax_lag() const;
};

/// Directions of an icosahedral sphere tessellation at two subdivision levels.
class SphericalGrid {
 public:
  /// Levels 2 and 4 give 162 coarse and 2562 fine directions.
  static SphericalGrid icosahedral(int coarse_level = 2, int fine_level = 4);

  const std::vector<UnitVec3>& coarse() const { return coarse_; }
  const std::vector<UnitVec3>& fine() const { return fine_; }
  /// Fine indices whose nearest coarse direction is `coarse_index`.
  const std::vector<int>& cell(int coarse_index) const;
  /// Coarse indices sharing a mesh edge with `coarse_index`.
  const std::vector<int>& neighbors(int coarse_index) const;
  int coarse_of(int fine_index) const;

 private:
  std::vector<UnitVec3> coarse_;
  std::vector<UnitVec3> fine_;
  std::vector<std::vector<int>> cells_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<int> owner_;
};

struct PotentialSource {
  UnitVec3 direction;  // body frame
  double power = 0.0;
  double timestamp = 0.0;
};

namespace doa {

/// Sign convention: a positive lag means chan_j lags chan_i. Cross-spectrum
/// bins with magnitude below 1e-12 are zero-weighted.
GccSpectrum gcc_phat(std::span<const double> chan_i, std::span<const double> chan_j,
                     int max_lag);

/// GCC-PHAT for every pair (i < j) of the frame's channels.
std::vector<GccSpectrum> gcc_phat_all(const MultichannelFrame& frame, int max_lag);

/// Smallest lag window covering every far-field pair delay, plus one sample.
int required_max_lag(const MicArrayGeometry& geometry, double sample_rate,
                     double speed_of_sound = kSpeedOfSound);

/// Sum over pairs of GCC values read at the plane-wave lag for `direction`.
double srp_score(std::span<const GccSpectrum> gccs, const UnitVec3& direction,
                 const MicArrayGeometry& geometry, double sample_rate,
                 double speed_of_sound = kSpeedOfSound);

/// SRP-PHAT search with the per-direction lag tables precomputed.
class SrpSearch {
 public:
  SrpSearch(MicArrayGeometry geometry, SphericalGrid grid,
            double sample_rate = kDefaultSampleRate, double speed_of_sound = kSpeedOfSound);

  const MicArrayGeometry& geometry() const { return geometry_; }
  const SphericalGrid& grid() const { return grid_; }
  int max_lag() const { return max_lag_; }

  std::vector<GccSpectrum> correlate(const MultichannelFrame& frame) const;

  /// Ranks the coarse directions, then scans the fine directions of the best
  /// kCoarseCandidates cells and their neighbouring cells.
  PotentialSource estimate(const MultichannelFrame& frame) const;
  PotentialSource estimate(std::span<const GccSpectrum> gccs, double timestamp) const;
  /// Full scan of the fine grid.
  PotentialSource exhaustive(std::span<const GccSpectrum> gccs, double timestamp) const;

  static constexpr int kCoarseCandidates = 3;

  double coarse_score(std::span<const GccSpectrum> gccs, int index) const;
  double fine_score(std::span<const GccSpectrum> gccs, int index) const;

 private:
  struct Tap {
    int lo;
    double weight;
  };
  using LagTable = std::vector<Tap>;  // [direction * pairs + pair]

  LagTable build_table(const std::vector<UnitVec3>& dirs) const;
  double score(std::span<const GccSpectrum> gccs, const LagTable& table, int index) const;

  MicArrayGeometry geometry_;
  SphericalGrid grid_;
  double sample_rate_;
  double speed_of_sound_;
  int max_lag_;
  std::vector<MicPair> pairs_;
  LagTable coarse_table_;
  LagTable fine_table_;
};

/// Frame of independent white Gaussian noise on every channel.
MultichannelFrame noise_frame(int channels, std::size_t length, double sample_rate,
                              std::uint64_t seed);

/// `percentile` (0-100) of hierarchical-search SRP power over `frames`
/// pure-noise frames. Used to calibrate the tracker power gate.
double noise_power_percentile(const SrpSearch& search, std::size_t frames, double percentile,
                              std::uint64_t seed, std::size_t frame_length = kDefaultFrameLength);

PotentialSource estimate_doa(const MultichannelFrame& frame, const MicArrayGeometry& geometry,
                             const SphericalGrid& grid);

}  // namespace doa
}  // namespace csm
