#include "csm/doa.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <utility>

namespace csm {

double GccSpectrum::at(int lag) const {
  if (lag < -max_lag || lag > max_lag) {
    return 0.0;
  }
  return values[static_cast<std::size_t>(lag + max_lag)];
}

double GccSpectrum::interpolate(double lag) const {
  const double lo = std::floor(lag);
  const double w = lag - lo;
  const int i = static_cast<int>(lo);
  return (1.0 - w) * at(i) + (w > 0.0 ? w * at(i + 1) : 0.0);
}

int GccSpectrum::argmax_lag() const {
  const auto it = std::max_element(values.begin(), values.end());
  return static_cast<int>(it - values.begin()) - max_lag;
}

namespace {

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

Mesh icosahedron() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  Mesh m;
  const double raw[12][3] = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                             {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                             {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (const auto& v : raw) {
    m.vertices.push_back(Vec3(v[0], v[1], v[2]).normalized());
  }
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return m;
}

// Midpoint subdivision; existing vertex indices are preserved.
void subdivide(Mesh& m) {
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    if (auto it = midpoint.find(key); it != midpoint.end()) {
      return it->second;
    }
    m.vertices.push_back((m.vertices[static_cast<std::size_t>(a)] +
                          m.vertices[static_cast<std::size_t>(b)])
                             .normalized());
    const int idx = static_cast<int>(m.vertices.size()) - 1;
    midpoint.emplace(key, idx);
    return idx;
  };
  std::vector<std::array<int, 3>> faces;
  faces.reserve(m.faces.size() * 4);
  for (const auto& f : m.faces) {
    const int ab = mid(f[0], f[1]);
    const int bc = mid(f[1], f[2]);
    const int ca = mid(f[2], f[0]);
    faces.push_back({f[0], ab, ca});
    faces.push_back({f[1], bc, ab});
    faces.push_back({f[2], ca, bc});
    faces.push_back({ab, bc, ca});
  }
  m.faces = std::move(faces);
}

}  // namespace

SphericalGrid SphericalGrid::icosahedral(int coarse_level, int fine_level) {
  if (coarse_level < 0 || fine_level < coarse_level) {
    throw std::invalid_argument("SphericalGrid: need 0 <= coarse_level <= fine_level");
  }
  Mesh mesh = icosahedron();
  for (int level = 0; level < coarse_level; ++level) {
    subdivide(mesh);
  }
  SphericalGrid g;
  const std::size_t n_coarse = mesh.vertices.size();
  g.neighbors_.assign(n_coarse, {});
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      auto& a = g.neighbors_[static_cast<std::size_t>(f[e])];
      const int b = f[(e + 1) % 3];
      if (std::find(a.begin(), a.end(), b) == a.end()) {
        a.push_back(b);
        g.neighbors_[static_cast<std::size_t>(b)].push_back(f[e]);
      }
    }
  }
  for (auto& n : g.neighbors_) {
    std::sort(n.begin(), n.end());
  }
  for (int level = coarse_level; level < fine_level; ++level) {
    subdivide(mesh);
  }
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const UnitVec3 u = UnitVec3::normalized(mesh.vertices[i]);
    if (i < n_coarse) {
      g.coarse_.push_back(u);
    }
    g.fine_.push_back(u);
  }
  g.cells_.assign(n_coarse, {});
  g.owner_.resize(g.fine_.size());
  for (std::size_t f = 0; f < g.fine_.size(); ++f) {
    int best = 0;
    double best_dot = -2.0;
    for (std::size_t c = 0; c < n_coarse; ++c) {
      const double d = g.fine_[f].dot(g.coarse_[c]);
      if (d > best_dot + 1e-12) {
        best_dot = d;
        best = static_cast<int>(c);
      }
    }
    g.owner_[f] = best;
    g.cells_[static_cast<std::size_t>(best)].push_back(static_cast<int>(f));
  }
  return g;
}

const std::vector<int>& SphericalGrid::cell(int coarse_index) const {
  return cells_.at(static_cast<std::size_t>(coarse_index));
}

const std::vector<int>& SphericalGrid::neighbors(int coarse_index) const {
  return neighbors_.at(static_cast<std::size_t>(coarse_index));
}

int SphericalGrid::coarse_of(int fine_index) const {
  return owner_.at(static_cast<std::size_t>(fine_index));
}

namespace doa {
namespace {

// FFTW plans are created once per length; planning is not thread-safe,
// execution with new-array functions is.
struct FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

const FftPlans& plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, FftPlans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<double> real(n);
    std::vector<std::complex<double>> spec(n / 2 + 1);
    auto* c = reinterpret_cast<fftw_complex*>(spec.data());
    FftPlans p;
    p.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), c,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), c, real.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    it = cache.emplace(n, p).first;
  }
  return it->second;
}

std::vector<std::complex<double>> spectrum(std::span<const double> x) {
  const FftPlans& p = plans_for(x.size());
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> out(x.size() / 2 + 1);
  fftw_execute_dft_r2c(p.forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

GccSpectrum correlate_spectra(const std::vector<std::complex<double>>& xi,
                              const std::vector<std::complex<double>>& xj, std::size_t n,
                              int max_lag, MicPair pair) {
  std::vector<std::complex<double>> cross(xi.size());
  for (std::size_t k = 0; k < xi.size(); ++k) {
    const std::complex<double> c = std::conj(xi[k]) * xj[k];
    const double mag = std::abs(c);
    cross[k] = mag < 1e-12 ? std::complex<double>(0.0, 0.0) : c / mag;
  }
  std::vector<double> r(n);
  fftw_execute_dft_c2r(plans_for(n).inverse, reinterpret_cast<fftw_complex*>(cross.data()),
                       r.data());
  GccSpectrum g;
  g.pair = pair;
  g.max_lag = max_lag;
  g.values.resize(static_cast<std::size_t>(2 * max_lag + 1));
  const auto len = static_cast<std::ptrdiff_t>(n);
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    const std::ptrdiff_t idx = ((lag % len) + len) % len;
    g.values[static_cast<std::size_t>(lag + max_lag)] =
        r[static_cast<std::size_t>(idx)] / static_cast<double>(n);
  }
  return g;
}

void check_length(std::size_t n, int max_lag) {
  if (max_lag < 0 || n < 2 * static_cast<std::size_t>(max_lag) || n < 2) {
    throw std::invalid_argument("gcc_phat: frame shorter than twice the lag window");
  }
}

}  // namespace

GccSpectrum gcc_phat(std::span<const double> chan_i, std::span<const double> chan_j,
                     int max_lag) {
  if (chan_i.size() != chan_j.size()) {
    throw std::invalid_argument("gcc_phat: channels differ in length");
  }
  check_length(chan_i.size(), max_lag);
  return correlate_spectra(spectrum(chan_i), spectrum(chan_j), chan_i.size(), max_lag, {0, 1});
}

std::vector<GccSpectrum> gcc_phat_all(const MultichannelFrame& frame, int max_lag) {
  const std::size_t n = frame.length();
  check_length(n, max_lag);
  std::vector<std::vector<std::complex<double>>> spectra;
  spectra.reserve(frame.num_channels());
  for (const auto& c : frame.channels) {
    if (c.size() != n) {
      throw std::invalid_argument("gcc_phat_all: channels differ in length");
    }
    spectra.push_back(spectrum(c));
  }
  std::vector<GccSpectrum> out;
  for (const MicPair& p : mic_pairs(static_cast<int>(frame.num_channels()))) {
    out.push_back(correlate_spectra(spectra[static_cast<std::size_t>(p.i)],
                                    spectra[static_cast<std::size_t>(p.j)], n, max_lag, p));
  }
  return out;
}

int required_max_lag(const MicArrayGeometry& geometry, double sample_rate,
                     double speed_of_sound) {
  return static_cast<int>(std::ceil(geometry.max_spacing() / speed_of_sound * sample_rate)) + 1;
}

double srp_score(std::span<const GccSpectrum> gccs, const UnitVec3& direction,
                 const MicArrayGeometry& geometry, double sample_rate, double speed_of_sound) {
  double score = 0.0;
  for (const GccSpectrum& g : gccs) {
    score += g.interpolate(pair_tdoa(geometry, g.pair, direction, speed_of_sound) * sample_rate);
  }
  return score;
}

SrpSearch::SrpSearch(MicArrayGeometry geometry, SphericalGrid grid, double sample_rate,
                     double speed_of_sound)
    : geometry_(std::move(geometry)),
      grid_(std::move(grid)),
      sample_rate_(sample_rate),
      speed_of_sound_(speed_of_sound),
      max_lag_(required_max_lag(geometry_, sample_rate, speed_of_sound)),
      pairs_(mic_pairs(geometry_.size())) {
  if (!(sample_rate > 0.0) || !(speed_of_sound > 0.0)) {
    throw std::invalid_argument("SrpSearch: sample rate and speed of sound must be positive");
  }
  fine_table_ = build_table(grid_.fine());
  coarse_table_ = build_table(grid_.coarse());
}

SrpSearch::LagTable SrpSearch::build_table(const std::vector<UnitVec3>& dirs) const {
  LagTable table;
  table.reserve(dirs.size() * pairs_.size());
  for (const UnitVec3& d : dirs) {
    for (const MicPair& p : pairs_) {
      const double lag =
          pair_tdoa(geometry_, p, d, speed_of_sound_) * sample_rate_ + max_lag_;
      const double lo = std::floor(lag);
      table.push_back({static_cast<int>(lo), lag - lo});
    }
  }
  return table;
}

double SrpSearch::score(std::span<const GccSpectrum> gccs, const LagTable& table,
                        int index) const {
  const std::size_t base = static_cast<std::size_t>(index) * pairs_.size();
  double s = 0.0;
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const Tap& tap = table[base + p];
    const auto& v = gccs[p].values;
    const auto lo = static_cast<std::size_t>(tap.lo);
    s += (1.0 - tap.weight) * v[lo] + (tap.weight > 0.0 ? tap.weight * v[lo + 1] : 0.0);
  }
  return s;
}

double SrpSearch::coarse_score(std::span<const GccSpectrum> gccs, int index) const {
  return score(gccs, coarse_table_, index);
}

double SrpSearch::fine_score(std::span<const GccSpectrum> gccs, int index) const {
  return score(gccs, fine_table_, index);
}

std::vector<GccSpectrum> SrpSearch::correlate(const MultichannelFrame& frame) const {
  if (static_cast<int>(frame.num_channels()) != geometry_.size()) {
    throw std::invalid_argument("SrpSearch: frame has " + std::to_string(frame.num_channels()) +
                                " channels, geometry has " + std::to_string(geometry_.size()));
  }
  return gcc_phat_all(frame, max_lag_);
}

namespace {

void check_gccs(std::span<const GccSpectrum> gccs, const std::vector<MicPair>& pairs,
                int max_lag) {
  if (gccs.size() != pairs.size()) {
    throw std::invalid_argument("SrpSearch: expected one GCC per microphone pair");
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (!(gccs[p].pair == pairs[p]) || gccs[p].max_lag != max_lag) {
      throw std::invalid_argument("SrpSearch: GCC set does not match the search pair layout");
    }
  }
}

}  // namespace

PotentialSource SrpSearch::estimate(const MultichannelFrame& frame) const {
  const auto gccs = correlate(frame);
  return estimate(gccs, frame.timestamp);
}

PotentialSource SrpSearch::estimate(std::span<const GccSpectrum> gccs, double timestamp) const {
  check_gccs(gccs, pairs_, max_lag_);
  const int n_coarse = static_cast<int>(grid_.coarse().size());
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(static_cast<std::size_t>(n_coarse));
  for (int c = 0; c < n_coarse; ++c) {
    ranked.emplace_back(coarse_score(gccs, c), c);
  }
  const int keep = std::min(kCoarseCandidates, n_coarse);
  // Ties go to the lower index so the result does not depend on sort order.
  std::partial_sort(ranked.begin(), ranked.begin() + keep, ranked.end(),
                    [](const auto& a, const auto& b) {
                      return a.first > b.first || (a.first == b.first && a.second < b.second);
                    });

  std::vector<char> visited(static_cast<std::size_t>(n_coarse), 0);
  int best_fine = grid_.cell(ranked.front().second).front();
  double best_fine_score = -std::numeric_limits<double>::infinity();
  auto scan = [&](int cell) {
    if (visited[static_cast<std::size_t>(cell)]) return;
    visited[static_cast<std::size_t>(cell)] = 1;
    for (int f : grid_.cell(cell)) {
      const double s = fine_score(gccs, f);
      if (s > best_fine_score || (s == best_fine_score && f < best_fine)) {
        best_fine_score = s;
        best_fine = f;
      }
    }
  };
  for (int k = 0; k < keep; ++k) {
    const int c = ranked[static_cast<std::size_t>(k)].second;
    scan(c);
    for (int n : grid_.neighbors(c)) {
      scan(n);
    }
  }
  return {grid_.fine()[static_cast<std::size_t>(best_fine)], best_fine_score, timestamp};
}

PotentialSource SrpSearch::exhaustive(std::span<const GccSpectrum> gccs, double timestamp) const {
  check_gccs(gccs, pairs_, max_lag_);
  int best_fine = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int f = 0; f < static_cast<int>(grid_.fine().size()); ++f) {
    const double s = fine_score(gccs, f);
    if (s > best) {
      best = s;
      best_fine = f;
    }
  }
  return {grid_.fine()[static_cast<std::size_t>(best_fine)], best, timestamp};
}

MultichannelFrame noise_frame(int channels, std::size_t length, double sample_rate,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MultichannelFrame frame;
  frame.sample_rate = sample_rate;
  frame.channels.assign(static_cast<std::size_t>(channels), std::vector<double>(length));
  for (auto& c : frame.channels) {
    for (double& v : c) {
      v = gauss(rng);
    }
  }
  return frame;
}

double noise_power_percentile(const SrpSearch& search, std::size_t frames, double percentile,
                              std::uint64_t seed, std::size_t frame_length) {
  if (frames == 0 || !(percentile >= 0.0 && percentile <= 100.0)) {
    throw std::invalid_argument("noise_power_percentile: need frames > 0 and percentile in [0, 100]");
  }
  std::vector<double> powers;
  powers.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const MultichannelFrame f = noise_frame(search.geometry().size(), frame_length,
                                            kDefaultSampleRate, seed + k);
    powers.push_back(search.estimate(f).power);
  }
  std::sort(powers.begin(), powers.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(percentile / 100.0 * static_cast<double>(frames)));
  return powers[std::min(frames - 1, rank == 0 ? 0 : rank - 1)];
}

PotentialSource estimate_doa(const MultichannelFrame& frame, const MicArrayGeometry& geometry,
                             const SphericalGrid& grid) {
  const SrpSearch search(geometry, grid, frame.sample_rate);
  return search.estimate(frame);
}

}  // namespace doa
}  // namespace csm
