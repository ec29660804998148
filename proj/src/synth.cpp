#include "csm/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace csm {

void SceneFrame::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw std::invalid_argument("SceneFrame: sample rate must be positive");
  }
  if (frame_length == 0 || (frame_length & (frame_length - 1)) != 0) {
    throw std::invalid_argument("SceneFrame: frame length must be a power of two");
  }
  if (!(speed_of_sound > 0.0)) {
    throw std::invalid_argument("SceneFrame: speed of sound must be positive");
  }
  if (!source_position.allFinite() || !array_pose.position.allFinite() ||
      !array_pose.orientation.is_unit()) {
    throw std::invalid_argument("SceneFrame: non-finite source or invalid array pose");
  }
  if (std::isnan(snr_db)) {
    throw std::invalid_argument("SceneFrame: snr_db is NaN");
  }
}

namespace synth {
namespace {

constexpr double kHalfWindow = kDelayTaps / 2;  // Hann half-width, samples

double sinc(double x) {
  if (x == 0.0) {
    return 1.0;
  }
  return std::sin(kPi * x) / (kPi * x);
}

// Taps h[k], k = -15..16, for a fractional delay `frac` in (0, 1).
std::vector<double> delay_kernel(double frac) {
  std::vector<double> h(kDelayTaps);
  double sum = 0.0;
  for (int n = 0; n < kDelayTaps; ++n) {
    const double u = (n - (kDelayTaps / 2 - 1)) - frac;
    const double window = 0.5 * (1.0 + std::cos(kPi * u / kHalfWindow));
    h[static_cast<std::size_t>(n)] = sinc(u) * window;
    sum += h[static_cast<std::size_t>(n)];
  }
  for (double& v : h) {
    v /= sum;  // unit DC gain
  }
  return h;
}

// Low-pass for the source: Hann-windowed sinc, cutoff 0.4 cycles/sample.
std::vector<double> source_lowpass() {
  constexpr int kHalf = 32;
  constexpr double kCutoff = 0.4;
  std::vector<double> h(2 * kHalf + 1);
  double energy = 0.0;
  for (int n = -kHalf; n <= kHalf; ++n) {
    const double window = 0.5 * (1.0 + std::cos(kPi * n / (kHalf + 1)));
    const double v = 2.0 * kCutoff * sinc(2.0 * kCutoff * n) * window;
    h[static_cast<std::size_t>(n + kHalf)] = v;
    energy += v * v;
  }
  for (double& v : h) {
    v /= std::sqrt(energy);
  }
  return h;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

}  // namespace

std::vector<double> fractional_delay(std::span<const double> signal, double delay,
                                     double sample_rate) {
  if (!(sample_rate > 0.0)) {
    throw std::invalid_argument("fractional_delay: sample rate must be positive");
  }
  const double samples = delay * sample_rate;
  if (!std::isfinite(samples) || std::abs(samples) >= static_cast<double>(signal.size())) {
    throw std::invalid_argument("fractional_delay: delay exceeds the buffer length");
  }
  const auto n = static_cast<std::ptrdiff_t>(signal.size());
  std::vector<double> out(signal.size(), 0.0);

  double whole = std::floor(samples);
  double frac = samples - whole;
  if (frac < 1e-9) {
    frac = 0.0;
  } else if (frac > 1.0 - 1e-9) {
    frac = 0.0;
    whole += 1.0;
  }
  const auto shift = static_cast<std::ptrdiff_t>(whole);

  if (frac == 0.0) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const std::ptrdiff_t src = i - shift;
      if (src >= 0 && src < n) {
        out[static_cast<std::size_t>(i)] = signal[static_cast<std::size_t>(src)];
      }
    }
    return out;
  }

  const std::vector<double> h = delay_kernel(frac);
  constexpr std::ptrdiff_t kFirst = -(kDelayTaps / 2 - 1);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = 0; k < kDelayTaps; ++k) {
      const std::ptrdiff_t src = i - shift - (k + kFirst);
      if (src >= 0 && src < n) {
        acc += h[static_cast<std::size_t>(k)] * signal[static_cast<std::size_t>(src)];
      }
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

std::vector<double> source_noise(std::size_t length, std::uint64_t seed) {
  static const std::vector<double> lowpass = source_lowpass();
  const std::size_t half = lowpass.size() / 2;
  auto rng = make_rng(seed, 0x50u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> white(length + 2 * half);
  for (double& v : white) {
    v = gauss(rng);
  }
  std::vector<double> out(length, 0.0);
  for (std::size_t i = 0; i < length; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < lowpass.size(); ++k) {
      acc += lowpass[k] * white[i + k];
    }
    out[i] = acc;
  }
  return out;
}

Propagation propagation(const SceneFrame& scene, const MicArrayGeometry& geometry) {
  Propagation p;
  for (const Vec3& mic : geometry.positions()) {
    const Vec3 mic_map = scene.array_pose.position + scene.array_pose.orientation.rotate(mic);
    const double r = (scene.source_position - mic_map).norm();
    p.range.push_back(r);
    p.delay.push_back(r / scene.speed_of_sound);
  }
  return p;
}

MultichannelFrame synthesize_frame(const SceneFrame& scene, const MicArrayGeometry& geometry) {
  scene.validate();
  if ((scene.source_position - scene.array_pose.position).norm() <= geometry.enclosing_radius()) {
    throw std::invalid_argument("synthesize_frame: source lies inside the array");
  }
  const Propagation prop = propagation(scene, geometry);
  double max_delay = 0.0;
  for (double d : prop.delay) {
    max_delay = std::max(max_delay, d);
  }
  const std::size_t n = scene.frame_length;
  const auto pad = static_cast<std::size_t>(std::ceil(max_delay * scene.sample_rate)) + kDelayTaps + 1;
  const std::vector<double> source = source_noise(n + pad, scene.rng_seed);

  MultichannelFrame frame;
  frame.timestamp = scene.timestamp;
  frame.sample_rate = scene.sample_rate;
  frame.channels.reserve(prop.delay.size());
  double clean_power = 0.0;
  for (std::size_t m = 0; m < prop.delay.size(); ++m) {
    const std::vector<double> delayed = fractional_delay(source, prop.delay[m], scene.sample_rate);
    std::vector<double> channel(delayed.begin() + static_cast<std::ptrdiff_t>(pad), delayed.end());
    const double gain = 1.0 / prop.range[m];
    for (double& v : channel) {
      v *= gain;
      clean_power += v * v;
    }
    frame.channels.push_back(std::move(channel));
  }
  clean_power /= static_cast<double>(n * prop.delay.size());

  if (std::isfinite(scene.snr_db)) {
    const double sigma = std::sqrt(clean_power / std::pow(10.0, scene.snr_db / 10.0));
    auto rng = make_rng(scene.rng_seed, 0x4E01u);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (auto& channel : frame.channels) {
      for (double& v : channel) {
        v += gauss(rng);
      }
    }
  }
  return frame;
}

}  // namespace synth
}  // namespace csm
