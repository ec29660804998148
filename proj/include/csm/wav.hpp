#pragma once

#include <string>
#include <vector>

namespace csm::wav {

struct WavData {
  double sample_rate = 0.0;
  std::vector<std::vector<double>> channels;  // channels[c][n]
};

/// Writes IEEE float32 PCM. All channels must have equal length.
void write_float32(const std::string& path, const WavData& data);

/// Reads float32 or 16/32-bit integer PCM (plain or WAVE_FORMAT_EXTENSIBLE).
/// Throws csm::IoError / csm::ConfigError.
WavData read(const std::string& path);

}  // namespace csm::wav
