#include "csm/wav.hpp"

#include <cstdint>
#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "csm/error.hpp"

namespace csm::wav {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
void put(std::ofstream& out, T value) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFFu);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

void write_float32(const std::string& path, const WavData& data) {
  const std::size_t nch = data.channels.size();
  const std::size_t frames = nch ? data.channels.front().size() : 0;
  for (const auto& c : data.channels) {
    if (c.size() != frames) {
      throw std::invalid_argument("wav: channels have different lengths");
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path + "'");
  }
  const auto block = static_cast<std::uint16_t>(nch * 4);
  const auto data_bytes = static_cast<std::uint32_t>(frames * block);
  const auto rate = static_cast<std::uint32_t>(data.sample_rate);
  out.write("RIFF", 4);
  put<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, kFormatFloat);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(nch));
  put<std::uint32_t>(out, rate);
  put<std::uint32_t>(out, rate * block);
  put<std::uint16_t>(out, block);
  put<std::uint16_t>(out, 32);
  out.write("data", 4);
  put<std::uint32_t>(out, data_bytes);
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < nch; ++c) {
      const auto f = static_cast<float>(data.channels[c][n]);
      std::uint32_t bits = 0;
      std::memcpy(&bits, &f, sizeof bits);
      put<std::uint32_t>(out, bits);
    }
  }
  if (!out) {
    throw IoError("write failed for '" + path + "'");
  }
}

WavData read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw ConfigError(path + ": not a RIFF/WAVE file");
  }
  std::uint16_t format = 0;
  std::uint16_t nch = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* samples = nullptr;
  std::size_t sample_bytes = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0 && size >= 16 && avail >= 16) {
      format = le16(chunk + 8);
      nch = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == kFormatExtensible && size >= 26 && avail >= 26) {
        format = le16(chunk + 32);  // first two bytes of the subformat GUID
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      samples = chunk + 8;
      sample_bytes = std::min<std::size_t>(size, avail);
    }
    pos = body + size + (size & 1u);
  }
  if (nch == 0 || samples == nullptr) {
    throw ConfigError(path + ": missing fmt or data chunk");
  }
  const bool is_float = format == kFormatFloat && bits == 32;
  const bool is_pcm = format == kFormatPcm && (bits == 16 || bits == 32);
  if (!is_float && !is_pcm) {
    throw ConfigError(path + ": unsupported WAV encoding (format " + std::to_string(format) +
                      ", " + std::to_string(bits) + " bits)");
  }
  const std::size_t width = bits / 8u;
  const std::size_t frames = sample_bytes / (width * nch);
  WavData out;
  out.sample_rate = rate;
  out.channels.assign(nch, std::vector<double>(frames));
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < nch; ++c) {
      const unsigned char* p = samples + (n * nch + c) * width;
      double v = 0.0;
      if (is_float) {
        const std::uint32_t raw = le32(p);
        float f = 0.0F;
        std::memcpy(&f, &raw, sizeof f);
        v = f;
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(le16(p)) / 32768.0;
      } else {
        v = static_cast<std::int32_t>(le32(p)) / 2147483648.0;
      }
      out.channels[c][n] = v;
    }
  }
  return out;
}

}  // namespace csm::wav
