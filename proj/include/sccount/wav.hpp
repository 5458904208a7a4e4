#pragma once

// Minimal RIFF/WAVE reader and writer: 16-bit PCM and 32-bit IEEE float,
// including WAVE_FORMAT_EXTENSIBLE headers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sccount/errors.hpp"
#include "sccount/binary_io.hpp"

namespace sccount {

enum class WavEncoding { pcm16, float32 };

struct WavData {
  double sample_rate = 0.0;
  std::vector<std::vector<double>> channels;  // [m][n]

  std::size_t num_samples() const { return channels.empty() ? 0 : channels[0].size(); }
  double duration() const { return sample_rate > 0 ? static_cast<double>(num_samples()) / sample_rate : 0.0; }
};

inline WavData read_wav(std::istream& is) {
  char riff[4], wave[4];
  if (!is.read(riff, 4) || std::memcmp(riff, "RIFF", 4) != 0) throw FormatError("wav: missing RIFF header");
  detail::read_pod<std::uint32_t>(is, "riff size");
  if (!is.read(wave, 4) || std::memcmp(wave, "WAVE", 4) != 0) throw FormatError("wav: missing WAVE tag");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (true) {
    char id[4];
    if (!is.read(id, 4)) throw FormatError("wav: no data chunk");
    const auto size = detail::read_pod<std::uint32_t>(is, "chunk size");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("wav: short fmt chunk");
      format = detail::read_pod<std::uint16_t>(is, "format");
      channels = detail::read_pod<std::uint16_t>(is, "channels");
      rate = detail::read_pod<std::uint32_t>(is, "rate");
      detail::read_pod<std::uint32_t>(is, "byte rate");
      detail::read_pod<std::uint16_t>(is, "block align");
      bits = detail::read_pod<std::uint16_t>(is, "bits");
      std::uint32_t consumed = 16;
      if (format == 0xFFFE && size >= 40) {
        detail::read_pod<std::uint16_t>(is, "cb size");
        detail::read_pod<std::uint16_t>(is, "valid bits");
        detail::read_pod<std::uint32_t>(is, "channel mask");
        format = detail::read_pod<std::uint16_t>(is, "sub format");
        consumed = 26;
      }
      is.ignore(size - consumed + (size & 1));
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
      if (channels == 0) throw FormatError("wav: zero channels");
      const bool pcm16 = format == 1 && bits == 16;
      const bool f32 = format == 3 && bits == 32;
      if (!pcm16 && !f32)
        throw FormatError("wav: unsupported encoding (format " + std::to_string(format) + ", " +
                          std::to_string(bits) + " bits); need 16-bit PCM or 32-bit float");
      const std::size_t bytes_per = bits / 8;
      const std::size_t frames = size / (bytes_per * channels);
      std::vector<char> raw(frames * bytes_per * channels);
      if (!is.read(raw.data(), static_cast<std::streamsize>(raw.size()))) throw FormatError("wav: truncated data");
      WavData out;
      out.sample_rate = rate;
      out.channels.assign(channels, std::vector<double>(frames));
      for (std::size_t i = 0; i < frames; ++i)
        for (std::size_t c = 0; c < channels; ++c) {
          const char* p = raw.data() + (i * channels + c) * bytes_per;
          if (pcm16) {
            std::int16_t v;
            std::memcpy(&v, p, 2);
            out.channels[c][i] = v / 32768.0;
          } else {
            float v;
            std::memcpy(&v, p, 4);
            out.channels[c][i] = v;
          }
        }
      return out;
    } else {
      is.ignore(size + (size & 1));
    }
  }
}

inline WavData read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open wav file " + path);
  return read_wav(is);
}

inline void write_wav(std::ostream& os, const std::vector<std::vector<double>>& channels, double sample_rate,
                      WavEncoding enc = WavEncoding::float32) {
  detail::require(!channels.empty(), "wav: no channels");
  const std::size_t frames = channels[0].size();
  const auto nch = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bits = enc == WavEncoding::pcm16 ? 16 : 32;
  const std::uint32_t block = nch * bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(frames * block);
  const auto rate = static_cast<std::uint32_t>(std::lround(sample_rate));

  os.write("RIFF", 4);
  detail::write_pod<std::uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  detail::write_pod<std::uint32_t>(os, 16);
  detail::write_pod<std::uint16_t>(os, enc == WavEncoding::pcm16 ? 1 : 3);
  detail::write_pod<std::uint16_t>(os, nch);
  detail::write_pod<std::uint32_t>(os, rate);
  detail::write_pod<std::uint32_t>(os, rate * block);
  detail::write_pod<std::uint16_t>(os, static_cast<std::uint16_t>(block));
  detail::write_pod<std::uint16_t>(os, bits);
  os.write("data", 4);
  detail::write_pod<std::uint32_t>(os, data_bytes);
  for (std::size_t i = 0; i < frames; ++i)
    for (const auto& ch : channels) {
      if (enc == WavEncoding::pcm16) {
        const double v = std::clamp(ch[i], -1.0, 32767.0 / 32768.0);
        detail::write_pod<std::int16_t>(os, static_cast<std::int16_t>(std::lround(v * 32768.0)));
      } else {
        detail::write_pod<float>(os, static_cast<float>(ch[i]));
      }
    }
}

inline void write_wav(const std::string& path, const std::vector<std::vector<double>>& channels,
                      double sample_rate, WavEncoding enc = WavEncoding::float32) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write wav file " + path);
  write_wav(os, channels, sample_rate, enc);
  if (!os) throw FormatError("wav: write failed for " + path);
}

}  // namespace sccount
