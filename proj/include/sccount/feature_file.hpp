#pragma once

// SCF1 feature files (little-endian):
//   "SCF1" | version u32 = 1 | F u32 | T u32 | n_feat u32 (F or 2F) | K_max u32
//   T x n_feat f32, frame-major
//   T x u8 ground-truth counts (kUnknownCount when no truth was available)

#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "sccount/errors.hpp"
#include "sccount/binary_io.hpp"

namespace sccount {

inline constexpr std::uint8_t kUnknownCount = 0xFF;

struct FeatureFile {
  std::uint32_t num_bins = 0;
  std::uint32_t num_features = 0;
  std::uint32_t K_max = 4;
  std::vector<std::vector<float>> frames;  // [t][feature]
  std::vector<std::uint8_t> counts;        // [t]

  std::size_t num_frames() const { return frames.size(); }
};

// Incremental writer: the header is patched with T on finish(), so frames
// can be streamed without buffering the whole scene.
class FeatureFileWriter {
 public:
  FeatureFileWriter(const std::string& path, std::uint32_t num_bins, std::uint32_t num_features,
                    std::uint32_t K_max)
      : os_(path, std::ios::binary), num_features_(num_features) {
    if (!os_) throw FormatError("cannot write feature file " + path);
    detail::require(num_features == num_bins || num_features == 2 * num_bins,
                    "feature file: n_feat must be F or 2F");
    os_.write("SCF1", 4);
    detail::write_pod<std::uint32_t>(os_, 1);
    detail::write_pod<std::uint32_t>(os_, num_bins);
    detail::write_pod<std::uint32_t>(os_, 0);  // T, patched later
    detail::write_pod<std::uint32_t>(os_, num_features);
    detail::write_pod<std::uint32_t>(os_, K_max);
  }

  void append(std::span<const float> features) {
    detail::require(features.size() == num_features_, "feature file: frame width mismatch");
    os_.write(reinterpret_cast<const char*>(features.data()),
              static_cast<std::streamsize>(features.size() * sizeof(float)));
    ++frames_;
  }

  void finish(std::span<const std::uint8_t> counts) {
    detail::require(counts.size() == frames_, "feature file: count footer length must equal T");
    os_.write(reinterpret_cast<const char*>(counts.data()), static_cast<std::streamsize>(counts.size()));
    os_.seekp(12);
    detail::write_pod<std::uint32_t>(os_, frames_);
    os_.flush();
    if (!os_) throw FormatError("feature file: write failed");
  }

  std::uint32_t frames() const { return frames_; }

 private:
  std::ofstream os_;
  std::uint32_t num_features_;
  std::uint32_t frames_ = 0;
};

inline void write_feature_file(const std::string& path, const FeatureFile& ff) {
  FeatureFileWriter w(path, ff.num_bins, ff.num_features, ff.K_max);
  for (const auto& fr : ff.frames) w.append(fr);
  w.finish(ff.counts);
}

inline FeatureFile read_feature_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open feature file " + path);
  char magic[4] = {};
  if (!is.read(magic, 4) || std::memcmp(magic, "SCF1", 4) != 0)
    throw FormatError("feature file " + path + ": bad magic");
  const auto version = detail::read_pod<std::uint32_t>(is, "version");
  if (version != 1) throw FormatError("feature file: unsupported version " + std::to_string(version));
  FeatureFile ff;
  ff.num_bins = detail::read_pod<std::uint32_t>(is, "F");
  const auto T = detail::read_pod<std::uint32_t>(is, "T");
  ff.num_features = detail::read_pod<std::uint32_t>(is, "n_feat");
  ff.K_max = detail::read_pod<std::uint32_t>(is, "K_max");
  if (ff.num_features != ff.num_bins && ff.num_features != 2 * ff.num_bins)
    throw FormatError("feature file: n_feat must be F or 2F");
  ff.frames.assign(T, std::vector<float>(ff.num_features));
  for (auto& fr : ff.frames)
    if (!is.read(reinterpret_cast<char*>(fr.data()), static_cast<std::streamsize>(fr.size() * sizeof(float))))
      throw FormatError("feature file: truncated payload");
  ff.counts.resize(T);
  if (T > 0 && !is.read(reinterpret_cast<char*>(ff.counts.data()), T))
    throw FormatError("feature file: truncated count footer");
  return ff;
}

}  // namespace sccount
