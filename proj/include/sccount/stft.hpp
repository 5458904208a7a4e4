#pragma once

// Causal multichannel STFT analysis: periodic square-root Hann window,
// unnormalized one-sided DFT, no zero padding, trailing partial frames
// dropped.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "sccount/errors.hpp"
#include "sccount/hermitian.hpp"

namespace sccount {

struct StftConfig {
  double sample_rate = 8000.0;
  std::size_t frame_len = 800;
  std::size_t frame_shift = 200;

  std::size_t num_bins() const { return frame_len / 2 + 1; }
  // Frame shift in seconds (t_fs).
  double frame_period() const { return static_cast<double>(frame_shift) / sample_rate; }
  std::size_t num_frames(std::size_t num_samples) const {
    if (num_samples < frame_len) return 0;
    return (num_samples - frame_len) / frame_shift + 1;
  }

  void validate() const {
    detail::require(sample_rate > 0.0, "stft: sample_rate must be positive");
    detail::require(frame_len >= 2, "stft: frame_len must be >= 2");
    detail::require(frame_shift >= 1, "stft: frame_shift must be >= 1");
    detail::require(frame_len % frame_shift == 0, "stft: frame_shift must divide frame_len");
  }
};

// One STFT frame of M channels; bins are stored frequency-major so that the
// M-vector y_{t,f} is contiguous.
class SpectralFrame {
 public:
  SpectralFrame() = default;
  SpectralFrame(std::size_t t, std::size_t num_bins, std::size_t num_channels)
      : t_(t), bins_(num_bins), channels_(num_channels), data_(num_bins * num_channels) {}

  std::size_t index() const { return t_; }
  std::size_t num_bins() const { return bins_; }
  std::size_t num_channels() const { return channels_; }

  cplx& at(std::size_t f, std::size_t m) { return data_[f * channels_ + m]; }
  const cplx& at(std::size_t f, std::size_t m) const { return data_[f * channels_ + m]; }

  std::span<const cplx> bin(std::size_t f) const { return {data_.data() + f * channels_, channels_}; }
  std::span<cplx> bin(std::size_t f) { return {data_.data() + f * channels_, channels_}; }

 private:
  std::size_t t_ = 0;
  std::size_t bins_ = 0;
  std::size_t channels_ = 0;
  std::vector<cplx> data_;
};

inline std::vector<double> sqrt_hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(n)));
  return w;
}

// Frame-at-a-time analyzer. Holds the window and FFT plan; transform() maps
// one block of frame_len samples per channel to a SpectralFrame.
class StftAnalyzer {
 public:
  explicit StftAnalyzer(StftConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    window_ = sqrt_hann_window(cfg_.frame_len);
    buf_.resize(cfg_.frame_len);
    spec_.resize(cfg_.frame_len);
  }

  const StftConfig& config() const { return cfg_; }

  // channels[m] must point at frame_len samples starting at the frame origin.
  template <typename Sample>
  SpectralFrame transform(std::size_t t, std::span<const std::span<const Sample>> channels) {
    const std::size_t nb = cfg_.num_bins();
    SpectralFrame frame(t, nb, channels.size());
    for (std::size_t m = 0; m < channels.size(); ++m) {
      const auto& x = channels[m];
      for (std::size_t n = 0; n < cfg_.frame_len; ++n) buf_[n] = window_[n] * static_cast<double>(x[n]);
      fft_.fwd(spec_, buf_);
      for (std::size_t f = 0; f < nb; ++f) frame.at(f, m) = spec_[f];
    }
    return frame;
  }

 private:
  StftConfig cfg_;
  std::vector<double> window_;
  std::vector<double> buf_;
  std::vector<cplx> spec_;
  Eigen::FFT<double> fft_;
};

// Runs the analyzer over whole multichannel signals and hands each frame to
// `sink` in increasing t. Returns the number of frames emitted.
template <typename Sample>
std::size_t analyze(std::span<const std::vector<Sample>> samples, const StftConfig& cfg,
                    const std::function<void(const SpectralFrame&)>& sink) {
  cfg.validate();
  detail::require(samples.size() >= 2, "stft: need at least 2 channels");
  const std::size_t n = samples[0].size();
  for (const auto& ch : samples)
    detail::require(ch.size() == n, "stft: channel length mismatch");
  detail::require(n >= cfg.frame_len, "stft: signal shorter than one frame");

  StftAnalyzer analyzer(cfg);
  const std::size_t num_frames = cfg.num_frames(n);
  std::vector<std::span<const Sample>> views(samples.size());
  for (std::size_t t = 0; t < num_frames; ++t) {
    for (std::size_t m = 0; m < samples.size(); ++m)
      views[m] = std::span<const Sample>(samples[m].data() + t * cfg.frame_shift, cfg.frame_len);
    sink(analyzer.transform<Sample>(t, views));
  }
  return num_frames;
}

template <typename Sample>
std::vector<SpectralFrame> analyze(std::span<const std::vector<Sample>> samples, const StftConfig& cfg) {
  std::vector<SpectralFrame> out;
  analyze<Sample>(samples, cfg, [&](const SpectralFrame& fr) { out.push_back(fr); });
  return out;
}

}  // namespace sccount
