#pragma once

// Per-frequency spatial covariance tracking. Two estimators run side by side:
//
//   recursive:  R_t = alpha R_{t-1} + (1 - alpha) y_t y_t^H,  alpha = exp(-t_fs / t_alpha)
//   sliding:    R_t = mean of y y^H over the last L frames (fewer during warm-up)
//
// Each estimator keeps a delay line of its last t_v + 1 values so that the
// feature stage can pair the current estimate with the one t_v frames back.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sccount/errors.hpp"
#include "sccount/hermitian.hpp"
#include "sccount/stft.hpp"

namespace sccount {

struct CovTrackerConfig {
  double t_alpha = 0.5;     // seconds
  std::size_t L = 14;       // sliding window, frames
  std::size_t t_v = 20;     // reference delay, frames
  double diag_load = 1e-6;  // relative to mean diagonal of the reference
  // The recursive estimator starts at init_scale * (per-bin power of the
  // first frame / M) * I.
  double init_scale = 1.0;

  void validate() const {
    detail::require(t_alpha > 0.0, "tracker: t_alpha must be positive");
    detail::require(L >= 1, "tracker: L must be >= 1");
    detail::require(t_v == 0 || L < t_v, "tracker: L must be smaller than t_v");
    detail::require(diag_load >= 0.0, "tracker: diag_load must be >= 0");
    detail::require(init_scale > 0.0, "tracker: init_scale must be positive");
  }
};

inline double forgetting_factor(double frame_period, double time_constant) {
  return std::exp(-frame_period / time_constant);
}

class CovarianceTracker {
 public:
  CovarianceTracker(CovTrackerConfig cfg, std::size_t num_bins, std::size_t num_channels,
                    double frame_period)
      : cfg_(cfg), bins_(num_bins), channels_(num_channels) {
    cfg_.validate();
    detail::require(num_channels >= 2 && num_channels <= kMaxChannels,
                    "tracker: channel count must be in [2, 6]");
    detail::require(num_bins >= 1, "tracker: need at least one bin");
    detail::require(frame_period > 0.0, "tracker: frame period must be positive");
    alpha_ = forgetting_factor(frame_period, cfg_.t_alpha);
    depth_ = cfg_.t_v + 1;
    recursive_.assign(depth_ * bins_, CMatrix(channels_));
    sliding_.assign(depth_ * bins_, CMatrix(channels_));
    ring_.assign(cfg_.L * bins_ * channels_, cplx{});
    window_sum_.assign(bins_, CMatrix(channels_));
  }

  const CovTrackerConfig& config() const { return cfg_; }
  double alpha() const { return alpha_; }
  std::size_t num_bins() const { return bins_; }
  std::size_t num_channels() const { return channels_; }
  std::size_t frames_seen() const { return frames_seen_; }

  void update(const SpectralFrame& frame) {
    if (frame.num_bins() != bins_ || frame.num_channels() != channels_)
      throw UsageError("tracker: frame shape does not match tracker");
    if (frames_seen_ > 0 && frame.index() <= last_index_)
      throw UsageError("tracker: out-of-order frame index " + std::to_string(frame.index()) +
                       " after " + std::to_string(last_index_));

    const std::size_t slot = frames_seen_ % depth_;
    const std::size_t prev = (frames_seen_ + depth_ - 1) % depth_;
    const std::size_t ring_slot = frames_seen_ % cfg_.L;
    const std::size_t available = std::min(frames_seen_ + 1, cfg_.L);
    const double inv_avail = 1.0 / static_cast<double>(available);

    const bool evicting = frames_seen_ >= cfg_.L;
    for (std::size_t f = 0; f < bins_; ++f) {
      const auto y = frame.bin(f);
      cplx* cell = ring_.data() + ring_index(ring_slot, f);
      std::array<cplx, kMaxChannels> old{};
      std::copy(cell, cell + channels_, old.begin());
      std::copy(y.begin(), y.end(), cell);

      CMatrix& rec = recursive_[slot * bins_ + f];
      if (frames_seen_ == 0) {
        double power = 0.0;
        for (const auto& v : y) power += std::norm(v);
        const double delta =
            std::max(cfg_.init_scale * power / static_cast<double>(channels_), 1e-12);
        rec = CMatrix::identity(channels_, alpha_ * delta);
      } else {
        rec = alpha_ * recursive_[prev * bins_ + f];
      }
      rec.add_outer(y, 1.0 - alpha_);
      rec.symmetrize();

      // Running window sum; rebuilt exactly every L frames to stop drift.
      CMatrix& sum = window_sum_[f];
      if (ring_slot == 0) {
        sum = CMatrix(channels_);
        for (std::size_t l = 0; l < available; ++l)
          sum.add_outer(std::span<const cplx>(ring_.data() + ring_index(l, f), channels_), 1.0);
      } else {
        sum.add_outer(y, 1.0);
        if (evicting) sum.add_outer(std::span<const cplx>(old.data(), channels_), -1.0);
      }
      CMatrix& sl = sliding_[slot * bins_ + f];
      sl = inv_avail * sum;
      sl.symmetrize();
    }
    last_index_ = frame.index();
    ++frames_seen_;
  }

  // Estimate from `lag` frames ago; lags beyond the available history clamp
  // to the oldest stored estimate.
  const CMatrix& recursive(std::size_t f, std::size_t lag = 0) const {
    return recursive_[history_slot(lag) * bins_ + f];
  }
  const CMatrix& sliding(std::size_t f, std::size_t lag = 0) const {
    return sliding_[history_slot(lag) * bins_ + f];
  }

  // R_{y,t - t_v} from the recursive estimator (activation reference).
  const CMatrix& reference_recursive(std::size_t f) const { return recursive(f, cfg_.t_v); }

  struct DeactivationPair {
    const CMatrix& current;
    const CMatrix& past;
  };
  // Current and t_v-delayed sliding-window estimates.
  DeactivationPair pair_deactivation(std::size_t f) const {
    return {sliding(f, 0), sliding(f, cfg_.t_v)};
  }

  std::size_t effective_lag(std::size_t lag) const {
    return std::min(lag, frames_seen_ == 0 ? 0 : frames_seen_ - 1);
  }

 private:
  std::size_t history_slot(std::size_t lag) const {
    if (frames_seen_ == 0) throw UsageError("tracker: no frames seen yet");
    const std::size_t newest = frames_seen_ - 1;
    return (newest - effective_lag(lag)) % depth_;
  }
  std::size_t ring_index(std::size_t slot, std::size_t f) const {
    return (slot * bins_ + f) * channels_;
  }

  CovTrackerConfig cfg_;
  std::size_t bins_;
  std::size_t channels_;
  double alpha_ = 0.0;
  std::size_t depth_ = 1;
  std::vector<CMatrix> recursive_;
  std::vector<CMatrix> sliding_;
  std::vector<cplx> ring_;
  std::vector<CMatrix> window_sum_;
  std::size_t frames_seen_ = 0;
  std::size_t last_index_ = 0;
};

}  // namespace sccount
