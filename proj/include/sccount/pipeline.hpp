#pragma once

// Streaming feature pipeline: STFT -> covariance tracking -> GMSC features,
// optionally followed by the threshold detector.

#include <chrono>
#include <functional>
#include <span>
#include <vector>

#include "sccount/covariance.hpp"
#include "sccount/detector.hpp"
#include "sccount/gmsc.hpp"
#include "sccount/metrics.hpp"
#include "sccount/stft.hpp"

namespace sccount {

class FeaturePipeline {
 public:
  FeaturePipeline(const StftConfig& stft, const CovTrackerConfig& tracker, std::size_t num_channels,
                  bool with_deactivation = true)
      : stft_(stft),
        tracker_(tracker, stft.num_bins(), num_channels, stft.frame_period()),
        with_deactivation_(with_deactivation) {}

  const StftConfig& stft() const { return stft_; }
  const CovarianceTracker& tracker() const { return tracker_; }
  bool with_deactivation() const { return with_deactivation_; }

  const GmscFeatures& push(const SpectralFrame& frame) {
    tracker_.update(frame);
    extract(tracker_, with_deactivation_, features_);
    return features_;
  }

  // Runs over whole signals, calling `sink(t, features)` for every frame.
  template <typename Sample>
  std::size_t run(std::span<const std::vector<Sample>> samples,
                  const std::function<void(std::size_t, const GmscFeatures&)>& sink) {
    return analyze<Sample>(samples, stft_, [&](const SpectralFrame& fr) { sink(fr.index(), push(fr)); });
  }

 private:
  StftConfig stft_;
  CovarianceTracker tracker_;
  bool with_deactivation_;
  GmscFeatures features_;
};

// Per-frame detector output.
struct DetectionRecord {
  std::size_t t = 0;
  double gamma_bar_act = 0.0;
  double gamma_bar_deact = 0.0;
  int count = 0;
};

template <typename Sample>
std::vector<DetectionRecord> detect_signal(std::span<const std::vector<Sample>> samples, const StftConfig& stft,
                                           const CovTrackerConfig& tracker, const DetectorConfig& det_cfg) {
  FeaturePipeline pipe(stft, tracker, samples.size(), det_cfg.enable_deactivation);
  ThresholdDetector det(det_cfg, stft.frame_period());
  std::vector<DetectionRecord> out;
  pipe.run<Sample>(samples, [&](std::size_t t, const GmscFeatures& f) {
    const int k = det.step(f);
    out.push_back({t, det.state().gamma_bar_act, det.state().gamma_bar_deact, k});
  });
  return out;
}

// Unsmoothed broadband activation/deactivation values for every frame.
template <typename Sample>
BroadbandTrace broadband_trace(std::span<const std::vector<Sample>> samples, const StftConfig& stft,
                               const CovTrackerConfig& tracker, bool with_deactivation = true) {
  FeaturePipeline pipe(stft, tracker, samples.size(), with_deactivation);
  BroadbandTrace tr;
  pipe.run<Sample>(samples, [&](std::size_t, const GmscFeatures& f) {
    tr.act.push_back(broadband(f.activation, f.act_traces));
    if (with_deactivation) tr.deact.push_back(broadband(f.deactivation, f.deact_traces));
  });
  return tr;
}

struct BenchResult {
  double audio_seconds = 0.0;
  double processing_seconds = 0.0;
  std::size_t frames = 0;
  double real_time_factor() const { return processing_seconds / audio_seconds; }
};

// Times extract + detect over the given signals.
template <typename Sample>
BenchResult bench_pipeline(std::span<const std::vector<Sample>> samples, const StftConfig& stft,
                           const CovTrackerConfig& tracker, const DetectorConfig& det_cfg) {
  BenchResult r;
  r.audio_seconds = static_cast<double>(samples[0].size()) / stft.sample_rate;
  const auto t0 = std::chrono::steady_clock::now();
  r.frames = detect_signal<Sample>(samples, stft, tracker, det_cfg).size();
  r.processing_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace sccount
