#pragma once

// Threshold-based source counting on smoothed broadband GMSC values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "sccount/errors.hpp"
#include "sccount/gmsc.hpp"

namespace sccount {

struct DetectorConfig {
  double t_gamma = 0.5;  // seconds
  double thr_act = 0.24;
  double thr_deact = 0.62;
  std::size_t refractory = 20;  // frames
  std::size_t warmup = 34;      // frames without detections (t_v + L)
  int K_max = 4;
  bool enable_deactivation = true;
  // After a detection the same feature must fall to or below its threshold
  // before it can fire again. Off: plain level triggering plus refractory.
  bool rearm = true;

  void validate() const {
    detail::require(t_gamma > 0.0, "detector: t_gamma must be positive");
    detail::require(thr_act > 0.0 && thr_act < 1.0, "detector: thr_act must be in (0, 1)");
    detail::require(thr_deact > 0.0 && thr_deact < 1.0, "detector: thr_deact must be in (0, 1)");
    detail::require(K_max >= 1, "detector: K_max must be >= 1");
  }
};

// w^T gamma with w_f = traces_f / sum(traces); 0 when all traces vanish.
inline double broadband(std::span<const double> gamma, std::span<const double> traces) {
  detail::require(gamma.size() == traces.size(), "broadband: length mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t f = 0; f < gamma.size(); ++f) {
    num += traces[f] * gamma[f];
    den += traces[f];
  }
  return den > 0.0 ? num / den : 0.0;
}

struct DetectorState {
  double gamma_bar_act = 0.0;
  double gamma_bar_deact = 0.0;
  int count = 0;
  std::size_t refractory_remaining = 0;
  std::size_t frames_seen = 0;
  bool armed_act = true;
  bool armed_deact = true;
};

class ThresholdDetector {
 public:
  ThresholdDetector(DetectorConfig cfg, double frame_period) : cfg_(cfg) {
    cfg_.validate();
    detail::require(frame_period > 0.0, "detector: frame period must be positive");
    beta_ = std::exp(-frame_period / cfg_.t_gamma);
  }

  const DetectorConfig& config() const { return cfg_; }
  const DetectorState& state() const { return state_; }
  double beta() const { return beta_; }

  // Advances one frame given the unsmoothed broadband values.
  int step_broadband(double act, double deact) {
    state_.gamma_bar_act = beta_ * state_.gamma_bar_act + (1.0 - beta_) * act;
    state_.gamma_bar_deact = beta_ * state_.gamma_bar_deact + (1.0 - beta_) * deact;

    const bool above_act = state_.gamma_bar_act > cfg_.thr_act;
    const bool above_deact = state_.gamma_bar_deact > cfg_.thr_deact;
    if (!above_act) state_.armed_act = true;
    if (!above_deact) state_.armed_deact = true;

    const bool warm = state_.frames_seen >= cfg_.warmup;
    if (warm && state_.refractory_remaining == 0) {
      const bool fire_act = above_act && (state_.armed_act || !cfg_.rearm);
      const bool fire_deact = cfg_.enable_deactivation && above_deact && (state_.armed_deact || !cfg_.rearm);
      if (fire_act) {
        state_.count = std::min(state_.count + 1, cfg_.K_max);
        state_.refractory_remaining = cfg_.refractory;
        state_.armed_act = false;
      } else if (fire_deact) {
        state_.count = std::max(state_.count - 1, 0);
        state_.refractory_remaining = cfg_.refractory;
        state_.armed_deact = false;
      }
    } else if (state_.refractory_remaining > 0) {
      --state_.refractory_remaining;
    }
    ++state_.frames_seen;
    return state_.count;
  }

  int step(const GmscFeatures& features) {
    const double act = broadband(features.activation, features.act_traces);
    const double deact = features.deactivation.empty()
                             ? 0.0
                             : broadband(features.deactivation, features.deact_traces);
    return step_broadband(act, deact);
  }

 private:
  DetectorConfig cfg_;
  double beta_ = 0.0;
  DetectorState state_;
};

}  // namespace sccount
