#pragma once

// Framewise scoring and threshold grid search.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sccount/detector.hpp"
#include "sccount/errors.hpp"

namespace sccount {

namespace detail {
inline void check_pair(std::size_t a, std::size_t b) {
  require(a == b, "metrics: estimate and truth lengths differ (" + std::to_string(a) + " vs " +
                      std::to_string(b) + ")");
  require(a >= 1, "metrics: empty sequences");
}
}  // namespace detail

// Percentage of frames with est == truth.
inline double accuracy(std::span<const int> est, std::span<const int> truth) {
  detail::check_pair(est.size(), truth.size());
  std::size_t hits = 0;
  for (std::size_t t = 0; t < est.size(); ++t) hits += est[t] == truth[t] ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(est.size());
}

inline double mae(std::span<const int> est, std::span<const int> truth) {
  detail::check_pair(est.size(), truth.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < est.size(); ++t) sum += std::abs(est[t] - truth[t]);
  return sum / static_cast<double>(est.size());
}

struct SceneScore {
  std::string id;
  std::size_t frames = 0;
  double accuracy_pct = 0.0;
  double mae = 0.0;
};

struct EvalReport {
  double accuracy_pct = 0.0;
  double mae = 0.0;
  std::vector<SceneScore> per_scene;
  std::size_t frames_total = 0;
};

struct ScoredScene {
  std::string id;
  std::vector<int> est;
  std::vector<int> truth;
};

// Pools all frames across scenes. `skip_frames` drops that many leading
// frames of every scene (diagnostics only; default scores everything).
inline EvalReport evaluate(const std::vector<ScoredScene>& scenes, std::size_t skip_frames = 0) {
  detail::require(!scenes.empty(), "evaluate: no scenes");
  EvalReport rep;
  std::size_t hits = 0;
  double abs_err = 0.0;
  for (const auto& s : scenes) {
    detail::check_pair(s.est.size(), s.truth.size());
    detail::require(s.est.size() > skip_frames, "evaluate: scene " + s.id + " shorter than skipped warm-up");
    std::span<const int> e(s.est.data() + skip_frames, s.est.size() - skip_frames);
    std::span<const int> t(s.truth.data() + skip_frames, s.truth.size() - skip_frames);
    SceneScore sc{s.id, e.size(), accuracy(e, t), mae(e, t)};
    for (std::size_t i = 0; i < e.size(); ++i) {
      hits += e[i] == t[i] ? 1 : 0;
      abs_err += std::abs(e[i] - t[i]);
    }
    rep.frames_total += e.size();
    rep.per_scene.push_back(sc);
  }
  rep.accuracy_pct = 100.0 * static_cast<double>(hits) / static_cast<double>(rep.frames_total);
  rep.mae = abs_err / static_cast<double>(rep.frames_total);
  return rep;
}

inline void print_report_table(std::ostream& os, const EvalReport& rep) {
  char line[256];
  std::snprintf(line, sizeof line, "%-32s %8s %10s %8s\n", "scene", "frames", "accuracy%", "MAE");
  os << line;
  for (const auto& s : rep.per_scene) {
    std::snprintf(line, sizeof line, "%-32s %8zu %10.2f %8.4f\n", s.id.c_str(), s.frames, s.accuracy_pct, s.mae);
    os << line;
  }
  std::snprintf(line, sizeof line, "%-32s %8zu %10.2f %8.4f\n", "TOTAL", rep.frames_total, rep.accuracy_pct, rep.mae);
  os << line;
}

// One scene per line: "scene <id> frames <T> accuracy <pct> mae <mae>", then a total line.
inline void write_report_records(std::ostream& os, const EvalReport& rep) {
  for (const auto& s : rep.per_scene)
    os << "scene " << s.id << " frames " << s.frames << " accuracy " << s.accuracy_pct << " mae " << s.mae << '\n';
  os << "total frames " << rep.frames_total << " accuracy " << rep.accuracy_pct << " mae " << rep.mae << '\n';
}

// ---------------------------------------------------------------------------
// Threshold grid search over cached broadband feature traces.

struct BroadbandTrace {
  std::string id;
  std::vector<double> act;    // unsmoothed broadband activation GMSC per frame
  std::vector<double> deact;  // unsmoothed broadband deactivation GMSC per frame
  std::vector<int> truth;
};

inline std::vector<int> run_detector(const BroadbandTrace& trace, const DetectorConfig& cfg, double frame_period) {
  ThresholdDetector det(cfg, frame_period);
  std::vector<int> est(trace.act.size());
  for (std::size_t t = 0; t < est.size(); ++t)
    est[t] = det.step_broadband(trace.act[t], trace.deact.empty() ? 0.0 : trace.deact[t]);
  return est;
}

struct GridSearchResult {
  double thr_act = 0.0;
  double thr_deact = 0.0;
  double accuracy_pct = -1.0;
};

// Exhaustive search; ties resolve to the smallest activation threshold, then
// the smallest deactivation threshold.
inline GridSearchResult grid_search_thresholds(const std::vector<BroadbandTrace>& scenes,
                                               std::vector<double> grid_act, std::vector<double> grid_deact,
                                               const DetectorConfig& base, double frame_period) {
  detail::require(!scenes.empty(), "grid search: no scenes");
  detail::require(!grid_act.empty() && !grid_deact.empty(), "grid search: empty grid");
  std::sort(grid_act.begin(), grid_act.end());
  std::sort(grid_deact.begin(), grid_deact.end());
  GridSearchResult best;
  std::vector<ScoredScene> scored(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    scored[i].id = scenes[i].id;
    scored[i].truth = scenes[i].truth;
  }
  for (double a : grid_act) {
    for (double d : grid_deact) {
      DetectorConfig cfg = base;
      cfg.thr_act = a;
      cfg.thr_deact = d;
      for (std::size_t i = 0; i < scenes.size(); ++i) scored[i].est = run_detector(scenes[i], cfg, frame_period);
      const double acc = evaluate(scored).accuracy_pct;
      if (acc > best.accuracy_pct) best = {a, d, acc};
    }
  }
  return best;
}

}  // namespace sccount
