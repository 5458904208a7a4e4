#pragma once

// Run configuration: INI-style "key = value" text with [sections].
//
//   [stft]      sample_rate frame_len frame_shift
//   [tracker]   t_alpha L t_v diag_load init_scale
//   [detector]  t_gamma thr_act thr_deact refractory warmup K_max enable_deactivation rearm
//   [scene]     M K_max duration event_min event_max snr_min_db snr_max_db
//               allow_deactivations noise_kind seed max_events envelope_log_std
//   [run]       seed model_path
//
// Unknown sections or keys are rejected. detector.warmup follows t_v + L
// unless set explicitly.

#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sccount/covariance.hpp"
#include "sccount/detector.hpp"
#include "sccount/errors.hpp"
#include "sccount/scene.hpp"
#include "sccount/stft.hpp"

namespace sccount {

struct RunConfig {
  StftConfig stft;
  CovTrackerConfig tracker;
  DetectorConfig detector;
  SceneConfig scene;
  std::uint64_t seed = 1;
  std::string model_path;
  bool warmup_explicit = false;

  void validate() const {
    stft.validate();
    tracker.validate();
    detector.validate();
    scene.validate();
    detail::require(scene.sample_rate == stft.sample_rate, "config: scene.sample_rate differs from stft.sample_rate");
  }

  // Keeps derived fields consistent after edits.
  void sync() {
    if (!warmup_explicit) detector.warmup = tracker.t_v + tracker.L;
    scene.sample_rate = stft.sample_rate;
  }
};

namespace detail {

namespace pt = boost::property_tree;

template <typename T>
void read_key(const pt::ptree& sec, const std::string& section, const std::string& key, T& out,
              std::set<std::string>& seen) {
  auto v = sec.get_optional<std::string>(key);
  if (!v) return;
  seen.insert(key);
  std::istringstream is(*v);
  if constexpr (std::is_same_v<T, bool>) {
    std::string s;
    is >> s;
    if (s == "true" || s == "1" || s == "yes") out = true;
    else if (s == "false" || s == "0" || s == "no") out = false;
    else throw UsageError("config: [" + section + "] " + key + ": expected a boolean, got '" + *v + "'");
    return;
  } else if constexpr (std::is_same_v<T, std::string>) {
    out = *v;
    return;
  } else {
    T parsed{};
    is >> parsed;
    std::string rest;
    if (!is || (is >> rest)) throw UsageError("config: [" + section + "] " + key + ": cannot parse '" + *v + "'");
    out = parsed;
  }
}

inline void check_known(const pt::ptree& sec, const std::string& section, const std::set<std::string>& seen) {
  for (const auto& kv : sec)
    if (!seen.count(kv.first)) throw UsageError("config: unknown key [" + section + "] " + kv.first);
}

}  // namespace detail

// Applies the settings in `is` on top of `cfg`.
inline void apply_config(std::istream& is, RunConfig& cfg) {
  namespace pt = boost::property_tree;
  const std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  // read_ini drops empty sections, so headers are checked on the raw text too.
  {
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
      const auto b = line.find_first_not_of(" \t");
      if (b == std::string::npos || line[b] != '[') continue;
      const auto e = line.find(']', b);
      const std::string name = e == std::string::npos ? "" : line.substr(b + 1, e - b - 1);
      if (name != "stft" && name != "tracker" && name != "detector" && name != "scene" && name != "run")
        throw UsageError("config: unknown section [" + name + "]");
    }
  }
  pt::ptree tree;
  try {
    std::istringstream body(text);
    pt::read_ini(body, tree);
  } catch (const pt::ini_parser_error& e) {
    throw UsageError(std::string("config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [name, sec] : tree) {
    std::set<std::string> seen;
    if (!sec.data().empty()) throw UsageError("config: key '" + name + "' outside a section");
    if (name == "stft") {
      detail::read_key(sec, name, "sample_rate", cfg.stft.sample_rate, seen);
      detail::read_key(sec, name, "frame_len", cfg.stft.frame_len, seen);
      detail::read_key(sec, name, "frame_shift", cfg.stft.frame_shift, seen);
    } else if (name == "tracker") {
      detail::read_key(sec, name, "t_alpha", cfg.tracker.t_alpha, seen);
      detail::read_key(sec, name, "L", cfg.tracker.L, seen);
      detail::read_key(sec, name, "t_v", cfg.tracker.t_v, seen);
      detail::read_key(sec, name, "diag_load", cfg.tracker.diag_load, seen);
      detail::read_key(sec, name, "init_scale", cfg.tracker.init_scale, seen);
    } else if (name == "detector") {
      detail::read_key(sec, name, "t_gamma", cfg.detector.t_gamma, seen);
      detail::read_key(sec, name, "thr_act", cfg.detector.thr_act, seen);
      detail::read_key(sec, name, "thr_deact", cfg.detector.thr_deact, seen);
      detail::read_key(sec, name, "refractory", cfg.detector.refractory, seen);
      detail::read_key(sec, name, "warmup", cfg.detector.warmup, seen);
      if (seen.count("warmup")) cfg.warmup_explicit = true;
      detail::read_key(sec, name, "K_max", cfg.detector.K_max, seen);
      detail::read_key(sec, name, "enable_deactivation", cfg.detector.enable_deactivation, seen);
      detail::read_key(sec, name, "rearm", cfg.detector.rearm, seen);
    } else if (name == "scene") {
      detail::read_key(sec, name, "M", cfg.scene.M, seen);
      detail::read_key(sec, name, "K_max", cfg.scene.K_max, seen);
      detail::read_key(sec, name, "duration", cfg.scene.duration, seen);
      detail::read_key(sec, name, "event_min", cfg.scene.event_min, seen);
      detail::read_key(sec, name, "event_max", cfg.scene.event_max, seen);
      detail::read_key(sec, name, "snr_min_db", cfg.scene.snr_min_db, seen);
      detail::read_key(sec, name, "snr_max_db", cfg.scene.snr_max_db, seen);
      detail::read_key(sec, name, "allow_deactivations", cfg.scene.allow_deactivations, seen);
      std::string noise;
      detail::read_key(sec, name, "noise_kind", noise, seen);
      if (!noise.empty()) cfg.scene.noise_kind = parse_noise_kind(noise);
      detail::read_key(sec, name, "seed", cfg.scene.seed, seen);
      detail::read_key(sec, name, "max_events", cfg.scene.max_events, seen);
      detail::read_key(sec, name, "envelope_log_std", cfg.scene.envelope_log_std, seen);
    } else if (name == "run") {
      detail::read_key(sec, name, "seed", cfg.seed, seen);
      detail::read_key(sec, name, "model_path", cfg.model_path, seen);
    } else {
      throw UsageError("config: unknown section [" + name + "]");
    }
    detail::check_known(sec, name, seen);
  }
  cfg.sync();
  cfg.validate();
}

inline RunConfig load_config(std::istream& is) {
  RunConfig cfg;
  apply_config(is, cfg);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("config: cannot open " + path);
  return load_config(is);
}

// Effective configuration in the same format it is read from.
inline void write_config(std::ostream& os, const RunConfig& c) {
  const auto b = [](bool v) { return v ? "true" : "false"; };
  const auto old_precision = os.precision(15);
  os << "[stft]\n"
     << "sample_rate = " << c.stft.sample_rate << "\n"
     << "frame_len = " << c.stft.frame_len << "\n"
     << "frame_shift = " << c.stft.frame_shift << "\n\n"
     << "[tracker]\n"
     << "t_alpha = " << c.tracker.t_alpha << "\n"
     << "L = " << c.tracker.L << "\n"
     << "t_v = " << c.tracker.t_v << "\n"
     << "diag_load = " << c.tracker.diag_load << "\n"
     << "init_scale = " << c.tracker.init_scale << "\n\n"
     << "[detector]\n"
     << "t_gamma = " << c.detector.t_gamma << "\n"
     << "thr_act = " << c.detector.thr_act << "\n"
     << "thr_deact = " << c.detector.thr_deact << "\n"
     << "refractory = " << c.detector.refractory << "\n"
     << "warmup = " << c.detector.warmup << "\n"
     << "K_max = " << c.detector.K_max << "\n"
     << "enable_deactivation = " << b(c.detector.enable_deactivation) << "\n"
     << "rearm = " << b(c.detector.rearm) << "\n\n"
     << "[scene]\n"
     << "M = " << c.scene.M << "\n"
     << "K_max = " << c.scene.K_max << "\n"
     << "duration = " << c.scene.duration << "\n"
     << "event_min = " << c.scene.event_min << "\n"
     << "event_max = " << c.scene.event_max << "\n"
     << "snr_min_db = " << c.scene.snr_min_db << "\n"
     << "snr_max_db = " << c.scene.snr_max_db << "\n"
     << "allow_deactivations = " << b(c.scene.allow_deactivations) << "\n"
     << "noise_kind = " << to_string(c.scene.noise_kind) << "\n"
     << "seed = " << c.scene.seed << "\n"
     << "max_events = " << c.scene.max_events << "\n"
     << "envelope_log_std = " << c.scene.envelope_log_std << "\n\n"
     << "[run]\n"
     << "seed = " << c.seed << "\n";
  if (!c.model_path.empty()) os << "model_path = " << c.model_path << "\n";
  os.precision(old_precision);
}

}  // namespace sccount
