#pragma once

// Synthetic multichannel scenes with a time-varying number of coherent
// sources, plus framewise ground-truth counts.
//
// Each source is amplitude-modulated Gaussian noise (log-normal power
// envelope low-passed at 4 Hz) rendered through a far-field delay-and-gain
// ATF and gated by its activity intervals with 10 ms raised-cosine ramps.
// Noise is either spatially white or an approximation of a diffuse field.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "sccount/errors.hpp"
#include "sccount/hermitian.hpp"
#include "sccount/stft.hpp"

namespace sccount {

using Multichannel = std::vector<std::vector<double>>;  // [channel][sample]

enum class NoiseKind { white, diffuse };

inline NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "white" || s == "spatially-white") return NoiseKind::white;
  if (s == "diffuse" || s == "diffuse-approximation") return NoiseKind::diffuse;
  throw UsageError("unknown noise kind '" + s + "'");
}

inline const char* to_string(NoiseKind k) { return k == NoiseKind::white ? "white" : "diffuse"; }

struct SceneConfig {
  std::size_t M = 4;
  int K_max = 4;
  double duration = 20.0;  // seconds
  double event_min = 2.0;  // seconds between activity events
  double event_max = 5.0;
  double snr_min_db = 5.0;
  double snr_max_db = 15.0;
  bool allow_deactivations = false;
  NoiseKind noise_kind = NoiseKind::white;
  std::uint64_t seed = 1;
  double sample_rate = 8000.0;
  // Upper bound on activity events; negative means unlimited. Zero yields a
  // noise-only scene.
  int max_events = -1;
  // Std of the log source power envelope (natural log units).
  double envelope_log_std = 1.0;

  void validate() const {
    detail::require(M >= 2 && M <= kMaxChannels, "scene: M must be in [2, 6]");
    detail::require(K_max >= 1, "scene: K_max must be >= 1");
    detail::require(duration > 0.0, "scene: duration must be positive");
    detail::require(event_min > 0.0 && event_min <= event_max, "scene: need 0 < event_min <= event_max");
    detail::require(snr_min_db <= snr_max_db, "scene: need snr_min <= snr_max");
    detail::require(sample_rate > 0.0, "scene: sample_rate must be positive");
    detail::require(envelope_log_std >= 0.0, "scene: envelope_log_std must be >= 0");
  }

  static SceneConfig dataset_a() { return SceneConfig{}; }
  static SceneConfig dataset_b() {
    SceneConfig c;
    c.duration = 60.0;
    c.allow_deactivations = true;
    return c;
  }
};

struct ActivityInterval {
  std::size_t on = 0;   // first sample
  std::size_t off = 0;  // one past the last sample
};

struct SourceSpec {
  std::vector<double> gains;   // per microphone
  std::vector<double> delays;  // per microphone, seconds
  std::vector<ActivityInterval> activity;  // disjoint, sorted, in samples
  std::vector<double> power_envelope;      // per STFT frame, mean of phi over the frame

  cplx atf(std::size_t m, double freq_hz) const {
    return gains[m] * std::polar(1.0, -2.0 * std::numbers::pi * freq_hz * delays[m]);
  }
  // One-sided ATF matrix on the STFT bin grid, [f][m].
  std::vector<std::vector<cplx>> atf_matrix(const StftConfig& stft) const {
    std::vector<std::vector<cplx>> out(stft.num_bins(), std::vector<cplx>(gains.size()));
    for (std::size_t f = 0; f < out.size(); ++f) {
      const double hz = static_cast<double>(f) * stft.sample_rate / static_cast<double>(stft.frame_len);
      for (std::size_t m = 0; m < gains.size(); ++m) out[f][m] = atf(m, hz);
    }
    return out;
  }
  bool active_at(std::size_t n) const {
    return std::any_of(activity.begin(), activity.end(),
                       [n](const ActivityInterval& a) { return n >= a.on && n < a.off; });
  }
};

struct SceneEvent {
  std::size_t sample = 0;
  int source = 0;
  int delta = 0;  // +1 activation, -1 deactivation
};

struct Scene {
  SceneConfig config;
  Multichannel samples;                  // [m][n]
  std::vector<Multichannel> components;  // [k][m][n]
  Multichannel noise;                    // [m][n]
  std::vector<SourceSpec> sources;
  std::vector<SceneEvent> events;
  double snr_db = 0.0;  // drawn target

  std::size_t num_samples() const { return samples.empty() ? 0 : samples[0].size(); }
  int intended_count_at(std::size_t n) const {
    int c = 0;
    for (const auto& s : sources) c += s.active_at(n) ? 1 : 0;
    return c;
  }
};

struct SceneTruth {
  std::vector<std::vector<std::uint8_t>> indicators;  // [k][t]
  std::vector<int> count;                             // [t]

  std::size_t num_frames() const { return count.size(); }
  std::size_t num_sources() const { return indicators.size(); }
};

namespace detail {

// Half spectra (n/2 + 1 bins) of real signals; the FFT object must have the
// HalfSpectrum flag set.
inline std::vector<cplx> real_fft(Eigen::FFT<double>& fft, const std::vector<double>& x) {
  std::vector<cplx> spec;
  fft.fwd(spec, x);
  return spec;
}

inline std::vector<double> real_ifft(Eigen::FFT<double>& fft, const std::vector<cplx>& spec, std::size_t n) {
  std::vector<double> out;
  fft.inv(out, spec, static_cast<Eigen::Index>(n));
  return out;
}

inline double bin_frequency(std::size_t k, std::size_t n, double fs) {
  const double kk = k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
  return kk * fs / static_cast<double>(n);
}

// out += spec * (far-field response of one microphone), over the half
// spectrum of an n-point real transform. The phase advances by recurrence and
// is re-anchored every 64 bins.
inline void accumulate_atf(const std::vector<cplx>& spec, std::size_t n, double gain, double delay, double fs,
                           std::vector<cplx>& out) {
  const double dphi = -2.0 * std::numbers::pi * fs * delay / static_cast<double>(n);
  const cplx rot = std::polar(1.0, dphi);
  cplx h;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (k % 64 == 0) h = std::polar(gain, dphi * static_cast<double>(k));
    cplx hk = h;
    if (n % 2 == 0 && k == n / 2) hk = cplx(h.real(), 0.0);  // keep the Nyquist bin real
    out[k] += spec[k] * hk;
    h *= rot;
  }
}

inline std::vector<double> white_noise(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

// Half spectrum of n i.i.d. unit Gaussian samples, drawn directly.
inline std::vector<cplx> white_noise_spectrum(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 * static_cast<double>(n)));
  std::vector<cplx> spec(n / 2 + 1);
  for (auto& v : spec) v = cplx(g(rng), g(rng));
  spec[0] = std::sqrt(2.0) * spec[0].real();
  if (n % 2 == 0) spec[n / 2] = std::sqrt(2.0) * spec[n / 2].real();
  return spec;
}

struct Geometry {
  std::vector<std::array<double, 3>> mics;
};

inline constexpr double kSpeedOfSound = 343.0;
inline constexpr double kArrayHalfWidth = 0.09;  // metres
inline constexpr double kRampSeconds = 0.010;
inline constexpr double kEnvelopeCutoffHz = 4.0;
inline constexpr std::size_t kDiffuseSources = 24;
inline constexpr double kDiffuseFloorDb = -20.0;

inline SourceSpec random_atf(std::mt19937_64& rng, const Geometry& geo) {
  std::uniform_real_distribution<double> az(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> el(-0.3, 0.3);
  std::uniform_real_distribution<double> gain(0.5, 1.0);
  const double a = az(rng);
  const double e = el(rng);
  const std::array<double, 3> u{std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e)};
  SourceSpec s;
  for (const auto& p : geo.mics) {
    s.gains.push_back(gain(rng));
    s.delays.push_back(-(p[0] * u[0] + p[1] * u[1] + p[2] * u[2]) / kSpeedOfSound);
  }
  return s;
}

// Speech-like syllabic power envelope: exp of a 4 Hz low-passed Gaussian
// process, normalised to unit mean power.
inline std::vector<double> power_envelope(std::mt19937_64& rng, Eigen::FFT<double>& fft,
                                          std::size_t n, double fs, double log_std) {
  auto spec = real_fft(fft, white_noise(rng, n));
  for (std::size_t k = 0; k < spec.size(); ++k)
    if (bin_frequency(k, n, fs) > kEnvelopeCutoffHz) spec[k] = 0.0;
  auto e = real_ifft(fft, spec, n);
  double var = 0.0;
  for (double v : e) var += v * v;
  const double sd = std::sqrt(var / static_cast<double>(n));
  double mean = 0.0;
  for (auto& v : e) {
    v = sd > 0.0 ? std::exp(log_std * v / sd) : 1.0;
    mean += v;
  }
  mean /= static_cast<double>(n);
  for (auto& v : e) v /= mean;
  return e;
}

inline double gate_value(const std::vector<ActivityInterval>& activity, std::size_t n, std::size_t ramp) {
  for (const auto& a : activity) {
    if (n < a.on || n >= a.off) continue;
    const std::size_t from_on = n - a.on;
    const std::size_t to_off = a.off - 1 - n;
    const std::size_t edge = std::min(from_on, to_off);
    if (edge >= ramp) return 1.0;
    return 0.5 - 0.5 * std::cos(std::numbers::pi * (static_cast<double>(edge) + 0.5) / static_cast<double>(ramp));
  }
  return 0.0;
}

}  // namespace detail

inline std::vector<SceneEvent> draw_events(const SceneConfig& cfg, std::mt19937_64& rng, std::size_t num_samples) {
  std::uniform_real_distribution<double> gap(cfg.event_min, cfg.event_max);
  std::bernoulli_distribution coin(0.5);
  std::vector<bool> active(static_cast<std::size_t>(cfg.K_max), false);
  std::vector<SceneEvent> events;
  int count = 0;
  double t = gap(rng);
  while (t < cfg.duration) {
    if (cfg.max_events >= 0 && static_cast<int>(events.size()) >= cfg.max_events) break;
    int delta;
    if (!cfg.allow_deactivations) {
      if (count == cfg.K_max) break;
      delta = +1;
    } else if (count == 0) {
      delta = +1;
    } else if (count == cfg.K_max) {
      delta = -1;
    } else {
      delta = coin(rng) ? +1 : -1;
    }
    std::vector<int> candidates;
    for (int k = 0; k < cfg.K_max; ++k)
      if (active[static_cast<std::size_t>(k)] == (delta < 0)) candidates.push_back(k);
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const int k = candidates[pick(rng)];
    active[static_cast<std::size_t>(k)] = delta > 0;
    count += delta;
    const auto n = static_cast<std::size_t>(std::llround(t * cfg.sample_rate));
    if (n >= num_samples) break;
    events.push_back({n, k, delta});
    t += gap(rng);
  }
  return events;
}

inline Scene generate_scene(const SceneConfig& cfg, const StftConfig& grid = {}) {
  cfg.validate();
  const double fs = cfg.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration * fs));
  detail::require(n >= 2, "scene: duration too short");
  const std::size_t M = cfg.M;
  const auto K = static_cast<std::size_t>(cfg.K_max);

  std::mt19937_64 rng(cfg.seed);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);

  Scene scene;
  scene.config = cfg;

  detail::Geometry geo;
  std::uniform_real_distribution<double> pos(-detail::kArrayHalfWidth, detail::kArrayHalfWidth);
  for (std::size_t m = 0; m < M; ++m) geo.mics.push_back({pos(rng), pos(rng), pos(rng)});

  std::uniform_real_distribution<double> snr(cfg.snr_min_db, cfg.snr_max_db);
  scene.snr_db = snr(rng);
  scene.events = draw_events(cfg, rng, n);

  for (std::size_t k = 0; k < K; ++k) scene.sources.push_back(detail::random_atf(rng, geo));
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<std::size_t> opens;
    for (const auto& e : scene.events) {
      if (static_cast<std::size_t>(e.source) != k) continue;
      if (e.delta > 0) {
        scene.sources[k].activity.push_back({e.sample, n});
      } else {
        scene.sources[k].activity.back().off = e.sample;
      }
    }
  }

  const auto ramp = static_cast<std::size_t>(std::llround(detail::kRampSeconds * fs));
  scene.components.assign(K, Multichannel(M, std::vector<double>(n, 0.0)));
  double comp_energy = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    // Draw every source's signal regardless of activity so that the random
    // stream layout does not depend on the event pattern.
    auto env = detail::power_envelope(rng, fft, n, fs, cfg.envelope_log_std);
    auto carrier = detail::white_noise(rng, n);
    auto& src = scene.sources[k];
    if (grid.frame_len <= n) {
      const std::size_t T = grid.num_frames(n);
      src.power_envelope.resize(T);
      for (std::size_t t = 0; t < T; ++t) {
        double acc = 0.0;
        for (std::size_t i = 0; i < grid.frame_len; ++i) acc += env[t * grid.frame_shift + i];
        src.power_envelope[t] = acc / static_cast<double>(grid.frame_len);
      }
    }
    if (src.activity.empty()) continue;
    for (std::size_t i = 0; i < n; ++i) carrier[i] *= std::sqrt(env[i]);
    const auto spec = detail::real_fft(fft, carrier);
    for (std::size_t m = 0; m < M; ++m) {
      std::vector<cplx> filtered(spec.size());
      detail::accumulate_atf(spec, n, src.gains[m], src.delays[m], fs, filtered);
      const auto rendered = detail::real_ifft(fft, filtered, n);
      auto& out = scene.components[k][m];
      for (std::size_t i = 0; i < n; ++i) {
        const double g = detail::gate_value(src.activity, i, ramp);
        out[i] = g * rendered[i];
        comp_energy += out[i] * out[i];
      }
    }
  }

  scene.noise.assign(M, std::vector<double>(n, 0.0));
  if (cfg.noise_kind == NoiseKind::white) {
    for (std::size_t m = 0; m < M; ++m) scene.noise[m] = detail::white_noise(rng, n);
  } else {
    std::vector<std::vector<cplx>> acc(M, std::vector<cplx>(n / 2 + 1));
    for (std::size_t j = 0; j < detail::kDiffuseSources; ++j) {
      const auto atf = detail::random_atf(rng, geo);
      const auto spec = detail::white_noise_spectrum(rng, n);
      for (std::size_t m = 0; m < M; ++m) detail::accumulate_atf(spec, n, atf.gains[m], atf.delays[m], fs, acc[m]);
    }
    const double floor_gain = std::pow(10.0, detail::kDiffuseFloorDb / 20.0);
    for (std::size_t m = 0; m < M; ++m) {
      scene.noise[m] = detail::real_ifft(fft, acc[m], n);
      double p = 0.0;
      for (double v : scene.noise[m]) p += v * v;
      const double rms = std::sqrt(p / static_cast<double>(n));
      const auto floor = detail::white_noise(rng, n);
      for (std::size_t i = 0; i < n; ++i) scene.noise[m][i] += floor_gain * rms * floor[i];
    }
  }

  double noise_energy = 0.0;
  for (const auto& ch : scene.noise)
    for (double v : ch) noise_energy += v * v;
  if (comp_energy > 0.0 && noise_energy > 0.0) {
    const double g = std::sqrt(comp_energy / (noise_energy * std::pow(10.0, scene.snr_db / 10.0)));
    for (auto& ch : scene.noise)
      for (auto& v : ch) v *= g;
  }

  scene.samples.assign(M, std::vector<double>(n, 0.0));
  double peak = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = scene.noise[m][i];
      for (std::size_t k = 0; k < K; ++k) v += scene.components[k][m][i];
      scene.samples[m][i] = v;
      peak = std::max(peak, std::abs(v));
    }
  }
  // Common rescale to a peak of 0.5 leaves the SNR untouched.
  if (peak > 0.0) {
    const double s = 0.5 / peak;
    auto rescale = [s](Multichannel& x) {
      for (auto& ch : x)
        for (auto& v : ch) v *= s;
    };
    rescale(scene.samples);
    rescale(scene.noise);
    for (auto& c : scene.components) rescale(c);
  }
  return scene;
}

// Broadband SNR in dB measured from the returned components and noise.
inline double measured_snr_db(const Scene& scene) {
  double c = 0.0;
  double v = 0.0;
  for (const auto& comp : scene.components)
    for (const auto& ch : comp)
      for (double x : ch) c += x * x;
  for (const auto& ch : scene.noise)
    for (double x : ch) v += x * x;
  return 10.0 * std::log10(c / v);
}

// Power-based VAD on each source component: I_{k,t} = 1 iff the mean power of
// component k over frame t exceeds `vad_threshold_db` relative to the
// component's mean power over its nonzero samples.
inline SceneTruth ground_truth_count(const std::vector<Multichannel>& components, const StftConfig& grid,
                                     double vad_threshold_db = -35.0) {
  detail::require(!components.empty(), "ground_truth_count: no components");
  grid.validate();
  const std::size_t n = components[0].empty() ? 0 : components[0][0].size();
  detail::require(n >= grid.frame_len, "ground_truth_count: components shorter than one frame");
  const std::size_t T = grid.num_frames(n);

  SceneTruth truth;
  truth.indicators.assign(components.size(), std::vector<std::uint8_t>(T, 0));
  truth.count.assign(T, 0);
  const double rel = std::pow(10.0, vad_threshold_db / 10.0);

  std::vector<double> prefix(n + 1);
  for (std::size_t k = 0; k < components.size(); ++k) {
    const auto& comp = components[k];
    detail::require(!comp.empty(), "ground_truth_count: component without channels");
    double total = 0.0;
    std::size_t nonzero = 0;
    prefix[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double p = 0.0;
      for (const auto& ch : comp) p += ch[i] * ch[i];
      total += p;
      nonzero += p > 0.0 ? 1 : 0;
      prefix[i + 1] = prefix[i] + p;
    }
    if (nonzero == 0) continue;
    const double threshold = rel * total / static_cast<double>(nonzero);
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t a = t * grid.frame_shift;
      const double frame_power = (prefix[a + grid.frame_len] - prefix[a]) / static_cast<double>(grid.frame_len);
      if (frame_power > threshold) {
        truth.indicators[k][t] = 1;
        ++truth.count[t];
      }
    }
  }
  return truth;
}

inline void write_truth_sidecar(std::ostream& os, const SceneTruth& truth) {
  for (std::size_t t = 0; t < truth.num_frames(); ++t) {
    os << t << ' ' << truth.count[t];
    for (const auto& ind : truth.indicators) os << ' ' << static_cast<int>(ind[t]);
    os << '\n';
  }
}

inline SceneTruth read_truth_sidecar(std::istream& is) {
  SceneTruth truth;
  std::string line;
  std::size_t expect = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::size_t t = 0;
    int k = 0;
    if (!(ls >> t >> k)) throw FormatError("truth sidecar: malformed line '" + line + "'");
    if (t != expect) throw FormatError("truth sidecar: expected frame " + std::to_string(expect));
    std::vector<int> ind;
    int v = 0;
    while (ls >> v) ind.push_back(v);
    if (expect == 0) truth.indicators.assign(ind.size(), {});
    if (ind.size() != truth.indicators.size())
      throw FormatError("truth sidecar: inconsistent indicator count at frame " + std::to_string(t));
    for (std::size_t i = 0; i < ind.size(); ++i) truth.indicators[i].push_back(static_cast<std::uint8_t>(ind[i] != 0));
    truth.count.push_back(k);
    ++expect;
  }
  return truth;
}

inline SceneTruth read_truth_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open truth sidecar " + path);
  return read_truth_sidecar(in);
}

}  // namespace sccount
