// sccount command-line tool.
//
// exit codes: 0 ok, 2 usage, 3 data format / io, 4 numeric failure

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sccount/sccount.hpp"

namespace fs = std::filesystem;
using namespace sccount;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFormat = 3;
constexpr int kExitNumeric = 4;

struct Common {
  std::string config_path;
};

RunConfig effective_config(const Common& c) {
  RunConfig cfg;
  if (!c.config_path.empty()) cfg = load_config(c.config_path);
  cfg.sync();
  cfg.validate();
  return cfg;
}

WavData read_input(const std::string& path, const RunConfig& cfg) {
  WavData w = read_wav(path);
  if (w.sample_rate != cfg.stft.sample_rate)
    throw UsageError("sample rate mismatch: " + path + " has " + std::to_string(static_cast<long>(w.sample_rate)) +
                     " Hz, config expects " + std::to_string(static_cast<long>(cfg.stft.sample_rate)) + " Hz");
  if (w.channels.size() < 2 || w.channels.size() > kMaxChannels)
    throw UsageError(path + ": need 2 to 6 channels, got " + std::to_string(w.channels.size()));
  return w;
}

// Output stream that is either a file or stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw FormatError("cannot write " + path);
    }
  }
  std::ostream& get() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

// Count sequence from an estimate file: one frame per line, frame index first,
// count in the last column. '#' lines are skipped.
std::vector<int> read_estimates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open estimate file " + path);
  std::vector<int> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> cols;
    for (std::string c; ls >> c;) cols.push_back(c);
    if (cols.size() < 2) throw FormatError(path + ": malformed line '" + line + "'");
    std::size_t t = 0;
    try {
      t = std::stoul(cols.front());
      out.push_back(std::stoi(cols.back()));
    } catch (const std::exception&) {
      throw FormatError(path + ": malformed line '" + line + "'");
    }
    if (t + 1 != out.size()) throw FormatError(path + ": frames out of order at line '" + line + "'");
  }
  return out;
}

std::vector<double> parse_grid(const std::string& spec) {
  // "lo:hi:step" or "a,b,c"
  std::vector<double> g;
  if (spec.find(':') != std::string::npos) {
    double lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(spec);
    if (!(is >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0 || hi < lo)
      throw UsageError("bad grid '" + spec + "', expected lo:hi:step");
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
  } else {
    std::istringstream is(spec);
    for (std::string tok; std::getline(is, tok, ',');) {
      try {
        g.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw UsageError("bad grid value '" + tok + "'");
      }
    }
  }
  if (g.empty()) throw UsageError("empty grid '" + spec + "'");
  return g;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string preset = "A";
  std::size_t n = 1;
  std::string out_dir;
  std::uint64_t seed = 1;
  bool random_mics = false;
  std::string encoding = "float32";
};

int cmd_simulate(const Common& common, const SimulateArgs& a) {
  RunConfig cfg = effective_config(common);
  SceneConfig base = cfg.scene;
  if (a.preset == "A" || a.preset == "a") {
    base.duration = SceneConfig::dataset_a().duration;
    base.allow_deactivations = false;
  } else if (a.preset == "B" || a.preset == "b") {
    base.duration = SceneConfig::dataset_b().duration;
    base.allow_deactivations = true;
  } else if (a.preset != "config") {
    throw UsageError("unknown preset '" + a.preset + "' (A, B or config)");
  }
  const WavEncoding enc = a.encoding == "pcm16" ? WavEncoding::pcm16 : WavEncoding::float32;
  if (a.encoding != "pcm16" && a.encoding != "float32") throw UsageError("encoding must be pcm16 or float32");

  fs::create_directories(a.out_dir);
  std::ofstream manifest(fs::path(a.out_dir) / "manifest.txt");
  if (!manifest) throw FormatError("cannot write manifest in " + a.out_dir);
  manifest << "# sccount simulate preset=" << a.preset << " n=" << a.n << " seed=" << a.seed << "\n";
  std::ostringstream echo;
  write_config(echo, cfg);
  {
    std::istringstream lines(echo.str());
    for (std::string line; std::getline(lines, line);)
      if (!line.empty()) manifest << "# " << line << "\n";
  }
  manifest << "# wav seed M snr_db truth\n";

  std::mt19937_64 mic_rng(a.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> mic_dist(2, kMaxChannels);
  for (std::size_t i = 0; i < a.n; ++i) {
    SceneConfig sc = base;
    sc.seed = a.seed + i;
    if (a.random_mics) sc.M = mic_dist(mic_rng);
    const Scene scene = generate_scene(sc, cfg.stft);
    const SceneTruth truth = ground_truth_count(scene.components, cfg.stft);
    char stem[32];
    std::snprintf(stem, sizeof stem, "scene_%04zu", i);
    const fs::path wav = fs::path(a.out_dir) / (std::string(stem) + ".wav");
    const fs::path tru = fs::path(a.out_dir) / (std::string(stem) + ".truth.txt");
    write_wav(wav.string(), scene.samples, sc.sample_rate, enc);
    std::ofstream ts(tru);
    if (!ts) throw FormatError("cannot write " + tru.string());
    write_truth_sidecar(ts, truth);
    manifest << wav.filename().string() << ' ' << sc.seed << ' ' << sc.M << ' ' << scene.snr_db << ' '
             << tru.filename().string() << "\n";
  }
  std::cout << "wrote " << a.n << " scenes to " << a.out_dir << "\n";
  return 0;
}

struct ExtractArgs {
  std::string in;
  std::string out;
  std::string truth;
  bool activation_only = false;
};

int cmd_extract(const Common& common, const ExtractArgs& a) {
  const RunConfig cfg = effective_config(common);
  const WavData w = read_input(a.in, cfg);
  const std::size_t F = cfg.stft.num_bins();
  const std::size_t T = cfg.stft.num_frames(w.num_samples());

  std::vector<std::uint8_t> counts(T, kUnknownCount);
  if (!a.truth.empty()) {
    const SceneTruth truth = read_truth_sidecar(a.truth);
    if (truth.num_frames() != T)
      throw FormatError("truth sidecar has " + std::to_string(truth.num_frames()) + " frames, signal has " +
                        std::to_string(T));
    for (std::size_t t = 0; t < T; ++t) counts[t] = static_cast<std::uint8_t>(truth.count[t]);
  }

  const std::size_t n_feat = a.activation_only ? F : 2 * F;
  FeatureFileWriter writer(a.out, static_cast<std::uint32_t>(F), static_cast<std::uint32_t>(n_feat),
                           static_cast<std::uint32_t>(cfg.detector.K_max));
  FeaturePipeline pipe(cfg.stft, cfg.tracker, w.channels.size(), !a.activation_only);
  std::vector<float> row(n_feat);
  pipe.run<double>(w.channels, [&](std::size_t, const GmscFeatures& f) {
    for (std::size_t i = 0; i < F; ++i) row[i] = static_cast<float>(f.activation[i]);
    if (!a.activation_only)
      for (std::size_t i = 0; i < F; ++i) row[F + i] = static_cast<float>(f.deactivation[i]);
    writer.append(row);
  });
  writer.finish(counts);
  std::cout << "wrote " << writer.frames() << " frames x " << n_feat << " features to " << a.out << "\n";
  return 0;
}

struct DetectArgs {
  std::string in;
  std::string out;
};

int cmd_detect(const Common& common, const DetectArgs& a) {
  const RunConfig cfg = effective_config(common);
  const WavData w = read_input(a.in, cfg);
  Output out(a.out);
  auto& os = out.get();
  os << "# t gamma_bar_act gamma_bar_deact K_hat\n";
  FeaturePipeline pipe(cfg.stft, cfg.tracker, w.channels.size(), cfg.detector.enable_deactivation);
  ThresholdDetector det(cfg.detector, cfg.stft.frame_period());
  char line[96];
  pipe.run<double>(w.channels, [&](std::size_t t, const GmscFeatures& f) {
    const int k = det.step(f);
    std::snprintf(line, sizeof line, "%zu %.6f %.6f %d\n", t, det.state().gamma_bar_act, det.state().gamma_bar_deact, k);
    os << line;
  });
  return 0;
}

struct InferArgs {
  std::string features;
  std::string weights;
  std::string out;
};

int cmd_infer(const Common& common, const InferArgs& a) {
  const RunConfig cfg = effective_config(common);
  const std::string weights = a.weights.empty() ? cfg.model_path : a.weights;
  if (weights.empty()) throw UsageError("infer: no weight file (use --weights or [run] model_path)");
  const CountModel model = load_weights(weights);
  const FeatureFile ff = read_feature_file(a.features);
  if (ff.num_features != model.spec().input_dim)
    throw FormatError("infer: feature file has n_feat " + std::to_string(ff.num_features) + ", model expects " +
                      std::to_string(model.spec().input_dim));
  CountEstimator est(model);
  Output out(a.out);
  auto& os = out.get();
  os << "# t K_hat\n";
  for (std::size_t t = 0; t < ff.num_frames(); ++t) os << t << ' ' << argmax_count(est.step(ff.frames[t])) << '\n';
  return 0;
}

struct EvaluateArgs {
  std::vector<std::string> est;
  std::vector<std::string> truth;
  std::string records;
  std::size_t skip = 0;
};

int cmd_evaluate(const EvaluateArgs& a) {
  if (a.est.size() != a.truth.size()) throw UsageError("evaluate: need one truth file per estimate file");
  std::vector<ScoredScene> scenes;
  for (std::size_t i = 0; i < a.est.size(); ++i) {
    ScoredScene s;
    s.id = fs::path(a.est[i]).filename().string();
    s.est = read_estimates(a.est[i]);
    s.truth = read_truth_sidecar(a.truth[i]).count;
    if (s.est.size() != s.truth.size())
      throw FormatError("evaluate: " + a.est[i] + " has " + std::to_string(s.est.size()) + " frames, truth has " +
                        std::to_string(s.truth.size()));
    scenes.push_back(std::move(s));
  }
  const EvalReport rep = evaluate(scenes, a.skip);
  print_report_table(std::cout, rep);
  if (!a.records.empty()) {
    std::ofstream rs(a.records);
    if (!rs) throw FormatError("cannot write " + a.records);
    write_report_records(rs, rep);
  }
  return 0;
}

struct GridArgs {
  std::vector<std::string> in;
  std::vector<std::string> truth;
  std::string grid_act = "0.10:0.50:0.02";
  std::string grid_deact = "0.30:0.90:0.04";
};

int cmd_gridsearch(const Common& common, const GridArgs& a) {
  const RunConfig cfg = effective_config(common);
  if (a.in.size() != a.truth.size()) throw UsageError("gridsearch: need one truth file per wav");
  std::vector<BroadbandTrace> traces;
  for (std::size_t i = 0; i < a.in.size(); ++i) {
    const WavData w = read_input(a.in[i], cfg);
    BroadbandTrace tr =
        broadband_trace<double>(w.channels, cfg.stft, cfg.tracker, cfg.detector.enable_deactivation);
    tr.id = fs::path(a.in[i]).filename().string();
    tr.truth = read_truth_sidecar(a.truth[i]).count;
    if (tr.truth.size() != tr.act.size()) throw FormatError("gridsearch: truth length mismatch for " + a.in[i]);
    traces.push_back(std::move(tr));
  }
  const auto best = grid_search_thresholds(traces, parse_grid(a.grid_act), parse_grid(a.grid_deact), cfg.detector,
                                           cfg.stft.frame_period());
  std::cout << "thr_act " << best.thr_act << " thr_deact " << best.thr_deact << " accuracy " << best.accuracy_pct
            << "\n";
  return 0;
}

struct BenchArgs {
  std::string in;
  std::size_t mics = 4;
  double duration = 60.0;
  std::uint64_t seed = 1;
};

int cmd_bench(const Common& common, const BenchArgs& a) {
  const RunConfig cfg = effective_config(common);
  std::vector<std::vector<double>> samples;
  if (!a.in.empty()) {
    samples = read_input(a.in, cfg).channels;
  } else {
    SceneConfig sc = cfg.scene;
    sc.M = a.mics;
    sc.duration = a.duration;
    sc.seed = a.seed;
    sc.allow_deactivations = true;
    samples = generate_scene(sc, cfg.stft).samples;
  }
  const BenchResult r = bench_pipeline<double>(samples, cfg.stft, cfg.tracker, cfg.detector);
  std::cout << "channels " << samples.size() << " audio_s " << r.audio_seconds << " frames " << r.frames
            << " processing_s " << r.processing_seconds << " rtf " << r.real_time_factor() << "\n";
  return 0;
}

struct InitWeightsArgs {
  std::string kind = "gru";
  std::size_t input_dim = 802;
  std::size_t n_classes = 5;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_init_weights(const InitWeightsArgs& a) {
  ModelKind kind;
  if (a.kind == "gru") kind = ModelKind::gru;
  else if (a.kind == "tcn") kind = ModelKind::tcn;
  else throw UsageError("kind must be gru or tcn");
  const CountModel m = CountModel::random(ModelSpec::defaults(kind, a.input_dim, a.n_classes), a.seed);
  save_weights(a.out, m);
  std::cout << "wrote " << a.kind << " weights (" << m.tensors().size() << " tensors) to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sccount: online sound-source counting with whitened GMSC features"};
  app.require_subcommand(1);
  Common common;
  app.add_option("-c,--config", common.config_path, "configuration file (INI sections)");

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "generate synthetic scenes (WAV + truth sidecar)");
  s_sim->add_option("--preset", sim.preset, "A (20 s, activations), B (60 s, both) or config")->capture_default_str();
  s_sim->add_option("-n,--scenes", sim.n, "number of scenes")->capture_default_str();
  s_sim->add_option("-o,--out", sim.out_dir, "output directory")->required();
  s_sim->add_option("--seed", sim.seed, "seed of the first scene")->capture_default_str();
  s_sim->add_flag("--random-mics", sim.random_mics, "draw M from 2..6 per scene");
  s_sim->add_option("--encoding", sim.encoding, "pcm16 or float32")->capture_default_str();

  ExtractArgs ex;
  auto* s_ex = app.add_subcommand("extract", "WAV -> SCF1 feature file");
  s_ex->add_option("-i,--in", ex.in, "input WAV")->required();
  s_ex->add_option("-o,--out", ex.out, "output SCF1 file")->required();
  s_ex->add_option("--truth", ex.truth, "truth sidecar for the count footer");
  s_ex->add_flag("--activation-only", ex.activation_only, "write only the F activation features");

  DetectArgs de;
  auto* s_de = app.add_subcommand("detect", "threshold detector: WAV -> t gamma_bar_act gamma_bar_deact K_hat");
  s_de->add_option("-i,--in", de.in, "input WAV")->required();
  s_de->add_option("-o,--out", de.out, "output file (default stdout)");

  InferArgs inf;
  auto* s_inf = app.add_subcommand("infer", "neural count estimate: SCF1 + SCW1 -> t K_hat");
  s_inf->add_option("-f,--features", inf.features, "SCF1 feature file")->required();
  s_inf->add_option("-w,--weights", inf.weights, "SCW1 weight file");
  s_inf->add_option("-o,--out", inf.out, "output file (default stdout)");

  EvaluateArgs ev;
  auto* s_ev = app.add_subcommand("evaluate", "framewise accuracy / MAE");
  s_ev->add_option("-e,--est", ev.est, "estimate files (count in last column)")->required();
  s_ev->add_option("-t,--truth", ev.truth, "truth sidecars, same order")->required();
  s_ev->add_option("--records", ev.records, "machine-readable per-scene records");
  s_ev->add_option("--skip-frames", ev.skip, "drop leading frames of each scene (diagnostics)");

  GridArgs gr;
  auto* s_gr = app.add_subcommand("gridsearch", "threshold grid search over scenes");
  s_gr->add_option("-i,--in", gr.in, "input WAVs")->required();
  s_gr->add_option("-t,--truth", gr.truth, "truth sidecars, same order")->required();
  s_gr->add_option("--act-grid", gr.grid_act, "lo:hi:step or comma list")->capture_default_str();
  s_gr->add_option("--deact-grid", gr.grid_deact, "lo:hi:step or comma list")->capture_default_str();

  BenchArgs be;
  auto* s_be = app.add_subcommand("bench", "real-time factor of extract + detect");
  s_be->add_option("-i,--in", be.in, "input WAV (default: simulated scene)");
  s_be->add_option("--mics", be.mics, "channels of the simulated scene")->capture_default_str();
  s_be->add_option("--duration", be.duration, "seconds of the simulated scene")->capture_default_str();
  s_be->add_option("--seed", be.seed, "scene seed")->capture_default_str();

  InitWeightsArgs iw;
  auto* s_iw = app.add_subcommand("init-weights", "write a random-but-valid SCW1 file");
  s_iw->add_option("--kind", iw.kind, "gru or tcn")->capture_default_str();
  s_iw->add_option("--input-dim", iw.input_dim, "feature dimension")->capture_default_str();
  s_iw->add_option("--classes", iw.n_classes, "number of classes")->capture_default_str();
  s_iw->add_option("--seed", iw.seed, "seed")->capture_default_str();
  s_iw->add_option("-o,--out", iw.out, "output SCW1 file")->required();

  auto* s_cfg = app.add_subcommand("config", "print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*s_sim) return cmd_simulate(common, sim);
    if (*s_ex) return cmd_extract(common, ex);
    if (*s_de) return cmd_detect(common, de);
    if (*s_inf) return cmd_infer(common, inf);
    if (*s_ev) return cmd_evaluate(ev);
    if (*s_gr) return cmd_gridsearch(common, gr);
    if (*s_be) return cmd_bench(common, be);
    if (*s_iw) return cmd_init_weights(iw);
    if (*s_cfg) {
      write_config(std::cout, effective_config(common));
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  }
  return kExitUsage;
}
