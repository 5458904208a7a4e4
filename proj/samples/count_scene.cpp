// Simulates one scene, runs the streaming detector and scores it.
//
//   count_scene [seed] [mics]

#include <cstdio>
#include <cstdlib>

#include "sccount/sccount.hpp"

int main(int argc, char** argv) {
  using namespace sccount;
  SceneConfig sc = SceneConfig::dataset_a();
  sc.seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  sc.M = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 4;

  const StftConfig stft;
  const Scene scene = generate_scene(sc, stft);
  const SceneTruth truth = ground_truth_count(scene.components, stft);

  const auto recs = detect_signal<double>(scene.samples, stft, CovTrackerConfig{}, DetectorConfig{});
  std::vector<int> est;
  for (const auto& r : recs) {
    est.push_back(r.count);
    if (r.t % 40 == 0)
      std::printf("t %4zu  act %.3f  deact %.3f  K_hat %d  K %d\n", r.t, r.gamma_bar_act, r.gamma_bar_deact, r.count,
                  truth.count[r.t]);
  }
  std::printf("snr %.1f dB, accuracy %.1f%%, mae %.3f\n", scene.snr_db, accuracy(est, truth.count),
              mae(est, truth.count));
}
