#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "pdvoice/audio.hpp"
#include "pdvoice/experiment.hpp"
#include "pdvoice/learners.hpp"
#include "pdvoice/mfcc.hpp"
#include "pdvoice/random.hpp"
#include "pdvoice/stats.hpp"

using namespace pdvoice;

namespace {

AudioClip noise_clip(int sr, double seconds) {
  Rng rng(1);
  AudioClip c;
  c.sample_rate = sr;
  c.samples.resize(static_cast<std::size_t>(sr * seconds));
  for (auto& v : c.samples) v = rng.uniform(-0.5, 0.5);
  return c;
}

LabeledDataset blobs(std::size_t n, std::size_t d) {
  Rng rng(7);
  LabeledDataset ds;
  ds.features = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i % 3 == 0 ? 0 : 1;
    ds.labels.push_back(y);
    for (std::size_t k = 0; k < d; ++k) ds.features(i, k) = rng.normal() + (y ? 0.8 : -0.8);
  }
  return ds;
}

}  // namespace

static void BM_Mfcc16k(benchmark::State& state) {
  auto clip = noise_clip(16000, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(mfcc(clip, MfccParams{}));
}
BENCHMARK(BM_Mfcc16k)->Unit(benchmark::kMicrosecond);

static void BM_Resample44kTo16k(benchmark::State& state) {
  auto clip = noise_clip(44100, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(resample(clip, 16000));
}
BENCHMARK(BM_Resample44kTo16k)->Unit(benchmark::kMillisecond);

static void BM_ExtractFeatures(benchmark::State& state) {
  auto clip = noise_clip(static_cast<int>(state.range(0)), 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(clip, MfccParams{}));
}
BENCHMARK(BM_ExtractFeatures)->Arg(16000)->Arg(44100)->Arg(48000)->Unit(benchmark::kMillisecond);

static void BM_Fit(benchmark::State& state) {
  const auto kind = kAllModelKinds[static_cast<std::size_t>(state.range(0))];
  auto ds = blobs(static_cast<std::size_t>(state.range(1)), 13);
  state.SetLabel(std::string(model_id(kind)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fit(ClassifierSpec::defaults(kind), {ds.features, ds.labels}, LabeledView{ds.features, ds.labels}, 3));
  }
}
BENCHMARK(BM_Fit)->ArgsProduct({{0, 1, 2, 3, 4}, {100, 400}})->Unit(benchmark::kMillisecond);

static void BM_StatsChain(benchmark::State& state) {
  Rng rng(5);
  std::vector<SampleGroup> groups;
  for (int g = 0; g < 5; ++g) {
    std::vector<double> v(static_cast<std::size_t>(state.range(0)));
    for (auto& x : v) x = std::round((0.95 + 0.01 * g + 0.01 * rng.normal()) * 100) / 100;
    groups.push_back({"m" + std::to_string(g), v});
  }
  for (auto _ : state) {
    for (const auto& g : groups) benchmark::DoNotOptimize(shapiro_wilk(g.values));
    benchmark::DoNotOptimize(levene(groups));
    benchmark::DoNotOptimize(kruskal_wallis(groups));
    benchmark::DoNotOptimize(compact_letters(dunn_bonferroni(groups), 0.05));
  }
}
BENCHMARK(BM_StatsChain)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_OneRunAllModels(benchmark::State& state) {
  auto ds = blobs(180, 13);
  ExperimentConfig c;
  c.dataset.path = "in-memory";
  c.models = ExperimentConfig::default_models();
  c.runs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c, ds));
}
BENCHMARK(BM_OneRunAllModels)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
