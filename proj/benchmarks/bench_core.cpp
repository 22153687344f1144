#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "vlmp/data.hpp"
#include "vlmp/gaussian.hpp"
#include "vlmp/gmm.hpp"
#include "vlmp/kmp.hpp"
#include "vlmp/lfekmp.hpp"

using namespace vlmp;

namespace {

ReferenceTrajectory wave(std::size_t n) {
  ReferenceTrajectory ref;
  for (double t : linspace(0.0, 1.0, n)) {
    ref.times.push_back(t);
    ref.states.emplace_back(Eigen::Vector2d(std::sin(6.0 * t), std::cos(4.0 * t)), 1e-3 * Mat::Identity(2, 2));
    ref.extrapolated.push_back(false);
  }
  return ref;
}

const DemoBundle& gshape() {
  static const DemoBundle b = load_demo_csv(std::string(VLMP_BENCH_DATA_DIR) + "/gshape_demos.csv");
  return b;
}

void BM_KmpFit(benchmark::State& state) {
  const auto ref = wave(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kmp_fit(ref, {0.05, 1.0}, 1.0, 60.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KmpFit)->RangeMultiplier(2)->Range(50, 400)->Complexity();

void BM_KmpPredict(benchmark::State& state) {
  const KmpModel model = kmp_fit(wave(110), {0.05, 1.0}, 1.0, 60.0);
  const auto times = linspace(0.0, 1.0, 200);
  for (auto _ : state) benchmark::DoNotOptimize(kmp_predict(model, times));
}
BENCHMARK(BM_KmpPredict);

void BM_GmmFit(benchmark::State& state) {
  const auto& demos = gshape().demos;
  Mat data(3, static_cast<Eigen::Index>(demos.size() * demos.front().size()));
  Eigen::Index c = 0;
  for (const auto& d : demos) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      data(0, c) = d.times[i];
      data.block(1, c, 2, 1) = d.poses[i].position;
      ++c;
    }
  }
  GmmFitOptions opt;
  opt.num_components = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gmm_fit(data, opt));
}
BENCHMARK(BM_GmmFit)->Arg(3)->Arg(5)->Arg(8);

void BM_GaussianProduct(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  const int d = static_cast<int>(state.range(0));
  std::vector<GaussianState> gs;
  for (int k = 0; k < 2; ++k) {
    Mat a(d, d);
    for (int i = 0; i < d * d; ++i) a.data()[i] = n01(rng);
    Vec m(d);
    for (int i = 0; i < d; ++i) m[i] = n01(rng);
    gs.emplace_back(m, a * a.transpose() + Mat::Identity(d, d));
  }
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_product(gs));
}
BENCHMARK(BM_GaussianProduct)->Arg(2)->Arg(3)->Arg(6);

void BM_LfeKmpLearn(benchmark::State& state) {
  const auto& b = gshape();
  for (auto _ : state) benchmark::DoNotOptimize(lfekmp_learn(b.demos, b.demo_frames, LfeKmpConfig{}));
}
BENCHMARK(BM_LfeKmpLearn)->Unit(benchmark::kMillisecond);

void BM_LfeKmpGeneralize(benchmark::State& state) {
  const auto& b = gshape();
  const LfeKmpModel model = lfekmp_learn(b.demos, b.demo_frames, LfeKmpConfig{});
  const TaskParameters frames = perturb_task(b.demo_frames.front(), 3, 0.4, 0.1, workspace_diameter(b.demos));
  const auto times = linspace(0.0, 1.0, 200);
  for (auto _ : state) benchmark::DoNotOptimize(lfekmp_generalize(model, frames, times));
}
BENCHMARK(BM_LfeKmpGeneralize)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
