#include <random>

#include <benchmark/benchmark.h>

#include <igk/clip.hpp>
#include <igk/metrics.hpp>
#include <igk/rotmath.hpp>
#include <igk/skeleton.hpp>
#include <igk/synth.hpp>

using namespace igk;

namespace {

const Skeleton& skel() { return Skeleton::default_profile(); }

MotionClip clip_of(Intent intent, std::size_t frames) {
  Scenario sc;
  sc.intent = intent;
  sc.trajectory = TrajectoryKind::Left2Right;
  sc.frames = frames;
  sc.spans = {{0, frames}};
  return build_scenario(sc, skel(), 1, "bench");
}

FeatureSet random_features(Eigen::Index n, Eigen::Index d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  FeatureSet f;
  f.samples.resize(n, d);
  for (Eigen::Index i = 0; i < f.samples.size(); ++i) f.samples.data()[i] = normal(rng);
  return f;
}

}  // namespace

static void BM_Decode6d(benchmark::State& state) {
  Rotation6D r;
  r.a1 = Vec3(0.9, 0.1, -0.2);
  r.a2 = Vec3(0.2, 1.1, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(decode_6d(r));
}
BENCHMARK(BM_Decode6d);

static void BM_ForwardKinematics(benchmark::State& state) {
  const MotionClip clip = clip_of(Intent::PointRight, 1);
  for (auto _ : state) benchmark::DoNotOptimize(forward_kinematics(skel(), clip.poses[0]));
}
BENCHMARK(BM_ForwardKinematics);

static void BM_IadSeries(benchmark::State& state) {
  const auto intent = static_cast<Intent>(state.range(0));
  const MotionClip clip = clip_of(intent, 300);
  const auto positions = clip_positions(skel(), clip);
  for (auto _ : state) {
    benchmark::DoNotOptimize(iad_series(skel(), positions, clip.intent.targets, intent));
  }
  state.SetItemsProcessed(state.iterations() * 300);
}
BENCHMARK(BM_IadSeries)->Arg(static_cast<int>(Intent::Gaze))->Arg(static_cast<int>(Intent::PointLeft));

static void BM_Frechet(benchmark::State& state) {
  const auto d = state.range(0);
  const FeatureSet ref = random_features(4 * d, d, 1);
  const FeatureSet gen = random_features(4 * d, d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(frechet_distance(ref, gen));
}
BENCHMARK(BM_Frechet)->Arg(16)->Arg(64)->Arg(256);

static void BM_BuildScenario(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(clip_of(Intent::Gaze, 60));
}
BENCHMARK(BM_BuildScenario);

BENCHMARK_MAIN();
