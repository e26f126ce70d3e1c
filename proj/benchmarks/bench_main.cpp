#include "tunnelfuse/ekf.hpp"
#include "tunnelfuse/kdtree.hpp"
#include "tunnelfuse/lidar_sim.hpp"
#include "tunnelfuse/point_cloud.hpp"
#include "tunnelfuse/registration.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace tunnelfuse {
namespace {

TunnelMap bench_map() {
  MapConfig mc;
  mc.segments = {SegmentSpec::straight(100.0)};
  mc.feature_density = 3.0;
  mc.seed = 3;
  return build_map(mc);
}

PointCloud bench_scan(const TunnelMap& map, const Scene& scene, double x, int h, int v) {
  LidarModel m;
  m.horizontal_rays = h;
  m.vertical_rays = v;
  GroundTruthSample s;
  s.state = StateVector(x, 0, 0, 0, 0, 0, 0);
  std::mt19937_64 rng(1);
  return render_scan(map, scene, s, m, 0.0, rng);
}

void BM_KdTreeBuild(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-20, 20);
  std::vector<Eigen::Vector3d> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  for (auto _ : state) benchmark::DoNotOptimize(KdTree(pts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdTreeBuild)->Arg(1 << 12)->Arg(1 << 16);

void BM_KdTreeKnn(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-20, 20);
  std::vector<Eigen::Vector3d> pts(1 << 16);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  const KdTree tree(pts);
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tree.knn({u(rng), u(rng), u(rng)}, k));
}
BENCHMARK(BM_KdTreeKnn)->Arg(1)->Arg(10);

void BM_RenderScan(benchmark::State& state) {
  const TunnelMap map = bench_map();
  const Scene scene = build_scene(map);
  const int h = static_cast<int>(state.range(0));
  const int v = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(bench_scan(map, scene, 50.0, h, v));
  state.SetItemsProcessed(state.iterations() * h * v);
}
BENCHMARK(BM_RenderScan)->Args({256, 16})->Args({1024, 128})->Unit(benchmark::kMillisecond);

void BM_EstimateNormals(benchmark::State& state) {
  const TunnelMap map = bench_map();
  const Scene scene = build_scene(map);
  const PointCloud c = voxel_downsample(bench_scan(map, scene, 50.0, 256, 16), 0.15);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_normals(c, 10));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.size()));
}
BENCHMARK(BM_EstimateNormals)->Unit(benchmark::kMillisecond);

void BM_RegisterConsecutiveScans(benchmark::State& state) {
  const TunnelMap map = bench_map();
  const Scene scene = build_scene(map);
  const PointCloud a = bench_scan(map, scene, 50.0, 256, 16);
  const PointCloud b = bench_scan(map, scene, 50.3, 256, 16);
  RegistrationParams p;
  p.voxel_size = 0.15;
  for (auto _ : state) {
    benchmark::DoNotOptimize(register_clouds(b, a, Transform3::identity(), p));
  }
}
BENCHMARK(BM_RegisterConsecutiveScans)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  StateVector x(0, 0, 3, 0.1, 0.2, 0.05, 0.0);
  CovarianceMatrix p = CovarianceMatrix::from_diagonal(default_initial_covariance_diagonal());
  const ProcessNoiseParams q;
  for (auto _ : state) {
    auto next = predict(x, p, 0.01, q);
    benchmark::DoNotOptimize(next);
  }
}
BENCHMARK(BM_Predict);

void BM_Correct(benchmark::State& state) {
  const StateVector x(0, 0, 3, 0.1, 0.2, 0.05, 0.0);
  const CovarianceMatrix p = CovarianceMatrix::from_diagonal(default_initial_covariance_diagonal());
  PseudoMeasurement m;
  m.v_meas = 3.1;
  m.psi_dot_meas = 0.04;
  for (auto _ : state) benchmark::DoNotOptimize(correct(x, p, m));
}
BENCHMARK(BM_Correct);

}  // namespace
}  // namespace tunnelfuse

BENCHMARK_MAIN();
