#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "fd/engine.hpp"
#include "fd/metrics.hpp"
#include "fd/noise.hpp"
#include "fd/safc.hpp"
#include "fd/scenes.hpp"

namespace {

fd::VideoTensor uniform_video(const fd::TensorShape& shape, uint64_t seed) {
    fd::NoiseStream stream(fd::SeedSpec{seed, 0, 0});
    fd::VideoTensor out(shape);
    for (double& v : out.data()) v = stream.next_uniform();
    return out;
}

void BM_seed_noise(benchmark::State& state) {
    fd::TensorShape shape{4, uint32_t(state.range(0)), uint32_t(state.range(0)), 1};
    uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fd::seed_noise(fd::SeedSpec{seed++, 0, 0}, shape));
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * shape.total());
}
BENCHMARK(BM_seed_noise)->Arg(32)->Arg(64)->Arg(128);

void BM_spatial_smooth(benchmark::State& state) {
    uint32_t edge = uint32_t(state.range(0));
    fd::AttentionMap a(4, edge, edge);
    fd::NoiseStream stream(fd::SeedSpec{1, 0, 0});
    for (double& v : a.values) v = stream.next_uniform();
    for (auto _ : state) {
        benchmark::DoNotOptimize(fd::spatial_smooth(a, 11));
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(a.size()));
}
BENCHMARK(BM_spatial_smooth)->Arg(32)->Arg(64)->Arg(128);

void BM_distance_transform(benchmark::State& state) {
    uint32_t edge = uint32_t(state.range(0));
    fd::MaskVolume m(4, edge, edge);
    fd::NoiseStream stream(fd::SeedSpec{2, 0, 0});
    for (double& v : m.values) v = stream.next_uniform() < 0.05 ? 1.0 : 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fd::distance_transform(m));
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(m.size()));
}
BENCHMARK(BM_distance_transform)->Arg(32)->Arg(64)->Arg(128);

void BM_ssim(benchmark::State& state) {
    uint32_t edge = uint32_t(state.range(0));
    fd::TensorShape shape{4, edge, edge, 1};
    fd::VideoTensor a = uniform_video(shape, 3);
    fd::VideoTensor b = uniform_video(shape, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fd::ssim(a, b));
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * shape.total());
}
BENCHMARK(BM_ssim)->Arg(32)->Arg(64)->Arg(128);

// Full editing run on a moving-disk scene with the default pipeline
// (velocity-difference masks, 4-sample guidance), the shape a CLI `edit`
// invocation exercises end to end.
void BM_edit_run(benchmark::State& state) {
    fd::SceneSpec spec;
    spec.canvas = {4, uint32_t(state.range(0)), uint32_t(state.range(0)), 1};
    spec.background.value = 0.2;
    fd::ObjectSpec disk;
    disk.shape = fd::ObjectSpec::Shape::disk;
    disk.radius = 3.0;
    disk.appearance = {0.9};
    disk.pos_y = 8.0;
    disk.pos_x = 8.0;
    disk.vel_x = 1.0;
    spec.objects.push_back(disk);
    fd::ConditionEntry src, tar;
    src.appearance = {0.9};
    src.keyword = "disk";
    tar.appearance = {0.35};
    tar.keyword = "disk";
    spec.conditions["src"] = src;
    spec.conditions["tar"] = tar;

    const fd::SeedSpec seed{0, 0, 0};
    fd::SceneBundle bundle = fd::render_scene(spec, seed);
    auto field = std::make_shared<fd::RegistryField>(fd::build_registry(spec, seed));

    fd::SafcOptions so;
    so.provider = std::make_shared<fd::VelocityDifferenceAttention>(*field);
    fd::RunOptions opt;
    opt.safc = so;
    opt.dag = fd::DagConfig{};
    fd::EditSchedule schedule = fd::make_schedule(10, 2);
    fd::Condition c_src{"src", "disk"}, c_tar{"tar", "disk"};

    uint64_t master = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fd::run_edit(bundle.video, c_src, c_tar, schedule, *field,
                                              opt, fd::SeedSpec{master++, 0, 0}));
    }
}
BENCHMARK(BM_edit_run)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
