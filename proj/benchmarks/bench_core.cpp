#include <benchmark/benchmark.h>

#include "salco/crops.hpp"
#include "salco/graph.hpp"
#include "salco/loss.hpp"
#include "salco/model.hpp"
#include "salco/regions.hpp"
#include "salco/rng.hpp"
#include "salco/scene.hpp"
#include "salco/train.hpp"

using namespace salco;

namespace {

FeatureMap random_featmap(uint32_t h, uint32_t w, uint32_t c, uint64_t seed) {
    Rng rng(seed);
    FeatureMap fm(h, w, c);
    for (float& v : fm.data) v = static_cast<float>(rng.uniform01());
    return fm;
}

void BM_BuildGraph(benchmark::State& state) {
    const uint32_t side = static_cast<uint32_t>(state.range(0));
    const FeatureMap fm = random_featmap(side, side, 32, 1);
    for (auto _ : state) benchmark::DoNotOptimize(build_graph(fm));
}
BENCHMARK(BM_BuildGraph)->Arg(8)->Arg(16)->Arg(20);

void BM_SecondEigvec(benchmark::State& state) {
    const uint32_t side = static_cast<uint32_t>(state.range(0));
    const AffinityGraph g = build_graph(random_featmap(side, side, 32, 2));
    for (auto _ : state) benchmark::DoNotOptimize(second_eigvec(g));
}
BENCHMARK(BM_SecondEigvec)->Arg(8)->Arg(16)->Arg(20);

void BM_SaliencyPipeline(benchmark::State& state) {
    const SyntheticScene scene = gen_scene(3, SceneConfig{});
    Rng rng(4);
    const ModelParams params = init_params(ModelConfig{}, rng);
    for (auto _ : state) {
        const FeatureMap fm = encode(params, scene.image);
        const SecondEigvec eig = second_eigvec(build_graph(fm));
        const SaliencyMap s = saliency_from_eigvec(eig.y, fm.dim0, fm.dim1);
        benchmark::DoNotOptimize(connected_regions(threshold_mask(s)));
    }
}
BENCHMARK(BM_SaliencyPipeline);

void BM_EmbedBackward(benchmark::State& state) {
    Rng rng(5);
    ModelParams params = init_params(ModelConfig{}, rng);
    const SyntheticScene scene = gen_scene(6, SceneConfig{});
    const CropSpec spec{0, 0, 96, 96, false, 9};
    const ImageTensor view = extract_view(scene.image, spec, 96, 0.02f);
    const std::vector<double> dp(params.cfg.proj_dim, 0.1);
    Gradients grads(params.cfg);
    for (auto _ : state) {
        const ForwardCache fc = embed(params, view);
        backward(params, fc, dp, grads);
        benchmark::DoNotOptimize(grads);
    }
}
BENCHMARK(BM_EmbedBackward);

void BM_ExtractView(benchmark::State& state) {
    const SyntheticScene scene = gen_scene(7, SceneConfig{});
    const CropSpec spec{8, 8, 64, 80, true, 11};
    for (auto _ : state) benchmark::DoNotOptimize(extract_view(scene.image, spec, 96, 0.02f));
}
BENCHMARK(BM_ExtractView);

void BM_NnSearch(benchmark::State& state) {
    Rng rng(8);
    MemoryQueue q(512, 16);
    std::vector<float> entry(16);
    for (int i = 0; i < 512; ++i) {
        for (float& v : entry) v = static_cast<float>(rng.normal());
        q.push(entry);
    }
    std::vector<double> probe(16);
    for (double& v : probe) v = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(nn_search(q, probe, 5));
}
BENCHMARK(BM_NnSearch);

void BM_GenScene(benchmark::State& state) {
    uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(gen_scene(seed++, SceneConfig{}));
}
BENCHMARK(BM_GenScene);

void BM_TrainEpoch(benchmark::State& state) {
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.num_scenes = 8;
    cfg.queue_capacity = 64;
    const auto dataset = make_dataset(cfg);
    for (auto _ : state) benchmark::DoNotOptimize(train(cfg, dataset));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
