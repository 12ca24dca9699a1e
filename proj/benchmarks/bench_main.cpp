#include <benchmark/benchmark.h>

#include <memory>

#include <wireforge/connectivity.hpp>
#include <wireforge/engine.hpp>
#include <wireforge/rasterizer.hpp>
#include <wireforge/testkit/glyphs.hpp>

using namespace wireforge;

namespace {

OptimConfig letters_config(int size) {
    OptimConfig c;
    c.canvas.width = c.canvas.height = size;
    return c;
}

void BM_Render(benchmark::State& state) {
    const auto c = letters_config(static_cast<int>(state.range(0)));
    const auto art = initialize(c);
    const auto wires = project_art(art, ViewId::Z, c);
    const auto strategy = state.range(1) ? RasterPass::Strategy::Binned : RasterPass::Strategy::Naive;
    for (auto _ : state) {
        const RasterPass pass(wires, c.canvas, strategy);
        benchmark::DoNotOptimize(pass.image());
    }
    state.SetLabel(state.range(1) ? "binned" : "naive");
}
BENCHMARK(BM_Render)->Args({128, 1})->Args({256, 1})->Args({512, 1})->Args({256, 0})->Unit(benchmark::kMillisecond);

void BM_RenderBackward(benchmark::State& state) {
    const auto c = letters_config(static_cast<int>(state.range(0)));
    const auto wires = project_art(initialize(c), ViewId::Z, c);
    const Image upstream(c.canvas.width, c.canvas.height, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(render_backward(wires, c.canvas, upstream));
}
BENCHMARK(BM_RenderBackward)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MstLoss(benchmark::State& state) {
    OptimConfig c;
    c.n_wires = static_cast<int>(state.range(0));
    const auto art = initialize(c);
    for (auto _ : state) benchmark::DoNotOptimize(mst_loss_and_grad(art));
}
BENCHMARK(BM_MstLoss)->Arg(30)->Arg(100)->Arg(300)->Unit(benchmark::kMicrosecond);

void BM_Step(benchmark::State& state) {
    auto c = letters_config(static_cast<int>(state.range(0)));
    auto provider = std::make_shared<OfflineProvider>(c.objective);
    const char names[3] = {'X', 'Y', 'Z'};
    for (auto v : kAllViews)
        provider->set_target(v, testkit::glyph_target(names[static_cast<int>(v)], c.canvas.width,
                                                      c.canvas.stroke_width));
    const ProviderDispatch dispatch(provider, nullptr);
    auto run_state = start(c);
    for (auto _ : state) benchmark::DoNotOptimize(step(run_state, c, dispatch, {}));
}
BENCHMARK(BM_Step)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
