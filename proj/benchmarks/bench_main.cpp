#include "vlc/io.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace vlc;

namespace {

const io::SceneDocument& fixture(const std::string& name) {
    static std::map<std::string, io::SceneDocument> cache;
    auto it = cache.find(name);
    if (it == cache.end()) {
        it = cache.emplace(name, io::parse_scene(io::read_file(std::string(VLC_FIXTURE_DIR) + "/" + name + ".json")))
                 .first;
    }
    return it->second;
}

void BM_Identify(benchmark::State& state, const std::string& name) {
    const auto& doc = fixture(name);
    const scale::ScaleConfig config;
    for (auto _ : state) {
        benchmark::DoNotOptimize(scale::identify(doc.scene, doc.paths.front().line, config));
    }
}

void BM_IdentifyCached(benchmark::State& state) {
    const auto& doc = fixture("old_parkland");
    const auto path = geometry::make_nav_path(doc.scene, doc.paths.front().line);
    metrics::MetricCache cache;
    for (auto _ : state) {
        benchmark::DoNotOptimize(scale::identify(doc.scene, path, {}, &cache));
    }
}

void BM_Visibility(benchmark::State& state) {
    const auto& doc = fixture("old_parkland");
    const auto path = geometry::make_nav_path(doc.scene, doc.paths.front().line);
    const auto mode = state.range(0) == 0 ? metrics::VisibilityMode::Endpoint : metrics::VisibilityMode::RemainingPath;
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::visibility_metric(doc.scene, path, 1.0, mode));
    }
}

void BM_OrderFit(benchmark::State& state) {
    const auto& doc = fixture(state.range(0) == 0 ? "old_parkland" : "new_parkland");
    const auto path = geometry::make_nav_path(doc.scene, doc.paths.front().line);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::order_metric(doc.scene, path));
    }
}

void BM_ManipulateOldParkland(benchmark::State& state) {
    const auto& doc = fixture("old_parkland");
    const manip::Morphology m{doc.scene, doc.paths.front().line};
    manip::ManipulationRequest req;
    req.target_class = 3;
    for (auto _ : state) {
        const auto r = manip::manipulate(m, req, {});
        state.counters["evaluations"] = static_cast<double>(r.evaluations);
    }
}

void BM_SceneRoundTrip(benchmark::State& state) {
    const auto& doc = fixture("old_parkland");
    for (auto _ : state) {
        benchmark::DoNotOptimize(io::parse_scene(io::canonical(io::to_json(doc))));
    }
}

} // namespace

BENCHMARK_CAPTURE(BM_Identify, empty_corridor, std::string("empty_corridor"));
BENCHMARK_CAPTURE(BM_Identify, zigzag, std::string("zigzag"));
BENCHMARK_CAPTURE(BM_Identify, old_parkland, std::string("old_parkland"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Identify, new_parkland, std::string("new_parkland"))->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IdentifyCached)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Visibility)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OrderFit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ManipulateOldParkland)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK(BM_SceneRoundTrip)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
