// Serial reference vs OpenMP index build and classification on generated
// corpora of increasing size.

#include "support/generator.hpp"
#include "support/oracle.hpp"

#include "vlt/classifier.hpp"
#include "vlt/index.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <random>

namespace {

struct Workload {
    vlt::Corpus corpus;
    vlt::FixSpec fix;
};

const Workload& workload(int commits) {
    static std::map<int, Workload> cache;
    auto it = cache.find(commits);
    if (it != cache.end()) return it->second;
    std::mt19937_64 rng(static_cast<std::uint64_t>(commits));
    vlt::testing::GenParams p;
    p.max_projects = 50;
    p.max_commits = commits;
    p.max_paths = 40;
    p.max_blobs = commits / 2;
    p.root_p = 0.01;
    p.merge_p = 0.05;
    p.exact = true;
    Workload w{vlt::testing::random_corpus(rng, p), {}};
    std::optional<vlt::FixSpec> fix;
    while (!fix || vlt::testing::oracle_trace(w.corpus, *fix).seeds.empty()) {
        fix = vlt::testing::random_fix(rng, w.corpus);
    }
    w.fix = *fix;
    return cache.emplace(commits, std::move(w)).first->second;
}

void BM_IndexSerial(benchmark::State& state) {
    const auto& w = workload(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(vlt::build_indexes(w.corpus));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_IndexParallel(benchmark::State& state) {
    const auto& w = workload(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(vlt::build_indexes_parallel(w.corpus));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Classify(benchmark::State& state) {
    const auto& w = workload(static_cast<int>(state.range(0)));
    auto idx = vlt::build_indexes(w.corpus);
    vlt::TraceOptions opts;
    opts.jobs = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(vlt::classify_all(idx, w.corpus, w.fix, opts));
}

BENCHMARK(BM_IndexSerial)->Arg(1000)->Arg(10000)->Arg(40000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IndexParallel)->Arg(1000)->Arg(10000)->Arg(40000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Classify)->Args({10000, 1})->Args({10000, 0})->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
