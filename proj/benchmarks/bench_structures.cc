#include <benchmark/benchmark.h>

#include "emdict/dictionary.hpp"
#include "emdict/gadget.hpp"
#include "emdict/paged_memory.hpp"

using namespace emdict;

static void BM_GadgetBulkInsert(benchmark::State& state) {
    const std::uint64_t batch_size = state.range(0);
    std::uint64_t st = 1;
    for (auto _ : state) {
        state.PauseTiming();
        PagedMemory mem(64);
        GadgetParams p = make_gadget_params(16, 4, 4096, 20);
        Gadget g(p, mem);
        std::vector<GadgetElement> batch;
        batch.reserve(batch_size);
        state.ResumeTiming();
        for (std::uint64_t done = 0; done < 1u << 15; done += batch_size) {
            batch.clear();
            for (std::uint64_t i = 0; i < batch_size; ++i) {
                batch.push_back({HashedKey{static_cast<std::uint32_t>(splitmix64(st) % 4096),
                                           static_cast<std::uint32_t>(splitmix64(st) % 16),
                                           static_cast<std::uint32_t>(splitmix64(st) % 16)},
                                 done + i});
            }
            g.bulk_insert(batch);
        }
    }
    state.SetItemsProcessed(state.iterations() * (1u << 15));
}
BENCHMARK(BM_GadgetBulkInsert)->Arg(32)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_DictionaryInsert(benchmark::State& state) {
    std::uint64_t st = 2;
    for (auto _ : state) {
        state.PauseTiming();
        DictConfig cfg;
        cfg.n_max = 1ull << 16;
        cfg.lambda = 16;
        Dictionary d(cfg);
        state.ResumeTiming();
        for (int i = 0; i < 1 << 15; ++i) d.insert(splitmix64(st), splitmix64(st));
    }
    state.SetItemsProcessed(state.iterations() * (1 << 15));
}
BENCHMARK(BM_DictionaryInsert)->Unit(benchmark::kMillisecond);

static void BM_DictionaryLookup(benchmark::State& state) {
    DictConfig cfg;
    cfg.n_max = 1ull << 16;
    cfg.lambda = 16;
    Dictionary d(cfg);
    std::uint64_t st = 3;
    std::vector<std::uint64_t> keys;
    for (int i = 0; i < 1 << 15; ++i) {
        const std::uint64_t k = splitmix64(st);
        keys.push_back(k);
        d.insert(k, i);
    }
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(d.lookup(keys[i % keys.size()]));
        ++i;
    }
}
BENCHMARK(BM_DictionaryLookup);

BENCHMARK_MAIN();
