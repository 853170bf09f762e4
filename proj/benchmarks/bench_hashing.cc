#include <benchmark/benchmark.h>

#include "emdict/bitvec.hpp"
#include "emdict/hashing.hpp"

using namespace emdict;

static void BM_PolyHashEval(benchmark::State& state) {
    const PolyHash h(1, static_cast<unsigned>(state.range(0)));
    std::uint64_t key = 0x1234;
    for (auto _ : state) {
        benchmark::DoNotOptimize(h.eval(key));
        key += 0x9e3779b9;
    }
}
BENCHMARK(BM_PolyHashEval)->Arg(4)->Arg(36)->Arg(40);

static void BM_PartitionHash(benchmark::State& state) {
    const PolyHash h(1, 36);
    std::uint64_t key = 7;
    for (auto _ : state) {
        benchmark::DoNotOptimize(partition_hash(h, key, 4096, 256));
        key += 0x9e3779b9;
    }
}
BENCHMARK(BM_PartitionHash);

static void BM_BitVecFields(benchmark::State& state) {
    BitVec v(4096);
    std::uint64_t pos = 0;
    for (auto _ : state) {
        v.set_bits(pos % 4000, 40, pos);
        benchmark::DoNotOptimize(v.get_bits(pos % 4000, 40));
        pos += 37;
    }
}
BENCHMARK(BM_BitVecFields);
