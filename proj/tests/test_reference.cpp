#include "doctest.h"
#include "emdict/hashing.hpp"
#include "emdict/reference.hpp"
#include "emdict/workload.hpp"

using namespace emdict;

TEST_CASE("oracle map: insert/delete/lookup with overwrite semantics") {
    OracleMap o;
    CHECK_FALSE(o.lookup(1).has_value());
    o.insert(1, 10);
    o.erase(1);
    CHECK_FALSE(o.lookup(1).has_value());
    o.insert(1, 11);
    o.insert(1, 12);
    CHECK(o.lookup(1) == 12);
    CHECK(o.op_count() == 4);
    CHECK(o.live_count() == 1);
}

TEST_CASE("baseline: basic semantics incl. tombstones") {
    BaselineConfig cfg;
    cfg.n_max = 1024;
    cfg.cache_words = 1ull << 12;
    cfg.lambda = 4;
    cfg.universe_max = 4096;
    BaselineBufferTree t(cfg);
    CHECK_FALSE(t.lookup(3).has_value());
    t.insert(3, 33);
    CHECK(t.lookup(3) == 33);
    t.insert(3, 34);
    CHECK(t.lookup(3) == 34);
    t.erase(3);
    CHECK_FALSE(t.lookup(3).has_value());
    t.erase(999);
    CHECK_FALSE(t.lookup(999).has_value());
}

TEST_CASE("baseline: oracle equivalence over a mixed workload with rebuilds") {
    for (std::uint64_t seed : {4ull, 5ull}) {
        BaselineConfig cfg;
        cfg.n_max = 2048;
        cfg.cache_words = 1ull << 12;
        cfg.lambda = 8;
        cfg.universe_max = 4096;
        BaselineBufferTree t(cfg);
        OracleMap oracle;
        WorkloadSpec spec;
        spec.n_ops = 60000;
        spec.n_keys = 2048;
        spec.seed = seed;
        WorkloadGen gen(spec);
        for (std::uint64_t i = 0; i < spec.n_ops; ++i) {
            const Op op = gen.next();
            switch (op.kind) {
                case Op::Kind::Insert:
                    t.insert(op.key, op.value);
                    oracle.insert(op.key, op.value);
                    break;
                case Op::Kind::Delete:
                    t.erase(op.key);
                    oracle.erase(op.key);
                    break;
                case Op::Kind::Lookup:
                    REQUIRE(t.lookup(op.key) == oracle.lookup(op.key));
                    break;
            }
        }
        CHECK(t.rebuild_count() >= 1);
    }
}

TEST_CASE("baseline: bit-exact reproducibility given a seed") {
    auto run = [] {
        BaselineConfig cfg;
        cfg.n_max = 1024;
        cfg.cache_words = 1ull << 12;
        cfg.lambda = 4;
        cfg.universe_max = 2048;
        BaselineBufferTree t(cfg);
        std::uint64_t st = 21;
        for (int i = 0; i < 4000; ++i) t.insert(splitmix64(st) % 2048, splitmix64(st));
        std::vector<std::uint64_t> answers;
        for (int k = 0; k < 256; ++k) {
            const auto r = t.lookup(k);
            answers.push_back(r ? *r : ~0ull);
        }
        return std::pair(t.memory().io_stats(), answers);
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}

TEST_CASE("baseline: deeper trees read fewer buffers per lookup as fan-out grows") {
    // lookup I/Os ~ path length x buffer pages: monotone non-increasing depth in lambda
    std::vector<std::uint64_t> depths;
    for (std::uint32_t lam : {2u, 4u, 8u, 16u}) {
        BaselineConfig cfg;
        cfg.n_max = 1ull << 16;
        cfg.lambda = lam;
        cfg.universe_max = 1ull << 17;
        BaselineBufferTree t(cfg);
        depths.push_back(t.depth());
    }
    for (std::size_t i = 1; i < depths.size(); ++i) CHECK(depths[i] <= depths[i - 1]);
}
