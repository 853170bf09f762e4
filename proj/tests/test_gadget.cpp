#include <algorithm>
#include <map>
#include <vector>

#include "doctest.h"
#include "emdict/gadget.hpp"
#include "emdict/paged_memory.hpp"

using namespace emdict;

namespace {

// Test-maintained mirror of everything inserted: the brute-force oracle the
// Las Vegas guarantee is checked against.
struct LogOracle {
    std::vector<GadgetElement> elems;

    void insert(const std::vector<GadgetElement>& batch) {
        elems.insert(elems.end(), batch.begin(), batch.end());
    }
    std::vector<std::uint64_t> query(const HashedKey& x) const {
        std::vector<std::uint64_t> out;
        for (const auto& e : elems) {
            if (e.key == x) out.push_back(e.payload);
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

// Independent flush-count calculator.
struct FlushOracle {
    std::uint64_t epb;
    std::uint64_t top_cap;
    std::uint64_t inserted = 0;

    std::uint64_t little() const { return inserted / epb; }
    std::uint64_t big() const { return (little() * epb) / top_cap; }
};

HashedKey random_key(std::uint64_t& state, std::uint64_t b, std::uint32_t t) {
    return HashedKey{static_cast<std::uint32_t>(splitmix64(state) % b),
                     static_cast<std::uint32_t>(splitmix64(state) % t),
                     static_cast<std::uint32_t>(splitmix64(state) % t)};
}

}  // namespace

TEST_CASE("parameter ladder: t=256 recurses through 16 to the base at 4") {
    GadgetParams p = make_gadget_params(256, 4, 4096, 20);
    CHECK(p.t == 256);
    CHECK_FALSE(p.is_base);
    CHECK(p.sqrt_t() == 16);
    GadgetParams mid = make_gadget_params(16, 4, 4096, 12);
    CHECK_FALSE(mid.is_base);
    CHECK(mid.sqrt_t() == 4);
    GadgetParams base = make_gadget_params(4, 4, 4096, 12);
    CHECK(base.is_base);
}

TEST_CASE("parameter padding: lg t = 3 lg t_min pads to 4 lg t_min") {
    // t_min = 4: requesting t = 64 (lg 6 = 3 lg t_min) pads to t = 256
    GadgetParams p = make_gadget_params(64, 4, 4096, 20);
    CHECK(p.t == 256);
    // below t_min pads up to exactly t_min, the base variant
    GadgetParams q = make_gadget_params(2, 4, 4096, 20);
    CHECK(q.t == 4);
    CHECK(q.is_base);
}

TEST_CASE("derived element geometry") {
    GadgetParams p = make_gadget_params(16, 4, 4096, 20);
    CHECK(p.key_bits == 12 + 8);
    CHECK(p.elem_bits == 40);
    CHECK(p.elems_per_block == 102);
    CHECK(p.top_capacity == 4096 * 4);
    CHECK(p.capacity == 2 * 4096 * 16);
    const std::uint64_t t3 = 16ull * 16 * 16;
    CHECK(p.max_log_blocks <= t3);
}

TEST_CASE("lazy construction allocates no pages") {
    PagedMemory mem(64);
    Gadget g(make_gadget_params(16, 4, 4096, 20), mem);
    CHECK(mem.page_count() == 0);
    CHECK(g.size() == 0);
}

TEST_CASE("small insert stays in the tail block with O(1) writes") {
    PagedMemory mem(8);  // b = 512
    Gadget g(make_gadget_params(16, 4, 512, 12), mem);
    std::uint64_t st = 1;
    std::vector<GadgetElement> batch;
    for (int i = 0; i < 5; ++i) batch.push_back({random_key(st, 512, 16), std::uint64_t(i)});
    g.bulk_insert(batch);
    CHECK(g.size() == 5);
    CHECK(g.little_flush_count() == 0);
    CHECK(g.top_count() == 0);
    CHECK(mem.io_stats().writes <= 2);  // tail alloc + tail write
    CHECK(mem.io_stats().reads == 0);
}

TEST_CASE("inserting exactly one block's worth runs one little flush") {
    PagedMemory mem(8);
    GadgetParams p = make_gadget_params(16, 4, 512, 12);
    Gadget g(p, mem);
    std::uint64_t st = 2;
    std::vector<GadgetElement> batch;
    for (std::uint64_t i = 0; i < p.elems_per_block; ++i) {
        batch.push_back({random_key(st, 512, 16), i});
    }
    g.bulk_insert(batch);
    CHECK(g.little_flush_count() == 1);
    CHECK(g.top_count() == p.elems_per_block);
    CHECK(g.big_flush_count() == 0);
}

TEST_CASE("scripted fill hits the analytic big-flush point") {
    PagedMemory mem(8);
    GadgetParams p = make_gadget_params(16, 4, 512, 12);
    Gadget g(p, mem);
    FlushOracle oracle{p.elems_per_block, p.top_capacity};
    std::uint64_t st = 3;

    // fill until just before the first big flush
    while ((oracle.little() + 1) * p.elems_per_block < p.top_capacity) {
        std::vector<GadgetElement> batch;
        for (std::uint64_t i = 0; i < p.elems_per_block; ++i) {
            batch.push_back({random_key(st, 512, 16), oracle.inserted + i});
        }
        g.bulk_insert(batch);
        oracle.inserted += batch.size();
        CHECK(g.big_flush_count() == 0);
    }
    // one more block crosses b*sqrt(t): exactly one big flush, top empties,
    // the bottoms gain everything little-flushed so far
    std::vector<GadgetElement> batch;
    for (std::uint64_t i = 0; i < p.elems_per_block; ++i) {
        batch.push_back({random_key(st, 512, 16), oracle.inserted + i});
    }
    g.bulk_insert(batch);
    oracle.inserted += batch.size();
    CHECK(oracle.big() == 1);
    CHECK(g.big_flush_count() == 1);
    CHECK(g.top_count() == 0);
    CHECK(g.bottom_count() == oracle.little() * p.elems_per_block);
}

TEST_CASE("flush arithmetic is exact over deterministic fills") {
    PagedMemory mem(8);
    GadgetParams p = make_gadget_params(16, 4, 512, 14);
    Gadget g(p, mem);
    FlushOracle oracle{p.elems_per_block, p.top_capacity};
    std::uint64_t st = 4;
    const std::uint64_t sizes[] = {1, 7, 17, 52, 3, 170, 33, 11, 200, 96};
    for (int round = 0; round < 120; ++round) {
        std::vector<GadgetElement> batch;
        const std::uint64_t sz = sizes[round % 10];
        for (std::uint64_t i = 0; i < sz; ++i) {
            batch.push_back({random_key(st, 512, 16), oracle.inserted + i});
        }
        g.bulk_insert(batch);
        oracle.inserted += sz;
        CHECK(g.little_flush_count() == oracle.little());
        CHECK(g.big_flush_count() == oracle.big());
    }
    CHECK(g.big_flush_count() >= 2);  // the fill crossed the trigger at least twice
}

TEST_CASE("query of an empty gadget returns nothing") {
    PagedMemory mem(8);
    Gadget g(make_gadget_params(16, 4, 512, 12), mem);
    CHECK(g.query(HashedKey{1, 2, 3}).empty());
}

TEST_CASE("single insert: exact hit, near-miss in low(s) misses") {
    PagedMemory mem(8);
    Gadget g(make_gadget_params(16, 4, 512, 12), mem);
    const HashedKey x{37, 9, 6};
    g.bulk_insert({{x, 42}});
    CHECK(g.query(x) == std::vector<std::uint64_t>{42});
    HashedKey miss = x;
    miss.s ^= 1;  // differs only in low(s)
    CHECK(g.query(miss).empty());
}

TEST_CASE("multiset semantics: duplicate keys return both backpointers in order") {
    PagedMemory mem(8);
    Gadget g(make_gadget_params(16, 4, 512, 12), mem);
    const HashedKey x{100, 3, 14};
    g.bulk_insert({{x, 5}});
    g.bulk_insert({{x, 9}});
    CHECK(g.query(x) == std::vector<std::uint64_t>{5, 9});
}

TEST_CASE("query equals the brute-force log scan across a randomized fill") {
    for (std::uint64_t seed : {10ull, 11ull}) {
        PagedMemory mem(8);
        GadgetParams p = make_gadget_params(16, 4, 512, 14);
        Gadget g(p, mem);
        LogOracle oracle;
        std::uint64_t st = seed;
        std::uint64_t payload = 0;
        for (int round = 0; round < 60; ++round) {
            std::vector<GadgetElement> batch;
            const std::uint64_t sz = 1 + splitmix64(st) % 120;
            for (std::uint64_t i = 0; i < sz; ++i) {
                // narrow key space to force duplicates and near-misses
                HashedKey k{static_cast<std::uint32_t>(splitmix64(st) % 32),
                            static_cast<std::uint32_t>(splitmix64(st) % 16),
                            static_cast<std::uint32_t>(splitmix64(st) % 16)};
                batch.push_back({k, payload++});
            }
            g.bulk_insert(batch);
            oracle.insert(batch);
            for (int q = 0; q < 20; ++q) {
                const HashedKey x{static_cast<std::uint32_t>(splitmix64(st) % 32),
                                  static_cast<std::uint32_t>(splitmix64(st) % 16),
                                  static_cast<std::uint32_t>(splitmix64(st) % 16)};
                CHECK(g.query(x) == oracle.query(x));
            }
        }
    }
}

TEST_CASE("invariant sweep: every element is in exactly one of tail/top/bottom") {
    PagedMemory mem(8);
    GadgetParams p = make_gadget_params(16, 4, 512, 14);
    Gadget g(p, mem);
    std::uint64_t st = 20;
    std::uint64_t payload = 0;
    for (int round = 0; round < 80; ++round) {
        std::vector<GadgetElement> batch;
        const std::uint64_t sz = 1 + splitmix64(st) % 99;
        for (std::uint64_t i = 0; i < sz; ++i) {
            batch.push_back({random_key(st, 512, 16), payload++});
        }
        g.bulk_insert(batch);
        CHECK(g.debug_classify() == 0);
    }
    CHECK(g.big_flush_count() >= 1);
}

TEST_CASE("query recursion visits Q(t) = 1 + 2 Q(sqrt t) gadget instances") {
    // t = t_min^4 = 256: Q = 7 once every level on the query path is
    // populated; the fill is sized so the tops keep a post-big-flush residue.
    PagedMemory mem(8);
    GadgetParams p = make_gadget_params(256, 4, 512, 14);
    Gadget g(p, mem);
    std::uint64_t st = 30;
    std::vector<GadgetElement> inserted;
    std::uint64_t payload = 0;
    const std::uint64_t blocks = 4089;
    for (std::uint64_t blk = 0; blk < blocks; ++blk) {
        std::vector<GadgetElement> batch;
        for (std::uint64_t i = 0; i < p.elems_per_block; ++i) {
            batch.push_back({random_key(st, 512, 256), payload++ & 0x3fff});
        }
        g.bulk_insert(batch);
        if (blk % 17 == 0) inserted.push_back(batch.front());
    }
    for (std::size_t i = 0; i + 1 < inserted.size(); i += 37) {
        g.query(inserted[i].key);
        CHECK(g.last_query_gadgets_visited() == 7);
    }
}

TEST_CASE("per-level compressed bits per key vary by at most 4x") {
    PagedMemory mem(8);
    GadgetParams p = make_gadget_params(256, 4, 512, 14);
    Gadget g(p, mem);
    std::uint64_t st = 40;
    std::uint64_t payload = 0;
    for (int blk = 0; blk < 2000; ++blk) {
        std::vector<GadgetElement> batch;
        for (std::uint64_t i = 0; i < p.elems_per_block; ++i) {
            batch.push_back({random_key(st, 512, 256), payload++ & 0x3fff});
        }
        g.bulk_insert(batch);
    }
    const GadgetStats s = g.stats();
    REQUIRE(s.per_level_bits_appended.size() >= 3);
    double lo = 1e300, hi = 0;
    for (double bits : std::vector<double>(s.per_level_bits_appended.begin(),
                                           s.per_level_bits_appended.end())) {
        const double per_key = bits / static_cast<double>(payload);
        lo = std::min(lo, per_key);
        hi = std::max(hi, per_key);
    }
    CHECK(hi / lo <= 4.0);
}

TEST_CASE("capacity concentration: bottoms receive at most twice their share") {
    PagedMemory mem(8);
    GadgetParams p = make_gadget_params(64, 8, 512, 14);  // t_min 8: 64 -> 8 base
    Gadget g(p, mem);
    std::uint64_t st = 50;
    std::uint64_t payload = 0;
    std::vector<GadgetElement> batch;
    while (payload + p.elems_per_block <= p.capacity / 2) {
        batch.clear();
        for (std::uint64_t i = 0; i < p.elems_per_block; ++i) {
            batch.push_back({random_key(st, 512, 64), payload++ & 0x3fff});
        }
        g.bulk_insert(batch);
    }
    REQUIRE(g.big_flush_count() >= 1);
    CHECK(g.debug_classify() == 0);
    const std::uint64_t total = g.bottom_count();
    REQUIRE(total > 0);
    const double expected = static_cast<double>(total) / p.sqrt_t();
    for (std::uint64_t c : g.bottom_sizes()) {
        CHECK(static_cast<double>(c) <= 2.0 * expected);
    }
}

TEST_CASE("false positives filtered per query stay at most 1 on average for t >= 64") {
    PagedMemory mem(8);
    GadgetParams p = make_gadget_params(64, 8, 512, 14);
    Gadget g(p, mem);
    std::uint64_t st = 60;
    std::vector<HashedKey> keys;
    std::uint64_t payload = 0;
    for (int blk = 0; blk < 800; ++blk) {
        std::vector<GadgetElement> batch;
        for (std::uint64_t i = 0; i < p.elems_per_block; ++i) {
            const HashedKey k = random_key(st, 512, 64);
            if (keys.size() < 4000) keys.push_back(k);
            batch.push_back({k, payload++});
        }
        g.bulk_insert(batch);
    }
    const std::uint64_t fp_before = g.false_positives_filtered();
    std::uint64_t queries = 0;
    for (std::size_t i = 0; i < keys.size(); i += 2, ++queries) g.query(keys[i]);
    const double fp_rate =
        static_cast<double>(g.false_positives_filtered() - fp_before) / queries;
    CHECK(fp_rate <= 1.0);
}

TEST_CASE("capacity overflow signals needs-rebuild") {
    PagedMemory mem(8);
    GadgetParams p = make_gadget_params(16, 4, 512, 12, /*capacity_override=*/100);
    Gadget g(p, mem);
    std::uint64_t st = 70;
    std::vector<GadgetElement> batch;
    for (int i = 0; i < 100; ++i) batch.push_back({random_key(st, 512, 16), std::uint64_t(i)});
    g.bulk_insert(batch);
    CHECK_THROWS_AS(g.bulk_insert({{random_key(st, 512, 16), 100}}), needs_rebuild);
}

TEST_CASE("stats: empty gadget reports zeros; flush counters and page bound hold") {
    PagedMemory mem(8);
    GadgetParams p = make_gadget_params(16, 4, 512, 14);
    Gadget g(p, mem);
    GadgetStats s0 = g.stats();
    CHECK(s0.element_count == 0);
    CHECK(s0.page_count == 0);
    CHECK(s0.little_flushes == 0);
    CHECK(s0.big_flushes == 0);
    CHECK(s0.false_positives_filtered == 0);

    std::uint64_t st = 80;
    std::uint64_t payload = 0;
    while (g.big_flush_count() == 0) {
        std::vector<GadgetElement> batch;
        for (std::uint64_t i = 0; i < p.elems_per_block; ++i) {
            batch.push_back({random_key(st, 512, 16), payload++ & 0x3fff});
        }
        g.bulk_insert(batch);
    }
    CHECK(g.stats().big_flushes == 1);

    // fill to the nominal operating point (half the hard capacity) and
    // check the measured page bound
    while (payload + p.elems_per_block <= p.capacity / 2) {
        std::vector<GadgetElement> batch;
        for (std::uint64_t i = 0; i < p.elems_per_block; ++i) {
            batch.push_back({random_key(st, 512, 16), payload++ & 0x3fff});
        }
        g.bulk_insert(batch);
    }
    const GadgetStats s = g.stats();
    const double bound = 4.0 * static_cast<double>(p.capacity) * p.elem_bits / 512.0;
    CHECK(static_cast<double>(s.page_count) <= bound);
    CHECK(s.compression_mismatches == 0);
}

TEST_CASE("reset releases every page back to the store") {
    PagedMemory mem(8);
    GadgetParams p = make_gadget_params(16, 4, 512, 12);
    Gadget g(p, mem);
    std::uint64_t st = 90;
    std::uint64_t payload = 0;
    for (int blk = 0; blk < 200; ++blk) {
        std::vector<GadgetElement> batch;
        for (std::uint64_t i = 0; i < p.elems_per_block; ++i) {
            batch.push_back({random_key(st, 512, 16), payload++});
        }
        g.bulk_insert(batch);
    }
    CHECK(mem.live_page_count() > 0);
    g.reset();
    CHECK(mem.live_page_count() == 0);
    CHECK(g.size() == 0);
    // the gadget is reusable after reset
    g.bulk_insert({{HashedKey{1, 1, 1}, 7}});
    CHECK(g.query(HashedKey{1, 1, 1}) == std::vector<std::uint64_t>{7});
}

TEST_CASE("serialize/deserialize round trip preserves contents") {
    PagedMemory mem(8);
    GadgetParams p = make_gadget_params(16, 4, 512, 14);
    Gadget g(p, mem);
    LogOracle oracle;
    std::uint64_t st = 95;
    std::uint64_t payload = 0;
    for (int blk = 0; blk < 150; ++blk) {
        std::vector<GadgetElement> batch;
        for (std::uint64_t i = 0; i < 37; ++i) {
            batch.push_back({random_key(st, 512, 16), payload++});
        }
        g.bulk_insert(batch);
        oracle.insert(batch);
    }
    std::vector<std::uint64_t> stream;
    g.serialize(stream);
    // rehydrate against a snapshot of the memory so ownership stays disjoint
    PagedMemory mem2 = mem;
    std::size_t pos = 0;
    auto g2 = Gadget::deserialize(stream, pos, mem2, 4, 512);
    REQUIRE(g2 != nullptr);
    CHECK(pos == stream.size());
    CHECK(g2->size() == g.size());
    for (int q = 0; q < 200; ++q) {
        const HashedKey x = random_key(st, 512, 16);
        CHECK(g2->query(x) == oracle.query(x));
    }
    std::vector<std::uint64_t> stream2;
    g2->serialize(stream2);
    CHECK(stream == stream2);
}

TEST_CASE("instrumentation paths count zero I/O") {
    PagedMemory mem(8);
    GadgetParams p = make_gadget_params(16, 4, 512, 14);
    Gadget g(p, mem);
    std::uint64_t st = 123;
    std::uint64_t payload = 0;
    for (int blk = 0; blk < 60; ++blk) {
        std::vector<GadgetElement> batch;
        for (std::uint64_t i = 0; i < p.elems_per_block; ++i) {
            batch.push_back({random_key(st, 512, 16), payload++});
        }
        g.bulk_insert(batch);
    }
    const IoStats before = mem.io_stats();
    (void)g.stats();
    (void)g.debug_classify();
    std::vector<GadgetElement> all;
    g.debug_enumerate(all);
    CHECK(mem.io_stats() == before);
    CHECK(all.size() == g.size());
}
