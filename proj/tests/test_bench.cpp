#include <sstream>

#include "doctest.h"
#include "emdict/workload.hpp"

using namespace emdict;

namespace {

DictConfig bench_config() {
    DictConfig cfg;
    cfg.n_max = 4096;
    cfg.page_words = 64;
    cfg.cache_words = 1ull << 12;
    cfg.lambda = 8;
    cfg.seed = 1;
    return cfg;
}

WorkloadSpec bench_spec(std::uint64_t ops) {
    WorkloadSpec spec;
    spec.n_ops = ops;
    spec.n_keys = 4096;
    spec.seed = 1;
    return spec;
}

}  // namespace

TEST_CASE("workload: mix must sum to 100") {
    WorkloadSpec spec = bench_spec(10);
    spec.insert_pct = 50;
    spec.delete_pct = 50;
    spec.lookup_pct = 50;
    CHECK_THROWS_AS(spec.validate(), bad_parameters);
}

TEST_CASE("workload: generation is deterministic per seed") {
    WorkloadSpec spec = bench_spec(5000);
    WorkloadGen a(spec), b(spec);
    for (int i = 0; i < 5000; ++i) {
        const Op x = a.next();
        const Op y = b.next();
        CHECK(x.kind == y.kind);
        CHECK(x.key == y.key);
        CHECK(x.value == y.value);
    }
}

TEST_CASE("workload: keys stay inside the [2n] universe") {
    WorkloadSpec spec = bench_spec(2000);
    WorkloadGen gen(spec);
    for (int i = 0; i < 2000; ++i) CHECK(gen.next().key < 2 * spec.n_keys);
}

TEST_CASE("verify: zero ops passes trivially") {
    std::ostringstream out, err;
    CHECK(run_verify(bench_spec(0), bench_config(), out, err) == 0);
}

TEST_CASE("verify: clean run passes, corrupted page fails with an op index") {
    std::ostringstream out, err;
    CHECK(run_verify(bench_spec(20000), bench_config(), out, err) == 0);
    CHECK(out.str().find("PASS") != std::string::npos);

    // a near-empty cache so the corrupted page is actually re-read
    DictConfig tiny_cache = bench_config();
    tiny_cache.cache_words = 256;
    std::ostringstream out2, err2;
    VerifyOptions opts;
    opts.corrupt_page = 2;
    opts.corrupt_at_op = 5000;
    CHECK(run_verify(bench_spec(20000), tiny_cache, out2, err2, opts) != 0);
    CHECK(err2.str().find("DISAGREEMENT at op") != std::string::npos);
}

TEST_CASE("sweep: row count, header, and lambda validation") {
    std::ostringstream out, err;
    const int rc = run_sweep(bench_spec(4000), bench_config(), {8, 16}, "both", out, err);
    CHECK(rc == 0);
    std::istringstream lines(out.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == bench_csv_header());
    int rows = 0;
    while (std::getline(lines, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 4);  // 2 structures x 2 lambdas

    std::ostringstream out2, err2;
    CHECK(run_sweep(bench_spec(100), bench_config(), {2}, "both", out2, err2) != 0);
    CHECK(err2.str().find("bad-parameters") != std::string::npos);
}

TEST_CASE("sweep and trace output is byte-identical across runs") {
    std::ostringstream a, b, err;
    REQUIRE(run_sweep(bench_spec(4000), bench_config(), {8}, "both", a, err) == 0);
    REQUIRE(run_sweep(bench_spec(4000), bench_config(), {8}, "both", b, err) == 0);
    CHECK(a.str() == b.str());

    std::ostringstream t1, t2;
    REQUIRE(run_trace(bench_spec(3000), bench_config(), "new", t1, err) == 0);
    REQUIRE(run_trace(bench_spec(3000), bench_config(), "new", t2, err) == 0);
    CHECK(t1.str() == t2.str());
}

TEST_CASE("trace: per-op accounting is conservative and lookups never write") {
    WorkloadSpec spec = bench_spec(3000);
    std::ostringstream out, err;
    REQUIRE(run_trace(spec, bench_config(), "new", out, err) == 0);

    // replay the same run to get the final counters
    Dictionary d(bench_config());
    WorkloadGen gen(spec);
    for (std::uint64_t i = 0; i < spec.n_ops; ++i) {
        const Op op = gen.next();
        switch (op.kind) {
            case Op::Kind::Insert: d.insert(op.key, op.value); break;
            case Op::Kind::Delete: d.erase(op.key); break;
            case Op::Kind::Lookup: d.lookup(op.key); break;
        }
    }
    std::istringstream lines(out.str());
    std::string line;
    std::uint64_t sum_reads = 0, sum_writes = 0, rows = 0;
    bool first_insert_seen = false;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        ++rows;
        std::uint64_t idx, reads, writes, pages;
        char kind[16];
        REQUIRE(std::sscanf(line.c_str(), "%llu,%15[^,],%llu,%llu,%llu",
                            (unsigned long long*)&idx, kind, (unsigned long long*)&reads,
                            (unsigned long long*)&writes, (unsigned long long*)&pages) == 5);
        sum_reads += reads;
        sum_writes += writes;
        if (!first_insert_seen && std::string(kind) == "insert") {
            CHECK(writes >= 1);  // the log append
            first_insert_seen = true;
        }
        if (std::string(kind) == "lookup") CHECK(writes == 0);
    }
    CHECK(rows == spec.n_ops);
    CHECK(sum_reads == d.memory().io_stats().reads);
    CHECK(sum_writes == d.memory().io_stats().writes);
}

TEST_CASE("baseline update rate grows roughly like lambda lg n / B") {
    // buffer-tree rate directionality at a reduced scale: fit through the origin,
    // uncentered R^2 (the standard definition for no-intercept fits).
    WorkloadSpec spec;
    spec.n_ops = 1ull << 16;
    spec.n_keys = 1ull << 16;
    spec.insert_pct = 90;
    spec.delete_pct = 0;
    spec.lookup_pct = 10;
    spec.seed = 1;
    std::vector<double> xs, ys;
    std::vector<double> q_reads;
    for (std::uint32_t lam : {2u, 4u, 8u, 16u}) {
        BaselineConfig cfg;
        cfg.n_max = 1ull << 16;
        cfg.lambda = lam;
        cfg.universe_max = 2 * spec.n_keys;
        const BenchRow row = measure_baseline(cfg, spec);
        xs.push_back(static_cast<double>(lam) * 16.0 / 64.0);
        ys.push_back(row.upd_reads + row.upd_writes);
        q_reads.push_back(row.q_reads);
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += xs[i] * ys[i];
        sxx += xs[i] * xs[i];
        syy += ys[i] * ys[i];
    }
    const double slope = sxy / sxx;
    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - slope * xs[i];
        ss_res += r * r;
    }
    const double r2 = 1.0 - ss_res / syy;
    INFO("slope=", slope, " r2=", r2, " ys=", ys[0], ",", ys[1], ",", ys[2], ",", ys[3]);
    CHECK(r2 >= 0.8);
    // lookup cost decreases (weakly) as the tree gets shallower
    for (std::size_t i = 1; i < q_reads.size(); ++i) {
        CHECK(q_reads[i] <= q_reads[i - 1] * 1.05);
    }
}
