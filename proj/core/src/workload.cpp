#include "emdict/workload.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "emdict/errors.hpp"

namespace emdict {

void WorkloadSpec::validate() const {
    if (insert_pct < 0 || delete_pct < 0 || lookup_pct < 0 ||
        insert_pct + delete_pct + lookup_pct != 100) {
        throw bad_parameters("workload: mix percentages must be non-negative and sum to 100");
    }
    if (n_keys < 2) throw bad_parameters("workload: n_keys must be >= 2");
}

WorkloadGen::WorkloadGen(const WorkloadSpec& spec) : spec_(spec), state_(spec.seed) {
    spec_.validate();
}

std::uint64_t WorkloadGen::draw_key() {
    if (spec_.universe == WorkloadSpec::Universe::U64) return rng();
    return rng() % (2 * spec_.n_keys);
}

void WorkloadGen::live_add(std::uint64_t key) {
    if (live_pos_.count(key)) return;
    live_pos_[key] = live_.size();
    live_.push_back(key);
}

void WorkloadGen::live_remove(std::uint64_t key) {
    auto it = live_pos_.find(key);
    if (it == live_pos_.end()) return;
    const std::size_t pos = it->second;
    const std::uint64_t last = live_.back();
    live_[pos] = last;
    live_pos_[last] = pos;
    live_.pop_back();
    live_pos_.erase(it);
}

Op WorkloadGen::next() {
    Op op;
    const int roll = static_cast<int>(rng() % 100);
    if (roll < spec_.insert_pct) {
        op.kind = Op::Kind::Insert;
        op.key = draw_key();
        op.value = rng();
        live_add(op.key);
    } else if (roll < spec_.insert_pct + spec_.delete_pct) {
        op.kind = Op::Kind::Delete;
        if (!live_.empty()) {
            op.key = live_[rng() % live_.size()];
        } else {
            op.key = draw_key();
        }
        live_remove(op.key);
    } else {
        op.kind = Op::Kind::Lookup;
        const bool want_positive = (rng() & 1) != 0;
        if (want_positive && !live_.empty()) {
            op.key = live_[rng() % live_.size()];
        } else {
            op.key = draw_key();
            for (int tries = 0; tries < 32 && live_pos_.count(op.key); ++tries) op.key = draw_key();
        }
    }
    return op;
}

std::string bench_csv_header() {
    return "structure,n,B,M,lambda,upd_reads,upd_writes,q_reads,space_pages,rebuilds,pred_tu,"
           "pred_tq";
}

std::string to_csv(const BenchRow& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s,%llu,%u,%llu,%u,%.6f,%.6f,%.6f,%llu,%llu,%.6f,%.6f",
                  r.structure.c_str(), static_cast<unsigned long long>(r.n), r.B,
                  static_cast<unsigned long long>(r.M), r.lambda, r.upd_reads, r.upd_writes,
                  r.q_reads, static_cast<unsigned long long>(r.space_pages),
                  static_cast<unsigned long long>(r.rebuilds), r.pred_tu, r.pred_tq);
    return buf;
}

namespace {

struct Tally {
    std::uint64_t upd_reads = 0;
    std::uint64_t upd_writes = 0;
    std::uint64_t q_reads = 0;
    std::uint64_t updates = 0;
    std::uint64_t lookups = 0;

    template <typename F>
    void run_op(PagedMemory& mem, const Op& op, F&& apply) {
        const IoStats before = mem.io_stats();
        apply();
        const IoStats d = mem.io_stats() - before;
        if (op.kind == Op::Kind::Lookup) {
            q_reads += d.reads;
            ++lookups;
        } else {
            upd_reads += d.reads;
            upd_writes += d.writes;
            ++updates;
        }
    }
};

}  // namespace

BenchRow measure_dictionary(const DictConfig& cfg, const WorkloadSpec& spec) {
    Dictionary dict(cfg);
    WorkloadGen gen(spec);
    Tally tally;
    for (std::uint64_t i = 0; i < spec.n_ops; ++i) {
        const Op op = gen.next();
        tally.run_op(dict.memory(), op, [&] {
            switch (op.kind) {
                case Op::Kind::Insert: dict.insert(op.key, op.value); break;
                case Op::Kind::Delete: dict.erase(op.key); break;
                case Op::Kind::Lookup: dict.lookup(op.key); break;
            }
        });
    }
    BenchRow row;
    row.structure = "new";
    row.n = spec.n_keys;
    row.B = cfg.page_words;
    row.M = cfg.cache_words;
    row.lambda = cfg.lambda;
    if (tally.updates) {
        row.upd_reads = static_cast<double>(tally.upd_reads) / tally.updates;
        row.upd_writes = static_cast<double>(tally.upd_writes) / tally.updates;
    }
    if (tally.lookups) row.q_reads = static_cast<double>(tally.q_reads) / tally.lookups;
    row.space_pages = dict.memory().page_count();
    row.rebuilds = dict.stats().global_rebuilds;
    const CostPrediction pred = predict_costs(spec.n_keys, cfg.page_words, cfg.cache_words, cfg.lambda);
    row.pred_tu = pred.t_u;
    row.pred_tq = pred.t_q;
    return row;
}

BenchRow measure_baseline(const BaselineConfig& cfg, const WorkloadSpec& spec) {
    BaselineBufferTree tree(cfg);
    WorkloadGen gen(spec);
    Tally tally;
    for (std::uint64_t i = 0; i < spec.n_ops; ++i) {
        const Op op = gen.next();
        tally.run_op(tree.memory(), op, [&] {
            switch (op.kind) {
                case Op::Kind::Insert: tree.insert(op.key, op.value); break;
                case Op::Kind::Delete: tree.erase(op.key); break;
                case Op::Kind::Lookup: tree.lookup(op.key); break;
            }
        });
    }
    BenchRow row;
    row.structure = "baseline";
    row.n = spec.n_keys;
    row.B = cfg.page_words;
    row.M = cfg.cache_words;
    row.lambda = cfg.lambda;
    if (tally.updates) {
        row.upd_reads = static_cast<double>(tally.upd_reads) / tally.updates;
        row.upd_writes = static_cast<double>(tally.upd_writes) / tally.updates;
    }
    if (tally.lookups) row.q_reads = static_cast<double>(tally.q_reads) / tally.lookups;
    row.space_pages = tree.memory().page_count();
    row.rebuilds = tree.rebuild_count();
    // classic buffer-tree rates for the baseline rows
    const double lg_n = std::log2(static_cast<double>(spec.n_keys));
    row.pred_tu = static_cast<double>(cfg.lambda) / cfg.page_words * lg_n;
    row.pred_tq = lg_n / std::log2(static_cast<double>(cfg.lambda));
    return row;
}

int run_verify(const WorkloadSpec& spec, const DictConfig& cfg, std::ostream& out,
               std::ostream& err, const VerifyOptions& opts) {
    spec.validate();
    Dictionary dict(cfg);
    BaselineConfig bcfg;
    bcfg.n_max = cfg.n_max;
    bcfg.page_words = cfg.page_words;
    bcfg.cache_words = cfg.cache_words;
    bcfg.lambda = std::min<std::uint32_t>(std::max<std::uint32_t>(cfg.lambda, 2), cfg.page_words);
    bcfg.universe_max =
        spec.universe == WorkloadSpec::Universe::TwoN ? 2 * spec.n_keys : 0;
    BaselineBufferTree tree(bcfg);
    OracleMap oracle;
    WorkloadGen gen(spec);

    for (std::uint64_t i = 0; i < spec.n_ops; ++i) {
        const Op op = gen.next();
        if (opts.corrupt_page >= 0 && i == opts.corrupt_at_op) {
            BitVec junk(dict.memory().page_bits());
            for (auto& w : junk.words()) w = 0xdeadbeefcafef00dull;
            if (static_cast<std::uint64_t>(opts.corrupt_page) < dict.memory().page_count()) {
                dict.memory().write_page(PageId(static_cast<std::uint32_t>(opts.corrupt_page)),
                                         junk);
            }
        }
        switch (op.kind) {
            case Op::Kind::Insert:
                dict.insert(op.key, op.value);
                tree.insert(op.key, op.value);
                oracle.insert(op.key, op.value);
                break;
            case Op::Kind::Delete:
                dict.erase(op.key);
                tree.erase(op.key);
                oracle.erase(op.key);
                break;
            case Op::Kind::Lookup: {
                const auto want = oracle.lookup(op.key);
                const auto got_dict = dict.lookup(op.key);
                const auto got_tree = tree.lookup(op.key);
                if (got_dict != want || got_tree != want) {
                    auto show = [](const std::optional<std::uint64_t>& v) {
                        return v ? std::to_string(*v) : std::string("not-found");
                    };
                    err << "DISAGREEMENT at op " << i << " key " << op.key
                        << ": oracle=" << show(want) << " dictionary=" << show(got_dict)
                        << " baseline=" << show(got_tree) << "\n";
                    return 1;
                }
                break;
            }
        }
    }
    out << "PASS " << spec.n_ops << " ops, seed " << spec.seed << ", "
        << dict.stats().log_entries << " log entries, " << dict.stats().global_rebuilds
        << " rebuilds\n";
    return 0;
}

int run_sweep(const WorkloadSpec& spec, const DictConfig& cfg,
              const std::vector<std::uint32_t>& lambdas, const std::string& structures,
              std::ostream& out, std::ostream& err) {
    spec.validate();
    for (std::uint32_t lam : lambdas) {
        try {
            predict_costs(spec.n_keys, cfg.page_words, cfg.cache_words, lam);
        } catch (const bad_parameters&) {
            const double lg_n = std::log2(static_cast<double>(spec.n_keys));
            const double lo = std::max(std::log2(lg_n),
                                       lg_n / std::log2(static_cast<double>(cfg.cache_words)));
            err << "bad-parameters: lambda " << lam << " outside [max(lg lg n, log_M n), B] = ["
                << lo << ", " << cfg.page_words << "]\n";
            return 2;
        }
    }
    const bool want_new = structures == "new" || structures == "both";
    const bool want_base = structures == "baseline" || structures == "both";
    out << bench_csv_header() << "\n";
    if (want_new) {
        for (std::uint32_t lam : lambdas) {
            DictConfig c = cfg;
            c.lambda = lam;
            // t_min re-derives from lambda unless explicitly pinned
            out << to_csv(measure_dictionary(c, spec)) << "\n";
        }
    }
    if (want_base) {
        for (std::uint32_t lam : lambdas) {
            BaselineConfig c;
            c.n_max = cfg.n_max;
            c.page_words = cfg.page_words;
            c.cache_words = cfg.cache_words;
            c.lambda = lam;
            c.universe_max = spec.universe == WorkloadSpec::Universe::TwoN ? 2 * spec.n_keys : 0;
            out << to_csv(measure_baseline(c, spec)) << "\n";
        }
    }
    return 0;
}

int run_trace(const WorkloadSpec& spec, const DictConfig& cfg, const std::string& structure,
              std::ostream& out, std::ostream& err) {
    spec.validate();
    if (structure != "new" && structure != "baseline") {
        err << "trace: --structure must be new or baseline\n";
        return 2;
    }
    WorkloadGen gen(spec);
    auto emit = [&out](std::uint64_t i, const Op& op, const IoStats& d, std::uint64_t pages) {
        const char* kind = op.kind == Op::Kind::Insert   ? "insert"
                           : op.kind == Op::Kind::Delete ? "delete"
                                                         : "lookup";
        out << i << "," << kind << "," << d.reads << "," << d.writes << "," << pages << "\n";
    };
    if (structure == "new") {
        Dictionary dict(cfg);
        for (std::uint64_t i = 0; i < spec.n_ops; ++i) {
            const Op op = gen.next();
            const IoStats before = dict.memory().io_stats();
            switch (op.kind) {
                case Op::Kind::Insert: dict.insert(op.key, op.value); break;
                case Op::Kind::Delete: dict.erase(op.key); break;
                case Op::Kind::Lookup: dict.lookup(op.key); break;
            }
            emit(i, op, dict.memory().io_stats() - before, dict.memory().page_count());
        }
    } else {
        BaselineConfig c;
        c.n_max = cfg.n_max;
        c.page_words = cfg.page_words;
        c.cache_words = cfg.cache_words;
        c.lambda = std::min<std::uint32_t>(std::max<std::uint32_t>(cfg.lambda, 2), cfg.page_words);
        c.universe_max = spec.universe == WorkloadSpec::Universe::TwoN ? 2 * spec.n_keys : 0;
        BaselineBufferTree tree(c);
        for (std::uint64_t i = 0; i < spec.n_ops; ++i) {
            const Op op = gen.next();
            const IoStats before = tree.memory().io_stats();
            switch (op.kind) {
                case Op::Kind::Insert: tree.insert(op.key, op.value); break;
                case Op::Kind::Delete: tree.erase(op.key); break;
                case Op::Kind::Lookup: tree.lookup(op.key); break;
            }
            emit(i, op, tree.memory().io_stats() - before, tree.memory().page_count());
        }
    }
    return 0;
}

}  // namespace emdict
