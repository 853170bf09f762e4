#ifndef EMDICT_WORKLOAD_HPP_
#define EMDICT_WORKLOAD_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "emdict/dictionary.hpp"
#include "emdict/reference.hpp"

namespace emdict {

struct WorkloadSpec {
    std::uint64_t n_ops = 0;
    int insert_pct = 45;
    int delete_pct = 10;
    int lookup_pct = 45;
    enum class Universe { TwoN, U64 } universe = Universe::TwoN;
    std::uint64_t n_keys = 1ull << 18;  // the n of the [2n] universe
    std::uint64_t seed = 1;

    void validate() const;
};

struct Op {
    enum class Kind { Insert, Delete, Lookup } kind = Kind::Insert;
    std::uint64_t key = 0;
    std::uint64_t value = 0;
};

/// Deterministic operation stream. Lookups are half positive (live keys)
/// and half negative by construction; deletes target live keys when any
/// exist.
class WorkloadGen {
public:
    explicit WorkloadGen(const WorkloadSpec& spec);
    Op next();

private:
    std::uint64_t rng() { return splitmix64(state_); }
    std::uint64_t draw_key();
    void live_add(std::uint64_t key);
    void live_remove(std::uint64_t key);

    WorkloadSpec spec_;
    std::uint64_t state_;
    std::vector<std::uint64_t> live_;
    std::unordered_map<std::uint64_t, std::size_t> live_pos_;
};

struct BenchRow {
    std::string structure;
    std::uint64_t n = 0;
    std::uint32_t B = 0;
    std::uint64_t M = 0;
    std::uint32_t lambda = 0;
    double upd_reads = 0;
    double upd_writes = 0;
    double q_reads = 0;
    std::uint64_t space_pages = 0;
    std::uint64_t rebuilds = 0;
    double pred_tu = 0;
    double pred_tq = 0;
};

std::string bench_csv_header();
std::string to_csv(const BenchRow& row);

/// Run the workload against one structure, attributing I/O per op kind.
BenchRow measure_dictionary(const DictConfig& cfg, const WorkloadSpec& spec);
BenchRow measure_baseline(const BaselineConfig& cfg, const WorkloadSpec& spec);

struct VerifyOptions {
    long long corrupt_page = -1;    // page id to corrupt in the dictionary memory
    std::uint64_t corrupt_at_op = 0;
};

/// Lockstep run of dictionary + baseline + oracle; reports the first
/// disagreement (op index and answer triple) or pass. Returns 0 iff pass.
int run_verify(const WorkloadSpec& spec, const DictConfig& cfg, std::ostream& out,
               std::ostream& err, const VerifyOptions& opts = {});

/// One CSV row per (structure, lambda), fixed header, deterministic order.
int run_sweep(const WorkloadSpec& spec, const DictConfig& cfg,
              const std::vector<std::uint32_t>& lambdas, const std::string& structures,
              std::ostream& out, std::ostream& err);

/// One line per op: index, kind, reads, writes, cumulative pages.
int run_trace(const WorkloadSpec& spec, const DictConfig& cfg, const std::string& structure,
              std::ostream& out, std::ostream& err);

}  // namespace emdict

#endif  // EMDICT_WORKLOAD_HPP_
