#ifndef EMDICT_DICTIONARY_HPP_
#define EMDICT_DICTIONARY_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "emdict/cache_view.hpp"
#include "emdict/gadget.hpp"
#include "emdict/hashing.hpp"
#include "emdict/paged_memory.hpp"

namespace emdict {

struct DictConfig {
    std::uint64_t n_max = 1ull << 18;
    std::uint32_t page_words = 64;           // B
    std::uint64_t cache_words = 1ull << 16;  // M
    std::uint32_t lambda = 16;
    std::uint32_t t_min = 0;     // 0: largest power of two with t lg t <= lambda
    std::uint64_t seed = 1;
    std::uint64_t node_keys = 0;             // M_keys; 0: M words' worth of key pairs
    double epsilon = 0.25;                   // branching factor M^epsilon
    std::uint64_t page_budget = PagedMemory::UNLIMITED;
};

struct CostPrediction {
    double t_u = 0;
    double t_q = 0;
};

/// The structure's cost formulas with unit constants:
/// t_u = (log_M n + lg lg M + lambda) / B and t_q = lg n / lg lambda.
CostPrediction predict_costs(std::uint64_t n, std::uint32_t B, std::uint64_t M_words,
                             std::uint32_t lambda);

/// Largest power of two t_min with t_min * lg t_min <= lambda.
std::uint32_t t_min_for_lambda(std::uint32_t lambda);

struct DictStats {
    std::uint64_t inserts = 0;
    std::uint64_t deletes = 0;
    std::uint64_t lookups = 0;
    std::uint64_t distribution_events = 0;
    std::uint64_t global_rebuilds = 0;
    std::uint64_t gadget_rebuilds = 0;
    std::uint64_t node_count = 0;
    std::uint64_t log_entries = 0;
    std::uint64_t live_estimate = 0;
    std::uint64_t fp_filtered_in_lookups = 0;
    std::uint64_t shrink_collision_rejects = 0;
};

/// Hashing-based external-memory dictionary: word keys are logged in
/// insertion order and shrunk to [n^2]; the shrunk keys live in a
/// prefix-routed tree of nodes, each holding a plain pending array mirrored
/// by a t-gadget. Deletions are tombstones; overwrite semantics by maximum
/// log index; global rebuild keeps the log bounded.
class Dictionary {
public:
    explicit Dictionary(const DictConfig& cfg);
    ~Dictionary();

    Dictionary(const Dictionary&) = delete;
    Dictionary& operator=(const Dictionary&) = delete;

    void insert(std::uint64_t key, std::uint64_t value);
    void erase(std::uint64_t key);  // tombstone delete
    std::optional<std::uint64_t> lookup(std::uint64_t key);

    /// Global rebuild: compact the log to the live set and reconstruct the
    /// tree with fresh hash seeds.
    void rebuild();

    const DictConfig& config() const { return cfg_; }
    std::uint64_t n_padded() const { return n_pow_; }
    std::uint32_t t_min() const { return t_min_; }
    std::uint64_t node_key_capacity() const { return m_keys_; }
    std::uint32_t branching() const { return branching_; }

    PagedMemory& memory() { return *mem_; }
    const PagedMemory& memory() const { return *mem_; }
    CacheView& cache() { return *cache_; }

    DictStats stats() const;

    /// Aggregate of gadget-internal false positives filtered during lookups
    /// and of log entries rejected by the original-key check.
    std::uint64_t fp_filtered_in_lookups() const { return fp_lookup_total_; }

    /// Base-gadget page-touch histogram aggregated over the whole tree.
    std::vector<std::uint64_t> base_query_page_histogram() const;

    /// Mirror invariant: every node's pending array and gadget encode the
    /// same multiset. Returns number of violating nodes (0 = healthy).
    std::uint64_t debug_validate() const;

    /// Pending pair count per node, root first (tree growth order).
    std::vector<std::uint64_t> debug_pending_sizes() const;

    /// Persist: page file plus a text manifest (key=value lines).
    void save(const std::string& page_file, const std::string& manifest_file) const;
    static std::unique_ptr<Dictionary> load(const std::string& page_file,
                                            const std::string& manifest_file);

private:
    struct Pair {
        std::uint64_t h;
        std::uint64_t j;
    };

    struct Node {
        unsigned depth = 0;
        std::vector<PageId> pending_pages;
        std::uint64_t pending_count = 0;
        std::unique_ptr<Gadget> gadget;
        std::unique_ptr<PolyHash> hash;
        std::vector<std::int32_t> children;  // empty = leaf
    };

    void derive_parameters();
    PolyHash fresh_hash();
    std::uint32_t node_chunk(std::uint64_t h, unsigned depth) const;
    GadgetParams node_gadget_params(std::uint32_t t_req, std::uint64_t capacity) const;

    void append_pending(Node& node, const Pair* pairs, std::uint64_t count, bool pinned_tail);
    std::vector<Pair> read_pending(const Node& node) const;
    void clear_pending(Node& node);

    void gadget_insert(Node& node, const Pair* pairs, std::uint64_t count);
    void rebuild_node_gadget(Node& node);
    void add_to_child(std::int32_t node_idx, const std::vector<Pair>& pairs);
    void distribute(std::int32_t node_idx);
    void raw_insert(std::uint64_t key, std::uint64_t value, bool tombstone);
    void destroy_tree();

    // global log
    std::uint64_t log_append(std::uint64_t key, std::uint64_t value, bool tombstone);
    struct LogEntry {
        std::uint64_t key;
        std::uint64_t value;
        bool tombstone;
    };
    LogEntry log_get(std::uint64_t j);
    static constexpr unsigned LOG_ENTRY_BITS = 192;

    DictConfig cfg_;
    std::uint64_t n_pow_ = 0;
    unsigned lg_n_ = 0;
    unsigned h_bits_ = 0;
    unsigned assoc_bits_ = 0;
    std::uint64_t max_log_entries_ = 0;
    std::uint32_t t_min_ = 0;
    std::uint64_t m_keys_ = 0;
    unsigned chunk_bits_ = 0;
    std::uint32_t branching_ = 0;
    unsigned max_depth_ = 0;
    std::uint64_t b_ = 0;
    std::uint64_t pairs_per_page_ = 0;
    std::uint64_t log_entries_per_page_ = 0;
    unsigned hash_degree_ = 0;

    std::unique_ptr<PagedMemory> mem_;
    std::unique_ptr<CacheView> cache_;

    std::unique_ptr<PolyHash> shrink_hash_;
    std::uint64_t hash_stream_ = 0;

    std::vector<PageId> log_pages_;
    std::uint64_t log_count_ = 0;

    std::vector<std::unique_ptr<Node>> nodes_;

    std::uint64_t deletion_count_ = 0;
    std::uint64_t inserts_ = 0;
    std::uint64_t deletes_ = 0;
    std::uint64_t lookups_ = 0;
    std::uint64_t distribution_events_ = 0;
    std::uint64_t global_rebuilds_ = 0;
    std::uint64_t gadget_rebuilds_ = 0;
    std::uint64_t fp_lookup_total_ = 0;
    std::uint64_t collision_rejects_ = 0;
};

}  // namespace emdict

#endif  // EMDICT_DICTIONARY_HPP_
