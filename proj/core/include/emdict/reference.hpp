#ifndef EMDICT_REFERENCE_HPP_
#define EMDICT_REFERENCE_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "emdict/cache_view.hpp"
#include "emdict/paged_memory.hpp"

namespace emdict {

/// In-memory truth: last-write-wins map with tombstones.
class OracleMap {
public:
    void insert(std::uint64_t key, std::uint64_t value) {
        map_[key] = {value, false};
        ++ops_;
    }
    void erase(std::uint64_t key) {
        map_[key] = {0, true};
        ++ops_;
    }
    std::optional<std::uint64_t> lookup(std::uint64_t key) const {
        auto it = map_.find(key);
        if (it == map_.end() || it->second.second) return std::nullopt;
        return it->second.first;
    }
    std::uint64_t live_count() const {
        std::uint64_t n = 0;
        for (const auto& [k, v] : map_) {
            if (!v.second) ++n;
        }
        return n;
    }
    std::uint64_t op_count() const { return ops_; }

private:
    std::unordered_map<std::uint64_t, std::pair<std::uint64_t, bool>> map_;
    std::uint64_t ops_ = 0;
};

struct BaselineConfig {
    std::uint64_t n_max = 1ull << 18;
    std::uint32_t page_words = 64;
    std::uint64_t cache_words = 1ull << 16;
    std::uint32_t lambda = 16;               // fan-out, 2 <= lambda <= B
    std::uint64_t leaf_cap_pairs = 128;      // skeleton sizing target
    std::uint64_t universe_max = 0;          // 0 = full 64-bit key space
    std::uint64_t page_budget = PagedMemory::UNLIMITED;
};

/// Classic buffer tree over uncompressed (key, log index) pairs: one buffer
/// page per node, sorted child pivots, sorted multi-page leaves. Inserts
/// buffer at the root; full buffers flush one level down by pivot
/// partitioning. The comparison baseline for the hashed dictionary.
class BaselineBufferTree {
public:
    explicit BaselineBufferTree(const BaselineConfig& cfg);
    ~BaselineBufferTree();

    BaselineBufferTree(const BaselineBufferTree&) = delete;
    BaselineBufferTree& operator=(const BaselineBufferTree&) = delete;

    void insert(std::uint64_t key, std::uint64_t value);
    void erase(std::uint64_t key);
    std::optional<std::uint64_t> lookup(std::uint64_t key);

    void rebuild();

    PagedMemory& memory() { return *mem_; }
    const BaselineConfig& config() const { return cfg_; }
    std::uint64_t rebuild_count() const { return rebuilds_; }
    std::uint64_t depth() const { return depth_; }

private:
    struct Node {
        bool leaf = false;
        std::uint64_t lo = 0;
        std::vector<std::uint64_t> pivots;    // internal: child routing keys
        std::vector<std::int32_t> children;
        PageId buffer;
        std::uint64_t buffer_fill = 0;
        // leaf payload: sorted (key, j) run over pages
        std::vector<PageId> pages;
        std::uint64_t pair_count = 0;
        std::vector<std::uint64_t> fences;    // first key per page
    };

    struct Pair {
        std::uint64_t key;
        std::uint64_t j;
    };

    void build_skeleton();
    std::int32_t build_subtree(std::uint64_t lo, std::uint64_t width, unsigned levels);
    std::uint32_t route(const Node& node, std::uint64_t key) const;

    std::uint64_t log_append(std::uint64_t key, std::uint64_t value, bool tombstone);
    struct LogEntry {
        std::uint64_t key;
        std::uint64_t value;
        bool tombstone;
    };
    LogEntry log_get(std::uint64_t j);

    void buffer_append(std::int32_t idx, const Pair* pairs, std::uint64_t count);
    void flush_node(std::int32_t idx);
    void leaf_merge(Node& node, std::vector<Pair>& pairs);
    std::vector<Pair> read_buffer(const Node& node) const;
    void raw_insert(std::uint64_t key, std::uint64_t value, bool tombstone);

    BaselineConfig cfg_;
    std::uint64_t b_ = 0;
    std::uint64_t pairs_per_page_ = 0;
    std::uint64_t log_entries_per_page_ = 0;
    std::uint64_t universe_ = 0;
    unsigned depth_ = 0;

    std::unique_ptr<PagedMemory> mem_;
    std::unique_ptr<CacheView> cache_;

    std::vector<PageId> log_pages_;
    std::uint64_t log_count_ = 0;
    std::uint64_t max_log_entries_ = 0;

    std::vector<std::unique_ptr<Node>> nodes_;
    std::int32_t root_ = -1;

    std::uint64_t deletion_count_ = 0;
    std::uint64_t rebuilds_ = 0;

    static constexpr unsigned LOG_ENTRY_BITS = 192;
};

}  // namespace emdict

#endif  // EMDICT_REFERENCE_HPP_
