#ifndef EMDICT_GADGET_HPP_
#define EMDICT_GADGET_HPP_

#include <cstdint>
#include <memory>
#include <vector>

#include "emdict/hashing.hpp"
#include "emdict/page_store.hpp"

namespace emdict {

/// Geometry of one gadget level. Element widths are exact bit counts, not
/// asymptotics: key (lg b + 2 lg t bits) plus one payload field that holds
/// either the backpointer into the parent log (inner levels) or the
/// caller-supplied associated index (outermost level).
struct GadgetParams {
    std::uint32_t t = 0;
    std::uint32_t t_min = 0;
    std::uint64_t b = 0;            // page bits
    unsigned payload_bits = 0;
    std::uint64_t capacity = 0;     // element capacity at this level

    // derived
    unsigned lg_t = 0;
    unsigned lg_b = 0;
    unsigned key_bits = 0;
    unsigned elem_bits = 0;
    std::uint64_t elems_per_block = 0;
    std::uint64_t top_capacity = 0;     // b * sqrt(t); recursive levels only
    std::uint64_t max_log_blocks = 0;
    unsigned block_index_bits = 0;      // payload width of child elements
    bool is_base = false;

    std::uint32_t sqrt_t() const { return 1u << (lg_t / 2); }
};

/// Compute a validated parameter set. The requested t is padded up the
/// ladder lg t = 2^j * lg t_min so the distribution/shadow fields halve
/// exactly at every level. capacity_override replaces the default
/// c_cap * b * t element capacity (c_cap = 2).
GadgetParams make_gadget_params(std::uint32_t t_requested, std::uint32_t t_min, std::uint64_t b,
                                unsigned payload_bits, std::uint64_t capacity_override = 0,
                                double c_cap = 2.0);

struct GadgetElement {
    HashedKey key;
    std::uint64_t payload = 0;

    bool operator==(const GadgetElement& o) const { return key == o.key && payload == o.payload; }
};

struct GadgetStats {
    std::uint64_t element_count = 0;
    std::uint64_t page_count = 0;
    std::vector<std::uint64_t> per_level_elements;
    std::vector<std::uint64_t> per_level_bits_appended;
    std::uint64_t little_flushes = 0;
    std::uint64_t big_flushes = 0;
    std::uint64_t false_positives_filtered = 0;
    std::uint64_t compression_mismatches = 0;  // defensive; expected 0
};

/// The recursive t-gadget of the write-optimized dictionary: a multiset of
/// hashed keys with backpointers, stored as an append-only packed log plus a
/// top sqrt(t)-gadget and sqrt(t) bottom sqrt(t)-gadgets holding compressed
/// copies. Below t_min the structure switches to a buffer page plus a hash
/// table addressed by the page hash.
///
/// A gadget is bound to one store and is single-threaded; operations on the
/// same gadget never interleave.
class Gadget {
public:
    Gadget(const GadgetParams& params, PageStore& store, bool resident_hot = false);
    ~Gadget();

    Gadget(const Gadget&) = delete;
    Gadget& operator=(const Gadget&) = delete;

    const GadgetParams& params() const { return params_; }
    std::uint64_t size() const { return count_; }
    bool is_base() const { return params_.is_base; }

    /// Append a packed batch. Little flushes run for every log block filled;
    /// a big flush runs whenever the cumulative little-flushed element count
    /// crosses a multiple of b*sqrt(t). Throws needs_rebuild if this or any
    /// sub-gadget would exceed its capacity.
    void bulk_insert(const std::vector<GadgetElement>& batch);

    /// All payloads whose full key equals x, ascending. Exact: internal
    /// false positives are filtered against the log before returning.
    std::vector<std::uint64_t> query(const HashedKey& x);

    /// Empty the gadget; pages are released to the store.
    void reset();

    GadgetStats stats() const;
    std::uint64_t little_flush_count() const { return little_flushes_; }
    std::uint64_t big_flush_count() const { return big_flushes_; }
    std::uint64_t top_count() const { return top_ ? top_->size() : 0; }
    std::uint64_t bottom_count() const {
        std::uint64_t n = 0;
        for (const auto& g : bottoms_) {
            if (g) n += g->size();
        }
        return n;
    }
    std::uint64_t base_distribution_count() const { return base_distributions_; }
    std::vector<std::uint64_t> bottom_sizes() const {
        std::vector<std::uint64_t> out;
        for (const auto& g : bottoms_) out.push_back(g ? g->size() : 0);
        return out;
    }
    std::uint64_t false_positives_filtered() const;
    std::uint64_t last_query_gadgets_visited() const { return last_query_gadgets_; }
    std::uint64_t last_query_pages_touched() const { return last_query_pages_; }

    /// Pages a base-gadget query touched, bucketed 0..8+; index 9 counts
    /// queries that touched more. Aggregated over the recursion.
    std::vector<std::uint64_t> base_query_page_histogram() const;

    /// Append the full structural state (geometry, page ids, counters) to a
    /// word stream; deserialize reverses it against the same store.
    void serialize(std::vector<std::uint64_t>& out) const;
    static std::unique_ptr<Gadget> deserialize(const std::vector<std::uint64_t>& in,
                                               std::size_t& pos, PageStore& store,
                                               std::uint32_t t_min, std::uint64_t b);

    // --- instrumentation (uncounted I/O) ---

    /// Every element of this level in insertion order (log order for
    /// recursive gadgets; buffer-then-table order for base gadgets).
    void debug_enumerate(std::vector<GadgetElement>& out) const;

    /// Full Invariant-1 sweep: classify every log element as exactly one of
    /// tail / top-compressed / bottom-compressed with the correct
    /// backpointer, and check the sub-gadget multisets match. Returns the
    /// number of violations (0 = invariant holds). Recurses.
    std::uint64_t debug_classify() const;

private:
    struct BlockRef {
        std::uint64_t index;
        std::vector<GadgetElement> elems;
    };

    void pack_element(BitVec& img, std::uint64_t slot, const GadgetElement& e) const;
    GadgetElement unpack_element(const BitVec& img, std::uint64_t slot) const;
    GadgetElement unpack_element(const std::vector<std::uint64_t>& words, std::uint64_t slot) const;

    HashedKey compress_top(const HashedKey& k) const;
    HashedKey compress_bottom(const HashedKey& k) const;

    void ensure_top();
    void ensure_bottom(std::uint32_t i);
    void little_flush(std::uint64_t block_index, const std::vector<GadgetElement>& elems);
    void big_flush();
    void verify_candidates(const std::vector<std::uint64_t>& candidates, const HashedKey& x,
                           bool from_top, std::vector<std::uint64_t>& out);

    // base case
    void base_insert(const std::vector<GadgetElement>& batch);
    std::vector<std::uint64_t> base_query(const HashedKey& x);
    void base_distribute(const std::vector<GadgetElement>& elems);
    std::uint64_t table_page_elems() const;
    PageId alloc_hot_page();

    GadgetParams params_;
    PageStore& store_;
    bool resident_hot_;

    std::uint64_t count_ = 0;

    // recursive state
    std::vector<PageId> log_blocks_;
    std::uint64_t tail_fill_ = 0;
    std::unique_ptr<Gadget> top_;
    std::vector<std::unique_ptr<Gadget>> bottoms_;
    std::uint64_t flushed_lo_ = 0;   // [lo, hi): block range currently in top
    std::uint64_t flushed_hi_ = 0;
    std::uint64_t little_flushed_elems_ = 0;
    std::uint64_t little_flushes_ = 0;
    std::uint64_t big_flushes_ = 0;

    // base state
    PageId buffer_page_;
    std::uint64_t buffer_fill_ = 0;
    std::uint64_t table_slots_ = 0;  // P
    std::vector<std::vector<PageId>> slot_chains_;
    std::vector<std::uint64_t> slot_fill_;
    std::uint64_t base_distributions_ = 0;

    // instrumentation
    std::uint64_t bits_appended_ = 0;
    std::uint64_t fp_filtered_ = 0;
    std::uint64_t compression_mismatches_ = 0;
    std::uint64_t last_query_gadgets_ = 0;
    std::uint64_t last_query_pages_ = 0;
    std::vector<std::uint64_t> base_query_pages_hist_;

    void collect_stats(GadgetStats& s, unsigned level) const;
};

}  // namespace emdict

#endif  // EMDICT_GADGET_HPP_
