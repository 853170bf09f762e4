#ifndef EMDICT_PAGE_STORE_HPP_
#define EMDICT_PAGE_STORE_HPP_

#include <cstdint>
#include <limits>

#include "emdict/bitvec.hpp"

namespace emdict {

struct PageId {
    std::uint32_t value = INVALID;

    static constexpr std::uint32_t INVALID = std::numeric_limits<std::uint32_t>::max();

    PageId() = default;
    explicit PageId(std::uint32_t v) : value(v) {}

    bool valid() const { return value != INVALID; }
    bool operator==(const PageId& o) const { return value == o.value; }
    bool operator!=(const PageId& o) const { return value != o.value; }
    bool operator<(const PageId& o) const { return value < o.value; }
};

struct IoStats {
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;

    IoStats operator-(const IoStats& o) const { return {reads - o.reads, writes - o.writes}; }
    bool operator==(const IoStats& o) const { return reads == o.reads && writes == o.writes; }
};

/// Abstract page storage. Gadgets and dictionary nodes are written against
/// this interface; PagedMemory provides the counted, simulated disk, and
/// CacheView layers the free-cache discipline on top of it.
class PageStore {
public:
    virtual ~PageStore() = default;

    virtual PageId alloc_page() = 0;
    virtual void free_page(PageId id) = 0;
    virtual BitVec read_page(PageId id) = 0;
    virtual void write_page(PageId id, const BitVec& image) = 0;

    /// Instrumentation-only access: no I/O is counted. Used by invariant
    /// sweeps and stats, never by the operational code paths.
    virtual const std::vector<std::uint64_t>& peek_page(PageId id) const = 0;

    virtual std::uint64_t page_bits() const = 0;

    /// Logical-operation scope. Within one scope a page is fetched at most
    /// once and written back at most once ("cache ... free to access" for
    /// data already loaded by the current operation). Default: no-op.
    virtual void begin_op() {}
    virtual void end_op() {}

    /// Pin a page into the persistent cache-resident set (subject to the
    /// store's pin budget). Default: no-op.
    virtual void pin(PageId) {}
    /// Pin exempt from the budget; for the handful of tail pages touched on
    /// every operation. Default: no-op.
    virtual void pin_reserved(PageId id) { pin(id); }
    /// Drop a page from the resident set. If `write_back` the current image
    /// is flushed to backing storage (counted), otherwise it is discarded.
    virtual void unpin(PageId, bool /*write_back*/) {}

    /// Flush the op-scoped cache mid-operation (bounds the cache footprint
    /// of one logical operation). Default: no-op.
    virtual void checkpoint_op() {}
};

/// RAII guard for one logical operation on a store.
class OpScope {
public:
    explicit OpScope(PageStore& s) : store_(s) { store_.begin_op(); }
    ~OpScope() { store_.end_op(); }
    OpScope(const OpScope&) = delete;
    OpScope& operator=(const OpScope&) = delete;

private:
    PageStore& store_;
};

}  // namespace emdict

#endif  // EMDICT_PAGE_STORE_HPP_
