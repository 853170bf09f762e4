#ifndef EMDICT_CACHE_VIEW_HPP_
#define EMDICT_CACHE_VIEW_HPP_

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "emdict/paged_memory.hpp"

namespace emdict {

/// The free cache of M words (M/B pages) over a PagedMemory, enforced
/// structurally rather than by an eviction simulator:
///
///  - pinned pages: a persistent resident set (the hot trickle path of the
///    root node, the global-log tail). Reads and writes to pinned pages are
///    free; a page is charged once when pinned and once when unpinned with
///    write-back.
///  - op-scoped pages: within one logical operation a page is fetched at
///    most once and written back at most once. If an operation touches more
///    pages than the cache holds, the op cache spills (checkpoint) and
///    later re-accesses are charged again.
///
/// Pinned + op-scoped footprint never exceeds the configured page budget.
class CacheView final : public PageStore {
public:
    CacheView(PagedMemory& mem, std::uint64_t cache_pages)
        : mem_(mem),
          total_budget_(cache_pages),
          pin_budget_(cache_pages - cache_pages / 8) {}

    void set_pin_budget(std::uint64_t pages) { pin_budget_ = pages; }
    std::uint64_t pin_budget() const { return pin_budget_; }
    std::uint64_t pinned_count() const { return pinned_.size(); }
    std::uint64_t total_budget() const { return total_budget_; }

    std::uint64_t page_bits() const override { return mem_.page_bits(); }

    PageId alloc_page() override {
        PageId id = mem_.alloc_page();
        if (op_depth_ > 0) {
            op_[id.value] = Entry{std::vector<std::uint64_t>(mem_.page_words(), 0ull), false};
            maybe_spill();
        }
        return id;
    }

    void free_page(PageId id) override {
        if (auto it = pinned_.find(id.value); it != pinned_.end()) {
            if (it->second.budgeted && budgeted_pins_ > 0) --budgeted_pins_;
            pinned_.erase(it);
        }
        op_.erase(id.value);
        mem_.free_page(id);
    }

    BitVec read_page(PageId id) override {
        if (auto it = pinned_.find(id.value); it != pinned_.end()) {
            return BitVec(mem_.page_bits(), it->second.words);
        }
        if (op_depth_ > 0) {
            if (auto it = op_.find(id.value); it != op_.end()) {
                return BitVec(mem_.page_bits(), it->second.words);
            }
            BitVec img = mem_.read_page(id);
            op_[id.value] = Entry{img.words(), false};
            maybe_spill();
            return img;
        }
        return mem_.read_page(id);
    }

    void write_page(PageId id, const BitVec& image) override {
        if (image.bit_size() != mem_.page_bits()) {
            throw size_mismatch("write_page: wrong image size");
        }
        if (auto it = pinned_.find(id.value); it != pinned_.end()) {
            it->second.words = image.words();
            it->second.dirty = true;
            return;
        }
        if (op_depth_ > 0) {
            auto& e = op_[id.value];
            e.words = image.words();
            e.dirty = true;
            maybe_spill();
            return;
        }
        mem_.write_page(id, image);
    }

    const std::vector<std::uint64_t>& peek_page(PageId id) const override {
        if (auto it = pinned_.find(id.value); it != pinned_.end()) return it->second.words;
        if (auto it = op_.find(id.value); it != op_.end()) return it->second.words;
        return mem_.peek_page(id);
    }

    void begin_op() override { ++op_depth_; }

    void end_op() override {
        if (op_depth_ == 0) return;
        if (--op_depth_ == 0) flush_op();
    }

    void checkpoint_op() override {
        if (op_depth_ > 0) flush_op();
    }

    void pin(PageId id) override {
        if (pinned_.count(id.value)) return;
        if (budgeted_pins_ >= pin_budget_) return;  // partial residency
        ++budgeted_pins_;
        pin_impl(id, true);
    }

    void pin_reserved(PageId id) override {
        if (pinned_.count(id.value)) return;
        pin_impl(id, false);
    }

    void unpin(PageId id, bool write_back) override {
        auto it = pinned_.find(id.value);
        if (it == pinned_.end()) return;
        if (write_back && it->second.dirty) {
            mem_.write_page(id, BitVec(mem_.page_bits(), it->second.words));
        }
        if (it->second.budgeted && budgeted_pins_ > 0) --budgeted_pins_;
        pinned_.erase(it);
    }

    /// Write back every dirty cached page (pinned and op-scoped) without
    /// dropping residency. Used before persisting the backing memory.
    void flush_all() {
        flush_op();
        std::map<std::uint32_t, Entry*> ordered;
        for (auto& [id, e] : pinned_) {
            if (e.dirty) ordered[id] = &e;
        }
        for (auto& [id, e] : ordered) {
            mem_.write_page(PageId(id), BitVec(mem_.page_bits(), e->words));
            e->dirty = false;
        }
    }

private:
    struct Entry {
        std::vector<std::uint64_t> words;
        bool dirty = false;
        bool budgeted = false;
    };

    void pin_impl(PageId id, bool budgeted) {
        if (auto it = op_.find(id.value); it != op_.end()) {
            Entry e = std::move(it->second);
            e.budgeted = budgeted;
            op_.erase(it);
            pinned_[id.value] = std::move(e);
            return;
        }
        BitVec img = mem_.read_page(id);
        pinned_[id.value] = Entry{img.words(), false, budgeted};
    }

    void flush_op() {
        if (op_.empty()) return;
        std::map<std::uint32_t, const Entry*> ordered;
        for (const auto& [id, e] : op_) {
            if (e.dirty) ordered[id] = &e;
        }
        for (const auto& [id, e] : ordered) {
            mem_.write_page(PageId(id), BitVec(mem_.page_bits(), e->words));
        }
        op_.clear();
    }

    void maybe_spill() {
        if (pinned_.size() + op_.size() > total_budget_) flush_op();
    }

    PagedMemory& mem_;
    std::uint64_t total_budget_;
    std::uint64_t pin_budget_;
    std::uint64_t budgeted_pins_ = 0;
    std::unordered_map<std::uint32_t, Entry> pinned_;
    std::unordered_map<std::uint32_t, Entry> op_;
    int op_depth_ = 0;
};

}  // namespace emdict

#endif  // EMDICT_CACHE_VIEW_HPP_
