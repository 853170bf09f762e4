#ifndef EMDICT_PAGED_MEMORY_HPP_
#define EMDICT_PAGED_MEMORY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "emdict/page_store.hpp"

namespace emdict {

/// Simulated external memory: an array of fixed-width pages of B words
/// (w bits each, so b = B*w bits per page) with exact read/write accounting.
/// Accessing a page costs one unit; there is no eviction model. A free list
/// recycles pages released by gadget resets and rebuilds.
///
/// An instance is single-threaded; distinct instances share nothing.
class PagedMemory final : public PageStore {
public:
    static constexpr std::uint64_t UNLIMITED = ~0ull;

    explicit PagedMemory(std::uint32_t page_words = 64, std::uint32_t word_bits = 64,
                         std::uint64_t page_budget = UNLIMITED);

    std::uint32_t page_words() const { return page_words_; }
    std::uint32_t word_bits() const { return word_bits_; }
    std::uint64_t page_bits() const override { return page_bits_; }

    /// Total pages ever allocated (free-listed pages included); this is the
    /// space metric reported by benchmarks.
    std::uint64_t page_count() const { return pages_.size(); }
    std::uint64_t live_page_count() const { return pages_.size() - free_list_.size(); }

    PageId alloc_page() override;
    void free_page(PageId id) override;
    BitVec read_page(PageId id) override;
    void write_page(PageId id, const BitVec& image) override;
    const std::vector<std::uint64_t>& peek_page(PageId id) const override;

    IoStats io_stats() const { return stats_; }
    void reset_stats() { stats_ = IoStats{}; }

    /// Page-file persistence: header magic "EMPG", then little-endian u32
    /// fields version=1, B, w, page_count, then raw page images.
    void save_file(const std::string& path) const;
    static PagedMemory load_file(const std::string& path, std::uint64_t page_budget = UNLIMITED);

private:
    void check_allocated(PageId id, const char* op) const;

    std::uint32_t page_words_;
    std::uint32_t word_bits_;
    std::uint64_t page_bits_;
    std::uint64_t page_budget_;
    std::vector<std::vector<std::uint64_t>> pages_;
    std::vector<std::uint32_t> free_list_;
    std::vector<bool> freed_;
    IoStats stats_;
};

}  // namespace emdict

#endif  // EMDICT_PAGED_MEMORY_HPP_
