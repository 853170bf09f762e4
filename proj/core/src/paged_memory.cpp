#include "emdict/paged_memory.hpp"

#include <cstdio>
#include <cstring>

#include "emdict/errors.hpp"

namespace emdict {

PagedMemory::PagedMemory(std::uint32_t page_words, std::uint32_t word_bits,
                         std::uint64_t page_budget)
    : page_words_(page_words),
      word_bits_(word_bits),
      page_bits_(static_cast<std::uint64_t>(page_words) * word_bits),
      page_budget_(page_budget) {
    if (page_words == 0 || word_bits == 0 || word_bits > 64) {
        throw bad_parameters("PagedMemory: page_words and word_bits must be positive, word_bits <= 64");
    }
    if (word_bits != 64) {
        // Images are stored as 64-bit words; non-64-bit words would need
        // sub-word packing in the page file. Not required at desk scale.
        throw bad_parameters("PagedMemory: only w=64 is supported");
    }
}

PageId PagedMemory::alloc_page() {
    if (!free_list_.empty()) {
        const std::uint32_t idx = free_list_.back();
        free_list_.pop_back();
        freed_[idx] = false;
        std::fill(pages_[idx].begin(), pages_[idx].end(), 0ull);
        stats_.writes += 1;
        return PageId(idx);
    }
    if (pages_.size() >= page_budget_) {
        throw capacity_exhausted("alloc_page: page budget exhausted");
    }
    pages_.emplace_back(page_words_, 0ull);
    freed_.push_back(false);
    stats_.writes += 1;
    return PageId(static_cast<std::uint32_t>(pages_.size() - 1));
}

void PagedMemory::free_page(PageId id) {
    check_allocated(id, "free_page");
    freed_[id.value] = true;
    free_list_.push_back(id.value);
}

void PagedMemory::check_allocated(PageId id, const char* op) const {
    if (!id.valid() || id.value >= pages_.size() || freed_[id.value]) {
        throw invalid_page(std::string(op) + ": page " +
                           (id.valid() ? std::to_string(id.value) : std::string("<invalid>")) +
                           " is not allocated");
    }
}

BitVec PagedMemory::read_page(PageId id) {
    check_allocated(id, "read_page");
    stats_.reads += 1;
    return BitVec(page_bits_, pages_[id.value]);
}

void PagedMemory::write_page(PageId id, const BitVec& image) {
    check_allocated(id, "write_page");
    if (image.bit_size() != page_bits_) {
        throw size_mismatch("write_page: image has " + std::to_string(image.bit_size()) +
                            " bits, page holds " + std::to_string(page_bits_));
    }
    pages_[id.value] = image.words();
    stats_.writes += 1;
}

const std::vector<std::uint64_t>& PagedMemory::peek_page(PageId id) const {
    check_allocated(id, "peek_page");
    return pages_[id.value];
}

namespace {

void put_u32(std::FILE* f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    std::fwrite(b, 1, 4, f);
}

std::uint32_t get_u32(std::FILE* f) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) throw size_mismatch("page file: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void PagedMemory::save_file(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("save_file: cannot open " + path);
    std::fwrite("EMPG", 1, 4, f);
    put_u32(f, 1);
    put_u32(f, page_words_);
    put_u32(f, word_bits_);
    put_u32(f, static_cast<std::uint32_t>(pages_.size()));
    const std::size_t bytes = page_bits_ / 8;
    for (const auto& page : pages_) {
        std::fwrite(page.data(), 1, bytes, f);
    }
    std::fclose(f);
}

PagedMemory PagedMemory::load_file(const std::string& path, std::uint64_t page_budget) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("load_file: cannot open " + path);
    char magic[4];
    if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "EMPG", 4) != 0) {
        std::fclose(f);
        throw size_mismatch("page file: bad magic");
    }
    const std::uint32_t version = get_u32(f);
    if (version != 1) {
        std::fclose(f);
        throw size_mismatch("page file: unsupported version " + std::to_string(version));
    }
    const std::uint32_t B = get_u32(f);
    const std::uint32_t w = get_u32(f);
    const std::uint32_t count = get_u32(f);
    PagedMemory mem(B, w, page_budget);
    const std::size_t bytes = mem.page_bits_ / 8;
    mem.pages_.assign(count, std::vector<std::uint64_t>(B, 0ull));
    mem.freed_.assign(count, false);
    for (auto& page : mem.pages_) {
        if (std::fread(page.data(), 1, bytes, f) != bytes) {
            std::fclose(f);
            throw size_mismatch("page file: truncated image");
        }
    }
    std::fclose(f);
    return mem;
}

}  // namespace emdict
