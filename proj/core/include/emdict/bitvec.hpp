#ifndef EMDICT_BITVEC_HPP_
#define EMDICT_BITVEC_HPP_

#include <cstdint>
#include <cstddef>
#include <vector>

#include "emdict/errors.hpp"

namespace emdict {

/// Fixed-length bit string backed by 64-bit words. Page images and packed
/// element blocks are BitVecs; fields of up to 64 bits are read and written
/// at arbitrary bit offsets.
class BitVec {
public:
    BitVec() = default;

    explicit BitVec(std::uint64_t bits)
        : bits_(bits), words_((bits + 63) / 64, 0) {}

    BitVec(std::uint64_t bits, std::vector<std::uint64_t> words)
        : bits_(bits), words_(std::move(words)) {
        words_.resize((bits_ + 63) / 64, 0);
    }

    std::uint64_t bit_size() const { return bits_; }
    std::size_t word_count() const { return words_.size(); }

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

    /// Read `width` bits (1..64) starting at bit offset `pos`.
    std::uint64_t get_bits(std::uint64_t pos, unsigned width) const {
        const std::uint64_t w = pos / 64;
        const unsigned off = static_cast<unsigned>(pos % 64);
        const std::uint64_t mask = width == 64 ? ~0ull : ((1ull << width) - 1);
        std::uint64_t v = words_[w] >> off;
        if (off + width > 64) {
            v |= words_[w + 1] << (64 - off);
        }
        return v & mask;
    }

    /// Write `width` bits (1..64) of `value` at bit offset `pos`.
    void set_bits(std::uint64_t pos, unsigned width, std::uint64_t value) {
        const std::uint64_t w = pos / 64;
        const unsigned off = static_cast<unsigned>(pos % 64);
        const std::uint64_t mask = width == 64 ? ~0ull : ((1ull << width) - 1);
        value &= mask;
        words_[w] = (words_[w] & ~(mask << off)) | (value << off);
        if (off + width > 64) {
            const unsigned spill = off + width - 64;
            const std::uint64_t hi_mask = (1ull << spill) - 1;
            words_[w + 1] = (words_[w + 1] & ~hi_mask) | (value >> (64 - off));
        }
    }

    void clear() {
        for (auto& w : words_) w = 0;
    }

    bool operator==(const BitVec& other) const {
        return bits_ == other.bits_ && words_ == other.words_;
    }

private:
    std::uint64_t bits_ = 0;
    std::vector<std::uint64_t> words_;
};

inline unsigned bit_width_for(std::uint64_t max_value) {
    unsigned w = 1;
    while (w < 64 && (max_value >> w) != 0) ++w;
    return w;
}

inline bool is_power_of_two(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

inline unsigned log2_exact(std::uint64_t x) {
    if (!is_power_of_two(x)) throw bad_parameters("log2_exact: not a power of two");
    unsigned lg = 0;
    while ((x >> lg) != 1) ++lg;
    return lg;
}

}  // namespace emdict

#endif  // EMDICT_BITVEC_HPP_
