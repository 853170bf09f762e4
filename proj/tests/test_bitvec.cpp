#include "doctest.h"
#include "emdict/bitvec.hpp"
#include "emdict/hashing.hpp"

using namespace emdict;

TEST_CASE("bitvec set/get round trip across word boundaries") {
    BitVec v(4096);
    v.set_bits(60, 40, 0xbcdef12345ull);
    CHECK(v.get_bits(60, 40) == 0xbcdef12345ull);
    v.set_bits(0, 64, ~0ull);
    CHECK(v.get_bits(0, 64) == ~0ull);
    // the overlapping write clobbered the low 4 bits of the first field
    CHECK(v.get_bits(60, 40) == ((0xbcdef12345ull & ~0xfull) | 0xfull));
}

TEST_CASE("bitvec random fuzz against bit-by-bit oracle") {
    const unsigned widths[] = {1, 3, 7, 13, 27, 33, 48, 61, 64};
    std::uint64_t state = 12345;
    BitVec v(2048);
    std::vector<bool> oracle(2048, false);
    for (int iter = 0; iter < 2000; ++iter) {
        const unsigned w = widths[splitmix64(state) % 9];
        const std::uint64_t pos = splitmix64(state) % (2048 - w);
        const std::uint64_t val = splitmix64(state) & (w == 64 ? ~0ull : ((1ull << w) - 1));
        v.set_bits(pos, w, val);
        for (unsigned i = 0; i < w; ++i) oracle[pos + i] = (val >> i) & 1;
        // verify a random window
        const unsigned rw = widths[splitmix64(state) % 9];
        const std::uint64_t rpos = splitmix64(state) % (2048 - rw);
        std::uint64_t want = 0;
        for (unsigned i = 0; i < rw; ++i) want |= static_cast<std::uint64_t>(oracle[rpos + i]) << i;
        CHECK(v.get_bits(rpos, rw) == want);
    }
}

TEST_CASE("bit width helpers") {
    CHECK(bit_width_for(0) == 1);
    CHECK(bit_width_for(1) == 1);
    CHECK(bit_width_for(2) == 2);
    CHECK(bit_width_for(255) == 8);
    CHECK(bit_width_for(256) == 9);
    CHECK(log2_exact(4096) == 12);
    CHECK_THROWS_AS(log2_exact(12), bad_parameters);
}
