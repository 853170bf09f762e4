#ifndef EMDICT_HASHING_HPP_
#define EMDICT_HASHING_HPP_

#include <cstdint>
#include <vector>

#include "emdict/bitvec.hpp"
#include "emdict/errors.hpp"

namespace emdict {

/// splitmix64; used to expand seeds into coefficient streams and to derive
/// independent per-structure seeds from one run seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// The i-th derived seed of a run seed (independent stream heads).
inline std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t index) {
    std::uint64_t s = run_seed;
    std::uint64_t v = 0;
    for (std::uint64_t i = 0; i <= index; ++i) v = splitmix64(s);
    return v;
}

/// Degree-k polynomial hash modulo the Mersenne prime 2^61-1, giving
/// k-independence. Coefficients are a pure function of the seed; instances
/// are immutable after construction and safe to evaluate from any thread.
class PolyHash {
public:
    static constexpr std::uint64_t PRIME = (1ull << 61) - 1;

    PolyHash(std::uint64_t seed, unsigned degree) : seed_(seed), coeffs_(degree) {
        if (degree == 0) throw bad_parameters("PolyHash: degree must be >= 1");
        std::uint64_t state = seed;
        for (auto& c : coeffs_) c = splitmix64(state) % PRIME;
    }

    std::uint64_t seed() const { return seed_; }
    unsigned degree() const { return static_cast<unsigned>(coeffs_.size()); }
    const std::vector<std::uint64_t>& coefficients() const { return coeffs_; }

    static std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b) {
        const unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
        std::uint64_t lo = static_cast<std::uint64_t>(prod & PRIME);
        std::uint64_t hi = static_cast<std::uint64_t>(prod >> 61);
        std::uint64_t r = lo + hi;
        if (r >= PRIME) r -= PRIME;
        return r;
    }

    static std::uint64_t reduce(std::uint64_t x) {
        std::uint64_t r = (x & PRIME) + (x >> 61);
        if (r >= PRIME) r -= PRIME;
        return r;
    }

    /// sum_i c_i * key^i  (mod 2^61-1), evaluated by Horner's rule.
    std::uint64_t eval(std::uint64_t key) const {
        const std::uint64_t x = reduce(key);
        std::uint64_t acc = coeffs_.back();
        for (std::size_t i = coeffs_.size() - 1; i-- > 0;) {
            acc = mul_mod(acc, x) + coeffs_[i];
            if (acc >= PRIME) acc -= PRIME;
        }
        return acc;
    }

private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> coeffs_;
};

/// The (page, distribution, shadow) hash triple addressing a gadget at some
/// level (b, t). p in [b], d and s in [t].
struct HashedKey {
    std::uint32_t p = 0;
    std::uint32_t d = 0;
    std::uint32_t s = 0;

    bool operator==(const HashedKey& o) const { return p == o.p && d == o.d && s == o.s; }
    bool operator!=(const HashedKey& o) const { return !(*this == o); }
};

/// Hash a key into the shrunken universe [n^2]; n must be a power of two.
inline std::uint64_t shrink_key(const PolyHash& h, std::uint64_t key, std::uint64_t n) {
    if (!is_power_of_two(n)) throw bad_parameters("shrink_key: n must be a power of two");
    const unsigned lg_n = log2_exact(n);
    const std::uint64_t mask = (lg_n >= 32) ? ~0ull : ((1ull << (2 * lg_n)) - 1);
    return h.eval(key) & mask;
}

/// The bit split used by partition_hash: of the low (lg b + 2 lg t) bits of
/// v, the most significant lg b form p, the next lg t form d, the last form s.
inline HashedKey split_hash_fields(std::uint64_t v, unsigned lg_b, unsigned lg_t) {
    v &= (1ull << (lg_b + 2 * lg_t)) - 1;
    HashedKey k;
    k.p = static_cast<std::uint32_t>(v >> (2 * lg_t));
    k.d = static_cast<std::uint32_t>((v >> lg_t) & ((1u << lg_t) - 1));
    k.s = static_cast<std::uint32_t>(v & ((1u << lg_t) - 1));
    return k;
}

inline HashedKey partition_hash(const PolyHash& h, std::uint64_t key, std::uint64_t b,
                                std::uint32_t t) {
    if (!is_power_of_two(b) || !is_power_of_two(t)) {
        throw bad_parameters("partition_hash: b and t must be powers of two");
    }
    const unsigned lg_b = log2_exact(b);
    const unsigned lg_t = log2_exact(t);
    if (lg_b + 2 * lg_t > 60) throw bad_parameters("partition_hash: lg b + 2 lg t > 60");
    return split_hash_fields(h.eval(key), lg_b, lg_t);
}

/// Most significant half of the lg t bits of x.
inline std::uint32_t high_half(std::uint32_t x, std::uint32_t t) {
    const unsigned lg_t = log2_exact(t);
    if (lg_t % 2 != 0) throw bad_parameters("high_half: lg t must be even");
    return x >> (lg_t / 2);
}

/// Least significant half of the lg t bits of x.
inline std::uint32_t low_half(std::uint32_t x, std::uint32_t t) {
    const unsigned lg_t = log2_exact(t);
    if (lg_t % 2 != 0) throw bad_parameters("low_half: lg t must be even");
    return x & ((1u << (lg_t / 2)) - 1);
}

}  // namespace emdict

#endif  // EMDICT_HASHING_HPP_
