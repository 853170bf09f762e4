#include "emdict/gadget.hpp"

#include <algorithm>

#include "emdict/errors.hpp"

namespace emdict {

namespace {

std::uint64_t raw_get_bits(const std::vector<std::uint64_t>& words, std::uint64_t pos,
                           unsigned width) {
    const std::uint64_t w = pos / 64;
    const unsigned off = static_cast<unsigned>(pos % 64);
    const std::uint64_t mask = width == 64 ? ~0ull : ((1ull << width) - 1);
    std::uint64_t v = words[w] >> off;
    if (off + width > 64) v |= words[w + 1] << (64 - off);
    return v & mask;
}

unsigned ceil_log2(std::uint64_t x) {
    unsigned lg = 0;
    while ((1ull << lg) < x) ++lg;
    return lg;
}

bool element_less(const GadgetElement& a, const GadgetElement& b) {
    if (a.key.p != b.key.p) return a.key.p < b.key.p;
    if (a.key.d != b.key.d) return a.key.d < b.key.d;
    if (a.key.s != b.key.s) return a.key.s < b.key.s;
    return a.payload < b.payload;
}

}  // namespace

GadgetParams make_gadget_params(std::uint32_t t_requested, std::uint32_t t_min, std::uint64_t b,
                                unsigned payload_bits, std::uint64_t capacity_override,
                                double c_cap) {
    if (t_min < 2 || !is_power_of_two(t_min)) {
        throw bad_parameters("gadget: t_min must be a power of two >= 2");
    }
    if (!is_power_of_two(b) || b < 64) {
        throw bad_parameters("gadget: b must be a power of two >= 64");
    }
    if (payload_bits == 0 || payload_bits > 48) {
        throw bad_parameters("gadget: payload_bits must be in [1, 48]");
    }
    if (t_requested == 0) throw bad_parameters("gadget: t must be positive");

    const unsigned lg_tmin = log2_exact(t_min);
    const unsigned lg_req = ceil_log2(t_requested);
    // pad the requested t up the ladder lg t = 2^j * lg t_min
    unsigned lg_t = lg_tmin;
    while (lg_t < lg_req) lg_t *= 2;

    GadgetParams p;
    p.t = 1u << lg_t;
    p.t_min = t_min;
    p.b = b;
    p.payload_bits = payload_bits;
    p.lg_t = lg_t;
    p.lg_b = log2_exact(b);
    p.key_bits = p.lg_b + 2 * lg_t;
    if (p.key_bits > 60) throw bad_parameters("gadget: lg b + 2 lg t > 60");
    p.elem_bits = p.key_bits + payload_bits;
    p.is_base = (lg_t == lg_tmin);

    const std::uint64_t default_cap =
        static_cast<std::uint64_t>(c_cap * static_cast<double>(b) * p.t);
    p.capacity = capacity_override ? capacity_override : default_cap;
    if (p.capacity == 0) throw bad_parameters("gadget: zero capacity");

    p.elems_per_block = b / p.elem_bits;
    if (p.elems_per_block == 0) throw bad_parameters("gadget: element wider than a page");
    if (p.is_base && p.elem_bits > b - 32) {
        throw bad_parameters("gadget: base element does not fit a chained table page");
    }
    p.top_capacity = p.is_base ? 0 : b * p.sqrt_t();
    p.max_log_blocks = (p.capacity + p.elems_per_block - 1) / p.elems_per_block + 1;
    p.block_index_bits = bit_width_for(p.max_log_blocks);
    if (!p.is_base) {
        const std::uint64_t t_cubed = static_cast<std::uint64_t>(p.t) * p.t * p.t;
        if (p.max_log_blocks > t_cubed) {
            throw bad_parameters("gadget: log block count exceeds the [t^3] backpointer range");
        }
    }
    return p;
}

Gadget::Gadget(const GadgetParams& params, PageStore& store, bool resident_hot)
    : params_(params), store_(store), resident_hot_(resident_hot) {
    if (params_.b != store.page_bits()) {
        throw bad_parameters("gadget: params.b must match the store page size");
    }
    if (params_.is_base) {
        table_slots_ = std::max<std::uint64_t>(
            1, (params_.capacity * params_.elem_bits + params_.b - 1) / params_.b);
        slot_chains_.resize(table_slots_);
        slot_fill_.assign(table_slots_, 0);
        base_query_pages_hist_.assign(10, 0);
    }
}

Gadget::~Gadget() { reset(); }

void Gadget::reset() {
    for (PageId id : log_blocks_) {
        if (resident_hot_) store_.unpin(id, false);
        store_.free_page(id);
    }
    log_blocks_.clear();
    tail_fill_ = 0;
    top_.reset();
    bottoms_.clear();
    flushed_lo_ = flushed_hi_ = 0;
    little_flushed_elems_ = 0;
    little_flushes_ = big_flushes_ = 0;
    if (buffer_page_.valid()) {
        store_.unpin(buffer_page_, false);
        store_.free_page(buffer_page_);
        buffer_page_ = PageId();
    }
    buffer_fill_ = 0;
    for (auto& chain : slot_chains_) {
        for (PageId id : chain) {
            store_.unpin(id, false);
            store_.free_page(id);
        }
        chain.clear();
    }
    if (!slot_fill_.empty()) slot_fill_.assign(slot_fill_.size(), 0);
    base_distributions_ = 0;
    count_ = 0;
    bits_appended_ = 0;
    fp_filtered_ = 0;
    compression_mismatches_ = 0;
}

void Gadget::pack_element(BitVec& img, std::uint64_t slot, const GadgetElement& e) const {
    const std::uint64_t pos = slot * params_.elem_bits;
    const std::uint64_t key = (static_cast<std::uint64_t>(e.key.p) << (2 * params_.lg_t)) |
                              (static_cast<std::uint64_t>(e.key.d) << params_.lg_t) | e.key.s;
    img.set_bits(pos, params_.key_bits, key);
    img.set_bits(pos + params_.key_bits, params_.payload_bits, e.payload);
}

GadgetElement Gadget::unpack_element(const BitVec& img, std::uint64_t slot) const {
    return unpack_element(img.words(), slot);
}

GadgetElement Gadget::unpack_element(const std::vector<std::uint64_t>& words,
                                     std::uint64_t slot) const {
    const std::uint64_t pos = slot * params_.elem_bits;
    const std::uint64_t key = raw_get_bits(words, pos, params_.key_bits);
    GadgetElement e;
    e.key.s = static_cast<std::uint32_t>(key & (params_.t - 1));
    e.key.d = static_cast<std::uint32_t>((key >> params_.lg_t) & (params_.t - 1));
    e.key.p = static_cast<std::uint32_t>(key >> (2 * params_.lg_t));
    e.payload = raw_get_bits(words, pos + params_.key_bits, params_.payload_bits);
    return e;
}

HashedKey Gadget::compress_top(const HashedKey& k) const {
    return HashedKey{k.p, high_half(k.d, params_.t), high_half(k.s, params_.t)};
}

HashedKey Gadget::compress_bottom(const HashedKey& k) const {
    return HashedKey{k.p, low_half(k.d, params_.t), low_half(k.s, params_.t)};
}

void Gadget::ensure_top() {
    if (top_) return;
    // The top gadget's content is bounded by the big-flush trigger; its
    // capacity adds flush granularity slack plus a quarter of headroom so
    // the base-case table stays below one page per slot.
    const std::uint64_t cap = params_.top_capacity + params_.top_capacity / 4 +
                              4 * params_.elems_per_block + 64;
    GadgetParams p = make_gadget_params(params_.sqrt_t(), params_.t_min, params_.b,
                                        params_.block_index_bits, cap);
    top_ = std::make_unique<Gadget>(p, store_, resident_hot_);
}

void Gadget::ensure_bottom(std::uint32_t i) {
    if (bottoms_.empty()) bottoms_.resize(params_.sqrt_t());
    if (!bottoms_[i]) {
        GadgetParams p = make_gadget_params(params_.sqrt_t(), params_.t_min, params_.b,
                                            params_.block_index_bits);
        bottoms_[i] = std::make_unique<Gadget>(p, store_, false);
    }
}

PageId Gadget::alloc_hot_page() {
    PageId id = store_.alloc_page();
    if (resident_hot_) store_.pin(id);
    return id;
}

void Gadget::bulk_insert(const std::vector<GadgetElement>& batch) {
    if (batch.empty()) return;
    if (count_ + batch.size() > params_.capacity) {
        throw needs_rebuild("gadget: capacity " + std::to_string(params_.capacity) +
                            " exceeded at t=" + std::to_string(params_.t));
    }
    OpScope scope(store_);
    if (params_.is_base) {
        base_insert(batch);
        return;
    }

    const std::uint64_t epb = params_.elems_per_block;
    std::vector<GadgetElement> work;
    work.reserve(tail_fill_ + batch.size());
    if (tail_fill_ > 0) {
        BitVec img = store_.read_page(log_blocks_.back());
        for (std::uint64_t i = 0; i < tail_fill_; ++i) work.push_back(unpack_element(img, i));
    }
    work.insert(work.end(), batch.begin(), batch.end());

    const std::uint64_t full_before = log_blocks_.size() - (tail_fill_ > 0 ? 1 : 0);
    const std::uint64_t total = work.size();
    const std::uint64_t n_full = total / epb;
    const std::uint64_t new_tail = total % epb;

    for (std::uint64_t k = 0; k < n_full; ++k) {
        BitVec img(params_.b);
        for (std::uint64_t i = 0; i < epb; ++i) pack_element(img, i, work[k * epb + i]);
        PageId id;
        const bool reuse_tail = (k == 0 && tail_fill_ > 0);
        if (reuse_tail) {
            id = log_blocks_[full_before];
        } else {
            id = store_.alloc_page();
            log_blocks_.push_back(id);
        }
        store_.write_page(id, img);
        if (resident_hot_) store_.unpin(id, true);  // full blocks leave the resident set
    }
    if (new_tail > 0) {
        BitVec img(params_.b);
        for (std::uint64_t i = 0; i < new_tail; ++i) {
            pack_element(img, i, work[n_full * epb + i]);
        }
        PageId id;
        const bool reuse_tail = (n_full == 0 && tail_fill_ > 0);
        if (reuse_tail) {
            id = log_blocks_.back();
        } else {
            id = store_.alloc_page();
            log_blocks_.push_back(id);
            if (resident_hot_) store_.pin(id);
        }
        store_.write_page(id, img);
    }
    tail_fill_ = new_tail;
    count_ += batch.size();
    bits_appended_ += batch.size() * params_.elem_bits;

    for (std::uint64_t k = 0; k < n_full; ++k) {
        std::vector<GadgetElement> elems(work.begin() + k * epb, work.begin() + (k + 1) * epb);
        little_flush(full_before + k, elems);
    }
}

void Gadget::little_flush(std::uint64_t block_index, const std::vector<GadgetElement>& elems) {
    ++little_flushes_;
    little_flushed_elems_ += elems.size();
    flushed_hi_ = block_index + 1;
    ensure_top();
    std::vector<GadgetElement> compressed;
    compressed.reserve(elems.size());
    for (const auto& e : elems) compressed.push_back({compress_top(e.key), block_index});
    top_->bulk_insert(compressed);
    // Big flush whenever cumulative little-flushed elements cross a multiple
    // of b*sqrt(t); keeps big_flushes == floor(little_flushed / (b sqrt t))
    // exactly even when elems_per_block does not divide the trigger.
    while (little_flushed_elems_ / params_.top_capacity > big_flushes_) big_flush();
}

void Gadget::big_flush() {
    ++big_flushes_;
    const std::uint32_t st = params_.sqrt_t();
    std::vector<std::vector<GadgetElement>> buckets(st);
    for (std::uint64_t i = flushed_lo_; i < flushed_hi_; ++i) {
        BitVec img = store_.read_page(log_blocks_[i]);
        for (std::uint64_t s = 0; s < params_.elems_per_block; ++s) {
            const GadgetElement e = unpack_element(img, s);
            buckets[high_half(e.key.d, params_.t)].push_back({compress_bottom(e.key), i});
        }
    }
    top_->reset();
    for (std::uint32_t bi = 0; bi < st; ++bi) {
        if (buckets[bi].empty()) continue;
        ensure_bottom(bi);
        bottoms_[bi]->bulk_insert(buckets[bi]);
        store_.checkpoint_op();
    }
    flushed_lo_ = flushed_hi_;
}

std::vector<std::uint64_t> Gadget::query(const HashedKey& x) {
    OpScope scope(store_);
    last_query_gadgets_ = 1;
    last_query_pages_ = 0;
    std::vector<std::uint64_t> out;
    if (params_.is_base) {
        return base_query(x);
    }
    if (tail_fill_ > 0) {
        BitVec img = store_.read_page(log_blocks_.back());
        ++last_query_pages_;
        for (std::uint64_t i = 0; i < tail_fill_; ++i) {
            const GadgetElement e = unpack_element(img, i);
            if (e.key == x) out.push_back(e.payload);
        }
    }
    if (top_ && top_->size() > 0) {
        const auto sub = top_->query(compress_top(x));
        last_query_gadgets_ += top_->last_query_gadgets_visited();
        last_query_pages_ += top_->last_query_pages_touched();
        verify_candidates(sub, x, true, out);
    }
    if (!bottoms_.empty()) {
        const std::uint32_t bi = high_half(x.d, params_.t);
        if (bottoms_[bi] && bottoms_[bi]->size() > 0) {
            const auto sub = bottoms_[bi]->query(compress_bottom(x));
            last_query_gadgets_ += bottoms_[bi]->last_query_gadgets_visited();
            last_query_pages_ += bottoms_[bi]->last_query_pages_touched();
            verify_candidates(sub, x, false, out);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void Gadget::verify_candidates(const std::vector<std::uint64_t>& candidates, const HashedKey& x,
                               bool from_top, std::vector<std::uint64_t>& out) {
    const HashedKey cx = from_top ? compress_top(x) : compress_bottom(x);
    std::size_t i = 0;
    while (i < candidates.size()) {
        const std::uint64_t block = candidates[i];
        std::uint64_t m = 0;
        while (i < candidates.size() && candidates[i] == block) {
            ++i;
            ++m;
        }
        if (block >= log_blocks_.size()) {
            compression_mismatches_ += m;
            continue;
        }
        // Dereference the log block and re-check the full key: the halves
        // dropped by compression are restored here, false positives die.
        BitVec img = store_.read_page(log_blocks_[block]);
        ++last_query_pages_;
        std::uint64_t compressed_matches = 0;
        for (std::uint64_t s = 0; s < params_.elems_per_block; ++s) {
            const GadgetElement e = unpack_element(img, s);
            const HashedKey ce = from_top ? compress_top(e.key) : compress_bottom(e.key);
            if (ce == cx) {
                ++compressed_matches;
                if (e.key == x) {
                    out.push_back(e.payload);
                } else {
                    ++fp_filtered_;
                }
            }
        }
        if (compressed_matches != m) {
            compression_mismatches_ +=
                compressed_matches > m ? compressed_matches - m : m - compressed_matches;
        }
    }
}

// ---------------------------------------------------------------------------
// base case: one buffer page plus a hash table addressed by the page hash

std::uint64_t Gadget::table_page_elems() const { return (params_.b - 32) / params_.elem_bits; }

void Gadget::base_insert(const std::vector<GadgetElement>& batch) {
    const std::uint64_t cap = params_.elems_per_block;
    std::vector<GadgetElement> work;
    work.reserve(buffer_fill_ + batch.size());
    if (buffer_fill_ > 0) {
        BitVec img = store_.read_page(buffer_page_);
        for (std::uint64_t i = 0; i < buffer_fill_; ++i) work.push_back(unpack_element(img, i));
    }
    work.insert(work.end(), batch.begin(), batch.end());

    const std::uint64_t keep = work.size() % cap;
    const std::uint64_t flush_n = work.size() - keep;
    if (flush_n > 0) {
        std::vector<GadgetElement> to_flush(work.begin(), work.begin() + flush_n);
        base_distribute(to_flush);
        base_distributions_ += flush_n / cap;
    }
    if (keep > 0) {
        if (!buffer_page_.valid()) buffer_page_ = alloc_hot_page();
        BitVec img(params_.b);
        for (std::uint64_t i = 0; i < keep; ++i) pack_element(img, i, work[flush_n + i]);
        store_.write_page(buffer_page_, img);
    }
    buffer_fill_ = keep;
    count_ += batch.size();
    bits_appended_ += batch.size() * params_.elem_bits;
}

void Gadget::base_distribute(const std::vector<GadgetElement>& elems) {
    std::vector<std::vector<GadgetElement>> groups(table_slots_);
    for (const auto& e : elems) groups[e.key.p % table_slots_].push_back(e);
    const std::uint64_t tpe = table_page_elems();
    for (std::uint64_t s = 0; s < table_slots_; ++s) {
        if (groups[s].empty()) continue;
        auto& chain = slot_chains_[s];
        std::uint64_t fill = slot_fill_[s];
        std::size_t gi = 0;
        while (gi < groups[s].size()) {
            const std::uint64_t page_idx = fill / tpe;
            const std::uint64_t off = fill % tpe;
            PageId id;
            BitVec img(params_.b);
            if (page_idx == chain.size()) {
                id = alloc_hot_page();
                if (!chain.empty()) {
                    BitVec prev = store_.read_page(chain.back());
                    prev.set_bits(params_.b - 32, 32, id.value);
                    store_.write_page(chain.back(), prev);
                }
                chain.push_back(id);
                img.set_bits(params_.b - 32, 32, PageId::INVALID);
            } else {
                id = chain[page_idx];
                img = store_.read_page(id);
            }
            const std::uint64_t room = tpe - off;
            const std::uint64_t take = std::min<std::uint64_t>(room, groups[s].size() - gi);
            for (std::uint64_t i = 0; i < take; ++i) pack_element(img, off + i, groups[s][gi + i]);
            store_.write_page(id, img);
            gi += take;
            fill += take;
        }
        slot_fill_[s] = fill;
    }
}

std::vector<std::uint64_t> Gadget::base_query(const HashedKey& x) {
    std::uint64_t pages = 0;
    std::vector<std::uint64_t> out;
    if (buffer_fill_ > 0) {
        BitVec img = store_.read_page(buffer_page_);
        ++pages;
        for (std::uint64_t i = 0; i < buffer_fill_; ++i) {
            const GadgetElement e = unpack_element(img, i);
            if (e.key == x) out.push_back(e.payload);
        }
    }
    const std::uint64_t s = x.p % table_slots_;
    const std::uint64_t tpe = table_page_elems();
    std::uint64_t remaining = slot_fill_[s];
    for (PageId id : slot_chains_[s]) {
        if (remaining == 0) break;
        BitVec img = store_.read_page(id);
        ++pages;
        const std::uint64_t cnt = std::min(tpe, remaining);
        for (std::uint64_t i = 0; i < cnt; ++i) {
            const GadgetElement e = unpack_element(img, i);
            if (e.key == x) out.push_back(e.payload);
        }
        remaining -= cnt;
    }
    last_query_pages_ = pages;
    ++base_query_pages_hist_[std::min<std::uint64_t>(pages, 9)];
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// instrumentation (peek-based, no I/O counted)

void Gadget::debug_enumerate(std::vector<GadgetElement>& out) const {
    if (params_.is_base) {
        if (buffer_fill_ > 0) {
            const auto& words = store_.peek_page(buffer_page_);
            for (std::uint64_t i = 0; i < buffer_fill_; ++i) {
                out.push_back(unpack_element(words, i));
            }
        }
        const std::uint64_t tpe = table_page_elems();
        for (std::uint64_t s = 0; s < table_slots_; ++s) {
            std::uint64_t remaining = slot_fill_[s];
            for (PageId id : slot_chains_[s]) {
                if (remaining == 0) break;
                const auto& words = store_.peek_page(id);
                const std::uint64_t cnt = std::min(tpe, remaining);
                for (std::uint64_t i = 0; i < cnt; ++i) out.push_back(unpack_element(words, i));
                remaining -= cnt;
            }
        }
        return;
    }
    const std::uint64_t full_blocks = log_blocks_.size() - (tail_fill_ > 0 ? 1 : 0);
    for (std::uint64_t b = 0; b < full_blocks; ++b) {
        const auto& words = store_.peek_page(log_blocks_[b]);
        for (std::uint64_t i = 0; i < params_.elems_per_block; ++i) {
            out.push_back(unpack_element(words, i));
        }
    }
    if (tail_fill_ > 0) {
        const auto& words = store_.peek_page(log_blocks_.back());
        for (std::uint64_t i = 0; i < tail_fill_; ++i) out.push_back(unpack_element(words, i));
    }
}

std::uint64_t Gadget::debug_classify() const {
    if (params_.is_base) return 0;
    std::uint64_t violations = 0;
    std::vector<GadgetElement> expect_top;
    std::vector<std::vector<GadgetElement>> expect_bottom(params_.sqrt_t());
    const std::uint64_t full_blocks = log_blocks_.size() - (tail_fill_ > 0 ? 1 : 0);
    if (flushed_hi_ != full_blocks) ++violations;
    for (std::uint64_t b = 0; b < full_blocks; ++b) {
        const auto& words = store_.peek_page(log_blocks_[b]);
        for (std::uint64_t i = 0; i < params_.elems_per_block; ++i) {
            const GadgetElement e = unpack_element(words, i);
            if (b < flushed_lo_) {
                expect_bottom[high_half(e.key.d, params_.t)].push_back({compress_bottom(e.key), b});
            } else if (b < flushed_hi_) {
                expect_top.push_back({compress_top(e.key), b});
            } else {
                ++violations;
            }
        }
    }
    auto matches = [](std::vector<GadgetElement>& expected, const Gadget* g) {
        std::vector<GadgetElement> got;
        if (g) g->debug_enumerate(got);
        std::sort(expected.begin(), expected.end(), element_less);
        std::sort(got.begin(), got.end(), element_less);
        return expected == got;
    };
    if (!matches(expect_top, top_.get())) ++violations;
    for (std::uint32_t bi = 0; bi < params_.sqrt_t(); ++bi) {
        const Gadget* g = (bi < bottoms_.size()) ? bottoms_[bi].get() : nullptr;
        if (!matches(expect_bottom[bi], g)) ++violations;
    }
    if (top_) violations += top_->debug_classify();
    for (const auto& g : bottoms_) {
        if (g) violations += g->debug_classify();
    }
    return violations;
}

void Gadget::collect_stats(GadgetStats& s, unsigned level) const {
    if (s.per_level_elements.size() <= level) {
        s.per_level_elements.resize(level + 1, 0);
        s.per_level_bits_appended.resize(level + 1, 0);
    }
    s.per_level_elements[level] += count_;
    s.per_level_bits_appended[level] += bits_appended_;
    s.little_flushes += little_flushes_;
    s.big_flushes += big_flushes_;
    s.false_positives_filtered += fp_filtered_;
    s.compression_mismatches += compression_mismatches_;
    s.page_count += log_blocks_.size();
    if (buffer_page_.valid()) s.page_count += 1;
    for (const auto& chain : slot_chains_) s.page_count += chain.size();
    if (top_) top_->collect_stats(s, level + 1);
    for (const auto& g : bottoms_) {
        if (g) g->collect_stats(s, level + 1);
    }
}

GadgetStats Gadget::stats() const {
    GadgetStats s;
    collect_stats(s, 0);
    s.element_count = count_;
    return s;
}

std::uint64_t Gadget::false_positives_filtered() const {
    std::uint64_t total = fp_filtered_;
    if (top_) total += top_->false_positives_filtered();
    for (const auto& g : bottoms_) {
        if (g) total += g->false_positives_filtered();
    }
    return total;
}

void Gadget::serialize(std::vector<std::uint64_t>& out) const {
    out.push_back(params_.t);
    out.push_back(params_.payload_bits);
    out.push_back(params_.capacity);
    out.push_back(resident_hot_ ? 1 : 0);
    out.push_back(count_);
    auto put_id = [&out](PageId id) { out.push_back(id.valid() ? id.value + 1ull : 0); };
    if (params_.is_base) {
        put_id(buffer_page_);
        out.push_back(buffer_fill_);
        out.push_back(table_slots_);
        for (std::uint64_t s = 0; s < table_slots_; ++s) {
            out.push_back(slot_fill_[s]);
            out.push_back(slot_chains_[s].size());
            for (PageId id : slot_chains_[s]) put_id(id);
        }
        return;
    }
    out.push_back(log_blocks_.size());
    for (PageId id : log_blocks_) put_id(id);
    out.push_back(tail_fill_);
    out.push_back(flushed_lo_);
    out.push_back(flushed_hi_);
    out.push_back(little_flushed_elems_);
    out.push_back(little_flushes_);
    out.push_back(big_flushes_);
    out.push_back(top_ ? 1 : 0);
    if (top_) top_->serialize(out);
    out.push_back(bottoms_.size());
    for (const auto& g : bottoms_) {
        out.push_back(g ? 1 : 0);
        if (g) g->serialize(out);
    }
}

std::unique_ptr<Gadget> Gadget::deserialize(const std::vector<std::uint64_t>& in, std::size_t& pos,
                                            PageStore& store, std::uint32_t t_min,
                                            std::uint64_t b) {
    auto next = [&in, &pos]() { return in.at(pos++); };
    const std::uint32_t t = static_cast<std::uint32_t>(next());
    const unsigned payload_bits = static_cast<unsigned>(next());
    const std::uint64_t capacity = next();
    const bool resident = next() != 0;
    const std::uint64_t count = next();
    GadgetParams p = make_gadget_params(t, t_min, b, payload_bits, capacity);
    auto g = std::make_unique<Gadget>(p, store, resident);
    g->count_ = count;
    auto get_id = [&next]() {
        const std::uint64_t v = next();
        return v == 0 ? PageId() : PageId(static_cast<std::uint32_t>(v - 1));
    };
    if (p.is_base) {
        g->buffer_page_ = get_id();
        g->buffer_fill_ = next();
        const std::uint64_t slots = next();
        if (slots != g->table_slots_) throw bad_parameters("gadget deserialize: slot mismatch");
        for (std::uint64_t s = 0; s < slots; ++s) {
            g->slot_fill_[s] = next();
            const std::uint64_t chain_len = next();
            g->slot_chains_[s].resize(chain_len);
            for (auto& id : g->slot_chains_[s]) id = get_id();
        }
        return g;
    }
    const std::uint64_t blocks = next();
    g->log_blocks_.resize(blocks);
    for (auto& id : g->log_blocks_) id = get_id();
    g->tail_fill_ = next();
    g->flushed_lo_ = next();
    g->flushed_hi_ = next();
    g->little_flushed_elems_ = next();
    g->little_flushes_ = next();
    g->big_flushes_ = next();
    if (next() != 0) g->top_ = deserialize(in, pos, store, t_min, b);
    const std::uint64_t n_bottoms = next();
    if (n_bottoms > 0) {
        g->bottoms_.resize(n_bottoms);
        for (auto& slot : g->bottoms_) {
            if (next() != 0) slot = deserialize(in, pos, store, t_min, b);
        }
    }
    return g;
}

std::vector<std::uint64_t> Gadget::base_query_page_histogram() const {
    std::vector<std::uint64_t> hist(10, 0);
    if (params_.is_base) {
        for (std::size_t i = 0; i < hist.size(); ++i) hist[i] += base_query_pages_hist_[i];
    }
    auto merge = [&hist](const Gadget* g) {
        if (!g) return;
        const auto sub = g->base_query_page_histogram();
        for (std::size_t i = 0; i < hist.size(); ++i) hist[i] += sub[i];
    };
    merge(top_.get());
    for (const auto& g : bottoms_) merge(g.get());
    return hist;
}

}  // namespace emdict
