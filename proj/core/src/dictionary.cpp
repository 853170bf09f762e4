#include "emdict/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <unordered_map>

#include "emdict/errors.hpp"

namespace emdict {

CostPrediction predict_costs(std::uint64_t n, std::uint32_t B, std::uint64_t M_words,
                             std::uint32_t lambda) {
    if (n < 4 || B == 0 || M_words < 4) throw bad_parameters("predict_costs: degenerate parameters");
    const double lg_n = std::log2(static_cast<double>(n));
    const double lg_M = std::log2(static_cast<double>(M_words));
    const double log_M_n = lg_n / lg_M;
    const double lg_lg_M = std::log2(lg_M);
    const double lo = std::max(std::log2(lg_n), log_M_n);
    if (static_cast<double>(lambda) < lo || lambda > B) {
        throw bad_parameters("predict_costs: lambda outside [max(lg lg n, log_M n), B]");
    }
    CostPrediction c;
    c.t_u = (log_M_n + lg_lg_M + static_cast<double>(lambda)) / static_cast<double>(B);
    c.t_q = lg_n / std::log2(static_cast<double>(lambda));
    return c;
}

std::uint32_t t_min_for_lambda(std::uint32_t lambda) {
    std::uint32_t best = 2;
    for (std::uint32_t t = 2; t <= (1u << 16); t <<= 1) {
        const std::uint32_t cost = t * log2_exact(t);
        if (cost <= lambda) best = t;
    }
    return best;
}

Dictionary::Dictionary(const DictConfig& cfg) : cfg_(cfg) {
    derive_parameters();
    mem_ = std::make_unique<PagedMemory>(cfg_.page_words, 64, cfg_.page_budget);
    cache_ = std::make_unique<CacheView>(*mem_, cfg_.cache_words / cfg_.page_words);
    shrink_hash_ = std::make_unique<PolyHash>(fresh_hash());
    auto root = std::make_unique<Node>();
    root->hash = std::make_unique<PolyHash>(fresh_hash());
    nodes_.push_back(std::move(root));
}

Dictionary::~Dictionary() = default;

void Dictionary::derive_parameters() {
    if (cfg_.n_max < 16) cfg_.n_max = 16;
    n_pow_ = 1;
    while (n_pow_ < cfg_.n_max) n_pow_ <<= 1;
    lg_n_ = log2_exact(n_pow_);
    h_bits_ = 2 * lg_n_;
    b_ = static_cast<std::uint64_t>(cfg_.page_words) * 64;
    if (!is_power_of_two(b_)) throw bad_parameters("dictionary: page bits must be a power of two");
    if (cfg_.page_words < lg_n_) {
        throw bad_parameters("dictionary: requires B >= lg n (" + std::to_string(cfg_.page_words) +
                             " < " + std::to_string(lg_n_) + ")");
    }
    const double lg_M = std::log2(static_cast<double>(cfg_.cache_words));
    const double lo = std::max(std::log2(static_cast<double>(lg_n_)),
                               static_cast<double>(lg_n_) / lg_M);
    if (static_cast<double>(cfg_.lambda) < lo || cfg_.lambda > cfg_.page_words) {
        throw bad_parameters("dictionary: lambda outside [max(lg lg n, log_M n), B]");
    }
    t_min_ = cfg_.t_min ? cfg_.t_min : t_min_for_lambda(cfg_.lambda);
    if (!is_power_of_two(t_min_) || t_min_ < 2) {
        throw bad_parameters("dictionary: t_min must be a power of two >= 2");
    }
    m_keys_ = cfg_.node_keys ? cfg_.node_keys : std::max<std::uint64_t>(cfg_.cache_words / 2, 64);
    chunk_bits_ = std::max<unsigned>(1, static_cast<unsigned>(std::llround(cfg_.epsilon * lg_M)));
    branching_ = 1u << chunk_bits_;
    max_depth_ = h_bits_ / chunk_bits_;
    max_log_entries_ = 4 * n_pow_;
    assoc_bits_ = bit_width_for(max_log_entries_ - 1);
    if (h_bits_ + assoc_bits_ > 64) {
        throw bad_parameters("dictionary: n_max too large for packed pending pairs (max 2^20)");
    }
    hash_degree_ = std::max<unsigned>(2, 2 * lg_n_);
    log_entries_per_page_ = b_ / LOG_ENTRY_BITS;
    pairs_per_page_ = b_ / 64;
    if (log_entries_per_page_ == 0 || pairs_per_page_ == 0) {
        throw bad_parameters("dictionary: page too small");
    }
}

PolyHash Dictionary::fresh_hash() {
    return PolyHash(derive_seed(cfg_.seed, hash_stream_++), hash_degree_);
}

std::uint32_t Dictionary::node_chunk(std::uint64_t h, unsigned depth) const {
    const unsigned shift = h_bits_ - (depth + 1) * chunk_bits_;
    return static_cast<std::uint32_t>((h >> shift) & (branching_ - 1));
}

GadgetParams Dictionary::node_gadget_params(std::uint32_t t_req, std::uint64_t capacity) const {
    return make_gadget_params(t_req, t_min_, b_, assoc_bits_, capacity);
}

// ---------------------------------------------------------------------------
// global log

std::uint64_t Dictionary::log_append(std::uint64_t key, std::uint64_t value, bool tombstone) {
    const std::uint64_t epp = log_entries_per_page_;
    const std::uint64_t off = log_count_ % epp;
    if (off == 0) {
        PageId id = cache_->alloc_page();
        cache_->pin_reserved(id);
        log_pages_.push_back(id);
    }
    const PageId tail = log_pages_.back();
    BitVec img = cache_->read_page(tail);
    const std::uint64_t pos = off * LOG_ENTRY_BITS;
    img.set_bits(pos, 64, key);
    img.set_bits(pos + 64, 64, value);
    img.set_bits(pos + 128, 64, tombstone ? 1 : 0);
    cache_->write_page(tail, img);
    if (off + 1 == epp) cache_->unpin(tail, true);
    return log_count_++;
}

Dictionary::LogEntry Dictionary::log_get(std::uint64_t j) {
    const BitVec img = cache_->read_page(log_pages_[j / log_entries_per_page_]);
    const std::uint64_t pos = (j % log_entries_per_page_) * LOG_ENTRY_BITS;
    return LogEntry{img.get_bits(pos, 64), img.get_bits(pos + 64, 64),
                    img.get_bits(pos + 128, 64) != 0};
}

// ---------------------------------------------------------------------------
// pending arrays

void Dictionary::append_pending(Node& node, const Pair* pairs, std::uint64_t count,
                                bool pinned_tail) {
    const std::uint64_t ppp = pairs_per_page_;
    std::uint64_t done = 0;
    while (done < count) {
        const std::uint64_t off = node.pending_count % ppp;
        if (off == 0) {
            PageId id = cache_->alloc_page();
            if (pinned_tail) cache_->pin_reserved(id);
            node.pending_pages.push_back(id);
        }
        const PageId tail = node.pending_pages.back();
        BitVec img = cache_->read_page(tail);
        const std::uint64_t take = std::min(ppp - off, count - done);
        for (std::uint64_t i = 0; i < take; ++i) {
            const Pair& pr = pairs[done + i];
            img.set_bits((off + i) * 64, 64, (pr.h << assoc_bits_) | pr.j);
        }
        cache_->write_page(tail, img);
        if (off + take == ppp && pinned_tail) cache_->unpin(tail, true);
        node.pending_count += take;
        done += take;
    }
}

std::vector<Dictionary::Pair> Dictionary::read_pending(const Node& node) const {
    std::vector<Pair> out;
    out.reserve(node.pending_count);
    const std::uint64_t ppp = pairs_per_page_;
    std::uint64_t remaining = node.pending_count;
    for (PageId id : node.pending_pages) {
        if (remaining == 0) break;
        const BitVec img = cache_->read_page(id);
        const std::uint64_t cnt = std::min(ppp, remaining);
        for (std::uint64_t i = 0; i < cnt; ++i) {
            const std::uint64_t w = img.get_bits(i * 64, 64);
            out.push_back(Pair{w >> assoc_bits_, w & ((1ull << assoc_bits_) - 1)});
        }
        remaining -= cnt;
    }
    return out;
}

void Dictionary::clear_pending(Node& node) {
    for (PageId id : node.pending_pages) {
        cache_->unpin(id, false);
        cache_->free_page(id);
    }
    node.pending_pages.clear();
    node.pending_count = 0;
}

// ---------------------------------------------------------------------------
// node gadgets

void Dictionary::gadget_insert(Node& node, const Pair* pairs, std::uint64_t count) {
    if (count == 0) return;
    if (!node.gadget) {
        const bool resident = (&node == nodes_[0].get());
        const std::uint32_t t_req =
            static_cast<std::uint32_t>(std::max<std::uint64_t>(1, m_keys_ / b_));
        node.gadget = std::make_unique<Gadget>(node_gadget_params(t_req, 0), *cache_, resident);
    }
    std::vector<GadgetElement> batch;
    batch.reserve(count);
    const std::uint32_t t_node = node.gadget->params().t;
    for (std::uint64_t i = 0; i < count; ++i) {
        batch.push_back({partition_hash(*node.hash, pairs[i].h, b_, t_node), pairs[i].j});
    }
    try {
        node.gadget->bulk_insert(batch);
    } catch (const needs_rebuild&) {
        rebuild_node_gadget(node);
    }
}

void Dictionary::rebuild_node_gadget(Node& node) {
    const bool resident = (&node == nodes_[0].get());
    std::uint32_t t_req = static_cast<std::uint32_t>(std::max<std::uint64_t>(1, m_keys_ / b_));
    while (node_gadget_params(t_req, 0).capacity < 2 * node.pending_count) t_req *= 2;
    for (int attempt = 0;; ++attempt) {
        if (attempt > 12) throw needs_rebuild("dictionary: node gadget rebuild keeps failing");
        ++gadget_rebuilds_;
        node.hash = std::make_unique<PolyHash>(fresh_hash());
        node.gadget.reset();
        node.gadget = std::make_unique<Gadget>(node_gadget_params(t_req, 0), *cache_, resident);
        std::vector<Pair> pairs;
        {
            OpScope op(*cache_);
            pairs = read_pending(node);
        }
        const std::uint32_t t_node = node.gadget->params().t;
        try {
            constexpr std::uint64_t CHUNK = 8192;
            for (std::uint64_t off = 0; off < pairs.size(); off += CHUNK) {
                const std::uint64_t take = std::min<std::uint64_t>(CHUNK, pairs.size() - off);
                std::vector<GadgetElement> batch;
                batch.reserve(take);
                for (std::uint64_t i = 0; i < take; ++i) {
                    batch.push_back(
                        {partition_hash(*node.hash, pairs[off + i].h, b_, t_node), pairs[off + i].j});
                }
                node.gadget->bulk_insert(batch);
            }
            return;
        } catch (const needs_rebuild&) {
            if (attempt % 2 == 1) t_req *= 2;
        }
    }
}

void Dictionary::add_to_child(std::int32_t node_idx, const std::vector<Pair>& pairs) {
    std::size_t off = 0;
    while (off < pairs.size()) {
        Node& child = *nodes_[node_idx];
        std::uint64_t take = pairs.size() - off;
        if (child.depth < max_depth_) {
            const std::uint64_t space =
                m_keys_ > child.pending_count ? m_keys_ - child.pending_count : 0;
            if (space == 0) {
                distribute(node_idx);
                continue;
            }
            take = std::min<std::uint64_t>(space, take);
        }
        {
            OpScope op(*cache_);
            append_pending(child, pairs.data() + off, take, false);
            gadget_insert(child, pairs.data() + off, take);
        }
        off += take;
        if (child.pending_count >= m_keys_ && child.depth < max_depth_) distribute(node_idx);
    }
}

void Dictionary::distribute(std::int32_t node_idx) {
    Node& node = *nodes_[node_idx];
    if (node.depth >= max_depth_) return;
    ++distribution_events_;
    std::vector<Pair> pairs;
    {
        OpScope op(*cache_);
        pairs = read_pending(node);
    }
    clear_pending(node);
    if (node.gadget) node.gadget->reset();
    if (node.children.empty()) node.children.assign(branching_, -1);
    std::vector<std::vector<Pair>> buckets(branching_);
    for (const Pair& pr : pairs) buckets[node_chunk(pr.h, node.depth)].push_back(pr);
    pairs.clear();
    pairs.shrink_to_fit();
    for (std::uint32_t c = 0; c < branching_; ++c) {
        if (buckets[c].empty()) continue;
        if (node.children[c] < 0) {
            node.children[c] = static_cast<std::int32_t>(nodes_.size());
            auto child = std::make_unique<Node>();
            child->depth = node.depth + 1;
            child->hash = std::make_unique<PolyHash>(fresh_hash());
            nodes_.push_back(std::move(child));
        }
        add_to_child(node.children[c], buckets[c]);
        buckets[c].clear();
        buckets[c].shrink_to_fit();
    }
}

// ---------------------------------------------------------------------------
// public operations

void Dictionary::raw_insert(std::uint64_t key, std::uint64_t value, bool tombstone) {
    OpScope op(*cache_);
    const std::uint64_t j = log_append(key, value, tombstone);
    const std::uint64_t h = shrink_key(*shrink_hash_, key, n_pow_);
    Node& root = *nodes_[0];
    const Pair pr{h, j};
    append_pending(root, &pr, 1, true);
    gadget_insert(root, &pr, 1);
    if (root.pending_count >= m_keys_ && root.depth < max_depth_) distribute(0);
}

void Dictionary::insert(std::uint64_t key, std::uint64_t value) {
    if (log_count_ >= max_log_entries_) rebuild();
    raw_insert(key, value, false);
    ++inserts_;
}

void Dictionary::erase(std::uint64_t key) {
    if (log_count_ >= max_log_entries_) rebuild();
    raw_insert(key, 0, true);
    ++deletes_;
    ++deletion_count_;
    if (deletion_count_ >= std::max<std::uint64_t>(1, cfg_.n_max / 2)) rebuild();
}

std::optional<std::uint64_t> Dictionary::lookup(std::uint64_t key) {
    OpScope op(*cache_);
    ++lookups_;
    const std::uint64_t h = shrink_key(*shrink_hash_, key, n_pow_);
    std::vector<std::uint64_t> candidates;
    std::int32_t idx = 0;
    while (idx >= 0) {
        Node& node = *nodes_[idx];
        if (node.gadget && node.gadget->size() > 0) {
            const std::uint64_t fp_before = node.gadget->false_positives_filtered();
            const auto res =
                node.gadget->query(partition_hash(*node.hash, h, b_, node.gadget->params().t));
            fp_lookup_total_ += node.gadget->false_positives_filtered() - fp_before;
            candidates.insert(candidates.end(), res.begin(), res.end());
        }
        if (node.children.empty() || node.depth >= max_depth_) break;
        idx = node.children[node_chunk(h, node.depth)];
    }
    std::sort(candidates.begin(), candidates.end(), std::greater<>());
    for (std::uint64_t j : candidates) {
        const LogEntry e = log_get(j);
        if (e.key == key) {
            if (e.tombstone) return std::nullopt;
            return e.value;
        }
        ++collision_rejects_;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// global rebuild: compact the log to the live set under fresh seeds

void Dictionary::destroy_tree() {
    for (auto& n : nodes_) {
        clear_pending(*n);
        n->gadget.reset();
    }
    nodes_.clear();
}

void Dictionary::rebuild() {
    ++global_rebuilds_;
    const std::vector<PageId> old_pages = std::move(log_pages_);
    const std::uint64_t old_count = log_count_;
    log_pages_.clear();
    log_count_ = 0;

    const unsigned bucket_bits = std::min<unsigned>(8, h_bits_);
    const std::uint32_t n_buckets = 1u << bucket_bits;
    struct Run {
        std::vector<PageId> pages;
        std::uint64_t count = 0;
    };
    std::vector<Run> runs(n_buckets);
    const std::uint64_t rpp = b_ / LOG_ENTRY_BITS;

    {
        OpScope op(*cache_);
        std::uint64_t j = 0;
        for (PageId pid : old_pages) {
            if (j >= old_count) break;
            const BitVec img = cache_->read_page(pid);
            const std::uint64_t here = std::min(log_entries_per_page_, old_count - j);
            for (std::uint64_t slot = 0; slot < here; ++slot, ++j) {
                const std::uint64_t pos = slot * LOG_ENTRY_BITS;
                const std::uint64_t key = img.get_bits(pos, 64);
                const std::uint64_t value = img.get_bits(pos + 64, 64);
                const bool tomb = img.get_bits(pos + 128, 64) != 0;
                const std::uint64_t h = shrink_key(*shrink_hash_, key, n_pow_);
                Run& r = runs[h >> (h_bits_ - bucket_bits)];
                const std::uint64_t off = r.count % rpp;
                if (off == 0) r.pages.push_back(cache_->alloc_page());
                BitVec rimg = cache_->read_page(r.pages.back());
                const std::uint64_t rpos = off * LOG_ENTRY_BITS;
                rimg.set_bits(rpos, 64, key);
                rimg.set_bits(rpos + 64, 64, value);
                rimg.set_bits(rpos + 128, 64, (j << 1) | (tomb ? 1 : 0));
                cache_->write_page(r.pages.back(), rimg);
                ++r.count;
            }
        }
    }

    for (PageId pid : old_pages) {
        cache_->unpin(pid, false);
        cache_->free_page(pid);
    }
    destroy_tree();
    deletion_count_ = 0;
    shrink_hash_ = std::make_unique<PolyHash>(fresh_hash());
    auto root = std::make_unique<Node>();
    root->hash = std::make_unique<PolyHash>(fresh_hash());
    nodes_.push_back(std::move(root));

    std::uint64_t live_total = 0;
    struct Winner {
        std::uint64_t j;
        std::uint64_t value;
        bool tomb;
    };
    for (std::uint32_t c = 0; c < n_buckets; ++c) {
        Run& r = runs[c];
        if (r.count == 0) continue;
        std::unordered_map<std::uint64_t, Winner> best;
        {
            OpScope op(*cache_);
            std::uint64_t seen = 0;
            for (PageId pid : r.pages) {
                const BitVec img = cache_->read_page(pid);
                const std::uint64_t here = std::min(rpp, r.count - seen);
                for (std::uint64_t slot = 0; slot < here; ++slot, ++seen) {
                    const std::uint64_t pos = slot * LOG_ENTRY_BITS;
                    const std::uint64_t key = img.get_bits(pos, 64);
                    const std::uint64_t value = img.get_bits(pos + 64, 64);
                    const std::uint64_t jt = img.get_bits(pos + 128, 64);
                    const Winner w{jt >> 1, value, (jt & 1) != 0};
                    auto [it, inserted] = best.emplace(key, w);
                    if (!inserted && w.j > it->second.j) it->second = w;
                }
            }
        }
        for (PageId pid : r.pages) cache_->free_page(pid);
        r.pages.clear();
        std::vector<std::pair<std::uint64_t, std::uint64_t>> live;  // (old j, key)
        for (const auto& [key, w] : best) {
            if (!w.tomb) live.push_back({w.j, key});
        }
        std::sort(live.begin(), live.end());
        for (const auto& [j, key] : live) {
            raw_insert(key, best.at(key).value, false);
        }
        live_total += live.size();
    }
    // Hard structural limit: the log index width allows 4*n entries, so a
    // live set beyond 2*n would re-trigger rebuilds immediately.
    if (live_total > 2 * cfg_.n_max) {
        throw dictionary_full("dictionary: live set exceeds the structural capacity 2*n_max");
    }
}

// ---------------------------------------------------------------------------
// stats, validation

DictStats Dictionary::stats() const {
    DictStats s;
    s.inserts = inserts_;
    s.deletes = deletes_;
    s.lookups = lookups_;
    s.distribution_events = distribution_events_;
    s.global_rebuilds = global_rebuilds_;
    s.gadget_rebuilds = gadget_rebuilds_;
    s.node_count = nodes_.size();
    s.log_entries = log_count_;
    s.live_estimate = inserts_ > deletes_ ? inserts_ - deletes_ : 0;
    s.fp_filtered_in_lookups = fp_lookup_total_;
    s.shrink_collision_rejects = collision_rejects_;
    return s;
}

std::vector<std::uint64_t> Dictionary::base_query_page_histogram() const {
    std::vector<std::uint64_t> hist(10, 0);
    for (const auto& n : nodes_) {
        if (!n->gadget) continue;
        const auto sub = n->gadget->base_query_page_histogram();
        for (std::size_t i = 0; i < hist.size(); ++i) hist[i] += sub[i];
    }
    return hist;
}

std::vector<std::uint64_t> Dictionary::debug_pending_sizes() const {
    std::vector<std::uint64_t> out;
    out.reserve(nodes_.size());
    for (const auto& n : nodes_) out.push_back(n->pending_count);
    return out;
}

std::uint64_t Dictionary::debug_validate() const {
    std::uint64_t bad = 0;
    for (const auto& n : nodes_) {
        std::vector<GadgetElement> expected;
        expected.reserve(n->pending_count);
        if (n->pending_count > 0) {
            if (!n->gadget) {
                ++bad;
                continue;
            }
            const auto pairs = read_pending(*n);
            const std::uint32_t t_node = n->gadget->params().t;
            for (const Pair& pr : pairs) {
                expected.push_back({partition_hash(*n->hash, pr.h, b_, t_node), pr.j});
            }
        }
        std::vector<GadgetElement> got;
        if (n->gadget) n->gadget->debug_enumerate(got);
        auto lt = [](const GadgetElement& a, const GadgetElement& b) {
            if (a.key.p != b.key.p) return a.key.p < b.key.p;
            if (a.key.d != b.key.d) return a.key.d < b.key.d;
            if (a.key.s != b.key.s) return a.key.s < b.key.s;
            return a.payload < b.payload;
        };
        std::sort(expected.begin(), expected.end(), lt);
        std::sort(got.begin(), got.end(), lt);
        if (expected != got) ++bad;
    }
    return bad;
}

// ---------------------------------------------------------------------------
// persistence: page file + text manifest; tree metadata lives in chained
// pages inside the same file, the manifest points at the chain head.

namespace {

constexpr std::uint64_t META_WORDS_PER_PAGE_SLOT = 63;  // word 63 = next page id + 1

void put_kv(std::FILE* f, const char* key, const std::string& value) {
    std::fprintf(f, "%s=%s\n", key, value.c_str());
}

}  // namespace

void Dictionary::save(const std::string& page_file, const std::string& manifest_file) const {
    auto* self = const_cast<Dictionary*>(this);
    self->cache_->flush_all();

    std::vector<std::uint64_t> stream;
    stream.push_back(log_count_);
    stream.push_back(deletion_count_);
    stream.push_back(inserts_);
    stream.push_back(deletes_);
    stream.push_back(lookups_);
    stream.push_back(distribution_events_);
    stream.push_back(global_rebuilds_);
    stream.push_back(gadget_rebuilds_);
    stream.push_back(hash_stream_);
    stream.push_back(shrink_hash_->seed());
    stream.push_back(log_pages_.size());
    for (PageId id : log_pages_) stream.push_back(id.value);
    stream.push_back(nodes_.size());
    for (const auto& n : nodes_) {
        stream.push_back(n->depth);
        stream.push_back(n->hash->seed());
        stream.push_back(n->pending_count);
        stream.push_back(n->pending_pages.size());
        for (PageId id : n->pending_pages) stream.push_back(id.value);
        stream.push_back(n->children.size());
        for (std::int32_t c : n->children) {
            stream.push_back(static_cast<std::uint64_t>(static_cast<std::int64_t>(c) + 1));
        }
        stream.push_back(n->gadget ? 1 : 0);
        if (n->gadget) n->gadget->serialize(stream);
    }

    // write the stream into chained pages
    std::vector<PageId> meta_pages;
    const std::uint64_t words_per_page = b_ / 64;
    const std::uint64_t payload = std::min<std::uint64_t>(words_per_page - 1, META_WORDS_PER_PAGE_SLOT);
    for (std::uint64_t off = 0; off < stream.size(); off += payload) {
        meta_pages.push_back(self->mem_->alloc_page());
    }
    if (meta_pages.empty()) meta_pages.push_back(self->mem_->alloc_page());
    for (std::size_t pi = 0; pi < meta_pages.size(); ++pi) {
        BitVec img(b_);
        const std::uint64_t off = pi * payload;
        const std::uint64_t here = std::min<std::uint64_t>(payload, stream.size() - off);
        for (std::uint64_t i = 0; i < here; ++i) img.set_bits(i * 64, 64, stream[off + i]);
        const std::uint64_t next =
            (pi + 1 < meta_pages.size()) ? meta_pages[pi + 1].value + 1ull : 0;
        img.set_bits((words_per_page - 1) * 64, 64, next);
        self->mem_->write_page(meta_pages[pi], img);
    }

    self->mem_->save_file(page_file);

    std::FILE* f = std::fopen(manifest_file.c_str(), "w");
    if (!f) throw std::runtime_error("save: cannot open " + manifest_file);
    put_kv(f, "format", "emdict-manifest-1");
    put_kv(f, "n_max", std::to_string(cfg_.n_max));
    put_kv(f, "B", std::to_string(cfg_.page_words));
    put_kv(f, "M", std::to_string(cfg_.cache_words));
    put_kv(f, "lambda", std::to_string(cfg_.lambda));
    put_kv(f, "t_min", std::to_string(t_min_));
    put_kv(f, "seed", std::to_string(cfg_.seed));
    put_kv(f, "node_keys", std::to_string(m_keys_));
    char eps[32];
    std::snprintf(eps, sizeof(eps), "%.9f", cfg_.epsilon);
    put_kv(f, "epsilon", eps);
    put_kv(f, "stream_words", std::to_string(stream.size()));
    put_kv(f, "meta_root", std::to_string(meta_pages.front().value));
    std::fclose(f);

    // the metadata chain exists only in the file snapshot
    for (PageId id : meta_pages) self->mem_->free_page(id);
}

std::unique_ptr<Dictionary> Dictionary::load(const std::string& page_file,
                                             const std::string& manifest_file) {
    std::FILE* f = std::fopen(manifest_file.c_str(), "r");
    if (!f) throw std::runtime_error("load: cannot open " + manifest_file);
    std::unordered_map<std::string, std::string> kv;
    char line[256];
    while (std::fgets(line, sizeof(line), f)) {
        std::string s(line);
        while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
        const auto eq = s.find('=');
        if (eq != std::string::npos) kv[s.substr(0, eq)] = s.substr(eq + 1);
    }
    std::fclose(f);
    if (kv["format"] != "emdict-manifest-1") throw bad_parameters("load: unknown manifest format");

    DictConfig cfg;
    cfg.n_max = std::stoull(kv.at("n_max"));
    cfg.page_words = static_cast<std::uint32_t>(std::stoul(kv.at("B")));
    cfg.cache_words = std::stoull(kv.at("M"));
    cfg.lambda = static_cast<std::uint32_t>(std::stoul(kv.at("lambda")));
    cfg.t_min = static_cast<std::uint32_t>(std::stoul(kv.at("t_min")));
    cfg.seed = std::stoull(kv.at("seed"));
    cfg.node_keys = std::stoull(kv.at("node_keys"));
    cfg.epsilon = std::stod(kv.at("epsilon"));

    auto d = std::unique_ptr<Dictionary>(new Dictionary(cfg));
    d->destroy_tree();
    d->log_pages_.clear();
    d->mem_ = std::make_unique<PagedMemory>(PagedMemory::load_file(page_file, cfg.page_budget));
    d->cache_ = std::make_unique<CacheView>(*d->mem_, cfg.cache_words / cfg.page_words);

    // read the metadata chain
    const std::uint64_t words_per_page = d->b_ / 64;
    const std::uint64_t payload = std::min<std::uint64_t>(words_per_page - 1, META_WORDS_PER_PAGE_SLOT);
    const std::uint64_t stream_words = std::stoull(kv.at("stream_words"));
    std::vector<std::uint64_t> stream;
    stream.reserve(stream_words);
    std::vector<PageId> meta_pages;
    PageId cur(static_cast<std::uint32_t>(std::stoul(kv.at("meta_root"))));
    while (cur.valid() && stream.size() < stream_words) {
        meta_pages.push_back(cur);
        const auto& words = d->mem_->peek_page(cur);
        for (std::uint64_t i = 0; i < payload && stream.size() < stream_words; ++i) {
            stream.push_back(words[i]);
        }
        const std::uint64_t next = words[words_per_page - 1];
        cur = next == 0 ? PageId() : PageId(static_cast<std::uint32_t>(next - 1));
    }
    for (PageId id : meta_pages) d->mem_->free_page(id);

    std::size_t pos = 0;
    auto next = [&stream, &pos]() { return stream.at(pos++); };
    d->log_count_ = next();
    d->deletion_count_ = next();
    d->inserts_ = next();
    d->deletes_ = next();
    d->lookups_ = next();
    d->distribution_events_ = next();
    d->global_rebuilds_ = next();
    d->gadget_rebuilds_ = next();
    d->hash_stream_ = next();
    d->shrink_hash_ = std::make_unique<PolyHash>(next(), d->hash_degree_);
    const std::uint64_t n_log_pages = next();
    d->log_pages_.resize(n_log_pages);
    for (auto& id : d->log_pages_) id = PageId(static_cast<std::uint32_t>(next()));
    const std::uint64_t n_nodes = next();
    for (std::uint64_t i = 0; i < n_nodes; ++i) {
        auto node = std::make_unique<Node>();
        node->depth = static_cast<unsigned>(next());
        node->hash = std::make_unique<PolyHash>(next(), d->hash_degree_);
        node->pending_count = next();
        const std::uint64_t n_pending = next();
        node->pending_pages.resize(n_pending);
        for (auto& id : node->pending_pages) id = PageId(static_cast<std::uint32_t>(next()));
        const std::uint64_t n_children = next();
        node->children.resize(n_children);
        for (auto& c : node->children) {
            c = static_cast<std::int32_t>(static_cast<std::int64_t>(next()) - 1);
        }
        if (next() != 0) {
            node->gadget = Gadget::deserialize(stream, pos, *d->cache_, d->t_min_, d->b_);
        }
        d->nodes_.push_back(std::move(node));
    }
    return d;
}

}  // namespace emdict
