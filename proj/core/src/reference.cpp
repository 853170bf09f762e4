#include "emdict/reference.hpp"

#include <algorithm>
#include <unordered_map>

#include "emdict/errors.hpp"

namespace emdict {

namespace {

// bucketing mix for rebuild; dedup itself is by the real key
std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

}  // namespace

BaselineBufferTree::BaselineBufferTree(const BaselineConfig& cfg) : cfg_(cfg) {
    if (cfg_.lambda < 2 || cfg_.lambda > cfg_.page_words) {
        throw bad_parameters("baseline: lambda must be in [2, B]");
    }
    b_ = static_cast<std::uint64_t>(cfg_.page_words) * 64;
    pairs_per_page_ = b_ / 128;
    log_entries_per_page_ = b_ / LOG_ENTRY_BITS;
    universe_ = cfg_.universe_max ? cfg_.universe_max : ~0ull;
    max_log_entries_ = 4 * std::max<std::uint64_t>(cfg_.n_max, 16);
    mem_ = std::make_unique<PagedMemory>(cfg_.page_words, 64, cfg_.page_budget);
    cache_ = std::make_unique<CacheView>(*mem_, cfg_.cache_words / cfg_.page_words);
    build_skeleton();
}

BaselineBufferTree::~BaselineBufferTree() = default;

void BaselineBufferTree::build_skeleton() {
    const std::uint64_t leaves_needed =
        std::max<std::uint64_t>(1, 2 * cfg_.n_max / std::max<std::uint64_t>(1, cfg_.leaf_cap_pairs));
    unsigned levels = 0;
    std::uint64_t leaves = 1;
    while (leaves < leaves_needed && levels < 32) {
        leaves *= cfg_.lambda;
        ++levels;
    }
    depth_ = levels;
    root_ = build_subtree(0, universe_, levels);
}

std::int32_t BaselineBufferTree::build_subtree(std::uint64_t lo, std::uint64_t width,
                                               unsigned levels) {
    const std::int32_t idx = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(std::make_unique<Node>());
    Node& node = *nodes_[idx];
    node.lo = lo;
    if (levels == 0) {
        node.leaf = true;
        return idx;
    }
    const std::uint64_t child_w = std::max<std::uint64_t>(1, width / cfg_.lambda);
    node.pivots.reserve(cfg_.lambda - 1);
    for (std::uint32_t i = 1; i < cfg_.lambda; ++i) node.pivots.push_back(lo + i * child_w);
    node.children.reserve(cfg_.lambda);
    for (std::uint32_t i = 0; i < cfg_.lambda; ++i) {
        const std::uint64_t clo = lo + i * child_w;
        const std::uint64_t cw = (i + 1 == cfg_.lambda) ? width - i * child_w : child_w;
        node.children.push_back(build_subtree(clo, cw, levels - 1));
    }
    return idx;
}

std::uint32_t BaselineBufferTree::route(const Node& node, std::uint64_t key) const {
    const auto it = std::upper_bound(node.pivots.begin(), node.pivots.end(), key);
    return static_cast<std::uint32_t>(it - node.pivots.begin());
}

std::uint64_t BaselineBufferTree::log_append(std::uint64_t key, std::uint64_t value,
                                             bool tombstone) {
    const std::uint64_t off = log_count_ % log_entries_per_page_;
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
    if (off + 1 == log_entries_per_page_) cache_->unpin(tail, true);
    return log_count_++;
}

BaselineBufferTree::LogEntry BaselineBufferTree::log_get(std::uint64_t j) {
    const BitVec img = cache_->read_page(log_pages_[j / log_entries_per_page_]);
    const std::uint64_t pos = (j % log_entries_per_page_) * LOG_ENTRY_BITS;
    return LogEntry{img.get_bits(pos, 64), img.get_bits(pos + 64, 64),
                    img.get_bits(pos + 128, 64) != 0};
}

std::vector<BaselineBufferTree::Pair> BaselineBufferTree::read_buffer(const Node& node) const {
    std::vector<Pair> out;
    out.reserve(node.buffer_fill);
    if (node.buffer_fill == 0) return out;
    const BitVec img = cache_->read_page(node.buffer);
    for (std::uint64_t i = 0; i < node.buffer_fill; ++i) {
        out.push_back(Pair{img.get_bits(i * 128, 64), img.get_bits(i * 128 + 64, 64)});
    }
    return out;
}

void BaselineBufferTree::buffer_append(std::int32_t idx, const Pair* pairs, std::uint64_t count) {
    std::uint64_t done = 0;
    while (done < count) {
        Node& node = *nodes_[idx];
        if (node.leaf) {
            std::vector<Pair> batch(pairs + done, pairs + count);
            leaf_merge(node, batch);
            return;
        }
        if (node.buffer_fill == pairs_per_page_) {
            flush_node(idx);
            continue;
        }
        if (!node.buffer.valid()) {
            node.buffer = cache_->alloc_page();
            if (idx == root_) cache_->pin_reserved(node.buffer);
        }
        const std::uint64_t take = std::min(pairs_per_page_ - node.buffer_fill, count - done);
        BitVec img = cache_->read_page(node.buffer);
        for (std::uint64_t i = 0; i < take; ++i) {
            img.set_bits((node.buffer_fill + i) * 128, 64, pairs[done + i].key);
            img.set_bits((node.buffer_fill + i) * 128 + 64, 64, pairs[done + i].j);
        }
        cache_->write_page(node.buffer, img);
        node.buffer_fill += take;
        done += take;
        if (node.buffer_fill == pairs_per_page_) flush_node(idx);
    }
}

void BaselineBufferTree::flush_node(std::int32_t idx) {
    Node& node = *nodes_[idx];
    if (node.leaf || node.buffer_fill == 0) return;
    std::vector<Pair> pairs = read_buffer(node);
    node.buffer_fill = 0;
    std::vector<std::vector<Pair>> groups(node.children.size());
    for (const Pair& pr : pairs) groups[route(node, pr.key)].push_back(pr);
    for (std::size_t c = 0; c < groups.size(); ++c) {
        if (groups[c].empty()) continue;
        buffer_append(node.children[c], groups[c].data(), groups[c].size());
    }
}

void BaselineBufferTree::leaf_merge(Node& node, std::vector<Pair>& incoming) {
    std::stable_sort(incoming.begin(), incoming.end(), [](const Pair& a, const Pair& b) {
        if (a.key != b.key) return a.key < b.key;
        return a.j < b.j;
    });
    std::vector<Pair> merged;
    merged.reserve(node.pair_count + incoming.size());
    {
        std::vector<Pair> existing;
        existing.reserve(node.pair_count);
        std::uint64_t remaining = node.pair_count;
        for (PageId id : node.pages) {
            if (remaining == 0) break;
            const BitVec img = cache_->read_page(id);
            const std::uint64_t cnt = std::min(pairs_per_page_, remaining);
            for (std::uint64_t i = 0; i < cnt; ++i) {
                existing.push_back(Pair{img.get_bits(i * 128, 64), img.get_bits(i * 128 + 64, 64)});
            }
            remaining -= cnt;
        }
        std::merge(existing.begin(), existing.end(), incoming.begin(), incoming.end(),
                   std::back_inserter(merged), [](const Pair& a, const Pair& b) {
                       if (a.key != b.key) return a.key < b.key;
                       return a.j < b.j;
                   });
    }
    const std::uint64_t pages_needed = (merged.size() + pairs_per_page_ - 1) / pairs_per_page_;
    while (node.pages.size() < pages_needed) node.pages.push_back(cache_->alloc_page());
    while (node.pages.size() > pages_needed) {
        cache_->free_page(node.pages.back());
        node.pages.pop_back();
    }
    node.fences.assign(pages_needed, 0);
    for (std::uint64_t p = 0; p < pages_needed; ++p) {
        BitVec img(b_);
        const std::uint64_t off = p * pairs_per_page_;
        const std::uint64_t cnt = std::min(pairs_per_page_, merged.size() - off);
        for (std::uint64_t i = 0; i < cnt; ++i) {
            img.set_bits(i * 128, 64, merged[off + i].key);
            img.set_bits(i * 128 + 64, 64, merged[off + i].j);
        }
        cache_->write_page(node.pages[p], img);
        node.fences[p] = merged[off].key;
    }
    node.pair_count = merged.size();
}

void BaselineBufferTree::raw_insert(std::uint64_t key, std::uint64_t value, bool tombstone) {
    OpScope op(*cache_);
    const std::uint64_t j = log_append(key, value, tombstone);
    const Pair pr{key, j};
    buffer_append(root_, &pr, 1);
}

void BaselineBufferTree::insert(std::uint64_t key, std::uint64_t value) {
    if (log_count_ >= max_log_entries_) rebuild();
    raw_insert(key, value, false);
}

void BaselineBufferTree::erase(std::uint64_t key) {
    if (log_count_ >= max_log_entries_) rebuild();
    raw_insert(key, 0, true);
    ++deletion_count_;
    if (deletion_count_ >= std::max<std::uint64_t>(1, cfg_.n_max / 2)) rebuild();
}

std::optional<std::uint64_t> BaselineBufferTree::lookup(std::uint64_t key) {
    OpScope op(*cache_);
    std::vector<std::uint64_t> candidates;
    std::int32_t idx = root_;
    while (idx >= 0) {
        Node& node = *nodes_[idx];
        if (node.leaf) {
            if (node.pair_count > 0) {
                // first page whose fence is <= key, then walk while key matches
                std::size_t p = std::upper_bound(node.fences.begin(), node.fences.end(), key) -
                                node.fences.begin();
                if (p > 0) --p;
                for (; p < node.pages.size(); ++p) {
                    const BitVec img = cache_->read_page(node.pages[p]);
                    const std::uint64_t off = p * pairs_per_page_;
                    const std::uint64_t cnt = std::min(pairs_per_page_, node.pair_count - off);
                    bool past = false;
                    for (std::uint64_t i = 0; i < cnt; ++i) {
                        const std::uint64_t k = img.get_bits(i * 128, 64);
                        if (k == key) candidates.push_back(img.get_bits(i * 128 + 64, 64));
                        if (k > key) {
                            past = true;
                            break;
                        }
                    }
                    if (past || p + 1 >= node.pages.size() || node.fences[p + 1] > key) break;
                }
            }
            break;
        }
        if (node.buffer_fill > 0) {
            const auto pairs = read_buffer(node);
            for (const Pair& pr : pairs) {
                if (pr.key == key) candidates.push_back(pr.j);
            }
        }
        idx = node.children[route(node, key)];
    }
    std::sort(candidates.begin(), candidates.end(), std::greater<>());
    for (std::uint64_t j : candidates) {
        const LogEntry e = log_get(j);
        if (e.key == key) {
            if (e.tombstone) return std::nullopt;
            return e.value;
        }
    }
    return std::nullopt;
}

void BaselineBufferTree::rebuild() {
    ++rebuilds_;
    const std::vector<PageId> old_pages = std::move(log_pages_);
    const std::uint64_t old_count = log_count_;
    log_pages_.clear();
    log_count_ = 0;

    constexpr std::uint32_t N_BUCKETS = 256;
    struct Run {
        std::vector<PageId> pages;
        std::uint64_t count = 0;
    };
    std::vector<Run> runs(N_BUCKETS);
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
                Run& r = runs[mix64(key) >> 56];
                const std::uint64_t off = r.count % rpp;
                if (off == 0) r.pages.push_back(cache_->alloc_page());
                BitVec rimg = cache_->read_page(r.pages.back());
                const std::uint64_t rpos = off * LOG_ENTRY_BITS;
                rimg.set_bits(rpos, 64, key);
                rimg.set_bits(rpos + 64, 64, img.get_bits(pos + 64, 64));
                rimg.set_bits(rpos + 128, 64, (j << 1) | img.get_bits(pos + 128, 1));
                cache_->write_page(r.pages.back(), rimg);
                ++r.count;
            }
        }
    }
    for (PageId pid : old_pages) {
        cache_->unpin(pid, false);
        cache_->free_page(pid);
    }
    // drop the whole tree and rebuild the skeleton
    for (auto& n : nodes_) {
        if (n->buffer.valid()) {
            cache_->unpin(n->buffer, false);
            cache_->free_page(n->buffer);
        }
        for (PageId id : n->pages) cache_->free_page(id);
    }
    nodes_.clear();
    deletion_count_ = 0;
    build_skeleton();

    struct Winner {
        std::uint64_t j;
        std::uint64_t value;
        bool tomb;
    };
    for (std::uint32_t c = 0; c < N_BUCKETS; ++c) {
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
        std::vector<std::pair<std::uint64_t, std::uint64_t>> live;
        for (const auto& [key, w] : best) {
            if (!w.tomb) live.push_back({w.j, key});
        }
        std::sort(live.begin(), live.end());
        for (const auto& [j, key] : live) raw_insert(key, best.at(key).value, false);
    }
}

}  // namespace emdict
