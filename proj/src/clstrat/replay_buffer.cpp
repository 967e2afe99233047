#include "driftids/clstrat/replay_buffer.hpp"

#include <algorithm>
#include <numeric>

#include "driftids/errors.hpp"
#include "driftids/rng.hpp"

namespace driftids::clstrat {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), seed_(seed) {}

std::size_t ReplayBuffer::count_for(std::size_t domain_index) const {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [&](const Entry& e) {
        return e.domain == domain_index;
    }));
}

std::size_t ReplayBuffer::quota_for(std::size_t domain_index) const {
    const auto it = std::find(domains_.begin(), domains_.end(), domain_index);
    if (it == domains_.end() || domains_.empty()) {
        return 0;
    }
    const auto pos = static_cast<std::size_t>(it - domains_.begin());
    const std::size_t d = domains_.size();
    return capacity_ / d + (pos < capacity_ % d ? 1 : 0);
}

void ReplayBuffer::insert(std::span<const FeatureWindow> windows, std::size_t domain_index) {
    if (std::find(domains_.begin(), domains_.end(), domain_index) == domains_.end()) {
        domains_.push_back(domain_index);
    }
    Rng rng(derive_seed({seed_, insert_count_++, domain_index}));

    // Shrink every other domain to its new quota.
    std::vector<Entry> kept;
    kept.reserve(capacity_);
    for (std::size_t d : domains_) {
        if (d == domain_index) {
            continue;
        }
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (entries_[i].domain == d) idx.push_back(i);
        }
        const std::size_t quota = quota_for(d);
        if (idx.size() > quota) {
            rng.shuffle(idx);
            idx.resize(quota);
            std::sort(idx.begin(), idx.end());
        }
        for (std::size_t i : idx) kept.push_back(std::move(entries_[i]));
    }

    // Existing entries of this domain plus the new windows compete for its quota.
    std::vector<const FeatureWindow*> pool;
    for (const auto& e : entries_) {
        if (e.domain == domain_index) pool.push_back(&e.window);
    }
    for (const auto& w : windows) pool.push_back(&w);
    const std::size_t quota = quota_for(domain_index);
    std::vector<std::size_t> pick(pool.size());
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    if (pick.size() > quota) {
        rng.shuffle(pick);
        pick.resize(quota);
        std::sort(pick.begin(), pick.end());
    }
    std::vector<Entry> fresh;
    for (std::size_t i : pick) fresh.push_back({*pool[i], domain_index});
    for (auto& e : fresh) kept.push_back(std::move(e));

    entries_ = std::move(kept);
    size_trace_.push_back(entries_.size());
    max_size_ = std::max(max_size_, entries_.size());
    check_invariants();
}

std::vector<FeatureWindow> ReplayBuffer::sample(std::int64_t k, std::uint64_t seed) const {
    require(k >= 0, ErrorKind::parameter, "replay sample: k must be >= 0");
    std::vector<FeatureWindow> out;
    if (k == 0 || entries_.empty()) {
        return out;
    }
    const auto n = static_cast<std::size_t>(k);
    Rng rng(seed);
    out.reserve(n);
    if (n <= entries_.size()) {
        // Partial Fisher-Yates.
        std::vector<std::size_t> idx(entries_.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
            std::swap(idx[i], idx[j]);
            out.push_back(entries_[idx[i]].window);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(entries_[static_cast<std::size_t>(rng.below(entries_.size()))].window);
        }
    }
    return out;
}

void ReplayBuffer::check_invariants() const {
    require(entries_.size() <= capacity_, ErrorKind::contract,
            "replay buffer holds " + std::to_string(entries_.size()) + " samples, budget is " +
                std::to_string(capacity_));
    for (std::size_t d : domains_) {
        const std::size_t q = quota_for(d);
        require(count_for(d) <= q + 1, ErrorKind::contract,
                "replay buffer quota exceeded for domain " + std::to_string(d));
    }
}

void ReplayBuffer::inject_unchecked(const FeatureWindow& window, std::size_t domain_index) {
    if (std::find(domains_.begin(), domains_.end(), domain_index) == domains_.end()) {
        domains_.push_back(domain_index);
    }
    entries_.push_back({window, domain_index});
    size_trace_.push_back(entries_.size());
    max_size_ = std::max(max_size_, entries_.size());
}

}  // namespace driftids::clstrat
