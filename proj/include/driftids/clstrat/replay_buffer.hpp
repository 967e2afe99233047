#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "driftids/dataplane/types.hpp"

namespace driftids::clstrat {

using dataplane::FeatureWindow;

// Fixed-capacity rehearsal memory with balanced per-domain quotas. When a new
// domain arrives every domain's quota becomes capacity/domains (the first
// capacity % domains domains get one extra slot); over-quota domains evict
// uniformly at random with a seeded generator.
class ReplayBuffer {
public:
    struct Entry {
        FeatureWindow window;
        std::size_t domain = 0;
    };

    ReplayBuffer(std::size_t capacity, std::uint64_t seed);

    void insert(std::span<const FeatureWindow> windows, std::size_t domain_index);

    // k draws: without replacement when k <= size(), with replacement otherwise.
    std::vector<FeatureWindow> sample(std::int64_t k, std::uint64_t seed) const;

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }
    std::size_t domains_seen() const { return domains_.size(); }
    std::size_t count_for(std::size_t domain_index) const;
    std::size_t quota_for(std::size_t domain_index) const;
    const std::vector<Entry>& entries() const { return entries_; }

    // Size after every insertion, for constraint reporting.
    const std::vector<std::size_t>& size_trace() const { return size_trace_; }
    std::size_t max_size_seen() const { return max_size_; }

    // Throws a contract error if |stored| > capacity or quotas drift by more than one.
    void check_invariants() const;

    // Test hook: appends without eviction so the invariant check can be exercised.
    void inject_unchecked(const FeatureWindow& window, std::size_t domain_index);

private:
    std::size_t capacity_;
    std::uint64_t seed_;
    std::vector<std::size_t> domains_;  // in order of first appearance
    std::vector<Entry> entries_;
    std::vector<std::size_t> size_trace_;
    std::size_t max_size_ = 0;
    std::uint64_t insert_count_ = 0;
};

}  // namespace driftids::clstrat
