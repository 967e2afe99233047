#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "driftids/numgrad/matrix.hpp"

namespace driftids::dataplane {

inline constexpr std::size_t kAttributes = 7;
inline constexpr std::size_t kFeatureDim = 2 * kAttributes;

// Attribute order shared by records, features and the generator.
inline constexpr std::array<const char*, kAttributes> kAttributeNames = {
    "rank", "dis_sent", "dio_sent", "dao_sent", "dis_recv", "dio_recv", "rpl_total_sent"};

// One node's per-minute report as logged at the sink.
struct NodeMinuteRecord {
    std::int64_t run_id = 0;
    std::int64_t minute = 0;
    std::int64_t node_id = 0;
    double rank = 0.0;
    std::int64_t dis_sent = 0;
    std::int64_t dio_sent = 0;
    std::int64_t dao_sent = 0;
    std::int64_t dis_recv = 0;
    std::int64_t dio_recv = 0;
    std::int64_t rpl_total_sent = 0;
    bool attack_active = false;

    std::array<double, kAttributes> attributes() const {
        return {rank,
                static_cast<double>(dis_sent),
                static_cast<double>(dio_sent),
                static_cast<double>(dao_sent),
                static_cast<double>(dis_recv),
                static_cast<double>(dio_recv),
                static_cast<double>(rpl_total_sent)};
    }

    bool operator==(const NodeMinuteRecord&) const = default;
};

// [µ1..µ7, σ1..σ7] over the nodes reporting in one minute.
struct FeatureVector14 {
    std::array<double, kAttributes> mu{};
    std::array<double, kAttributes> sigma{};

    std::array<double, kFeatureDim> flat() const;
    static FeatureVector14 from_flat(const std::array<double, kFeatureDim>& v);
};

// Per-minute feature vector with its label and provenance, before windowing.
struct MinuteFeatures {
    std::int64_t run_id = 0;
    std::int64_t minute = 0;
    std::array<double, kFeatureDim> values{};
    int label = 0;
};

struct WindowSource {
    std::int64_t run_id = 0;
    std::int64_t end_minute = 0;
    bool operator==(const WindowSource&) const = default;
};

// W×14 normalized sequence; the model's input unit.
struct FeatureWindow {
    numgrad::Matrix features;
    int label = 0;
    WindowSource source;

    std::size_t length() const { return features.rows(); }
    bool operator==(const FeatureWindow&) const = default;
};

using WindowBatch = std::vector<FeatureWindow>;

struct NormStats {
    std::array<double, kFeatureDim> min{};
    std::array<double, kFeatureDim> max{};
    std::string fitted_on;
};

enum class Attack { BH, DF, WP, LR };
enum class Variant { base, onoff, gradual };

std::string to_string(Attack a);
std::string to_string(Variant v);
Attack parse_attack(const std::string& s);
Variant parse_variant(const std::string& s);

struct DomainMeta {
    std::string domain_id;
    Attack attack = Attack::BH;
    Variant variant = Variant::base;
    int network_size = 5;
    std::uint64_t seed = 0;
};

struct DomainDataset {
    DomainMeta meta;
    std::vector<FeatureWindow> train;
    std::vector<FeatureWindow> test;
    NormStats norm;
    std::vector<std::int64_t> train_runs;
    std::vector<std::int64_t> test_runs;
};

}  // namespace driftids::dataplane
