#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "driftids/dataplane/types.hpp"
#include "json.hpp"

namespace driftids::trafficgen {

using dataplane::Attack;
using dataplane::NodeMinuteRecord;
using dataplane::Variant;

// Attack effect magnitudes. Defaults: DF inflation K=9, BH attacker rank to
// 10% of baseline, WP rank variance x4, LR burst rate x6.
struct EffectParams {
    double df_inflation = 9.0;
    double bh_rank_fraction = 0.1;
    double wp_variance_factor = 4.0;
    double lr_burst_factor = 6.0;

    bool operator==(const EffectParams&) const = default;
};

struct DomainSpec {
    Attack attack = Attack::BH;
    Variant variant = Variant::base;
    int network_size = 5;
    int runs = 20;
    int minutes_per_run = 120;
    int attack_start_minute = 30;
    int onoff_period = 10;
    int gradual_ramp_minutes = 40;
    std::uint64_t seed = 0;
    EffectParams effects;

    void validate() const;
    std::string domain_id() const;  // e.g. "DF-onoff-5"
    dataplane::DomainMeta meta() const;
    bool operator==(const DomainSpec&) const = default;

    nlohmann::json to_json() const;
    static DomainSpec from_json(const nlohmann::json& j);
};

// Per-minute attack intensity in [0, 1]; zero before attack_start_minute.
// Minutes are 1-based; index m − 1 holds minute m.
std::vector<double> intensity_profile(const DomainSpec& spec);
double intensity_at(const DomainSpec& spec, int minute);

// Per-node baseline rates for one run.
struct NodeBehavior {
    double rank = 0.0;  // base rank level
    double rank_jitter = 0.0;
    double dis_rate = 0.0;
    double dio_rate = 0.0;
    double dao_rate = 0.0;
    double dis_recv_rate = 0.0;
    double dio_recv_rate = 0.0;
    double other_rate = 0.0;  // control traffic counted only in rpl_total_sent
};

struct NodeBehaviorModel {
    std::vector<NodeBehavior> nodes;
    std::vector<int> attackers;  // node indices
};

NodeBehaviorModel behavior_model(const DomainSpec& spec, std::int64_t run_id);

// Node-minute records of one run, sorted by (minute, node_id). Baseline draws
// come from a stream independent of the attack, so minutes with zero
// intensity match generate_baseline_run exactly.
std::vector<NodeMinuteRecord> generate_run(const DomainSpec& spec, std::int64_t run_id);
std::vector<NodeMinuteRecord> generate_baseline_run(const DomainSpec& spec, std::int64_t run_id);

// All runs (run ids 0..runs−1).
std::vector<NodeMinuteRecord> generate_domain(const DomainSpec& spec);
void write_domain(const std::filesystem::path& csv_path, const DomainSpec& spec);

// The twelve-domain desk suite: every attack x variant at one network size.
std::vector<DomainSpec> desk_suite(std::uint64_t seed, int network_size = 5, int runs = 6,
                                   int minutes_per_run = 120);

// Raw (unnormalized) per-minute features of several domains, one row per
// (domain, run, minute): domain,run_id,minute,label,f01..f14 at full precision.
struct DumpRow {
    std::string domain;
    dataplane::MinuteFeatures features;
    bool operator==(const DumpRow& o) const {
        return domain == o.domain && features.run_id == o.features.run_id &&
               features.minute == o.features.minute && features.label == o.features.label &&
               features.values == o.features.values;
    }
};

std::string emit_feature_dump(const std::vector<DomainSpec>& domains);
std::string format_feature_dump(const std::vector<DumpRow>& rows);
std::vector<DumpRow> parse_feature_dump(const std::string& text);

}  // namespace driftids::trafficgen
