#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftids/dataplane/types.hpp"
#include "json.hpp"

namespace driftids::dataplane {

inline constexpr const char* kSinkLogHeader =
    "run_id,minute,node_id,rank,dis_sent,dio_sent,dao_sent,dis_recv,dio_recv,rpl_total_sent,attack_active";

// Maps an external dataset's column names onto the canonical sink-log schema.
// JSON form:
//   {"columns": {"run_id": "RunID", "minute": "Time", ...},
//    "attack_true_values": ["1", "true", "attack"],
//    "ignore_extra_columns": true,
//    "delimiter": ","}
// Canonical names missing from "columns" map to themselves.
struct LoaderConfig {
    std::map<std::string, std::string> columns;
    std::vector<std::string> attack_true_values = {"1", "true", "True", "TRUE"};
    bool ignore_extra_columns = false;
    char delimiter = ',';

    static LoaderConfig from_json(const nlohmann::json& j);
    static LoaderConfig load(const std::filesystem::path& path);
};

// Records sorted by (run_id, minute, node_id).
std::vector<NodeMinuteRecord> parse_sink_log(const std::filesystem::path& path,
                                             const LoaderConfig& loader = {});
std::vector<NodeMinuteRecord> parse_sink_log_text(const std::string& text,
                                                  const LoaderConfig& loader = {},
                                                  const std::string& origin = "<memory>");
void write_sink_log(const std::filesystem::path& path, std::span<const NodeMinuteRecord> records);
std::string format_sink_log(std::span<const NodeMinuteRecord> records);

// Means and population standard deviations of the 7 attributes over the
// records of one (run, minute).
FeatureVector14 aggregate_minute(std::span<const NodeMinuteRecord> records);

// One labeled 14-vector per (run, minute), in (run, minute) order. A minute
// is labeled attack when any node reports attack_active.
std::vector<MinuteFeatures> minute_features(std::span<const NodeMinuteRecord> sorted_records);

NormStats minmax_fit(std::span<const std::array<double, kFeatureDim>> vectors,
                     std::string fitted_on = {});
// (v − min)/(max − min) clipped to [0, 1]; constant features map to 0.
std::array<double, kFeatureDim> minmax_apply(const std::array<double, kFeatureDim>& v,
                                             const NormStats& stats);

// Sliding windows of length `window` stepping by `stride`, never crossing a
// run boundary. Label and source come from the last minute of each window.
std::vector<FeatureWindow> windowize(std::span<const MinuteFeatures> minutes, std::size_t window,
                                     std::size_t stride = 1);

struct AssembleOptions {
    double split_ratio = 0.8;
    std::uint64_t seed = 0;
    std::size_t window = 10;
    std::size_t stride = 1;
};

// Shuffles run ids with the seed, splits train/test by run, fits NormStats
// on the train split's minutes only and windows both splits.
DomainDataset assemble_domain(std::span<const NodeMinuteRecord> records, const DomainMeta& meta,
                              const AssembleOptions& options);

// Domain feature cache: <dir>/features.csv (run_id,end_minute,label,f01..f14;
// normalized, 9 significant digits) plus <dir>/domain.json (NormStats,
// metadata, split, window settings).
void save_domain(const std::filesystem::path& dir, std::span<const NodeMinuteRecord> records,
                 const DomainDataset& dataset, const AssembleOptions& options);
DomainDataset load_domain(const std::filesystem::path& dir);

nlohmann::json meta_to_json(const DomainMeta& meta);
DomainMeta meta_from_json(const nlohmann::json& j);

std::string feature_csv_header();

}  // namespace driftids::dataplane
