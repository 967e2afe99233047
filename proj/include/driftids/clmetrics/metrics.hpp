#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace driftids::clmetrics {

enum class MetricKind { auc, f1 };

std::string to_string(MetricKind kind);
MetricKind parse_metric_kind(const std::string& text);

struct F1Result {
    double value = 0.0;
    bool degenerate = false;  // no true or no predicted positives
};

// F1 of the attack class (label 1).
F1Result f1_score(std::span<const int> predictions, std::span<const int> labels);

// Mann-Whitney AUC via rank sums, ties counted as 1/2. A single-class label
// set raises undefined_metric.
double auc_score(std::span<const double> scores, std::span<const int> labels);

struct PerfCell {
    double f1 = 0.0;
    double auc = 0.0;
    bool f1_degenerate = false;

    double get(MetricKind kind) const { return kind == MetricKind::auc ? auc : f1; }
    bool operator==(const PerfCell&) const = default;
};

// Perf[i][j]: score on domain j's test split after training on domains
// 1..i. Row 0 is the untrained model. Cells exist for j <= i (retention)
// and j = i + 1 (the evaluation of the incoming domain before training).
class PerfMatrix {
public:
    PerfMatrix() = default;
    explicit PerfMatrix(std::size_t domains, std::vector<std::string> domain_ids = {});

    std::size_t domains() const { return t_; }
    const std::vector<std::string>& domain_ids() const { return ids_; }

    void set(std::size_t i, std::size_t j, const PerfCell& cell);
    bool has(std::size_t i, std::size_t j) const;
    const PerfCell& cell(std::size_t i, std::size_t j) const;
    double at(std::size_t i, std::size_t j, MetricKind kind) const { return cell(i, j).get(kind); }
    // Every admissible cell filled.
    bool complete() const;

    bool operator==(const PerfMatrix&) const = default;

private:
    std::size_t index(std::size_t i, std::size_t j) const;

    std::size_t t_ = 0;
    std::vector<std::string> ids_;
    std::vector<std::optional<PerfCell>> cells_;  // (T+1) x T, row-major
};

// Mean of the bottom row.
double perf_average(const PerfMatrix& m, MetricKind kind);
// Mean gain Perf[j][j] - Perf[j-1][j] over j = 2..T.
double plasticity(const PerfMatrix& m, MetricKind kind);

struct Stability {
    double mean = 0.0;
    std::vector<double> per_step;  // BWT_t for t = 2..T
};
Stability stability_bwt(const PerfMatrix& m, MetricKind kind);

// Wall seconds per method per domain, all methods over the same domains.
using TimingTable = std::map<std::string, std::vector<double>>;
// Geometric mean over domains of TT_min(t) / TT_a(t), in log space.
std::map<std::string, double> training_efficiency(const TimingTable& timings);

struct Violation {
    std::size_t step = 0;  // 1-based domain step
    std::string kind;      // "memory" or "forgetting"
    double value = 0.0;
    bool operator==(const Violation&) const = default;
};

struct ConstraintReport {
    std::size_t budget = 0;
    std::size_t max_memory = 0;
    double epsilon = 0.0;
    std::vector<double> bwt_per_step;  // t = 2..T
    std::vector<Violation> violations;
    std::string interpretation;
};

// memory_per_step[t-1] is |A_t| after step t; bwt_per_step[k] is BWT_{k+2}.
// Flags |A_t| > B and |min(0, BWT_t)| > epsilon.
ConstraintReport constraint_report(std::span<const std::size_t> memory_per_step,
                                   std::span<const double> bwt_per_step, std::size_t budget,
                                   double epsilon);

nlohmann::json to_json(const ConstraintReport& report);
ConstraintReport constraint_report_from_json(const nlohmann::json& j);

// after_domain,i,eval_domain,j,f1,auc; row 0 is labelled "init".
void write_perf_csv(const std::filesystem::path& path, const PerfMatrix& m);
std::string format_perf_csv(const PerfMatrix& m);
PerfMatrix parse_perf_csv(const std::string& text, const std::string& origin = "<memory>");
PerfMatrix read_perf_csv(const std::filesystem::path& path);

struct TimingRow {
    std::string method;
    std::size_t domain_index = 0;
    double seconds = 0.0;
};
void write_timings_csv(const std::filesystem::path& path, const std::vector<TimingRow>& rows);
std::vector<TimingRow> read_timings_csv(const std::filesystem::path& path);

// Straightforward re-implementations used as test and `validate` oracles.
namespace oracle {
double auc_pairwise(std::span<const double> scores, std::span<const int> labels);
double perf_average(const PerfMatrix& m, MetricKind kind);
double plasticity(const PerfMatrix& m, MetricKind kind);
double stability(const PerfMatrix& m, MetricKind kind);
std::map<std::string, double> training_efficiency(const TimingTable& timings);
}  // namespace oracle

}  // namespace driftids::clmetrics
