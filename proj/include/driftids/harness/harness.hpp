#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "driftids/clmetrics/metrics.hpp"
#include "driftids/clstrat/strategies.hpp"
#include "driftids/dataplane/dataplane.hpp"
#include "driftids/idsmodel/trainer.hpp"
#include "driftids/trafficgen/trafficgen.hpp"
#include "json.hpp"

namespace driftids::harness {

using clmetrics::MetricKind;
using clmetrics::PerfMatrix;
using dataplane::DomainDataset;

// Where the domains of an experiment come from.
//   {"kind": "desk", "network_size": 5, "runs": 6, "minutes": 120}
//   {"kind": "specs", "specs": [DomainSpec, ...]}
//   {"kind": "paths", "paths": ["cache/dir", ...]}   (ingested domain caches)
struct DomainSource {
    std::string kind = "desk";
    int network_size = 5;
    int runs = 6;
    int minutes = 120;
    std::vector<trafficgen::DomainSpec> specs;
    std::vector<std::string> paths;

    nlohmann::json to_json() const;
    static DomainSource from_json(const nlohmann::json& j);
};

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {"random", "b2w", "w2b", "toggle"};
    return names;
}

struct ExperimentConfig {
    DomainSource domains;
    std::size_t window = 10;
    std::size_t stride = 1;
    double split_ratio = 0.8;
    idsmodel::ModelConfig model;
    idsmodel::TrainConfig train;
    std::string strategy = "naive";
    nlohmann::json hyperparameters = nlohmann::json::object();
    std::string scenario = "random";
    MetricKind metric = MetricKind::auc;
    std::uint64_t seed = 0;
    double epsilon = 0.1;
    std::size_t budget = 1000;

    void validate() const;
    nlohmann::json to_json() const;
    // Missing keys keep their defaults; unknown keys are config errors.
    static ExperimentConfig from_json(const nlohmann::json& j);
};

// A full grid: every method x scenario x seed over the same domain source.
// JSON: the experiment keys plus "methods", "scenarios", "seeds" and
// "method_hyperparameters": {method: {...}}.
struct SuiteConfig {
    ExperimentConfig base;
    std::vector<std::string> methods = clstrat::strategy_names();
    std::vector<std::string> scenarios = scenario_names();
    std::vector<std::uint64_t> seeds = {0};
    std::map<std::string, nlohmann::json> method_hyperparameters;

    ExperimentConfig experiment(const std::string& method, const std::string& scenario,
                                std::uint64_t seed) const;
    nlohmann::json to_json() const;
    static SuiteConfig from_json(const nlohmann::json& j);
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);
SuiteConfig load_suite_config(const std::filesystem::path& path);

// Builds every domain of the source. Generation and the train/test split are
// seeded from `seed`.
std::vector<DomainDataset> load_domains(const ExperimentConfig& config);

// F1 at threshold 0.5 and AUC of a model on a window set.
clmetrics::PerfCell evaluate(const idsmodel::ModelState& model, std::span<const dataplane::FeatureWindow> windows);

// g_d: mean metric on every other domain's test split of a fresh model
// trained on d's train split.
std::vector<double> generalizability_scores(std::span<const DomainDataset> domains,
                                            const idsmodel::ModelConfig& model_cfg,
                                            const idsmodel::TrainConfig& train_cfg, MetricKind metric,
                                            std::uint64_t seed);

// Indices into `ids`. b2w: descending score; w2b: ascending; toggle:
// alternately the head and tail of the descending list; random: seeded
// shuffle. Ties go to the smaller domain id.
std::vector<std::size_t> order_domains(std::span<const std::string> ids, std::span<const double> scores,
                                       const std::string& scenario, std::uint64_t seed);

struct ExperimentRecord {
    nlohmann::json config;
    std::vector<std::string> order;  // domain ids in training order
    PerfMatrix perf;
    std::vector<double> seconds;  // per domain, training plus consolidation
    std::vector<std::size_t> memory_per_step;
    nlohmann::json metrics;  // deterministic: no wall times
    nlohmann::json telemetry;
};

// Domain-incremental loop over `domains` (in the given storage order; the
// scenario ordering is applied here using `scores`). `strategy` overrides
// the configured one when non-null.
// On failure the error names the step and phase; with a non-empty
// `flush_dir` the partial record is written there first.
ExperimentRecord run_experiment(const ExperimentConfig& config, std::span<const DomainDataset> domains,
                                std::span<const double> scores, clstrat::Strategy* strategy = nullptr,
                                const std::filesystem::path& flush_dir = {});

// S̄, P̄, average performance, constraint report and per-attack final-row
// means, all recomputable from the matrix.
nlohmann::json compute_metrics(const PerfMatrix& perf, std::span<const std::string> attacks,
                               MetricKind metric, std::span<const std::size_t> memory_per_step,
                               std::size_t budget, double epsilon);

// <dir>/{perf_matrix.csv, timings.csv, metrics.json, config.json, telemetry.json}
void write_record(const std::filesystem::path& dir, const ExperimentRecord& record);

// records/<method>_<scenario>/seed<s>/ under `out`.
std::filesystem::path record_dir(const std::filesystem::path& out, const std::string& method,
                                 const std::string& scenario, std::uint64_t seed);

// Worker count from DRIFT_IDS_THREADS (default 1).
std::size_t suite_threads();

struct SuiteProgress {
    std::size_t done = 0;
    std::size_t total = 0;
    std::string label;
};

// Runs the grid, persists every record and renders the report. Returns the
// report JSON.
nlohmann::json run_suite(const SuiteConfig& suite, const std::filesystem::path& out,
                         const std::function<void(const SuiteProgress&)>& progress = {});

// Rebuilds report/{table1.csv, table2.csv, bwt_curves.csv, report.json} from
// persisted records only.
nlohmann::json render_report(const std::filesystem::path& out);

}  // namespace driftids::harness
