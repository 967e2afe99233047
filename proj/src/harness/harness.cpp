#include "driftids/harness/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "driftids/errors.hpp"
#include "driftids/idsmodel/checkpoint.hpp"
#include "driftids/rng.hpp"
#include "driftids/textio.hpp"

namespace driftids::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSplitStream = 0x73706c6974;
constexpr std::uint64_t kModelStream = 0x6d6f64656c;
constexpr std::uint64_t kTrainStream = 0x747261696e;
constexpr std::uint64_t kStrategyStream = 0x7374726174;
constexpr std::uint64_t kOrderStream = 0x6f72646572;
constexpr std::uint64_t kScoreStream = 0x73636f7265;

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& what) {
    require(j.is_object(), ErrorKind::config, what + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return key == k; });
        require(ok, ErrorKind::config, "unknown key '" + key + "' in " + what);
    }
}

json train_to_json(const idsmodel::TrainConfig& t) {
    return {{"learning_rate", t.learning_rate}, {"epochs", t.epochs}, {"batch_size", t.batch_size}, {"seed", t.seed}};
}

idsmodel::TrainConfig train_from_json(const json& j) {
    reject_unknown(j, {"learning_rate", "epochs", "batch_size", "seed"}, "train config");
    idsmodel::TrainConfig t;
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.epochs = j.value("epochs", t.epochs);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.seed = j.value("seed", t.seed);
    return t;
}

idsmodel::ModelConfig model_from_config_json(const json& j) {
    reject_unknown(j, {"input_dim", "hidden_size", "fc_size", "dropout_rate", "num_classes", "seed"}, "model config");
    return idsmodel::config_from_json(j);
}

json read_json_file(const fs::path& path) {
    try {
        return json::parse(textio::read_file(path));
    } catch (const json::parse_error& e) {
        fail(ErrorKind::config, path.string() + ": " + e.what());
    }
}

void write_json_file(const fs::path& path, const json& j) { textio::write_file(path, j.dump(2) + "\n"); }

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

json DomainSource::to_json() const {
    if (kind == "desk") {
        return {{"kind", kind}, {"network_size", network_size}, {"runs", runs}, {"minutes", minutes}};
    }
    if (kind == "specs") {
        json s = json::array();
        for (const auto& spec : specs) s.push_back(spec.to_json());
        return {{"kind", kind}, {"specs", s}};
    }
    return {{"kind", kind}, {"paths", paths}};
}

DomainSource DomainSource::from_json(const json& j) {
    reject_unknown(j, {"kind", "network_size", "runs", "minutes", "specs", "paths"}, "domains");
    DomainSource d;
    try {
        d.kind = j.value("kind", d.kind);
        d.network_size = j.value("network_size", d.network_size);
        d.runs = j.value("runs", d.runs);
        d.minutes = j.value("minutes", d.minutes);
        if (j.contains("specs")) {
            for (const auto& s : j.at("specs")) d.specs.push_back(trafficgen::DomainSpec::from_json(s));
        }
        if (j.contains("paths")) d.paths = j.at("paths").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        fail(ErrorKind::config, std::string("domains: ") + e.what());
    }
    require(d.kind == "desk" || d.kind == "specs" || d.kind == "paths", ErrorKind::config,
            "domains.kind must be desk, specs or paths");
    return d;
}

void ExperimentConfig::validate() const {
    model.validate();
    require(train.batch_size > 0, ErrorKind::config, "train.batch_size must be > 0");
    require(train.learning_rate > 0.0, ErrorKind::config, "train.learning_rate must be > 0");
    require(window >= 1 && stride >= 1, ErrorKind::config, "window and stride must be >= 1");
    require(std::find(scenario_names().begin(), scenario_names().end(), scenario) != scenario_names().end(),
            ErrorKind::config, "unknown scenario '" + scenario + "'");
    clstrat::display_name(strategy);
    require(epsilon >= 0.0, ErrorKind::config, "epsilon must be >= 0");
    if (domains.kind == "specs") {
        require(domains.specs.size() >= 2, ErrorKind::config, "need at least two domain specs");
    }
    if (domains.kind == "paths") {
        require(domains.paths.size() >= 2, ErrorKind::config, "need at least two domain paths");
    }
}

json ExperimentConfig::to_json() const {
    return {{"domains", domains.to_json()},
            {"window", window},
            {"stride", stride},
            {"split_ratio", split_ratio},
            {"model", idsmodel::config_to_json(model)},
            {"train", train_to_json(train)},
            {"strategy", strategy},
            {"hyperparameters", hyperparameters},
            {"scenario", scenario},
            {"metric", clmetrics::to_string(metric)},
            {"seed", seed},
            {"epsilon", epsilon},
            {"budget", budget}};
}

namespace {

void read_experiment_keys(ExperimentConfig& c, const json& j) {
    try {
        if (j.contains("domains")) c.domains = DomainSource::from_json(j.at("domains"));
        c.window = j.value("window", c.window);
        c.stride = j.value("stride", c.stride);
        c.split_ratio = j.value("split_ratio", c.split_ratio);
        if (j.contains("model")) c.model = model_from_config_json(j.at("model"));
        if (j.contains("train")) c.train = train_from_json(j.at("train"));
        c.strategy = j.value("strategy", c.strategy);
        if (j.contains("hyperparameters")) c.hyperparameters = j.at("hyperparameters");
        c.scenario = j.value("scenario", c.scenario);
        if (j.contains("metric")) c.metric = clmetrics::parse_metric_kind(j.at("metric").get<std::string>());
        c.seed = j.value("seed", c.seed);
        c.epsilon = j.value("epsilon", c.epsilon);
        c.budget = j.value("budget", c.budget);
    } catch (const json::exception& e) {
        fail(ErrorKind::config, std::string("experiment config: ") + e.what());
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    reject_unknown(j,
                   {"domains", "window", "stride", "split_ratio", "model", "train", "strategy", "hyperparameters",
                    "scenario", "metric", "seed", "epsilon", "budget"},
                   "experiment config");
    ExperimentConfig c;
    read_experiment_keys(c, j);
    c.validate();
    return c;
}

ExperimentConfig SuiteConfig::experiment(const std::string& method, const std::string& scenario,
                                         std::uint64_t seed) const {
    ExperimentConfig c = base;
    c.strategy = method;
    c.scenario = scenario;
    c.seed = seed;
    const auto it = method_hyperparameters.find(method);
    c.hyperparameters = it == method_hyperparameters.end() ? json::object() : it->second;
    return c;
}

json SuiteConfig::to_json() const {
    json j = base.to_json();
    j.erase("strategy");
    j.erase("hyperparameters");
    j.erase("scenario");
    j.erase("seed");
    j["methods"] = methods;
    j["scenarios"] = scenarios;
    j["seeds"] = seeds;
    j["method_hyperparameters"] = json(method_hyperparameters);
    return j;
}

SuiteConfig SuiteConfig::from_json(const json& j) {
    reject_unknown(j,
                   {"domains", "window", "stride", "split_ratio", "model", "train", "metric", "epsilon", "budget",
                    "methods", "scenarios", "seeds", "method_hyperparameters"},
                   "suite config");
    SuiteConfig s;
    read_experiment_keys(s.base, j);
    try {
        if (j.contains("methods")) s.methods = j.at("methods").get<std::vector<std::string>>();
        if (j.contains("scenarios")) s.scenarios = j.at("scenarios").get<std::vector<std::string>>();
        if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("method_hyperparameters")) {
            for (const auto& [k, v] : j.at("method_hyperparameters").items()) s.method_hyperparameters[k] = v;
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::config, std::string("suite config: ") + e.what());
    }
    require(!s.methods.empty() && !s.scenarios.empty() && !s.seeds.empty(), ErrorKind::config,
            "suite needs at least one method, scenario and seed");
    for (const auto& [k, v] : s.method_hyperparameters) {
        require(std::find(s.methods.begin(), s.methods.end(), k) != s.methods.end(), ErrorKind::config,
                "hyperparameters given for method '" + k + "' which is not in the suite");
    }
    for (const auto& m : s.methods) {
        for (const auto& sc : s.scenarios) s.experiment(m, sc, s.seeds.front()).validate();
    }
    return s;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    return ExperimentConfig::from_json(read_json_file(path));
}

SuiteConfig load_suite_config(const fs::path& path) { return SuiteConfig::from_json(read_json_file(path)); }

std::vector<DomainDataset> load_domains(const ExperimentConfig& config) {
    std::vector<DomainDataset> out;
    if (config.domains.kind == "paths") {
        for (const auto& p : config.domains.paths) out.push_back(dataplane::load_domain(p));
        return out;
    }
    const auto specs = config.domains.kind == "desk"
                           ? trafficgen::desk_suite(config.seed, config.domains.network_size,
                                                    config.domains.runs, config.domains.minutes)
                           : config.domains.specs;
    dataplane::AssembleOptions opt;
    opt.split_ratio = config.split_ratio;
    opt.window = config.window;
    opt.stride = config.stride;
    opt.seed = derive_seed({config.seed, kSplitStream});
    for (const auto& spec : specs) {
        const auto records = trafficgen::generate_domain(spec);
        out.push_back(dataplane::assemble_domain(records, spec.meta(), opt));
    }
    std::set<std::string> ids;
    for (const auto& d : out) {
        require(ids.insert(d.meta.domain_id).second, ErrorKind::config, "duplicate domain id " + d.meta.domain_id);
    }
    return out;
}

clmetrics::PerfCell evaluate(const idsmodel::ModelState& model, std::span<const dataplane::FeatureWindow> windows) {
    const auto s = idsmodel::predict_scores(model, windows);
    std::vector<int> pred(s.scores.size());
    for (std::size_t k = 0; k < pred.size(); ++k) pred[k] = s.scores[k] >= 0.5 ? 1 : 0;
    const auto f1 = clmetrics::f1_score(pred, s.labels);
    return {f1.value, clmetrics::auc_score(s.scores, s.labels), f1.degenerate};
}

std::vector<double> generalizability_scores(std::span<const DomainDataset> domains,
                                            const idsmodel::ModelConfig& model_cfg,
                                            const idsmodel::TrainConfig& train_cfg, MetricKind metric,
                                            std::uint64_t seed) {
    require(domains.size() >= 2, ErrorKind::contract, "generalizability needs at least two domains");
    std::vector<double> g(domains.size());
    for (std::size_t d = 0; d < domains.size(); ++d) {
        idsmodel::ModelConfig mc = model_cfg;
        mc.seed = derive_seed({seed, kScoreStream, d, kModelStream});
        idsmodel::TrainConfig tc = train_cfg;
        tc.seed = derive_seed({seed, kScoreStream, d, kTrainStream});
        auto model = idsmodel::build_model(mc);
        idsmodel::train_on_domain(model, domains[d].train, tc);
        double sum = 0.0;
        for (std::size_t o = 0; o < domains.size(); ++o) {
            if (o != d) sum += evaluate(model, domains[o].test).get(metric);
        }
        g[d] = sum / static_cast<double>(domains.size() - 1);
    }
    return g;
}

std::vector<std::size_t> order_domains(std::span<const std::string> ids, std::span<const double> scores,
                                       const std::string& scenario, std::uint64_t seed) {
    std::vector<std::size_t> idx(ids.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (scenario == "random") {
        Rng rng(derive_seed({seed, kOrderStream}));
        rng.shuffle(idx);
        return idx;
    }
    require(scenario == "b2w" || scenario == "w2b" || scenario == "toggle", ErrorKind::config,
            "unknown scenario '" + scenario + "'");
    require(scores.size() == ids.size(), ErrorKind::contract, "order_domains: one score per domain required");
    auto descending = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return ids[a] < ids[b];
    };
    if (scenario == "w2b") {
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] < scores[b];
            return ids[a] < ids[b];
        });
        return idx;
    }
    std::sort(idx.begin(), idx.end(), descending);
    if (scenario == "b2w") return idx;
    std::vector<std::size_t> toggled;
    std::size_t head = 0, tail = idx.size();
    for (std::size_t k = 0; head < tail; ++k) {
        toggled.push_back(k % 2 == 0 ? idx[head++] : idx[--tail]);
    }
    return toggled;
}

json compute_metrics(const PerfMatrix& perf, std::span<const std::string> attacks, MetricKind metric,
                     std::span<const std::size_t> memory_per_step, std::size_t budget, double epsilon) {
    const std::size_t t = perf.domains();
    require(attacks.size() == t, ErrorKind::contract, "compute_metrics: one attack per domain required");
    json m;
    m["metric"] = clmetrics::to_string(metric);
    m["domains"] = t;
    m["average_performance"] = {{"auc", clmetrics::perf_average(perf, MetricKind::auc)},
                                {"f1", clmetrics::perf_average(perf, MetricKind::f1)}};
    std::vector<double> bwt;
    if (t >= 2) {
        const auto s = clmetrics::stability_bwt(perf, metric);
        m["stability"] = s.mean;
        m["plasticity"] = clmetrics::plasticity(perf, metric);
        m["bwt_per_step"] = s.per_step;
        bwt = s.per_step;
    } else {
        m["stability"] = nullptr;
        m["plasticity"] = nullptr;
        m["bwt_per_step"] = json::array();
        m["note"] = "stability and plasticity need at least two domains";
    }
    m["constraints"] = clmetrics::to_json(clmetrics::constraint_report(memory_per_step, bwt, budget, epsilon));
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_attack;
    for (std::size_t j = 1; j <= t; ++j) {
        auto& [f1, auc] = by_attack[attacks[j - 1]];
        f1.push_back(perf.at(t, j, MetricKind::f1));
        auc.push_back(perf.at(t, j, MetricKind::auc));
    }
    json pa = json::object();
    for (const auto& [a, v] : by_attack) {
        pa[a] = {{"f1", mean(v.first)}, {"auc", mean(v.second)}, {"domains", v.first.size()}};
    }
    m["per_attack"] = pa;
    return m;
}

fs::path record_dir(const fs::path& out, const std::string& method, const std::string& scenario,
                    std::uint64_t seed) {
    return out / "records" / (method + "_" + scenario) / ("seed" + std::to_string(seed));
}

void write_record(const fs::path& dir, const ExperimentRecord& record) {
    fs::create_directories(dir);
    if (record.perf.domains() > 0) clmetrics::write_perf_csv(dir / "perf_matrix.csv", record.perf);
    std::vector<clmetrics::TimingRow> rows;
    const std::string method = record.config.value("strategy", std::string());
    for (std::size_t k = 0; k < record.seconds.size(); ++k) rows.push_back({method, k, record.seconds[k]});
    clmetrics::write_timings_csv(dir / "timings.csv", rows);
    write_json_file(dir / "metrics.json", record.metrics);
    write_json_file(dir / "config.json", record.config);
    write_json_file(dir / "telemetry.json", record.telemetry);
}

ExperimentRecord run_experiment(const ExperimentConfig& config, std::span<const DomainDataset> domains,
                                std::span<const double> scores, clstrat::Strategy* strategy,
                                const fs::path& flush_dir) {
    config.validate();
    require(!domains.empty(), ErrorKind::config, "experiment has no domains");
    std::vector<std::string> ids;
    for (const auto& d : domains) ids.push_back(d.meta.domain_id);
    const auto order = order_domains(ids, scores, config.scenario, config.seed);
    const std::size_t t_max = domains.size();

    ExperimentRecord rec;
    rec.config = config.to_json();
    std::vector<const DomainDataset*> seq;
    std::vector<std::string> attacks;
    for (auto k : order) {
        seq.push_back(&domains[k]);
        rec.order.push_back(ids[k]);
        attacks.push_back(dataplane::to_string(domains[k].meta.attack));
    }
    rec.config["order"] = rec.order;
    rec.perf = PerfMatrix(t_max, rec.order);

    idsmodel::ModelConfig mc = config.model;
    mc.seed = derive_seed({config.seed, mc.seed, kModelStream});
    idsmodel::TrainConfig tc = config.train;
    tc.seed = derive_seed({config.seed, tc.seed, kTrainStream});
    std::unique_ptr<clstrat::Strategy> owned;
    if (strategy == nullptr) {
        json hyper = config.hyperparameters.is_null() ? json::object() : config.hyperparameters;
        if (config.strategy == "replay" && !hyper.contains("capacity")) hyper["capacity"] = config.budget;
        owned = clstrat::make_strategy(config.strategy, hyper,
                                       {tc.batch_size, derive_seed({config.seed, kStrategyStream})});
        strategy = owned.get();
    }
    auto model = idsmodel::build_model(mc);

    std::string phase = "setup";
    std::size_t step = 0;
    try {
        for (step = 1; step <= t_max; ++step) {
            const DomainDataset& d = *seq[step - 1];
            phase = "pre-exposure evaluation";
            rec.perf.set(step - 1, step, evaluate(model, d.test));
            phase = "training";
            const auto start = std::chrono::steady_clock::now();
            strategy->before_domain(model, step - 1);
            idsmodel::train_on_domain(model, d.train, tc, *strategy, step - 1);
            phase = "consolidation";
            strategy->after_domain(model, step - 1, d.train);
            rec.seconds.push_back(seconds_since(start));
            rec.memory_per_step.push_back(strategy->memory_samples());
            phase = "evaluation";
            for (std::size_t j = 1; j <= step; ++j) rec.perf.set(step, j, evaluate(model, seq[j - 1]->test));
        }
    } catch (const Error& e) {
        if (!flush_dir.empty()) {
            rec.metrics = {{"partial", true}, {"failed_step", step}, {"failed_phase", phase}, {"error", e.what()}};
            write_record(flush_dir, rec);
        }
        fail(e.kind(), "step " + std::to_string(step) + " (" + phase + ", " + config.strategy + "): " + e.what());
    }

    rec.metrics = compute_metrics(rec.perf, attacks, config.metric, rec.memory_per_step, config.budget,
                                  config.epsilon);
    rec.metrics["method"] = config.strategy;
    rec.metrics["scenario"] = config.scenario;
    rec.metrics["seed"] = config.seed;
    rec.metrics["order"] = rec.order;
    rec.metrics["memory_per_step"] = rec.memory_per_step;
    rec.telemetry = strategy->telemetry();
    return rec;
}

std::size_t suite_threads() {
    const char* env = std::getenv("DRIFT_IDS_THREADS");
    if (env == nullptr || *env == '\0') return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    require(end != env && *end == '\0' && v >= 1, ErrorKind::config,
            std::string("DRIFT_IDS_THREADS must be a positive integer, got '") + env + "'");
    return static_cast<std::size_t>(v);
}

json run_suite(const SuiteConfig& suite, const fs::path& out, const std::function<void(const SuiteProgress&)>& progress) {
    const std::size_t threads = suite_threads();
    fs::create_directories(out / "records");

    struct SeedData {
        std::vector<DomainDataset> domains;
        std::vector<double> scores;
    };
    std::map<std::uint64_t, SeedData> data;
    for (auto seed : suite.seeds) {
        const ExperimentConfig base = suite.experiment(suite.methods.front(), suite.scenarios.front(), seed);
        SeedData sd;
        sd.domains = load_domains(base);
        idsmodel::ModelConfig mc = base.model;
        idsmodel::TrainConfig tc = base.train;
        sd.scores = generalizability_scores(sd.domains, mc, tc, base.metric, seed);
        json g = json::object();
        for (std::size_t d = 0; d < sd.domains.size(); ++d) g[sd.domains[d].meta.domain_id] = sd.scores[d];
        write_json_file(out / "records" / ("generalizability_seed" + std::to_string(seed) + ".json"), g);
        data.emplace(seed, std::move(sd));
    }

    struct Job {
        std::string method, scenario;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (auto seed : suite.seeds)
        for (const auto& sc : suite.scenarios)
            for (const auto& m : suite.methods) jobs.push_back({m, sc, seed});

    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex mu;
    std::exception_ptr first_error;
    auto worker = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs.size()) return;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (first_error) return;
            }
            const Job& job = jobs[k];
            try {
                const auto cfg = suite.experiment(job.method, job.scenario, job.seed);
                const auto& sd = data.at(job.seed);
                const auto dir = record_dir(out, job.method, job.scenario, job.seed);
                const auto rec = run_experiment(cfg, sd.domains, sd.scores, nullptr, dir);
                write_record(dir, rec);
                std::lock_guard<std::mutex> lock(mu);
                ++done;
                if (progress) {
                    progress({done, jobs.size(),
                              job.method + "_" + job.scenario + " seed " + std::to_string(job.seed)});
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < std::min(threads, jobs.size()); ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);

    json meta = suite.to_json();
    meta["threads"] = threads;
    write_json_file(out / "suite.json", meta);
    return render_report(out);
}

json render_report(const fs::path& out) {
    const fs::path records = out / "records";
    require(fs::is_directory(records), ErrorKind::io, "no records directory under " + out.string());

    struct Loaded {
        json metrics;
        std::vector<clmetrics::TimingRow> timings;
    };
    std::vector<Loaded> recs;
    std::vector<fs::path> dirs;
    for (const auto& group : fs::directory_iterator(records)) {
        if (!group.is_directory()) continue;
        for (const auto& seed_dir : fs::directory_iterator(group.path())) {
            if (fs::exists(seed_dir.path() / "metrics.json")) dirs.push_back(seed_dir.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        Loaded l;
        l.metrics = read_json_file(dir / "metrics.json");
        if (l.metrics.value("partial", false)) continue;
        l.timings = clmetrics::read_timings_csv(dir / "timings.csv");
        // Every reported value must be recomputable from the persisted matrix.
        const auto perf = clmetrics::read_perf_csv(dir / "perf_matrix.csv");
        const auto kind = clmetrics::parse_metric_kind(l.metrics.at("metric").get<std::string>());
        if (perf.domains() >= 2) {
            require(clmetrics::stability_bwt(perf, kind).mean == l.metrics.at("stability").get<double>(),
                    ErrorKind::data, dir.string() + ": stored stability disagrees with perf_matrix.csv");
        }
        recs.push_back(std::move(l));
    }
    require(!recs.empty(), ErrorKind::io, "no experiment records under " + records.string());

    // TE per (scenario, seed) across the methods present.
    std::map<std::pair<std::string, std::uint64_t>, clmetrics::TimingTable> tables;
    std::map<std::pair<std::string, std::uint64_t>, std::vector<std::string>> domain_sets;
    for (const auto& r : recs) {
        const std::pair key{r.metrics.at("scenario").get<std::string>(), r.metrics.at("seed").get<std::uint64_t>()};
        auto ids = r.metrics.at("order").get<std::vector<std::string>>();
        std::sort(ids.begin(), ids.end());
        auto [it, fresh] = domain_sets.emplace(key, ids);
        require(fresh || it->second == ids, ErrorKind::config,
                "records for scenario " + key.first + " seed " + std::to_string(key.second) +
                    " use different domain sets");
        std::vector<double> secs;
        for (const auto& row : r.timings) secs.push_back(row.seconds);
        tables[key][r.metrics.at("method").get<std::string>()] = secs;
    }
    std::map<std::pair<std::string, std::uint64_t>, std::map<std::string, double>> te;
    for (const auto& [key, table] : tables) te[key] = clmetrics::training_efficiency(table);

    std::string t2 = "method,scenario,seed,stability,plasticity,average_performance,te\n";
    std::string curves = "method,scenario,seed,t,bwt\n";
    struct Acc {
        std::vector<double> s, p, a, te;
    };
    std::map<std::pair<std::string, std::string>, Acc> means;
    std::map<std::string, std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>> table1;
    json per_record = json::array();
    auto num = [](const json& v) { return v.is_null() ? std::string("") : textio::format_double(v.get<double>()); };
    for (const auto& r : recs) {
        const auto& m = r.metrics;
        const std::string method = m.at("method"), scenario = m.at("scenario");
        const auto seed = m.at("seed").get<std::uint64_t>();
        const std::string kind = m.at("metric");
        const double e = te.at({scenario, seed}).at(method);
        const double avg = m.at("average_performance").at(kind).get<double>();
        t2 += method + "," + scenario + "," + std::to_string(seed) + "," + num(m.at("stability")) + "," +
              num(m.at("plasticity")) + "," + textio::format_double(avg) + "," + textio::format_double(e) + "\n";
        const auto bwt = m.at("bwt_per_step").get<std::vector<double>>();
        for (std::size_t k = 0; k < bwt.size(); ++k) {
            curves += method + "," + scenario + "," + std::to_string(seed) + "," + std::to_string(k + 2) + "," +
                      textio::format_double(bwt[k]) + "\n";
        }
        auto& acc = means[{method, scenario}];
        if (!m.at("stability").is_null()) {
            acc.s.push_back(m.at("stability").get<double>());
            acc.p.push_back(m.at("plasticity").get<double>());
        }
        acc.a.push_back(avg);
        acc.te.push_back(e);
        for (const auto& [attack, v] : m.at("per_attack").items()) {
            table1[method][attack].first.push_back(v.at("f1").get<double>());
            table1[method][attack].second.push_back(v.at("auc").get<double>());
        }
        per_record.push_back({{"method", method}, {"scenario", scenario}, {"seed", seed}, {"te", e},
                              {"stability", m.at("stability")}, {"plasticity", m.at("plasticity")}});
    }
    json t2_means = json::array();
    for (const auto& [key, acc] : means) {
        t2 += key.first + "," + key.second + ",mean," + textio::format_double(mean(acc.s)) + "," +
              textio::format_double(mean(acc.p)) + "," + textio::format_double(mean(acc.a)) + "," +
              textio::format_double(mean(acc.te)) + "\n";
        t2_means.push_back({{"method", key.first}, {"scenario", key.second}, {"stability", mean(acc.s)},
                            {"plasticity", mean(acc.p)}, {"average_performance", mean(acc.a)},
                            {"te", mean(acc.te)}, {"seeds", acc.a.size()}});
    }
    std::string t1 = "method,attack,f1,auc,records\n";
    json t1_json = json::array();
    for (const auto& [method, attacks] : table1) {
        for (const auto& [attack, v] : attacks) {
            t1 += method + "," + attack + "," + textio::format_double(mean(v.first)) + "," +
                  textio::format_double(mean(v.second)) + "," + std::to_string(v.first.size()) + "\n";
            t1_json.push_back({{"method", method}, {"attack", attack}, {"f1", mean(v.first)},
                               {"auc", mean(v.second)}, {"records", v.first.size()}});
        }
    }

    fs::create_directories(out / "report");
    textio::write_file(out / "report" / "table1.csv", t1);
    textio::write_file(out / "report" / "table2.csv", t2);
    textio::write_file(out / "report" / "bwt_curves.csv", curves);
    json report = {{"table1", t1_json}, {"table2", t2_means}, {"records", per_record}};
    if (fs::exists(out / "suite.json")) {
        report["threads"] = read_json_file(out / "suite.json").value("threads", 1);
    }
    write_json_file(out / "report" / "report.json", report);
    return report;
}

}  // namespace driftids::harness
