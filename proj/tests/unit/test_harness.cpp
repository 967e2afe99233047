#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "driftids/errors.hpp"
#include "driftids/harness/harness.hpp"
#include "driftids/harness/validate.hpp"
#include "driftids/textio.hpp"

using namespace driftids;
using namespace driftids::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::contract;
}

trafficgen::DomainSpec small_spec(dataplane::Attack a, dataplane::Variant v, std::uint64_t seed) {
    trafficgen::DomainSpec s;
    s.attack = a;
    s.variant = v;
    s.runs = 5;
    s.minutes_per_run = 60;
    s.attack_start_minute = 20;
    s.seed = seed;
    return s;
}

ExperimentConfig tiny_config(std::vector<trafficgen::DomainSpec> specs) {
    ExperimentConfig c;
    c.domains.kind = "specs";
    c.domains.specs = std::move(specs);
    c.window = 5;
    c.model.hidden_size = 6;
    c.model.fc_size = 6;
    c.train.epochs = 3;
    c.train.batch_size = 32;
    c.train.learning_rate = 0.005;
    return c;
}

ExperimentConfig three_domains() {
    using dataplane::Attack;
    using dataplane::Variant;
    return tiny_config({small_spec(Attack::DF, Variant::base, 1), small_spec(Attack::BH, Variant::base, 2),
                        small_spec(Attack::LR, Variant::onoff, 3)});
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("driftids_harness_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("order_domains: definitional examples") {
    const std::vector<std::string> ids = {"A", "B", "C"};
    const std::vector<double> g = {0.9, 0.5, 0.1};
    CHECK(order_domains(ids, g, "b2w", 0) == std::vector<std::size_t>{0, 1, 2});
    CHECK(order_domains(ids, g, "w2b", 0) == std::vector<std::size_t>{2, 1, 0});
    CHECK(order_domains(ids, g, "toggle", 0) == std::vector<std::size_t>{0, 2, 1});
    CHECK(order_domains(ids, g, "random", 4) == order_domains(ids, g, "random", 4));
    CHECK(kind_of([&] { order_domains(ids, g, "sideways", 0); }) == ErrorKind::config);

    const std::vector<std::string> five = {"e", "d", "c", "b", "a"};
    const std::vector<double> ties = {0.5, 0.5, 0.9, 0.1, 0.5};
    // descending: c, then a d e tied by id, then b
    CHECK(order_domains(five, ties, "b2w", 0) == std::vector<std::size_t>{2, 4, 1, 0, 3});
    CHECK(order_domains(five, ties, "toggle", 0) == std::vector<std::size_t>{2, 3, 4, 0, 1});
}

TEST_CASE("order_domains: b2w reverses w2b for distinct scores, random is a permutation") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(15);
        std::vector<std::string> ids;
        std::vector<double> g;
        for (std::size_t k = 0; k < n; ++k) {
            ids.push_back("d" + std::to_string(k));
            g.push_back(rng.uniform());
        }
        auto b2w = order_domains(ids, g, "b2w", 0);
        auto w2b = order_domains(ids, g, "w2b", 0);
        std::reverse(w2b.begin(), w2b.end());
        CHECK(b2w == w2b);
        auto r = order_domains(ids, g, "random", trial);
        std::sort(r.begin(), r.end());
        for (std::size_t k = 0; k < n; ++k) CHECK(r[k] == k);
        auto t = order_domains(ids, g, "toggle", 0);
        std::sort(t.begin(), t.end());
        for (std::size_t k = 0; k < n; ++k) CHECK(t[k] == k);
    }
}

TEST_CASE("config JSON: round trip and unknown keys") {
    auto c = three_domains();
    c.strategy = "ewc";
    c.hyperparameters = {{"lambda", 3.0}};
    c.scenario = "toggle";
    const auto back = ExperimentConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    json bad = c.to_json();
    bad["learning_rate"] = 1.0;
    CHECK(kind_of([&] { ExperimentConfig::from_json(bad); }) == ErrorKind::config);
    json bad_scenario = c.to_json();
    bad_scenario["scenario"] = "b2b";
    CHECK(kind_of([&] { ExperimentConfig::from_json(bad_scenario); }) == ErrorKind::config);

    SuiteConfig s;
    s.base = three_domains();
    s.methods = {"naive", "si"};
    s.method_hyperparameters["si"] = {{"c", 5.0}};
    const auto sb = SuiteConfig::from_json(s.to_json());
    CHECK(sb.to_json() == s.to_json());
    CHECK(sb.experiment("si", "b2w", 2).hyperparameters == json{{"c", 5.0}});
    json orphan = s.to_json();
    orphan["method_hyperparameters"]["ewc"] = {{"lambda", 1.0}};
    CHECK(kind_of([&] { SuiteConfig::from_json(orphan); }) == ErrorKind::config);
}

TEST_CASE("generalizability: twins, noise domain, determinism") {
    using dataplane::Attack;
    using dataplane::Variant;
    const auto spec = small_spec(Attack::DF, Variant::base, 9);
    const auto records = trafficgen::generate_domain(spec);
    dataplane::AssembleOptions opt;
    opt.window = 5;
    auto a = dataplane::assemble_domain(records, spec.meta(), opt);
    auto b = a;
    b.meta.domain_id = "DF-base-5-twin";
    idsmodel::ModelConfig mc;
    mc.hidden_size = 6;
    mc.fc_size = 6;
    idsmodel::TrainConfig tc;
    tc.epochs = 6;
    tc.batch_size = 32;
    tc.learning_rate = 0.005;
    const std::vector<DomainDataset> twins = {a, b};
    const auto g = generalizability_scores(twins, mc, tc, MetricKind::auc, 1);
    // Same data, same derived seed stream per index: compare each g with the
    // in-domain score of an identically trained model.
    for (std::size_t d = 0; d < 2; ++d) {
        idsmodel::ModelConfig m = mc;
        m.seed = derive_seed({1, 0x73636f7265, d, 0x6d6f64656c});
        idsmodel::TrainConfig t = tc;
        t.seed = derive_seed({1, 0x73636f7265, d, 0x747261696e});
        auto model = idsmodel::build_model(m);
        idsmodel::train_on_domain(model, twins[d].train, t);
        CHECK(std::abs(g[d] - evaluate(model, twins[d].test).auc) < 0.05);
    }
    CHECK(generalizability_scores(twins, mc, tc, MetricKind::auc, 1) == g);

    auto noise = dataplane::assemble_domain(trafficgen::generate_domain(small_spec(Attack::LR, Variant::base, 4)),
                                            small_spec(Attack::LR, Variant::base, 4).meta(), opt);
    Rng rng(12);
    for (auto* split : {&noise.train, &noise.test}) {
        for (auto& w : *split)
            for (double& v : w.features.values()) v = rng.uniform();
    }
    auto bh = dataplane::assemble_domain(trafficgen::generate_domain(small_spec(Attack::BH, Variant::base, 5)),
                                         small_spec(Attack::BH, Variant::base, 5).meta(), opt);
    const std::vector<DomainDataset> three = {a, bh, noise};
    const auto gn = generalizability_scores(three, mc, tc, MetricKind::auc, 2);
    CHECK(std::abs(gn[2] - 0.5) < 0.15);
    CHECK(kind_of([&] { generalizability_scores(std::span(three).first(1), mc, tc, MetricKind::auc, 2); }) ==
          ErrorKind::contract);
}

TEST_CASE("run_experiment: perf pattern, determinism, persistence") {
    const auto cfg = three_domains();
    const auto doms = load_domains(cfg);
    const auto rec = run_experiment(cfg, doms, {});
    CHECK(rec.perf.complete());
    CHECK(rec.order.size() == 3);
    CHECK(rec.seconds.size() == 3);
    for (double s : rec.seconds) CHECK(s > 0.0);
    CHECK(rec.metrics.at("bwt_per_step").size() == 2);
    CHECK_FALSE(rec.metrics.contains("te"));

    const auto again = run_experiment(cfg, doms, {});
    CHECK(again.metrics.dump() == rec.metrics.dump());
    CHECK(again.perf == rec.perf);

    const auto dir = scratch("record");
    write_record(dir, rec);
    const auto perf = clmetrics::read_perf_csv(dir / "perf_matrix.csv");
    CHECK(clmetrics::format_perf_csv(perf) == clmetrics::format_perf_csv(rec.perf));
    CHECK(clmetrics::stability_bwt(perf, MetricKind::auc).mean == rec.metrics.at("stability").get<double>());
    CHECK(clmetrics::plasticity(perf, MetricKind::auc) == rec.metrics.at("plasticity").get<double>());
    const json stored = json::parse(textio::read_file(dir / "metrics.json"));
    CHECK(stored == rec.metrics);
    fs::remove_all(dir);
}

TEST_CASE("run_experiment: strategy is the only difference between naive and replay") {
    auto cfg = three_domains();
    cfg.domains.specs.pop_back();
    const auto doms = load_domains(cfg);
    const auto naive = run_experiment(cfg, doms, {});
    cfg.strategy = "replay";
    const auto replay = run_experiment(cfg, doms, {});
    CHECK(naive.order == replay.order);
    // Identical until the first replayed batch: the first two cells agree.
    CHECK(naive.perf.cell(0, 1) == replay.perf.cell(0, 1));
    CHECK(naive.perf.cell(1, 1) == replay.perf.cell(1, 1));
    CHECK(naive.perf.cell(1, 2) == replay.perf.cell(1, 2));
    CHECK_FALSE(naive.perf == replay.perf);
    CHECK(replay.memory_per_step.back() > 0);
    CHECK(replay.memory_per_step.back() <= cfg.budget);
}

TEST_CASE("run_experiment: neutral strategies reproduce the naive matrix") {
    const auto cfg = three_domains();
    const auto doms = load_domains(cfg);
    const auto naive = run_experiment(cfg, doms, {});
    for (const auto& name : clstrat::strategy_names()) {
        CAPTURE(name);
        auto c = cfg;
        c.strategy = name;
        c.hyperparameters = clstrat::neutral_hyperparameters(name);
        if (name == "gr") c.hyperparameters["epochs"] = 1;
        CHECK(run_experiment(c, doms, {}).perf == naive.perf);
    }
}

namespace {

// Records which training windows each hook sees.
class Recorder final : public clstrat::Strategy {
public:
    std::string name() const override { return "recorder"; }
    void after_domain(const idsmodel::ModelState&, std::size_t t, std::span<const dataplane::FeatureWindow> train) override {
        seen.push_back({t, std::vector<dataplane::FeatureWindow>(train.begin(), train.end())});
    }
    std::vector<std::pair<std::size_t, std::vector<dataplane::FeatureWindow>>> seen;
};

}  // namespace

TEST_CASE("run_experiment: streaming contract and T=1") {
    auto cfg = three_domains();
    const auto doms = load_domains(cfg);
    Recorder rec;
    const auto r = run_experiment(cfg, doms, {}, &rec);
    REQUIRE(rec.seen.size() == 3);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(rec.seen[t].first == t);
        const auto it = std::find_if(doms.begin(), doms.end(),
                                     [&](const DomainDataset& d) { return d.meta.domain_id == r.order[t]; });
        CHECK(rec.seen[t].second == it->train);
    }

    const std::vector<DomainDataset> one(doms.begin(), doms.begin() + 1);
    const auto single = run_experiment(cfg, one, {});
    CHECK(single.metrics.at("stability").is_null());
    CHECK(single.metrics.contains("note"));
}

TEST_CASE("run_experiment: errors carry step and phase; partial results are flushed") {
    auto cfg = three_domains();
    auto doms = load_domains(cfg);
    for (auto& w : doms[1].test) w.label = 0;
    cfg.scenario = "b2w";
    const std::vector<double> scores = {0.9, 0.5, 0.1};
    const auto dir = scratch("partial");
    try {
        run_experiment(cfg, doms, scores, nullptr, dir);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::undefined_metric);
        CHECK(std::string(e.what()).find("step 2 (pre-exposure evaluation") != std::string::npos);
    }
    const json partial = json::parse(textio::read_file(dir / "metrics.json"));
    CHECK(partial.at("partial") == true);
    CHECK(fs::exists(dir / "perf_matrix.csv"));
    fs::remove_all(dir);
}

TEST_CASE("suite: records, report cross-check, TE of a lone method") {
    SuiteConfig s;
    s.base = three_domains();
    s.base.domains.specs.pop_back();
    s.methods = {"naive", "si"};
    s.scenarios = {"random", "w2b"};
    s.seeds = {0};
    const auto out = scratch("suite");
    const auto report = run_suite(s, out);
    std::size_t records = 0;
    for (const auto& m : s.methods)
        for (const auto& sc : s.scenarios) {
            CHECK(fs::exists(record_dir(out, m, sc, 0) / "metrics.json"));
            ++records;
        }
    CHECK(report.at("records").size() == records);
    for (const auto& r : report.at("records")) {
        const json m = json::parse(textio::read_file(
            record_dir(out, r.at("method"), r.at("scenario"), r.at("seed").get<std::uint64_t>()) / "metrics.json"));
        CHECK(r.at("stability") == m.at("stability"));
    }
    const std::string t2 = textio::read_file(out / "report" / "table2.csv");
    const auto again = render_report(out);
    CHECK(textio::read_file(out / "report" / "table2.csv") == t2);
    CHECK(again == report);

    // A record trained on other domains cannot join the TE comparison.
    const auto odd = record_dir(out, "si", "random", 0);
    json m = json::parse(textio::read_file(odd / "metrics.json"));
    m["order"][0] = "XX-base-5";
    textio::write_file(odd / "metrics.json", m.dump());
    CHECK(kind_of([&] { render_report(out); }) == ErrorKind::config);
    fs::remove_all(out);

    s.methods = {"naive"};
    s.scenarios = {"random"};
    const auto lone = run_suite(s, out);
    CHECK(lone.at("records")[0].at("te") == 1.0);
    fs::remove_all(out);
}

TEST_CASE("suite_threads reads DRIFT_IDS_THREADS") {
    unsetenv("DRIFT_IDS_THREADS");
    CHECK(suite_threads() == 1);
    setenv("DRIFT_IDS_THREADS", "3", 1);
    CHECK(suite_threads() == 3);
    setenv("DRIFT_IDS_THREADS", "zero", 1);
    CHECK(kind_of([] { suite_threads(); }) == ErrorKind::config);
    unsetenv("DRIFT_IDS_THREADS");
}
