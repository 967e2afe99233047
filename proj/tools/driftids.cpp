// driftids: command-line front end for generation, ingestion, experiments
// and reports.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "driftids/errors.hpp"
#include "driftids/harness/harness.hpp"
#include "driftids/harness/validate.hpp"
#include "driftids/textio.hpp"

using namespace driftids;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool config_required, bool out_required) {
    cmd->add_option("--seed", c.seed, "Master seed (overrides the config)");
    auto* cfg = cmd->add_option("--config", c.config, "JSON config file");
    if (config_required) cfg->required()->check(CLI::ExistingFile);
    auto* out = cmd->add_option("--out", c.out, "Output directory");
    if (out_required) out->required();
}

json read_json(const std::string& path) {
    try {
        return json::parse(textio::read_file(path));
    } catch (const json::parse_error& e) {
        fail(ErrorKind::config, path + ": " + e.what());
    }
}

std::string escape(std::string s) {
    for (char& ch : s) {
        if (ch == '\n' || ch == '\r') ch = ' ';
    }
    std::string out;
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out;
}

int cmd_gen(const Common& c, int size, int runs, int minutes, bool dump) {
    const std::uint64_t seed = c.seed.value_or(0);
    std::vector<trafficgen::DomainSpec> specs;
    if (!c.config.empty()) {
        const json j = read_json(c.config);
        require(j.contains("specs"), ErrorKind::config, c.config + ": expected a \"specs\" array");
        for (const auto& s : j.at("specs")) specs.push_back(trafficgen::DomainSpec::from_json(s));
    } else {
        specs = trafficgen::desk_suite(seed, size, runs, minutes);
    }
    fs::create_directories(c.out);
    for (const auto& spec : specs) {
        spec.validate();
        const fs::path csv = fs::path(c.out) / (spec.domain_id() + ".csv");
        trafficgen::write_domain(csv, spec);
        textio::write_file(fs::path(c.out) / (spec.domain_id() + ".spec.json"), spec.to_json().dump(2) + "\n");
        std::cout << csv.string() << "\n";
    }
    if (dump) {
        textio::write_file(fs::path(c.out) / "feature_dump.csv", trafficgen::emit_feature_dump(specs));
    }
    return 0;
}

struct IngestArgs {
    std::string input, loader, spec, attack, variant, domain_id;
    int size = 5;
    std::size_t window = 10, stride = 1;
    double split = 0.8;
};

int cmd_ingest(const Common& c, const IngestArgs& a) {
    dataplane::DomainMeta meta;
    if (!a.spec.empty()) {
        meta = trafficgen::DomainSpec::from_json(read_json(a.spec)).meta();
    } else {
        require(!a.attack.empty() && !a.variant.empty(), ErrorKind::config,
                "ingest needs --spec or both --attack and --variant");
        meta.attack = dataplane::parse_attack(a.attack);
        meta.variant = dataplane::parse_variant(a.variant);
        meta.network_size = a.size;
        meta.domain_id = a.attack + "-" + a.variant + "-" + std::to_string(a.size);
    }
    if (!a.domain_id.empty()) meta.domain_id = a.domain_id;
    const auto loader = a.loader.empty() ? dataplane::LoaderConfig{} : dataplane::LoaderConfig::load(a.loader);
    const auto records = dataplane::parse_sink_log(a.input, loader);
    dataplane::AssembleOptions opt;
    opt.seed = c.seed.value_or(0);
    opt.window = a.window;
    opt.stride = a.stride;
    opt.split_ratio = a.split;
    const auto ds = dataplane::assemble_domain(records, meta, opt);
    dataplane::save_domain(c.out, records, ds, opt);
    std::cout << json{{"domain", meta.domain_id}, {"train_windows", ds.train.size()},
                      {"test_windows", ds.test.size()}, {"out", c.out}}
                     .dump()
              << "\n";
    return 0;
}

harness::ExperimentConfig experiment_config(const Common& c) {
    auto cfg = harness::load_experiment_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

int cmd_score(const Common& c) {
    const auto cfg = experiment_config(c);
    const auto domains = harness::load_domains(cfg);
    const auto g = harness::generalizability_scores(domains, cfg.model, cfg.train, cfg.metric, cfg.seed);
    json j = json::object();
    for (std::size_t d = 0; d < domains.size(); ++d) j[domains[d].meta.domain_id] = g[d];
    if (!c.out.empty()) {
        fs::create_directories(c.out);
        textio::write_file(fs::path(c.out) / "generalizability.json", j.dump(2) + "\n");
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_run(const Common& c) {
    const auto cfg = experiment_config(c);
    const auto domains = harness::load_domains(cfg);
    std::vector<double> scores;
    if (cfg.scenario != "random") {
        scores = harness::generalizability_scores(domains, cfg.model, cfg.train, cfg.metric, cfg.seed);
    }
    const auto dir = harness::record_dir(c.out, cfg.strategy, cfg.scenario, cfg.seed);
    const auto rec = harness::run_experiment(cfg, domains, scores, nullptr, dir);
    harness::write_record(dir, rec);
    json summary = {{"record", dir.string()},
                    {"stability", rec.metrics.at("stability")},
                    {"plasticity", rec.metrics.at("plasticity")},
                    {"average_performance", rec.metrics.at("average_performance")}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_suite(const Common& c) {
    auto suite = harness::load_suite_config(c.config);
    if (c.seed) suite.seeds = {*c.seed};
    const auto report = harness::run_suite(suite, c.out, [](const harness::SuiteProgress& p) {
        std::cerr << "[" << p.done << "/" << p.total << "] " << p.label << "\n";
    });
    std::cout << report.at("table2").dump(2) << "\n";
    return 0;
}

int cmd_report(const Common& c) {
    const auto report = harness::render_report(c.out);
    std::cout << "table1: " << (fs::path(c.out) / "report" / "table1.csv").string() << "\n"
              << "table2: " << (fs::path(c.out) / "report" / "table2.csv").string() << "\n"
              << "records: " << report.at("records").size() << "\n";
    return 0;
}

int cmd_validate(const Common& c) {
    const auto r = harness::run_validation(c.seed.value_or(0));
    std::printf("max gradient error (model): %.3e over %zu coordinates\n", r.model_gradient_error,
                r.model_coordinates);
    std::printf("max gradient error (ewc, si, lwf): %.3e %.3e %.3e\n", r.ewc_gradient_error,
                r.si_gradient_error, r.lwf_gradient_error);
    std::printf("metric oracle max deviation: %.3e; auc equals pairwise oracle: %s\n", r.metric_oracle_error,
                r.auc_matches_pairwise ? "yes" : "no");
    std::printf("validate %s in %.1f s\n", r.passed() ? "passed" : "FAILED", r.seconds);
    if (!c.out.empty()) {
        fs::create_directories(c.out);
        textio::write_file(fs::path(c.out) / "validation.json", r.to_json().dump(2) + "\n");
    }
    return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continual-learning IDS benchmark for RPL IoT traffic"};
    app.require_subcommand(1);
    Common c;

    int size = 5, runs = 6, minutes = 120;
    bool dump = false;
    auto* gen = app.add_subcommand("gen", "Generate synthetic sink-log domains");
    add_common(gen, c, false, true);
    gen->add_option("--size", size, "Network size for the desk suite");
    gen->add_option("--runs", runs, "Runs per domain");
    gen->add_option("--minutes", minutes, "Minutes per run");
    gen->add_flag("--feature-dump", dump, "Also write raw per-minute features");

    IngestArgs ia;
    auto* ingest = app.add_subcommand("ingest", "Turn a sink log into a cached domain dataset");
    add_common(ingest, c, false, true);
    ingest->add_option("--input", ia.input, "Sink-log CSV")->required()->check(CLI::ExistingFile);
    ingest->add_option("--loader", ia.loader, "Column mapping JSON")->check(CLI::ExistingFile);
    ingest->add_option("--spec", ia.spec, "Domain spec JSON written by gen")->check(CLI::ExistingFile);
    ingest->add_option("--attack", ia.attack, "BH, DF, WP or LR");
    ingest->add_option("--variant", ia.variant, "base, onoff or gradual");
    ingest->add_option("--size", ia.size, "Network size");
    ingest->add_option("--domain-id", ia.domain_id, "Override the domain id");
    ingest->add_option("--window", ia.window, "Window length in minutes");
    ingest->add_option("--stride", ia.stride, "Window stride");
    ingest->add_option("--split", ia.split, "Train fraction of runs");

    auto* score = app.add_subcommand("score", "Generalizability score per domain");
    add_common(score, c, true, false);
    auto* run = app.add_subcommand("run", "Run one experiment");
    add_common(run, c, true, true);
    auto* suite = app.add_subcommand("suite", "Run the method x scenario x seed grid");
    add_common(suite, c, true, true);
    auto* report = app.add_subcommand("report", "Re-render report tables from records");
    add_common(report, c, false, true);
    auto* validate = app.add_subcommand("validate", "Gradient and metric self-checks");
    add_common(validate, c, false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: kind=usage message=\"" << escape(e.what()) << "\"\n";
        std::cerr << app.help();
        return 2;
    }

    try {
        if (*gen) return cmd_gen(c, size, runs, minutes, dump);
        if (*ingest) return cmd_ingest(c, ia);
        if (*score) return cmd_score(c);
        if (*run) return cmd_run(c);
        if (*suite) return cmd_suite(c);
        if (*report) return cmd_report(c);
        if (*validate) return cmd_validate(c);
    } catch (const Error& e) {
        std::cerr << "error: kind=" << to_string(e.kind()) << " message=\"" << escape(e.what()) << "\"\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: kind=io message=\"" << escape(e.what()) << "\"\n";
        return 1;
    }
    return 2;
}
