// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--config configs/desk_suite.json] [--work DIR] [--strict] [--only N,M]
//
// Criteria 3-9 share one desk-suite run (plus a second identical run for the
// determinism check). The process exits 0 once every criterion has been
// evaluated; --strict makes any FAIL a nonzero exit.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "driftids/clmetrics/metrics.hpp"
#include "driftids/clstrat/replay_buffer.hpp"
#include "driftids/errors.hpp"
#include "driftids/harness/harness.hpp"
#include "driftids/harness/validate.hpp"
#include "driftids/textio.hpp"

using namespace driftids;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

// Per-record metrics of a finished suite, keyed by (method, scenario, seed).
struct SuiteView {
    std::map<std::tuple<std::string, std::string, std::uint64_t>, json> metrics;
    std::map<std::tuple<std::string, std::string, std::uint64_t>, json> telemetry;
    json report;
    std::vector<std::string> scenarios;
    std::vector<std::uint64_t> seeds;

    // Mean over seeds of a scalar metric.
    double mean(const std::string& method, const std::string& scenario, const std::string& key) const {
        double s = 0.0;
        for (auto seed : seeds) s += metrics.at({method, scenario, seed}).at(key).get<double>();
        return s / static_cast<double>(seeds.size());
    }
};

SuiteView load_view(const fs::path& out, const harness::SuiteConfig& suite, const json& report) {
    SuiteView v;
    v.report = report;
    v.scenarios = suite.scenarios;
    v.seeds = suite.seeds;
    for (const auto& m : suite.methods)
        for (const auto& sc : suite.scenarios)
            for (auto seed : suite.seeds) {
                const auto dir = harness::record_dir(out, m, sc, seed);
                v.metrics[{m, sc, seed}] = json::parse(textio::read_file(dir / "metrics.json"));
                v.telemetry[{m, sc, seed}] = json::parse(textio::read_file(dir / "telemetry.json"));
            }
    return v;
}

Outcome criterion1(const harness::ValidationReport& r) {
    Outcome o;
    o.pass = r.gradients_pass() && r.seconds < 60.0;
    o.detail = "model " + sci(r.model_gradient_error) + " (< 1e-4), ewc " + sci(r.ewc_gradient_error) + ", si " +
               sci(r.si_gradient_error) + ", lwf " + sci(r.lwf_gradient_error) + " (< 1e-8), " +
               fmt(r.seconds, 1) + " s (< 60 s)";
    return o;
}

Outcome criterion2(const harness::ValidationReport& r) {
    Outcome o;
    o.pass = r.metrics_pass();
    o.detail = "max deviation " + sci(r.metric_oracle_error) + " (< 1e-12) over 100 matrices and timing tables; AUC " +
               (r.auc_matches_pairwise ? "equals" : "differs from") + " the pairwise oracle on 100 instances";
    return o;
}

Outcome criterion3(const SuiteView& v) {
    int ok = 0;
    std::string detail;
    for (const auto& sc : v.scenarios) {
        const double s = v.mean("naive", sc, "stability");
        if (s <= -0.15) ++ok;
        detail += sc + " " + fmt(s, 3) + "; ";
    }
    return {ok >= 3, "naive S " + detail + std::to_string(ok) + "/4 scenarios <= -0.15 (need 3)"};
}

Outcome criterion4(const SuiteView& v) {
    bool pass = true;
    std::string detail;
    for (const auto& sc : v.scenarios) {
        const double n = v.mean("naive", sc, "stability");
        const double r = v.mean("replay", sc, "stability") - n;
        const double s = v.mean("si", sc, "stability") - n;
        pass = pass && r >= 0.10 && s >= 0.10;
        detail += sc + " replay " + fmt(r, 3) + " si " + fmt(s, 3) + "; ";
    }
    return {pass, "S gain over naive (need >= +0.10): " + detail};
}

Outcome criterion5(const SuiteView& v) {
    bool pass = true;
    std::string detail;
    for (const auto& sc : v.scenarios) {
        const double r = v.mean("replay", sc, "plasticity");
        const double s = v.mean("si", sc, "plasticity");
        pass = pass && r > s;
        detail += sc + " replay " + fmt(r, 3) + " vs si " + fmt(s, 3) + "; ";
    }
    return {pass, "P: " + detail};
}

Outcome criterion6(const SuiteView& v) {
    // TE per method averaged over scenarios and seeds, from the rendered report.
    std::map<std::string, std::vector<double>> te;
    for (const auto& r : v.report.at("records")) te[r.at("method").get<std::string>()].push_back(r.at("te").get<double>());
    std::map<std::string, double> mean;
    for (const auto& [m, xs] : te) {
        double s = 0.0;
        for (double x : xs) s += x;
        mean[m] = s / static_cast<double>(xs.size());
    }
    std::string slowest;
    for (const auto& [m, x] : mean) {
        if (slowest.empty() || x < mean[slowest]) slowest = m;
    }
    const bool pass = mean["naive"] > mean["replay"] && mean["naive"] > mean["ewc"] && slowest == "ewc";
    std::string detail = "TE";
    for (const auto& [m, x] : mean) detail += " " + m + " " + fmt(x, 3);
    detail += "; minimum: " + slowest + " (need ewc)";
    return {pass, detail};
}

Outcome criterion7(const SuiteView& v) {
    double df = 0.0, bh = 0.0;
    std::size_t n = 0;
    for (const auto& sc : v.scenarios)
        for (auto seed : v.seeds) {
            const auto& pa = v.metrics.at({"replay", sc, seed}).at("per_attack");
            df += pa.at("DF").at("auc").get<double>();
            bh += pa.at("BH").at("auc").get<double>();
            ++n;
        }
    df /= static_cast<double>(n);
    bh /= static_cast<double>(n);
    return {df - bh >= 0.05, "replay final-row AUC DF " + fmt(df, 3) + " vs BH " + fmt(bh, 3) + " (gap " +
                                 fmt(df - bh, 3) + ", need >= 0.05)"};
}

Outcome criterion8(const SuiteView& v, std::size_t budget) {
    // (a) instrumented replay runs
    bool within = true;
    std::size_t peak = 0;
    for (const auto& [key, m] : v.metrics) {
        if (std::get<0>(key) != "replay") continue;
        for (auto x : m.at("memory_per_step")) peak = std::max(peak, x.get<std::size_t>());
        const auto& t = v.telemetry.at(key);
        peak = std::max(peak, t.at("max_size").get<std::size_t>());
        within = within && m.at("constraints").at("max_memory").get<std::size_t>() <= budget;
        for (const auto& viol : m.at("constraints").at("violations")) within = within && viol.at("kind") != "memory";
    }
    within = within && peak <= budget;

    // (b) injected over-budget insertion
    clstrat::ReplayBuffer buf(100, 1);
    std::vector<dataplane::FeatureWindow> ws(150);
    for (auto& w : ws) w.features = numgrad::Matrix(10, dataplane::kFeatureDim);
    buf.insert(ws, 0);
    bool caught = false;
    buf.inject_unchecked(ws[0], 0);
    try {
        buf.check_invariants();
    } catch (const Error& e) {
        caught = e.kind() == ErrorKind::contract;
    }
    const std::vector<std::size_t> mem = {100, 100, 101, 100};
    const auto mem_report = clmetrics::constraint_report(mem, std::vector<double>{}, 100, 0.1);
    caught = caught && mem_report.violations.size() == 1 && mem_report.violations[0].step == 3;

    // (c) synthetic BWT trace, violations constructed at steps 3, 5 and 8
    const std::vector<double> bwt = {-0.05, -0.30, 0.02, -0.11, -0.10, 0.0, -0.45};  // t = 2..8
    const auto r = clmetrics::constraint_report(std::vector<std::size_t>(8, 0), bwt, 1000, 0.1);
    std::vector<std::size_t> steps;
    for (const auto& x : r.violations) steps.push_back(x.step);
    const bool exact = steps == std::vector<std::size_t>{3, 5, 8};

    std::string got;
    for (auto s : steps) got += std::to_string(s) + " ";
    return {within && caught && exact, "replay peak memory " + std::to_string(peak) + " <= B=" +
                                           std::to_string(budget) + (within ? " ok" : " VIOLATED") +
                                           "; injected insertion " + (caught ? "caught" : "missed") +
                                           "; flagged steps " + got + "(expected 3 5 8)"};
}

Outcome criterion9(const fs::path& a, const fs::path& b, const harness::SuiteConfig& suite) {
    std::size_t compared = 0, differ = 0;
    for (const auto& m : suite.methods)
        for (const auto& sc : suite.scenarios)
            for (auto seed : suite.seeds) {
                const auto ra = textio::read_file(harness::record_dir(a, m, sc, seed) / "metrics.json");
                const auto rb = textio::read_file(harness::record_dir(b, m, sc, seed) / "metrics.json");
                ++compared;
                if (ra != rb) ++differ;
            }
    return {differ == 0 && compared > 0,
            std::to_string(compared) + " metrics.json files compared, " + std::to_string(differ) + " differ"};
}

Outcome criterion10(const harness::SuiteConfig& suite) {
    const auto start = std::chrono::steady_clock::now();
    harness::ExperimentConfig cfg = suite.experiment("naive", "random", 0);
    const auto all = trafficgen::desk_suite(0, cfg.domains.network_size, cfg.domains.runs, cfg.domains.minutes);
    cfg.domains.kind = "specs";
    cfg.domains.specs.clear();
    for (const auto& s : all) {
        const auto id = s.domain_id();
        if (id == "DF-base-5" || id == "BH-onoff-5" || id == "LR-gradual-5") cfg.domains.specs.push_back(s);
    }
    const auto domains = harness::load_domains(cfg);
    const auto naive = harness::run_experiment(cfg, domains, {});
    std::string detail;
    bool pass = true;
    for (const auto& m : clstrat::strategy_names()) {
        if (m == "naive") continue;
        auto c = cfg;
        c.strategy = m;
        c.hyperparameters = clstrat::neutral_hyperparameters(m);
        const auto rec = harness::run_experiment(c, domains, {});
        const bool same = clmetrics::format_perf_csv(rec.perf) == clmetrics::format_perf_csv(naive.perf) &&
                          rec.perf == naive.perf;
        pass = pass && same;
        detail += m + (same ? " identical; " : " DIFFERS; ");
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    pass = pass && secs < 120.0;
    return {pass, detail + fmt(secs, 1) + " s (< 120 s)"};
}

const char* kTitles[] = {"",
                         "gradient correctness",
                         "metric oracles",
                         "forgetting without CL",
                         "CL mitigates forgetting",
                         "stability-plasticity trade-off",
                         "efficiency ordering",
                         "attack difficulty ordering",
                         "constraint enforcement",
                         "determinism",
                         "neutrality"};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string config = DRIFTIDS_SOURCE_DIR "/configs/desk_suite.json";
    std::string work = "acceptance_work";
    std::string only;
    bool strict = false;
    app.add_option("--config", config, "Desk suite config")->check(CLI::ExistingFile);
    app.add_option("--work", work, "Scratch directory for suite outputs");
    app.add_option("--only", only, "Comma-separated criterion numbers");
    app.add_flag("--strict", strict, "Exit nonzero when any criterion fails");
    CLI11_PARSE(app, argc, argv);

    std::set<int> selected;
    if (only.empty()) {
        for (int k = 1; k <= 10; ++k) selected.insert(k);
    } else {
        std::stringstream ss(only);
        std::string tok;
        while (std::getline(ss, tok, ',')) selected.insert(std::stoi(tok));
    }
    auto want = [&](int k) { return selected.count(k) > 0; };

    std::map<int, Outcome> results;
    std::string log;
    auto report = [&](int k, const Outcome& o) {
        results[k] = o;
        std::ostringstream line;
        line << (o.pass ? "PASS" : "FAIL") << " criterion " << k << " (" << kTitles[k] << "): " << o.detail << "\n";
        std::cout << line.str() << std::flush;
        log += line.str();
    };
    auto guarded = [&](int k, const std::function<Outcome()>& fn) {
        try {
            report(k, fn());
        } catch (const std::exception& e) {
            report(k, {false, std::string("error: ") + e.what()});
        }
    };

    try {
        setenv("DRIFT_IDS_THREADS", "1", 1);
        const auto suite = harness::load_suite_config(config);
        const fs::path root = work;

        if (want(1) || want(2)) {
            const auto v = harness::run_validation(0);
            if (want(1)) guarded(1, [&] { return criterion1(v); });
            if (want(2)) guarded(2, [&] { return criterion2(v); });
        }

        const bool need_suite = want(3) || want(4) || want(5) || want(6) || want(7) || want(8) || want(9);
        if (need_suite) {
            const fs::path first = root / "suite_a";
            fs::remove_all(first);
            const auto t0 = std::chrono::steady_clock::now();
            const auto rep = harness::run_suite(suite, first);
            std::cerr << "desk suite finished in "
                      << fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 0)
                      << " s\n";
            const auto view = load_view(first, suite, rep);
            if (want(3)) guarded(3, [&] { return criterion3(view); });
            if (want(4)) guarded(4, [&] { return criterion4(view); });
            if (want(5)) guarded(5, [&] { return criterion5(view); });
            if (want(6)) guarded(6, [&] { return criterion6(view); });
            if (want(7)) guarded(7, [&] { return criterion7(view); });
            if (want(8)) guarded(8, [&] { return criterion8(view, suite.base.budget); });
            if (want(9)) {
                guarded(9, [&] {
                    const fs::path second = root / "suite_b";
                    fs::remove_all(second);
                    harness::run_suite(suite, second);
                    return criterion9(first, second, suite);
                });
            }
        }
        if (want(10)) guarded(10, [&] { return criterion10(suite); });
    } catch (const std::exception& e) {
        std::cout << "FAIL acceptance setup: " << e.what() << std::endl;
        return 1;
    }

    std::size_t passed = 0;
    for (const auto& [k, o] : results) passed += o.pass ? 1 : 0;
    const std::string summary =
        "acceptance: " + std::to_string(passed) + "/" + std::to_string(results.size()) + " criteria passed\n";
    std::cout << summary;
    fs::create_directories(work);
    textio::write_file(fs::path(work) / "acceptance_results.txt", log + summary);
    return strict && passed != results.size() ? 1 : 0;
}
