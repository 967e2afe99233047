#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>

#include "driftids/dataplane/dataplane.hpp"
#include "driftids/errors.hpp"
#include "driftids/trafficgen/trafficgen.hpp"

using namespace driftids;
using namespace driftids::trafficgen;

namespace {

DomainSpec spec_for(Attack a, Variant v = Variant::base, std::uint64_t seed = 1) {
    DomainSpec s;
    s.attack = a;
    s.variant = v;
    s.seed = seed;
    return s;
}

// Best balanced accuracy of a one-threshold stump on one feature.
double stump_accuracy(const std::vector<dataplane::MinuteFeatures>& m, std::size_t k) {
    double n1 = 0.0;
    double n0 = 0.0;
    for (const auto& x : m) (x.label ? n1 : n0) += 1.0;
    std::vector<double> thresholds;
    for (const auto& x : m) thresholds.push_back(x.values[k]);
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    double best = 0.0;
    for (double t : thresholds) {
        double tp = 0.0;
        double tn = 0.0;
        for (const auto& x : m) {
            const bool above = x.values[k] > t;
            tp += (x.label == 1 && above) ? 1.0 : 0.0;
            tn += (x.label == 0 && !above) ? 1.0 : 0.0;
        }
        const double ba = 0.5 * (tp / n1 + tn / n0);
        best = std::max({best, ba, 1.0 - ba});
    }
    return best;
}

double effect_size(const std::vector<dataplane::MinuteFeatures>& m, std::size_t k) {
    double s[2] = {0, 0}, q[2] = {0, 0}, n[2] = {0, 0};
    for (const auto& x : m) {
        s[x.label] += x.values[k];
        q[x.label] += x.values[k] * x.values[k];
        n[x.label] += 1.0;
    }
    const double m0 = s[0] / n[0];
    const double m1 = s[1] / n[1];
    const double v0 = q[0] / n[0] - m0 * m0;
    const double v1 = q[1] / n[1] - m1 * m1;
    return std::abs(m1 - m0) / std::sqrt(0.5 * (v0 + v1));
}

std::size_t signature_attribute(Attack a) {
    switch (a) {
        case Attack::DF: return 1;  // dis_sent
        case Attack::LR: return 2;  // dio_sent
        default: return 0;          // rank
    }
}

}  // namespace

TEST_CASE("intensity profile: step, square wave, ramp") {
    auto s = spec_for(Attack::BH);
    s.attack_start_minute = 30;
    CHECK(intensity_at(s, 29) == 0.0);
    CHECK(intensity_at(s, 30) == 1.0);
    CHECK(intensity_at(s, 120) == 1.0);

    s.variant = Variant::onoff;
    s.onoff_period = 10;
    for (int m = 30; m <= 39; ++m) CHECK(intensity_at(s, m) == 1.0);
    for (int m = 40; m <= 49; ++m) CHECK(intensity_at(s, m) == 0.0);
    CHECK(intensity_at(s, 50) == 1.0);

    s.variant = Variant::gradual;
    s.gradual_ramp_minutes = 20;
    CHECK(intensity_at(s, 40) == 0.5);
    CHECK(intensity_at(s, 29) == 0.0);
    CHECK(intensity_at(s, 50) == 1.0);
    CHECK(intensity_at(s, 100) == 1.0);

    for (auto v : {Variant::base, Variant::onoff, Variant::gradual}) {
        s.variant = v;
        const auto p = intensity_profile(s);
        CHECK(p.size() == 120);
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK((p[i] >= 0.0 && p[i] <= 1.0));
            if (static_cast<int>(i) + 1 < s.attack_start_minute) CHECK(p[i] == 0.0);
        }
    }
}

TEST_CASE("generate_run: no-attack equivalence with the baseline generator") {
    for (auto a : {Attack::BH, Attack::DF, Attack::WP, Attack::LR}) {
        auto s = spec_for(a);
        s.attack_start_minute = s.minutes_per_run - 1;
        const auto attacked = generate_run(s, 3);
        const auto base = generate_baseline_run(s, 3);
        REQUIRE(attacked.size() == base.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            if (base[i].minute < s.attack_start_minute) {
                CHECK(attacked[i] == base[i]);
            }
        }
    }
}

TEST_CASE("generate_run: determinism, invariants and record layout") {
    const auto s = spec_for(Attack::LR, Variant::onoff, 5);
    const auto a = generate_run(s, 2);
    CHECK(a == generate_run(s, 2));
    CHECK_FALSE(a == generate_run(s, 3));
    CHECK(a.size() == static_cast<std::size_t>(s.minutes_per_run * s.network_size));
    for (const auto& r : a) {
        CHECK(r.rank > 0.0);
        CHECK(r.dis_sent >= 0);
        CHECK(r.dio_sent >= 0);
        CHECK(r.dao_sent >= 0);
        CHECK(r.dis_recv >= 0);
        CHECK(r.dio_recv >= 0);
        CHECK(r.rpl_total_sent >= r.dis_sent + r.dio_sent + r.dao_sent);
        CHECK(r.attack_active == (intensity_at(s, static_cast<int>(r.minute)) > 0.0));
    }
}

TEST_CASE("behavior model: attacker count and positive rates") {
    for (int size : {5, 10, 15, 20}) {
        auto s = spec_for(Attack::BH);
        s.network_size = size;
        const auto m = behavior_model(s, 0);
        CHECK(m.nodes.size() == static_cast<std::size_t>(size));
        CHECK(m.attackers.size() == static_cast<std::size_t>(std::max(1, size / 10)));
        for (const auto& n : m.nodes) {
            CHECK(n.rank > 0.0);
            CHECK(n.dis_rate > 0.0);
            CHECK(n.dio_recv_rate > 0.0);
        }
    }
}

TEST_CASE("DF at full intensity inflates attacker dis_sent more than 5x") {
    auto s = spec_for(Attack::DF);
    s.runs = 12;
    double attacked = 0.0;
    double baseline = 0.0;
    std::size_t minutes = 0;
    for (int run = 0; run < s.runs; ++run) {
        const auto model = behavior_model(s, run);
        const auto a = generate_run(s, run);
        const auto b = generate_baseline_run(s, run);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const int node = static_cast<int>(a[i].node_id) - 1;
            if (node == model.attackers.front() && a[i].attack_active) {
                attacked += static_cast<double>(a[i].dis_sent);
                baseline += static_cast<double>(b[i].dis_sent);
                ++minutes;
            }
        }
    }
    REQUIRE(minutes >= 1000);
    CHECK(attacked > 5.0 * baseline);
}

TEST_CASE("signature attributes separate attack from normal minutes") {
    for (auto a : {Attack::BH, Attack::DF, Attack::WP, Attack::LR}) {
        auto s = spec_for(a, Variant::base, 7);
        const auto minutes = dataplane::minute_features(generate_domain(s));
        const std::size_t k = signature_attribute(a);
        CAPTURE(dataplane::to_string(a));
        CHECK(effect_size(minutes, k) >= 1.0);
        CHECK(stump_accuracy(minutes, k) >= 0.8);
    }
}

TEST_CASE("generate_domain: counts, seeds, files and timing") {
    auto s = spec_for(Attack::WP);
    s.runs = 20;
    s.minutes_per_run = 120;
    s.network_size = 5;
    const auto recs = generate_domain(s);
    CHECK(recs.size() == 12000);

    auto other = s;
    other.seed = 99;
    const auto recs2 = generate_domain(other);
    CHECK(recs2.size() == recs.size());
    CHECK_FALSE(recs2 == recs);

    const auto path = std::filesystem::temp_directory_path() / "driftids_gen_domain.csv";
    write_domain(path, s);
    CHECK(dataplane::parse_sink_log(path) == recs);
    std::filesystem::remove(path);

    const auto t0 = std::chrono::steady_clock::now();
    std::size_t total = 0;
    for (const auto& spec : desk_suite(0)) total += generate_domain(spec).size();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(total == 12u * 6u * 120u * 5u);
    CHECK(secs < 10.0);
}

TEST_CASE("desk suite: twelve distinct domains") {
    const auto suite = desk_suite(3);
    REQUIRE(suite.size() == 12);
    for (std::size_t i = 0; i < suite.size(); ++i) {
        for (std::size_t j = i + 1; j < suite.size(); ++j) {
            CHECK(suite[i].domain_id() != suite[j].domain_id());
            CHECK(suite[i].seed != suite[j].seed);
        }
    }
}

TEST_CASE("domain spec JSON round trip and validation") {
    auto s = spec_for(Attack::DF, Variant::gradual, 42);
    s.effects.df_inflation = 4.0;
    CHECK(DomainSpec::from_json(s.to_json()) == s);
    auto bad = s.to_json();
    bad["attack_start_minute"] = 500;
    CHECK_THROWS_AS(DomainSpec::from_json(bad), Error);
    bad = s.to_json();
    bad["runs"] = 1;
    CHECK_THROWS_AS(DomainSpec::from_json(bad), Error);
}

TEST_CASE("feature dump: row counts, empty list, lossless re-ingest") {
    CHECK(parse_feature_dump(emit_feature_dump({})).empty());
    CHECK(emit_feature_dump({}).find('\n') == emit_feature_dump({}).size() - 1);

    auto a = spec_for(Attack::BH);
    a.runs = 2;
    a.minutes_per_run = 50;
    a.attack_start_minute = 20;
    auto b = spec_for(Attack::DF);
    b.runs = 2;
    b.minutes_per_run = 50;
    b.attack_start_minute = 20;
    const std::string text = emit_feature_dump({a, b});
    const auto rows = parse_feature_dump(text);
    REQUIRE(rows.size() == 200);
    CHECK(rows.front().domain == "BH-base-5");
    CHECK(rows.back().domain == "DF-base-5");
    CHECK(format_feature_dump(rows) == text);
    const auto direct = dataplane::minute_features(generate_domain(a));
    for (std::size_t i = 0; i < direct.size(); ++i) {
        CHECK(rows[i].features.values == direct[i].values);
    }
}
