#include "driftids/trafficgen/trafficgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "driftids/dataplane/dataplane.hpp"
#include "driftids/errors.hpp"
#include "driftids/rng.hpp"

namespace driftids::trafficgen {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTopologyStream = 0x746f706f;
constexpr std::uint64_t kBaselineStream = 0x62617365;
constexpr std::uint64_t kAttackStream = 0x61747461;

constexpr double kRankUnit = 256.0;  // MinHopRankIncrease

std::int64_t poisson(Rng& rng, double mean) {
    if (mean <= 0.0) {
        return 0;
    }
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(rng.engine());
}

std::int64_t thin(Rng& rng, std::int64_t count, double keep) {
    if (count <= 0 || keep >= 1.0) {
        return count;
    }
    std::binomial_distribution<std::int64_t> dist(count, std::max(keep, 0.0));
    return dist(rng.engine());
}

bool is_attacker(const NodeBehaviorModel& model, int node) {
    return std::find(model.attackers.begin(), model.attackers.end(), node) != model.attackers.end();
}

// Baseline per-node draws for one minute, always consuming the same number
// of values from `rng` regardless of the attack.
NodeMinuteRecord baseline_record(const NodeBehavior& b, Rng& rng, std::int64_t run_id, int minute,
                                 int node) {
    NodeMinuteRecord r;
    r.run_id = run_id;
    r.minute = minute;
    r.node_id = node + 1;
    r.rank = b.rank + b.rank_jitter * rng.normal();
    r.dis_sent = poisson(rng, b.dis_rate);
    r.dio_sent = poisson(rng, b.dio_rate);
    r.dao_sent = poisson(rng, b.dao_rate);
    r.dis_recv = poisson(rng, b.dis_recv_rate);
    r.dio_recv = poisson(rng, b.dio_recv_rate);
    r.rpl_total_sent = poisson(rng, b.other_rate);  // completed once the counters are final
    return r;
}

void apply_attack(const DomainSpec& spec, const NodeBehaviorModel& model, int node, double lambda,
                  NodeMinuteRecord& r, Rng& rng) {
    const EffectParams& e = spec.effects;
    const NodeBehavior& b = model.nodes[static_cast<std::size_t>(node)];
    const bool attacker = is_attacker(model, node);
    const NodeBehavior& lead = model.nodes[static_cast<std::size_t>(model.attackers.front())];
    switch (spec.attack) {
        case Attack::BH:
            // Sinkhole: advertises a far lower rank, neighbours hear fewer DIOs
            // and stop forwarding control traffic through the usual parents.
            if (attacker) {
                r.rank *= 1.0 - (1.0 - e.bh_rank_fraction) * lambda;
            } else {
                // Deeper nodes re-parent onto the advertised low rank.
                const double lure = e.bh_rank_fraction * lead.rank + kRankUnit;
                if (r.rank > lure) {
                    r.rank -= 0.5 * lambda * (r.rank - lure);
                }
                r.dio_recv = thin(rng, r.dio_recv, 1.0 - 0.5 * lambda);
                r.rpl_total_sent = thin(rng, r.rpl_total_sent, 1.0 - 0.6 * lambda);
                r.dao_sent = thin(rng, r.dao_sent, 1.0 - 0.4 * lambda);
            }
            break;
        case Attack::DF:
            if (attacker) {
                r.dis_sent += poisson(rng, b.dis_rate * e.df_inflation * lambda);
            } else {
                r.dis_recv += poisson(rng, lead.dis_rate * e.df_inflation * lambda);
                r.dio_sent += poisson(rng, b.dio_rate * lambda);
            }
            break;
        case Attack::WP:
            // Rank values pushed upward with wider spread across neighbours.
            if (!attacker) {
                const double extra_sd = std::sqrt(e.wp_variance_factor - 1.0) * 0.15 * b.rank;
                r.rank += lambda * (0.5 * b.rank + extra_sd * std::abs(rng.normal()));
                r.dio_recv += poisson(rng, 0.3 * b.dio_recv_rate * lambda);
            }
            break;
        case Attack::LR:
            r.dio_sent += poisson(rng, b.dio_rate * (e.lr_burst_factor - 1.0) * lambda);
            if (attacker) {
                r.dis_sent += poisson(rng, b.dis_rate * (e.lr_burst_factor - 1.0) * lambda);
            } else {
                r.dio_recv += poisson(rng, b.dio_recv_rate * 0.5 * lambda);
            }
            if (rng.uniform() < 0.3 * lambda) {
                r.rank = 1.5 * r.rank + kRankUnit;  // local repair resets the node's rank
            }
            break;
    }
}

std::vector<NodeMinuteRecord> generate(const DomainSpec& spec, std::int64_t run_id, bool with_attack) {
    spec.validate();
    const NodeBehaviorModel model = behavior_model(spec, run_id);
    const auto run = static_cast<std::uint64_t>(run_id);
    Rng base_rng(derive_seed({spec.seed, run, kBaselineStream}));
    Rng attack_rng(derive_seed({spec.seed, run, kAttackStream}));
    const std::vector<double> lambda = intensity_profile(spec);

    std::vector<NodeMinuteRecord> out;
    out.reserve(static_cast<std::size_t>(spec.minutes_per_run * spec.network_size));
    for (int m = 1; m <= spec.minutes_per_run; ++m) {
        const double l = with_attack ? lambda[static_cast<std::size_t>(m - 1)] : 0.0;
        for (int n = 0; n < spec.network_size; ++n) {
            NodeMinuteRecord r = baseline_record(model.nodes[static_cast<std::size_t>(n)], base_rng, run_id, m, n);
            if (l > 0.0) {
                apply_attack(spec, model, n, l, r, attack_rng);
            }
            r.rank = std::max(r.rank, 1.0);
            r.rpl_total_sent += r.dis_sent + r.dio_sent + r.dao_sent;
            r.attack_active = l > 0.0;
            out.push_back(r);
        }
    }
    return out;
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void DomainSpec::validate() const {
    require(network_size >= 1, ErrorKind::config, "domain spec: network_size must be >= 1");
    require(runs >= 2, ErrorKind::config, "domain spec: runs must be >= 2");
    require(minutes_per_run >= 1, ErrorKind::config, "domain spec: minutes_per_run must be >= 1");
    require(attack_start_minute >= 1 && attack_start_minute < minutes_per_run, ErrorKind::config,
            "domain spec: attack_start_minute must lie in [1, minutes_per_run)");
    require(onoff_period >= 1, ErrorKind::config, "domain spec: onoff_period must be >= 1");
    require(gradual_ramp_minutes >= 1, ErrorKind::config, "domain spec: gradual_ramp_minutes must be >= 1");
    require(effects.df_inflation >= 0.0 && effects.lr_burst_factor >= 1.0 &&
                effects.wp_variance_factor >= 1.0 && effects.bh_rank_fraction > 0.0 &&
                effects.bh_rank_fraction <= 1.0,
            ErrorKind::config, "domain spec: effect parameters out of range");
}

std::string DomainSpec::domain_id() const {
    return dataplane::to_string(attack) + "-" + dataplane::to_string(variant) + "-" +
           std::to_string(network_size);
}

dataplane::DomainMeta DomainSpec::meta() const {
    return {domain_id(), attack, variant, network_size, seed};
}

json DomainSpec::to_json() const {
    return {{"attack", dataplane::to_string(attack)},
            {"variant", dataplane::to_string(variant)},
            {"network_size", network_size},
            {"runs", runs},
            {"minutes_per_run", minutes_per_run},
            {"attack_start_minute", attack_start_minute},
            {"onoff_period", onoff_period},
            {"gradual_ramp_minutes", gradual_ramp_minutes},
            {"seed", seed},
            {"effects",
             {{"df_inflation", effects.df_inflation},
              {"bh_rank_fraction", effects.bh_rank_fraction},
              {"wp_variance_factor", effects.wp_variance_factor},
              {"lr_burst_factor", effects.lr_burst_factor}}}};
}

DomainSpec DomainSpec::from_json(const json& j) {
    DomainSpec s;
    try {
        s.attack = dataplane::parse_attack(j.at("attack").get<std::string>());
        s.variant = dataplane::parse_variant(j.value("variant", std::string("base")));
        s.network_size = j.value("network_size", s.network_size);
        s.runs = j.value("runs", s.runs);
        s.minutes_per_run = j.value("minutes_per_run", s.minutes_per_run);
        s.attack_start_minute = j.value("attack_start_minute", s.attack_start_minute);
        s.onoff_period = j.value("onoff_period", s.onoff_period);
        s.gradual_ramp_minutes = j.value("gradual_ramp_minutes", s.gradual_ramp_minutes);
        s.seed = j.value("seed", s.seed);
        if (j.contains("effects")) {
            const json& e = j.at("effects");
            s.effects.df_inflation = e.value("df_inflation", s.effects.df_inflation);
            s.effects.bh_rank_fraction = e.value("bh_rank_fraction", s.effects.bh_rank_fraction);
            s.effects.wp_variance_factor = e.value("wp_variance_factor", s.effects.wp_variance_factor);
            s.effects.lr_burst_factor = e.value("lr_burst_factor", s.effects.lr_burst_factor);
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::config, std::string("domain spec: ") + e.what());
    }
    s.validate();
    return s;
}

double intensity_at(const DomainSpec& spec, int minute) {
    if (minute < spec.attack_start_minute) {
        return 0.0;
    }
    const int since = minute - spec.attack_start_minute;
    switch (spec.variant) {
        case Variant::base:
            return 1.0;
        case Variant::onoff:
            return (since / spec.onoff_period) % 2 == 0 ? 1.0 : 0.0;
        case Variant::gradual:
            return std::min(1.0, static_cast<double>(since) / spec.gradual_ramp_minutes);
    }
    return 0.0;
}

std::vector<double> intensity_profile(const DomainSpec& spec) {
    std::vector<double> out(static_cast<std::size_t>(spec.minutes_per_run));
    for (int m = 1; m <= spec.minutes_per_run; ++m) {
        out[static_cast<std::size_t>(m - 1)] = intensity_at(spec, m);
    }
    return out;
}

NodeBehaviorModel behavior_model(const DomainSpec& spec, std::int64_t run_id) {
    Rng rng(derive_seed({spec.seed, static_cast<std::uint64_t>(run_id), kTopologyStream}));
    NodeBehaviorModel model;
    const auto n = static_cast<std::size_t>(spec.network_size);
    for (std::size_t i = 0; i < n; ++i) {
        NodeBehavior b;
        const double depth = 1.0 + static_cast<double>(rng.below(3));
        b.rank = kRankUnit * depth;
        b.rank_jitter = 8.0;
        b.dis_rate = 0.5 * rng.uniform(0.7, 1.3);
        b.dio_rate = 3.0 * rng.uniform(0.7, 1.3);
        b.dao_rate = 1.5 * rng.uniform(0.7, 1.3);
        b.dis_recv_rate = 0.6 * rng.uniform(0.7, 1.3);
        b.dio_recv_rate = 6.0 * rng.uniform(0.7, 1.3);
        b.other_rate = 1.0 * rng.uniform(0.7, 1.3);
        model.nodes.push_back(b);
    }
    std::vector<int> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i);
    rng.shuffle(ids);
    const std::size_t k = std::max<std::size_t>(1, n / 10);
    model.attackers.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(model.attackers.begin(), model.attackers.end());
    return model;
}

std::vector<NodeMinuteRecord> generate_run(const DomainSpec& spec, std::int64_t run_id) {
    return generate(spec, run_id, true);
}

std::vector<NodeMinuteRecord> generate_baseline_run(const DomainSpec& spec, std::int64_t run_id) {
    return generate(spec, run_id, false);
}

std::vector<NodeMinuteRecord> generate_domain(const DomainSpec& spec) {
    spec.validate();
    std::vector<NodeMinuteRecord> out;
    for (int r = 0; r < spec.runs; ++r) {
        auto run = generate_run(spec, r);
        out.insert(out.end(), run.begin(), run.end());
    }
    return out;
}

void write_domain(const std::filesystem::path& csv_path, const DomainSpec& spec) {
    dataplane::write_sink_log(csv_path, generate_domain(spec));
}

std::vector<DomainSpec> desk_suite(std::uint64_t seed, int network_size, int runs, int minutes_per_run) {
    std::vector<DomainSpec> out;
    for (Attack a : {Attack::BH, Attack::DF, Attack::WP, Attack::LR}) {
        for (Variant v : {Variant::base, Variant::onoff, Variant::gradual}) {
            DomainSpec s;
            s.attack = a;
            s.variant = v;
            s.network_size = network_size;
            s.runs = runs;
            s.minutes_per_run = minutes_per_run;
            s.seed = derive_seed({seed, static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(v),
                                  static_cast<std::uint64_t>(network_size)});
            out.push_back(s);
        }
    }
    return out;
}

std::string format_feature_dump(const std::vector<DumpRow>& rows) {
    std::string out = "domain,run_id,minute,label";
    for (std::size_t k = 1; k <= dataplane::kFeatureDim; ++k) {
        char buf[8];
        std::snprintf(buf, sizeof buf, ",f%02zu", k);
        out += buf;
    }
    out += '\n';
    for (const auto& r : rows) {
        out += r.domain + ',' + std::to_string(r.features.run_id) + ',' +
               std::to_string(r.features.minute) + ',' + std::to_string(r.features.label);
        for (double v : r.features.values) {
            out += ',' + format_full(v);
        }
        out += '\n';
    }
    return out;
}

std::string emit_feature_dump(const std::vector<DomainSpec>& domains) {
    std::vector<DumpRow> rows;
    for (const auto& spec : domains) {
        for (const auto& m : dataplane::minute_features(generate_domain(spec))) {
            rows.push_back({spec.domain_id(), m});
        }
    }
    return format_feature_dump(rows);
}

std::vector<DumpRow> parse_feature_dump(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::schema, "feature dump: missing header");
    std::vector<DumpRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        require(f.size() == 4 + dataplane::kFeatureDim, ErrorKind::data,
                "feature dump line " + std::to_string(line_no) + ": wrong field count");
        DumpRow r;
        r.domain = f[0];
        try {
            r.features.run_id = std::stoll(f[1]);
            r.features.minute = std::stoll(f[2]);
            r.features.label = std::stoi(f[3]);
            for (std::size_t k = 0; k < dataplane::kFeatureDim; ++k) {
                r.features.values[k] = std::stod(f[4 + k]);
            }
        } catch (const std::exception&) {
            fail(ErrorKind::data, "feature dump line " + std::to_string(line_no) + ": malformed number");
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace driftids::trafficgen
