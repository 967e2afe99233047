#include "driftids/dataplane/dataplane.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "driftids/errors.hpp"
#include "driftids/rng.hpp"
#include "driftids/textio.hpp"

namespace driftids::dataplane {

using nlohmann::json;
using textio::format_double;
using textio::parse_double;
using textio::read_file;
using textio::split;
using textio::trim;
using textio::write_file;

namespace {

constexpr std::array<const char*, 11> kColumns = {
    "run_id",   "minute",   "node_id",  "rank",     "dis_sent",       "dio_sent",
    "dao_sent", "dis_recv", "dio_recv", "rpl_total_sent", "attack_active"};

std::string where(const std::string& origin, std::size_t line, const char* column) {
    return origin + ":" + std::to_string(line) + " column " + column;
}

std::int64_t parse_int(std::string_view s, const std::string& loc) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        // Accept integral values written as floats ("3.0").
        double d = 0.0;
        auto [p2, e2] = std::from_chars(s.data(), s.data() + s.size(), d);
        if (e2 == std::errc() && p2 == s.data() + s.size() && std::isfinite(d) && d == std::floor(d)) {
            return static_cast<std::int64_t>(d);
        }
        fail(ErrorKind::data, "malformed integer '" + std::string(s) + "' at " + loc);
    }
    return v;
}

}  // namespace

LoaderConfig LoaderConfig::from_json(const json& j) {
    LoaderConfig c;
    if (j.contains("columns")) {
        for (const auto& [canonical, external] : j.at("columns").items()) {
            const bool known = std::find_if(kColumns.begin(), kColumns.end(), [&](const char* k) {
                                   return canonical == k;
                               }) != kColumns.end();
            require(known, ErrorKind::config, "loader config: unknown canonical column " + canonical);
            c.columns[canonical] = external.get<std::string>();
        }
    }
    if (j.contains("attack_true_values")) {
        c.attack_true_values = j.at("attack_true_values").get<std::vector<std::string>>();
    }
    c.ignore_extra_columns = j.value("ignore_extra_columns", false);
    const std::string delim = j.value("delimiter", std::string(","));
    require(delim.size() == 1, ErrorKind::config, "loader config: delimiter must be one character");
    c.delimiter = delim[0];
    return c;
}

LoaderConfig LoaderConfig::load(const std::filesystem::path& path) {
    try {
        return from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        fail(ErrorKind::config, "loader config " + path.string() + ": " + e.what());
    }
}

std::vector<NodeMinuteRecord> parse_sink_log_text(const std::string& text, const LoaderConfig& loader,
                                                  const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::array<std::size_t, kColumns.size()> col_index{};
    bool have_header = false;
    std::size_t n_fields = 0;
    std::vector<NodeMinuteRecord> records;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = trim(line);
        if (!have_header) {
            if (row.empty()) {
                continue;
            }
            const auto fields = split(row, loader.delimiter);
            n_fields = fields.size();
            std::vector<bool> used(fields.size(), false);
            for (std::size_t c = 0; c < kColumns.size(); ++c) {
                const auto it = loader.columns.find(kColumns[c]);
                const std::string want = it == loader.columns.end() ? kColumns[c] : it->second;
                std::size_t found = fields.size();
                for (std::size_t f = 0; f < fields.size(); ++f) {
                    if (trim(fields[f]) == want) {
                        found = f;
                        break;
                    }
                }
                if (found == fields.size()) {
                    fail(ErrorKind::schema, origin + ": missing column '" + want + "'");
                }
                col_index[c] = found;
                used[found] = true;
            }
            if (!loader.ignore_extra_columns) {
                for (std::size_t f = 0; f < fields.size(); ++f) {
                    if (!used[f]) {
                        fail(ErrorKind::schema, origin + ": unexpected column '" +
                                                    std::string(trim(fields[f])) + "'");
                    }
                }
            }
            have_header = true;
            continue;
        }
        if (row.empty()) {
            continue;
        }
        const auto fields = split(row, loader.delimiter);
        if (fields.size() != n_fields) {
            fail(ErrorKind::data, origin + ":" + std::to_string(line_no) + ": expected " +
                                      std::to_string(n_fields) + " fields, got " +
                                      std::to_string(fields.size()));
        }
        auto field = [&](std::size_t c) { return trim(fields[col_index[c]]); };
        auto count = [&](std::size_t c) {
            const std::int64_t v = parse_int(field(c), where(origin, line_no, kColumns[c]));
            if (v < 0) {
                fail(ErrorKind::value, "negative count " + std::to_string(v) + " at " +
                                           where(origin, line_no, kColumns[c]));
            }
            return v;
        };
        NodeMinuteRecord r;
        r.run_id = parse_int(field(0), where(origin, line_no, kColumns[0]));
        r.minute = parse_int(field(1), where(origin, line_no, kColumns[1]));
        r.node_id = parse_int(field(2), where(origin, line_no, kColumns[2]));
        r.rank = parse_double(field(3), where(origin, line_no, kColumns[3]));
        if (r.rank < 0.0) {
            fail(ErrorKind::value, "negative rank at " + where(origin, line_no, kColumns[3]));
        }
        r.dis_sent = count(4);
        r.dio_sent = count(5);
        r.dao_sent = count(6);
        r.dis_recv = count(7);
        r.dio_recv = count(8);
        r.rpl_total_sent = count(9);
        const std::string flag(field(10));
        const auto& tv = loader.attack_true_values;
        if (std::find(tv.begin(), tv.end(), flag) != tv.end()) {
            r.attack_active = true;
        } else if (loader.columns.empty() && flag != "0" && flag != "false" && flag != "False" &&
                   flag != "FALSE") {
            fail(ErrorKind::value, "unrecognized attack_active '" + flag + "' at " +
                                       where(origin, line_no, kColumns[10]));
        }
        records.push_back(r);
    }
    require(have_header, ErrorKind::schema, origin + ": missing header row");
    std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.run_id, a.minute, a.node_id) < std::tie(b.run_id, b.minute, b.node_id);
    });
    return records;
}

std::vector<NodeMinuteRecord> parse_sink_log(const std::filesystem::path& path,
                                             const LoaderConfig& loader) {
    return parse_sink_log_text(read_file(path), loader, path.string());
}

std::string format_sink_log(std::span<const NodeMinuteRecord> records) {
    std::string out = kSinkLogHeader;
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.run_id) + ',' + std::to_string(r.minute) + ',' +
               std::to_string(r.node_id) + ',' + format_double(r.rank, 17) + ',' +
               std::to_string(r.dis_sent) + ',' + std::to_string(r.dio_sent) + ',' +
               std::to_string(r.dao_sent) + ',' + std::to_string(r.dis_recv) + ',' +
               std::to_string(r.dio_recv) + ',' + std::to_string(r.rpl_total_sent) + ',' +
               (r.attack_active ? "1" : "0") + '\n';
    }
    return out;
}

void write_sink_log(const std::filesystem::path& path, std::span<const NodeMinuteRecord> records) {
    write_file(path, format_sink_log(records));
}

FeatureVector14 aggregate_minute(std::span<const NodeMinuteRecord> records) {
    require(!records.empty(), ErrorKind::data, "aggregate_minute: no records for this minute");
    // Welford running mean / M2.
    std::array<double, kAttributes> mean{};
    std::array<double, kAttributes> m2{};
    double n = 0.0;
    for (const auto& r : records) {
        n += 1.0;
        const auto x = r.attributes();
        for (std::size_t a = 0; a < kAttributes; ++a) {
            const double d = x[a] - mean[a];
            mean[a] += d / n;
            m2[a] += d * (x[a] - mean[a]);
        }
    }
    FeatureVector14 f;
    for (std::size_t a = 0; a < kAttributes; ++a) {
        f.mu[a] = mean[a];
        f.sigma[a] = std::sqrt(std::max(m2[a], 0.0) / n);
    }
    return f;
}

std::vector<MinuteFeatures> minute_features(std::span<const NodeMinuteRecord> records) {
    std::vector<MinuteFeatures> out;
    std::size_t start = 0;
    while (start < records.size()) {
        std::size_t end = start;
        bool attack = false;
        while (end < records.size() && records[end].run_id == records[start].run_id &&
               records[end].minute == records[start].minute) {
            attack = attack || records[end].attack_active;
            ++end;
        }
        if (end < records.size()) {
            const auto& a = records[start];
            const auto& b = records[end];
            require(std::tie(a.run_id, a.minute) < std::tie(b.run_id, b.minute), ErrorKind::contract,
                    "minute_features: records are not sorted by (run_id, minute)");
        }
        MinuteFeatures m;
        m.run_id = records[start].run_id;
        m.minute = records[start].minute;
        m.values = aggregate_minute(records.subspan(start, end - start)).flat();
        m.label = attack ? 1 : 0;
        out.push_back(m);
        start = end;
    }
    return out;
}

NormStats minmax_fit(std::span<const std::array<double, kFeatureDim>> vectors, std::string fitted_on) {
    require(!vectors.empty(), ErrorKind::data, "minmax_fit: no vectors");
    NormStats s;
    s.min = vectors.front();
    s.max = vectors.front();
    for (const auto& v : vectors) {
        for (std::size_t k = 0; k < kFeatureDim; ++k) {
            s.min[k] = std::min(s.min[k], v[k]);
            s.max[k] = std::max(s.max[k], v[k]);
        }
    }
    s.fitted_on = std::move(fitted_on);
    return s;
}

std::array<double, kFeatureDim> minmax_apply(const std::array<double, kFeatureDim>& v,
                                             const NormStats& stats) {
    std::array<double, kFeatureDim> out{};
    for (std::size_t k = 0; k < kFeatureDim; ++k) {
        const double range = stats.max[k] - stats.min[k];
        out[k] = range > 0.0 ? std::clamp((v[k] - stats.min[k]) / range, 0.0, 1.0) : 0.0;
    }
    return out;
}

std::vector<FeatureWindow> windowize(std::span<const MinuteFeatures> minutes, std::size_t window,
                                     std::size_t stride) {
    require(window >= 1 && stride >= 1, ErrorKind::parameter, "windowize: window and stride must be >= 1");
    std::vector<FeatureWindow> out;
    std::size_t start = 0;
    while (start < minutes.size()) {
        std::size_t end = start;
        while (end < minutes.size() && minutes[end].run_id == minutes[start].run_id) {
            ++end;
        }
        const std::size_t len = end - start;
        for (std::size_t first = 0; first + window <= len; first += stride) {
            FeatureWindow w;
            w.features = numgrad::Matrix(window, kFeatureDim);
            for (std::size_t t = 0; t < window; ++t) {
                const auto& m = minutes[start + first + t];
                std::copy(m.values.begin(), m.values.end(), w.features.row(t).begin());
            }
            const auto& last = minutes[start + first + window - 1];
            w.label = last.label;
            w.source = {last.run_id, last.minute};
            out.push_back(std::move(w));
        }
        start = end;
    }
    return out;
}

namespace {

void require_both_classes(const std::vector<FeatureWindow>& windows, const std::string& what) {
    require(!windows.empty(), ErrorKind::data, what + " split has no windows");
    bool pos = false;
    bool neg = false;
    for (const auto& w : windows) {
        pos = pos || w.label == 1;
        neg = neg || w.label == 0;
    }
    require(pos && neg, ErrorKind::data, what + " split contains a single class");
}

}  // namespace

DomainDataset assemble_domain(std::span<const NodeMinuteRecord> records, const DomainMeta& meta,
                              const AssembleOptions& options) {
    require(options.split_ratio > 0.0 && options.split_ratio < 1.0, ErrorKind::parameter,
            "assemble_domain: split_ratio must be in (0, 1)");
    std::vector<NodeMinuteRecord> sorted(records.begin(), records.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return std::tie(a.run_id, a.minute, a.node_id) < std::tie(b.run_id, b.minute, b.node_id);
    });
    std::set<std::int64_t> run_set;
    for (const auto& r : sorted) {
        run_set.insert(r.run_id);
    }
    require(run_set.size() >= 2, ErrorKind::data,
            "domain " + meta.domain_id + ": need at least 2 runs, got " + std::to_string(run_set.size()));

    std::vector<std::int64_t> runs(run_set.begin(), run_set.end());
    Rng rng(derive_seed({options.seed, 0x73706c6974ULL}));
    rng.shuffle(runs);
    const auto n = static_cast<double>(runs.size());
    const auto n_train = static_cast<std::size_t>(
        std::clamp(std::llround(options.split_ratio * n), 1LL, static_cast<long long>(runs.size()) - 1));

    DomainDataset ds;
    ds.meta = meta;
    ds.train_runs.assign(runs.begin(), runs.begin() + static_cast<std::ptrdiff_t>(n_train));
    ds.test_runs.assign(runs.begin() + static_cast<std::ptrdiff_t>(n_train), runs.end());
    std::sort(ds.train_runs.begin(), ds.train_runs.end());
    std::sort(ds.test_runs.begin(), ds.test_runs.end());
    const std::set<std::int64_t> train_set(ds.train_runs.begin(), ds.train_runs.end());

    std::vector<MinuteFeatures> minutes = minute_features(sorted);
    std::vector<std::array<double, kFeatureDim>> train_vectors;
    for (const auto& m : minutes) {
        if (train_set.count(m.run_id) != 0) {
            train_vectors.push_back(m.values);
        }
    }
    ds.norm = minmax_fit(train_vectors, meta.domain_id + ":train");
    std::vector<MinuteFeatures> train_minutes;
    std::vector<MinuteFeatures> test_minutes;
    for (auto& m : minutes) {
        m.values = minmax_apply(m.values, ds.norm);
        (train_set.count(m.run_id) != 0 ? train_minutes : test_minutes).push_back(m);
    }
    ds.train = windowize(train_minutes, options.window, options.stride);
    ds.test = windowize(test_minutes, options.window, options.stride);
    require_both_classes(ds.train, "domain " + meta.domain_id + ": train");
    require_both_classes(ds.test, "domain " + meta.domain_id + ": test");
    return ds;
}

json meta_to_json(const DomainMeta& meta) {
    return {{"domain_id", meta.domain_id},
            {"attack", to_string(meta.attack)},
            {"variant", to_string(meta.variant)},
            {"network_size", meta.network_size},
            {"seed", meta.seed}};
}

DomainMeta meta_from_json(const json& j) {
    DomainMeta m;
    m.domain_id = j.at("domain_id").get<std::string>();
    m.attack = parse_attack(j.at("attack").get<std::string>());
    m.variant = parse_variant(j.at("variant").get<std::string>());
    m.network_size = j.value("network_size", 5);
    m.seed = j.value("seed", std::uint64_t{0});
    return m;
}

std::string feature_csv_header() {
    std::string h = "run_id,end_minute,label";
    for (std::size_t k = 1; k <= kFeatureDim; ++k) {
        char buf[8];
        std::snprintf(buf, sizeof buf, ",f%02zu", k);
        h += buf;
    }
    return h;
}

void save_domain(const std::filesystem::path& dir, std::span<const NodeMinuteRecord> records,
                 const DomainDataset& dataset, const AssembleOptions& options) {
    std::filesystem::create_directories(dir);
    std::vector<NodeMinuteRecord> sorted(records.begin(), records.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return std::tie(a.run_id, a.minute, a.node_id) < std::tie(b.run_id, b.minute, b.node_id);
    });
    std::string csv = feature_csv_header() + '\n';
    for (const auto& m : minute_features(sorted)) {
        const auto v = minmax_apply(m.values, dataset.norm);
        csv += std::to_string(m.run_id) + ',' + std::to_string(m.minute) + ',' + std::to_string(m.label);
        for (double x : v) {
            csv += ',' + format_double(x, 9);
        }
        csv += '\n';
    }
    write_file(dir / "features.csv", csv);

    json side = {{"meta", meta_to_json(dataset.meta)},
                 {"norm",
                  {{"min", dataset.norm.min}, {"max", dataset.norm.max}, {"fitted_on", dataset.norm.fitted_on}}},
                 {"train_runs", dataset.train_runs},
                 {"test_runs", dataset.test_runs},
                 {"window", options.window},
                 {"stride", options.stride},
                 {"split_ratio", options.split_ratio},
                 {"split_seed", options.seed}};
    write_file(dir / "domain.json", side.dump(2) + '\n');
}

DomainDataset load_domain(const std::filesystem::path& dir) {
    json side;
    try {
        side = json::parse(read_file(dir / "domain.json"));
    } catch (const json::exception& e) {
        fail(ErrorKind::schema, (dir / "domain.json").string() + ": " + e.what());
    }
    DomainDataset ds;
    ds.meta = meta_from_json(side.at("meta"));
    ds.norm.min = side.at("norm").at("min").get<std::array<double, kFeatureDim>>();
    ds.norm.max = side.at("norm").at("max").get<std::array<double, kFeatureDim>>();
    ds.norm.fitted_on = side.at("norm").value("fitted_on", std::string());
    ds.train_runs = side.at("train_runs").get<std::vector<std::int64_t>>();
    ds.test_runs = side.at("test_runs").get<std::vector<std::int64_t>>();
    const auto window = side.at("window").get<std::size_t>();
    const auto stride = side.at("stride").get<std::size_t>();
    const std::set<std::int64_t> train_set(ds.train_runs.begin(), ds.train_runs.end());

    const std::string origin = (dir / "features.csv").string();
    std::istringstream in(read_file(dir / "features.csv"));
    std::string line;
    std::getline(in, line);
    require(trim(line) == feature_csv_header(), ErrorKind::schema, origin + ": unexpected header");
    std::vector<MinuteFeatures> train_minutes;
    std::vector<MinuteFeatures> test_minutes;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = trim(line);
        if (row.empty()) {
            continue;
        }
        const auto f = split(row, ',');
        require(f.size() == 3 + kFeatureDim, ErrorKind::data,
                origin + ":" + std::to_string(line_no) + ": wrong field count");
        const std::string loc = origin + ":" + std::to_string(line_no);
        MinuteFeatures m;
        m.run_id = parse_int(f[0], loc);
        m.minute = parse_int(f[1], loc);
        m.label = static_cast<int>(parse_int(f[2], loc));
        for (std::size_t k = 0; k < kFeatureDim; ++k) {
            m.values[k] = parse_double(f[3 + k], loc);
        }
        (train_set.count(m.run_id) != 0 ? train_minutes : test_minutes).push_back(m);
    }
    ds.train = windowize(train_minutes, window, stride);
    ds.test = windowize(test_minutes, window, stride);
    require_both_classes(ds.train, "domain " + ds.meta.domain_id + ": train");
    require_both_classes(ds.test, "domain " + ds.meta.domain_id + ": test");
    return ds;
}

}  // namespace driftids::dataplane
