#include "driftids/clmetrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftids/errors.hpp"
#include "driftids/textio.hpp"

namespace driftids::clmetrics {

using nlohmann::json;

namespace {

void check_labels(std::span<const int> labels) {
    for (int l : labels) require(l == 0 || l == 1, ErrorKind::value, "labels must be 0 or 1");
}

void require_steps(const PerfMatrix& m, const char* what) {
    require(m.domains() >= 2, ErrorKind::contract, std::string(what) + " needs at least two domains");
}

std::string cell_name(std::size_t i, std::size_t j) {
    return "Perf[" + std::to_string(i) + "][" + std::to_string(j) + "]";
}

const char* kPerfHeader = "after_domain,i,eval_domain,j,f1,auc";
const char* kTimingHeader = "method,domain_index,seconds";

}  // namespace

std::string to_string(MetricKind kind) { return kind == MetricKind::auc ? "auc" : "f1"; }

MetricKind parse_metric_kind(const std::string& text) {
    if (text == "auc") return MetricKind::auc;
    if (text == "f1") return MetricKind::f1;
    fail(ErrorKind::config, "unknown metric '" + text + "' (expected auc or f1)");
}

F1Result f1_score(std::span<const int> predictions, std::span<const int> labels) {
    require(predictions.size() == labels.size(), ErrorKind::contract, "f1_score: length mismatch");
    require(!labels.empty(), ErrorKind::contract, "f1_score: empty input");
    check_labels(predictions);
    check_labels(labels);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (predictions[k] == 1 && labels[k] == 1) ++tp;
        if (predictions[k] == 1 && labels[k] == 0) ++fp;
        if (predictions[k] == 0 && labels[k] == 1) ++fn;
    }
    if (tp + fp == 0 || tp + fn == 0) {
        return {0.0, true};
    }
    // 2PR/(P+R) reduces to 2TP/(2TP+FP+FN).
    const double v = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    return {v, false};
}

double auc_score(std::span<const double> scores, std::span<const int> labels) {
    require(scores.size() == labels.size(), ErrorKind::contract, "auc_score: length mismatch");
    check_labels(labels);
    const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t n_neg = labels.size() - n_pos;
    require(n_pos > 0 && n_neg > 0, ErrorKind::undefined_metric, "auc_score: labels contain a single class");
    for (double s : scores) require(!std::isnan(s), ErrorKind::value, "auc_score: NaN score");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Twice the positive rank sum, kept integral: a tie group spanning
    // 1-based ranks a..b gives every member rank (a+b)/2.
    unsigned long long twice_rank_sum = 0;
    for (std::size_t first = 0; first < order.size();) {
        std::size_t last = first;
        while (last + 1 < order.size() && scores[order[last + 1]] == scores[order[first]]) ++last;
        const unsigned long long twice_rank = (first + 1) + (last + 1);
        for (std::size_t k = first; k <= last; ++k) {
            if (labels[order[k]] == 1) twice_rank_sum += twice_rank;
        }
        first = last + 1;
    }
    const unsigned long long twice_u = twice_rank_sum - static_cast<unsigned long long>(n_pos) * (n_pos + 1);
    return (static_cast<double>(twice_u) / 2.0) / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

PerfMatrix::PerfMatrix(std::size_t domains, std::vector<std::string> domain_ids)
    : t_(domains), ids_(std::move(domain_ids)), cells_((domains + 1) * domains) {
    require(domains >= 1, ErrorKind::contract, "PerfMatrix needs at least one domain");
    if (ids_.empty()) {
        for (std::size_t j = 1; j <= domains; ++j) ids_.push_back("domain" + std::to_string(j));
    }
    require(ids_.size() == domains, ErrorKind::contract, "PerfMatrix: domain id count mismatch");
}

std::size_t PerfMatrix::index(std::size_t i, std::size_t j) const {
    require(i <= t_ && j >= 1 && j <= t_ && j <= i + 1, ErrorKind::contract,
            "PerfMatrix: " + cell_name(i, j) + " outside the admissible pattern");
    return i * t_ + (j - 1);
}

void PerfMatrix::set(std::size_t i, std::size_t j, const PerfCell& cell) {
    const auto k = index(i, j);
    for (double v : {cell.f1, cell.auc}) {
        require(v >= 0.0 && v <= 1.0, ErrorKind::value, "PerfMatrix: " + cell_name(i, j) + " outside [0,1]");
    }
    cells_[k] = cell;
}

bool PerfMatrix::has(std::size_t i, std::size_t j) const {
    if (i > t_ || j < 1 || j > t_ || j > i + 1) return false;
    return cells_[i * t_ + (j - 1)].has_value();
}

const PerfCell& PerfMatrix::cell(std::size_t i, std::size_t j) const {
    const auto& c = cells_[index(i, j)];
    require(c.has_value(), ErrorKind::contract, "PerfMatrix: " + cell_name(i, j) + " missing");
    return *c;
}

bool PerfMatrix::complete() const {
    for (std::size_t i = 0; i <= t_; ++i) {
        for (std::size_t j = 1; j <= std::min(t_, i + 1); ++j) {
            if (!has(i, j)) return false;
        }
    }
    return true;
}

double perf_average(const PerfMatrix& m, MetricKind kind) {
    const std::size_t t = m.domains();
    require(t >= 1, ErrorKind::contract, "perf_average: empty matrix");
    double sum = 0.0;
    for (std::size_t j = 1; j <= t; ++j) {
        require(m.has(t, j), ErrorKind::contract, "perf_average: bottom row incomplete at " + cell_name(t, j));
        sum += m.at(t, j, kind);
    }
    return sum / static_cast<double>(t);
}

double plasticity(const PerfMatrix& m, MetricKind kind) {
    require_steps(m, "plasticity");
    const std::size_t t = m.domains();
    double sum = 0.0;
    for (std::size_t j = 2; j <= t; ++j) {
        require(m.has(j - 1, j), ErrorKind::contract,
                "plasticity: missing pre-exposure evaluation " + cell_name(j - 1, j));
        sum += m.at(j, j, kind) - m.at(j - 1, j, kind);
    }
    return sum / static_cast<double>(t - 1);
}

Stability stability_bwt(const PerfMatrix& m, MetricKind kind) {
    require_steps(m, "stability");
    const std::size_t t_max = m.domains();
    Stability s;
    double total = 0.0;
    for (std::size_t t = 2; t <= t_max; ++t) {
        double sum = 0.0;
        for (std::size_t i = 1; i < t; ++i) sum += m.at(t, i, kind) - m.at(i, i, kind);
        const double bwt = sum / static_cast<double>(t - 1);
        s.per_step.push_back(bwt);
        total += bwt;
    }
    s.mean = total / static_cast<double>(t_max - 1);
    return s;
}

std::map<std::string, double> training_efficiency(const TimingTable& timings) {
    require(!timings.empty(), ErrorKind::contract, "training_efficiency: no methods");
    const std::size_t t = timings.begin()->second.size();
    require(t >= 1, ErrorKind::contract, "training_efficiency: no domains");
    std::vector<double> fastest(t, INFINITY);
    for (const auto& [method, row] : timings) {
        require(row.size() == t, ErrorKind::contract,
                "training_efficiency: method " + method + " timed on a different number of domains");
        for (std::size_t k = 0; k < t; ++k) {
            require(std::isfinite(row[k]) && row[k] > 0.0, ErrorKind::value,
                    "training_efficiency: non-positive time for " + method);
            fastest[k] = std::min(fastest[k], row[k]);
        }
    }
    std::map<std::string, double> te;
    for (const auto& [method, row] : timings) {
        double log_sum = 0.0;
        for (std::size_t k = 0; k < t; ++k) log_sum += std::log(fastest[k] / row[k]);
        te[method] = std::exp(log_sum / static_cast<double>(t));
    }
    return te;
}

ConstraintReport constraint_report(std::span<const std::size_t> memory_per_step,
                                   std::span<const double> bwt_per_step, std::size_t budget,
                                   double epsilon) {
    ConstraintReport r;
    r.budget = budget;
    r.epsilon = epsilon;
    r.bwt_per_step.assign(bwt_per_step.begin(), bwt_per_step.end());
    r.interpretation = "forgetting constraint checked as |min(0, BWT_t)| <= epsilon";
    for (std::size_t k = 0; k < memory_per_step.size(); ++k) {
        r.max_memory = std::max(r.max_memory, memory_per_step[k]);
        if (memory_per_step[k] > budget) {
            r.violations.push_back({k + 1, "memory", static_cast<double>(memory_per_step[k])});
        }
    }
    for (std::size_t k = 0; k < bwt_per_step.size(); ++k) {
        const double forgetting = -std::min(0.0, bwt_per_step[k]);
        if (forgetting > epsilon) {
            r.violations.push_back({k + 2, "forgetting", bwt_per_step[k]});
        }
    }
    std::stable_sort(r.violations.begin(), r.violations.end(),
                     [](const Violation& a, const Violation& b) { return a.step < b.step; });
    return r;
}

json to_json(const ConstraintReport& report) {
    json v = json::array();
    for (const auto& x : report.violations) v.push_back({{"step", x.step}, {"kind", x.kind}, {"value", x.value}});
    return {{"budget", report.budget},
            {"max_memory", report.max_memory},
            {"epsilon", report.epsilon},
            {"bwt_per_step", report.bwt_per_step},
            {"violations", v},
            {"interpretation", report.interpretation}};
}

ConstraintReport constraint_report_from_json(const json& j) {
    try {
        ConstraintReport r;
        r.budget = j.at("budget").get<std::size_t>();
        r.max_memory = j.at("max_memory").get<std::size_t>();
        r.epsilon = j.at("epsilon").get<double>();
        r.bwt_per_step = j.at("bwt_per_step").get<std::vector<double>>();
        r.interpretation = j.value("interpretation", "");
        for (const auto& x : j.at("violations")) {
            r.violations.push_back(
                {x.at("step").get<std::size_t>(), x.at("kind").get<std::string>(), x.at("value").get<double>()});
        }
        return r;
    } catch (const json::exception& e) {
        fail(ErrorKind::schema, std::string("constraint report: ") + e.what());
    }
}

std::string format_perf_csv(const PerfMatrix& m) {
    std::string out = std::string(kPerfHeader) + "\n";
    const std::size_t t = m.domains();
    for (std::size_t i = 0; i <= t; ++i) {
        for (std::size_t j = 1; j <= std::min(t, i + 1); ++j) {
            if (!m.has(i, j)) continue;
            const auto& c = m.cell(i, j);
            out += (i == 0 ? std::string("init") : m.domain_ids()[i - 1]) + "," + std::to_string(i) + "," +
                   m.domain_ids()[j - 1] + "," + std::to_string(j) + "," + textio::format_double(c.f1) + "," +
                   textio::format_double(c.auc) + "\n";
        }
    }
    return out;
}

void write_perf_csv(const std::filesystem::path& path, const PerfMatrix& m) {
    textio::write_file(path, format_perf_csv(m));
}

PerfMatrix parse_perf_csv(const std::string& text, const std::string& origin) {
    const auto rows = textio::lines(text);
    require(!rows.empty() && rows[0] == kPerfHeader, ErrorKind::schema,
            origin + ": expected header '" + kPerfHeader + "'");
    struct Row {
        std::size_t i, j;
        std::string eval_id;
        PerfCell cell;
    };
    std::vector<Row> parsed;
    std::size_t t = 0;
    for (std::size_t n = 1; n < rows.size(); ++n) {
        if (textio::trim(rows[n]).empty()) continue;
        const auto f = textio::split(rows[n], ',');
        const std::string loc = origin + ":" + std::to_string(n + 1);
        require(f.size() == 6, ErrorKind::data, loc + ": expected 6 fields");
        Row r;
        const double i = textio::parse_double(f[1], loc + " column i");
        const double j = textio::parse_double(f[3], loc + " column j");
        require(i >= 0 && j >= 1 && i == std::floor(i) && j == std::floor(j), ErrorKind::data,
                loc + ": bad cell index");
        r.i = static_cast<std::size_t>(i);
        r.j = static_cast<std::size_t>(j);
        r.eval_id = std::string(f[2]);
        r.cell.f1 = textio::parse_double(f[4], loc + " column f1");
        r.cell.auc = textio::parse_double(f[5], loc + " column auc");
        t = std::max({t, r.i, r.j});
        parsed.push_back(std::move(r));
    }
    require(t >= 1, ErrorKind::data, origin + ": no cells");
    std::vector<std::string> ids(t);
    for (const auto& r : parsed) ids[r.j - 1] = r.eval_id;
    for (std::size_t j = 0; j < t; ++j) {
        if (ids[j].empty()) ids[j] = "domain" + std::to_string(j + 1);
    }
    PerfMatrix m(t, ids);
    for (const auto& r : parsed) m.set(r.i, r.j, r.cell);
    return m;
}

PerfMatrix read_perf_csv(const std::filesystem::path& path) {
    return parse_perf_csv(textio::read_file(path), path.string());
}

void write_timings_csv(const std::filesystem::path& path, const std::vector<TimingRow>& rows) {
    std::string out = std::string(kTimingHeader) + "\n";
    for (const auto& r : rows) {
        out += r.method + "," + std::to_string(r.domain_index) + "," + textio::format_double(r.seconds) + "\n";
    }
    textio::write_file(path, out);
}

std::vector<TimingRow> read_timings_csv(const std::filesystem::path& path) {
    const std::string text = textio::read_file(path);
    const auto rows = textio::lines(text);
    require(!rows.empty() && rows[0] == kTimingHeader, ErrorKind::schema,
            path.string() + ": expected header '" + kTimingHeader + "'");
    std::vector<TimingRow> out;
    for (std::size_t n = 1; n < rows.size(); ++n) {
        if (textio::trim(rows[n]).empty()) continue;
        const auto f = textio::split(rows[n], ',');
        const std::string loc = path.string() + ":" + std::to_string(n + 1);
        require(f.size() == 3, ErrorKind::data, loc + ": expected 3 fields");
        const double idx = textio::parse_double(f[1], loc + " column domain_index");
        out.push_back({std::string(f[0]), static_cast<std::size_t>(idx),
                       textio::parse_double(f[2], loc + " column seconds")});
    }
    return out;
}

namespace oracle {

double auc_pairwise(std::span<const double> scores, std::span<const int> labels) {
    std::size_t twice_wins = 0, n_pos = 0, n_neg = 0;
    for (std::size_t a = 0; a < labels.size(); ++a) {
        if (labels[a] == 1) ++n_pos; else ++n_neg;
    }
    require(n_pos > 0 && n_neg > 0, ErrorKind::undefined_metric, "auc_pairwise: single class");
    for (std::size_t a = 0; a < labels.size(); ++a) {
        if (labels[a] != 1) continue;
        for (std::size_t b = 0; b < labels.size(); ++b) {
            if (labels[b] != 0) continue;
            if (scores[a] > scores[b]) twice_wins += 2;
            else if (scores[a] == scores[b]) twice_wins += 1;
        }
    }
    return (static_cast<double>(twice_wins) / 2.0) / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double perf_average(const PerfMatrix& m, MetricKind kind) {
    const std::size_t t = m.domains();
    double sum = 0.0;
    for (std::size_t j = t; j >= 1; --j) sum += m.at(t, j, kind);
    return sum / static_cast<double>(t);
}

double plasticity(const PerfMatrix& m, MetricKind kind) {
    const std::size_t t = m.domains();
    double after = 0.0, before = 0.0;
    for (std::size_t j = 2; j <= t; ++j) {
        after += m.at(j, j, kind);
        before += m.at(j - 1, j, kind);
    }
    return (after - before) / static_cast<double>(t - 1);
}

double stability(const PerfMatrix& m, MetricKind kind) {
    const std::size_t t_max = m.domains();
    double s = 0.0;
    for (std::size_t t = 2; t <= t_max; ++t) {
        for (std::size_t i = 1; i < t; ++i) {
            s += (m.at(t, i, kind) - m.at(i, i, kind)) /
                 (static_cast<double>(t - 1) * static_cast<double>(t_max - 1));
        }
    }
    return s;
}

std::map<std::string, double> training_efficiency(const TimingTable& timings) {
    const std::size_t t = timings.begin()->second.size();
    std::map<std::string, double> te;
    for (const auto& [method, row] : timings) {
        double product = 1.0;
        for (std::size_t k = 0; k < t; ++k) {
            double fastest = row[k];
            for (const auto& [other, other_row] : timings) fastest = std::min(fastest, other_row[k]);
            product *= fastest / row[k];
        }
        te[method] = std::pow(product, 1.0 / static_cast<double>(t));
    }
    return te;
}

}  // namespace oracle

}  // namespace driftids::clmetrics
