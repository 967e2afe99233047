#include "driftids/harness/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "driftids/clmetrics/metrics.hpp"
#include "driftids/clstrat/regularizers.hpp"
#include "driftids/idsmodel/model.hpp"
#include "driftids/numgrad/gradcheck.hpp"
#include "driftids/rng.hpp"

namespace driftids::harness {

using idsmodel::FeatureWindow;
using numgrad::GradSet;
using numgrad::Matrix;
using numgrad::ParamSet;

namespace {

std::vector<FeatureWindow> random_windows(std::size_t n, std::size_t len, Rng& rng) {
    std::vector<FeatureWindow> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].features = Matrix(len, dataplane::kFeatureDim);
        for (double& v : out[i].features.values()) v = rng.uniform();
        out[i].label = static_cast<int>(i % 2);
    }
    return out;
}

void randomize(ParamSet& p, Rng& rng, double lo, double hi) {
    for (std::size_t t = 0; t < p.count(); ++t)
        for (double& v : p[t].values()) v = rng.uniform(lo, hi);
}

// Central differences are exact on a quadratic for any step, so the EWC and
// SI checks use a wide step to keep cancellation error out of the figure.
template <class Fn>
double penalty_error(Fn penalty, const ParamSet& at, std::uint64_t seed, double step = 1e-5) {
    numgrad::GradCheckOptions opt;
    opt.samples = at.flat_size();
    opt.seed = seed;
    opt.step = step;
    return numgrad::finite_difference_check(
               [&](const ParamSet& p) {
                   auto r = penalty(p);
                   return std::pair{r.value, r.grads};
               },
               at, opt)
        .max_relative_error;
}

clmetrics::PerfMatrix random_matrix(std::size_t t, Rng& rng) {
    clmetrics::PerfMatrix m(t);
    for (std::size_t i = 0; i <= t; ++i)
        for (std::size_t j = 1; j <= std::min(t, i + 1); ++j) m.set(i, j, {rng.uniform(), rng.uniform(), false});
    return m;
}

}  // namespace

bool ValidationReport::gradients_pass() const {
    return model_gradient_error < model_tolerance && ewc_gradient_error < penalty_tolerance &&
           si_gradient_error < penalty_tolerance && lwf_gradient_error < penalty_tolerance;
}

bool ValidationReport::metrics_pass() const {
    return metric_oracle_error < metric_tolerance && auc_matches_pairwise;
}

nlohmann::json ValidationReport::to_json() const {
    return {{"model_gradient_error", model_gradient_error},
            {"model_coordinates", model_coordinates},
            {"ewc_gradient_error", ewc_gradient_error},
            {"si_gradient_error", si_gradient_error},
            {"lwf_gradient_error", lwf_gradient_error},
            {"metric_oracle_error", metric_oracle_error},
            {"auc_matches_pairwise", auc_matches_pairwise},
            {"seconds", seconds},
            {"passed", passed()}};
}

ValidationReport run_validation(std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    ValidationReport r;
    Rng rng(derive_seed({seed, 0x76616c}));

    // Full classifier at its default size on sampled coordinates, plus a
    // small one on every coordinate.
    {
        idsmodel::ModelConfig big;
        big.seed = seed;
        const auto data = random_windows(6, 10, rng);
        const auto m = idsmodel::build_model(big);
        numgrad::GradCheckOptions opt;
        opt.samples = 3000;
        opt.seed = seed;
        const auto res = numgrad::finite_difference_check(
            [&](const ParamSet& p) { return idsmodel::loss_and_grad(p, big, data); }, m.params, opt);
        r.model_gradient_error = res.max_relative_error;
        r.model_coordinates += res.coordinates_checked;

        idsmodel::ModelConfig small = big;
        small.hidden_size = 8;
        small.fc_size = 6;
        const auto ms = idsmodel::build_model(small);
        opt.samples = ms.params.flat_size();
        const auto all = numgrad::finite_difference_check(
            [&](const ParamSet& p) { return idsmodel::loss_and_grad(p, small, data); }, ms.params, opt);
        r.model_gradient_error = std::max(r.model_gradient_error, all.max_relative_error);
        r.model_coordinates += all.coordinates_checked;
    }

    idsmodel::ModelConfig cfg;
    cfg.hidden_size = 8;
    cfg.fc_size = 6;
    cfg.seed = seed + 1;
    const auto model = idsmodel::build_model(cfg);
    ParamSet anchor = model.params;
    ParamSet theta = model.params;
    randomize(theta, rng, -1.0, 1.0);

    {
        clstrat::EwcState ewc;
        ewc.lambda = 7.5;
        std::vector<GradSet> grads;
        for (int k = 0; k < 4; ++k) {
            GradSet g = GradSet::zeros_like(anchor);
            for (std::size_t t = 0; t < g.count(); ++t)
                for (double& v : g[t].values()) v = rng.uniform(-2.0, 2.0);
            grads.push_back(std::move(g));
        }
        clstrat::ewc_accumulate(ewc, grads, anchor);
        r.ewc_gradient_error = penalty_error([&](const ParamSet& p) { return clstrat::ewc_penalty(ewc, p); },
                                             theta, seed, 1e-2);
    }
    {
        clstrat::SiState si;
        si.c = 0.5;
        si_begin_domain(si, anchor);
        for (int k = 0; k < 5; ++k) {
            GradSet g = GradSet::zeros_like(anchor), d = GradSet::zeros_like(anchor);
            for (std::size_t t = 0; t < g.count(); ++t) {
                for (double& v : g[t].values()) v = rng.uniform(-1.0, 1.0);
                for (double& v : d[t].values()) v = rng.uniform(-0.1, 0.1);
            }
            si_on_step(si, g, d);
        }
        ParamSet moved = anchor;
        randomize(moved, rng, -0.5, 0.5);
        si_consolidate(si, moved);
        r.si_gradient_error = penalty_error([&](const ParamSet& p) { return clstrat::si_penalty(si, p); }, theta,
                                            seed, 1e-2);
    }
    {
        clstrat::LwfState lwf;
        lwf.teacher = model;
        const auto data = random_windows(8, 6, rng);
        ParamSet logits;
        logits.add("logits", Matrix(data.size(), 2));
        randomize(logits, rng, -3.0, 3.0);
        r.lwf_gradient_error = penalty_error(
            [&](const ParamSet& p) {
                auto l = clstrat::lwf_output_loss(lwf, data, p[0]);
                GradSet g;
                g.add("logits", l->d_logits);
                return idsmodel::Penalty{l->value, g};
            },
            logits, seed);
    }

    // Metric formulas against brute-force recomputation.
    {
        using clmetrics::MetricKind;
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto m = random_matrix(2 + rng.below(11), rng);
            for (auto kind : {MetricKind::auc, MetricKind::f1}) {
                worst = std::max(worst, std::abs(clmetrics::perf_average(m, kind) -
                                                 clmetrics::oracle::perf_average(m, kind)));
                worst = std::max(worst, std::abs(clmetrics::plasticity(m, kind) -
                                                 clmetrics::oracle::plasticity(m, kind)));
                worst = std::max(worst, std::abs(clmetrics::stability_bwt(m, kind).mean -
                                                 clmetrics::oracle::stability(m, kind)));
            }
            clmetrics::TimingTable timings;
            const std::size_t domains = 1 + rng.below(12);
            for (const char* name : {"naive", "replay", "ewc", "si", "lwf", "gr"}) {
                for (std::size_t k = 0; k < domains; ++k) timings[name].push_back(rng.uniform(0.01, 60.0));
            }
            const auto fast = clmetrics::training_efficiency(timings);
            const auto slow = clmetrics::oracle::training_efficiency(timings);
            for (const auto& [name, v] : fast) worst = std::max(worst, std::abs(v - slow.at(name)));
        }
        r.metric_oracle_error = worst;

        bool exact = true;
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 2 + rng.below(199);
            std::vector<double> s(n);
            std::vector<int> y(n);
            for (std::size_t k = 0; k < n; ++k) {
                s[k] = trial % 2 == 0 ? static_cast<double>(rng.below(9)) / 8.0 : rng.uniform();
                y[k] = static_cast<int>(rng.below(2));
            }
            y[0] = 0;
            y[1] = 1;
            exact = exact && clmetrics::auc_score(s, y) == clmetrics::oracle::auc_pairwise(s, y);
        }
        r.auc_matches_pairwise = exact;
    }

    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace driftids::harness
