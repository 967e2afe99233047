#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "driftids/errors.hpp"
#include "driftids/idsmodel/checkpoint.hpp"
#include "driftids/idsmodel/model.hpp"
#include "driftids/idsmodel/trainer.hpp"
#include "driftids/numgrad/gradcheck.hpp"
#include "driftids/numgrad/losses.hpp"

using namespace driftids;
using namespace driftids::idsmodel;
using dataplane::FeatureWindow;

namespace {

std::vector<FeatureWindow> random_windows(std::size_t n, std::size_t len, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<FeatureWindow> out;
    for (std::size_t i = 0; i < n; ++i) {
        FeatureWindow w;
        w.features = Matrix(len, dataplane::kFeatureDim);
        for (double& v : w.features.values()) v = rng.uniform();
        w.label = static_cast<int>(rng.below(2));
        w.source = {static_cast<std::int64_t>(i), static_cast<std::int64_t>(len)};
        out.push_back(std::move(w));
    }
    return out;
}

// Two well-separated Gaussian blobs as length-1 windows.
std::vector<FeatureWindow> blobs(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<FeatureWindow> out;
    for (std::size_t i = 0; i < n; ++i) {
        FeatureWindow w;
        w.label = static_cast<int>(i % 2);
        w.features = Matrix(1, dataplane::kFeatureDim);
        const double center = w.label == 1 ? 0.75 : 0.25;
        for (double& v : w.features.values()) v = center + 0.05 * rng.normal();
        out.push_back(std::move(w));
    }
    return out;
}

ModelConfig small_config(std::size_t h = 8, std::size_t fc = 4, double dropout = 0.0) {
    ModelConfig c;
    c.hidden_size = h;
    c.fc_size = fc;
    c.dropout_rate = dropout;
    c.seed = 3;
    return c;
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::contract;
}

class NoOpHooks : public TrainingHooks {};

}  // namespace

TEST_CASE("build_model: parameter count and layout") {
    ModelConfig c;
    c.hidden_size = 64;
    c.fc_size = 32;
    // 4(14·64 + 64·64 + 64) + (64·32 + 32) + (32·2 + 2)
    CHECK(parameter_count(c) == 22370);
    const auto m = build_model(c);
    CHECK(m.params.flat_size() == 22370);
    CHECK(m.params.at(names::lstm_input).rows() == 14);
    CHECK(m.params.at(names::lstm_input).cols() == 256);
    CHECK(m.params.at(names::fc2_weight).cols() == 2);
    // forget gate bias 1, others 0
    const auto& b = m.params.at(names::lstm_bias);
    for (std::size_t k = 0; k < 256; ++k) {
        CHECK(b(0, k) == ((k >= 64 && k < 128) ? 1.0 : 0.0));
    }
}

TEST_CASE("build_model: determinism and config validation") {
    CHECK(build_model(small_config()).params == build_model(small_config()).params);
    auto other = small_config();
    other.seed = 4;
    CHECK_FALSE(build_model(small_config()).params == build_model(other).params);

    auto bad = small_config();
    bad.input_dim = 13;
    CHECK(kind_of([&] { build_model(bad); }) == ErrorKind::config);
    bad = small_config();
    bad.dropout_rate = 1.0;
    CHECK(kind_of([&] { build_model(bad); }) == ErrorKind::config);
    bad = small_config();
    bad.hidden_size = 0;
    CHECK(kind_of([&] { build_model(bad); }) == ErrorKind::config);
}

TEST_CASE("H=1, fc=1 trains and predicts") {
    auto model = build_model(small_config(1, 1, 0.2));
    const auto data = random_windows(20, 4, 1);
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 8;
    const auto out = train_on_domain(model, data, tc);
    CHECK(std::isfinite(out.final_train_loss));
    const auto s = predict_scores(model, data);
    CHECK(s.scores.size() == 20);
    for (double p : s.scores) CHECK((p >= 0.0 && p <= 1.0));
}

TEST_CASE("forward: eval determinism, dropout 0, shape errors") {
    const auto data = random_windows(6, 5, 2);
    const auto m = build_model(small_config(8, 4, 0.3));
    CHECK(forward(m, data) == forward(m, data));

    const auto m0 = build_model(small_config(8, 4, 0.0));
    Rng rng(1);
    CHECK(forward(m0, data, Mode::train, &rng) == forward(m0, data, Mode::eval));

    Rng r1(9);
    Rng r2(9);
    CHECK(forward(m, data, Mode::train, &r1) == forward(m, data, Mode::train, &r2));
    Rng r3(9);
    CHECK_FALSE(forward(m, data, Mode::train, &r3) == forward(m, data, Mode::eval));

    auto bad = random_windows(1, 5, 3);
    bad[0].features = Matrix(5, 13);
    CHECK(kind_of([&] { forward(m, bad); }) == ErrorKind::dimension);
    auto mixed = random_windows(2, 5, 3);
    mixed[1].features = Matrix(4, 14);
    CHECK(kind_of([&] { forward(m, mixed); }) == ErrorKind::dimension);
}

TEST_CASE("forward: batch of one equals the matching row of the batch") {
    const auto data = random_windows(17, 10, 0);
    const auto m = build_model(small_config(16, 8, 0.2));
    const Matrix all = forward(m, data);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Matrix one = forward(m, std::span(data).subspan(i, 1));
        CHECK(std::abs(one(0, 0) - all(i, 0)) <= 1e-12);
        CHECK(std::abs(one(0, 1) - all(i, 1)) <= 1e-12);
    }
}

TEST_CASE("full-model gradient matches finite differences") {
    const auto data = random_windows(4, 5, 6);
    const auto cfg = small_config(6, 5, 0.0);
    const auto m = build_model(cfg);
    numgrad::GradCheckOptions opt;
    opt.samples = 1000000;
    const auto res = numgrad::finite_difference_check(
        [&](const ParamSet& p) { return loss_and_grad(p, cfg, data); }, m.params, opt);
    CHECK(res.coordinates_checked == m.params.flat_size());
    CHECK(res.max_relative_error < 1e-4);
}

TEST_CASE("train_on_domain: zero epochs leaves parameters unchanged") {
    auto model = build_model(small_config());
    const auto before = model;
    TrainConfig tc;
    tc.epochs = 0;
    const auto out = train_on_domain(model, random_windows(10, 3, 1), tc);
    CHECK(model == before);
    CHECK(out.wall_time_seconds > 0.0);
    CHECK(kind_of([&] { train_on_domain(model, std::vector<FeatureWindow>{}, tc); }) == ErrorKind::data);
}

TEST_CASE("train_on_domain: separable blobs reach accuracy 1.0") {
    const auto data = blobs(256, 4);

    // Logistic regression on the mean feature confirms separability.
    double w = 0.0;
    double b = 0.0;
    for (int it = 0; it < 2000; ++it) {
        double gw = 0.0;
        double gb = 0.0;
        for (const auto& x : data) {
            double mean = 0.0;
            for (double v : x.features.values()) mean += v / 14.0;
            const double p = 1.0 / (1.0 + std::exp(-(w * mean + b)));
            gw += (p - x.label) * mean;
            gb += p - x.label;
        }
        w -= 0.5 * gw / 256.0;
        b -= 0.5 * gb / 256.0;
    }
    std::size_t lr_correct = 0;
    for (const auto& x : data) {
        double mean = 0.0;
        for (double v : x.features.values()) mean += v / 14.0;
        lr_correct += ((w * mean + b > 0.0) ? 1 : 0) == x.label ? 1 : 0;
    }
    REQUIRE(lr_correct == data.size());

    auto model = build_model(small_config(16, 8, 0.2));
    TrainConfig tc;
    tc.epochs = 100;
    tc.batch_size = 32;
    const auto out = train_on_domain(model, data, tc);
    CHECK(out.per_epoch_losses.size() == 100);
    CHECK(out.per_epoch_losses.back() < out.per_epoch_losses.front());
    CHECK(accuracy(model, data) == 1.0);
}

TEST_CASE("train_on_domain: no-op hooks are bit-identical to plain training") {
    const auto data = random_windows(50, 4, 8);
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 16;
    tc.seed = 12;
    auto a = build_model(small_config(8, 4, 0.2));
    auto b = a;
    NoOpHooks hooks;
    const auto oa = train_on_domain(a, data, tc, 1);
    const auto ob = train_on_domain(b, data, tc, hooks, 1);
    CHECK(a == b);
    CHECK(oa.per_epoch_losses == ob.per_epoch_losses);
}

TEST_CASE("train_on_domain: wall time grows with epochs") {
    const auto data = random_windows(128, 10, 8);
    TrainConfig tc;
    tc.batch_size = 32;
    auto m1 = build_model(small_config(16, 8));
    auto m2 = m1;
    tc.epochs = 2;
    const double t_small = train_on_domain(m1, data, tc).wall_time_seconds;
    tc.epochs = 6;
    const double t_big = train_on_domain(m2, data, tc).wall_time_seconds;
    CHECK(t_big * 2.0 >= t_small);
}

TEST_CASE("predict_scores: symmetry, normalization, monotonicity") {
    CHECK(numgrad::attack_probability(0.0, 0.0) == 0.5);

    auto zeroed = build_model(small_config());
    zeroed.params.at(names::fc2_weight).fill(0.0);
    zeroed.params.at(names::fc2_bias).fill(0.0);
    for (double s : predict_scores(zeroed, random_windows(3, 4, 1)).scores) CHECK(s == 0.5);

    const auto data = random_windows(64, 6, 5);
    const auto m = build_model(small_config(12, 6, 0.2));
    const auto s = predict_scores(m, data);
    const Matrix logits = forward(m, data);
    const Matrix probs = numgrad::softmax(logits);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(std::abs(s.scores[i] + probs(i, 0) - 1.0) <= 1e-12);
        CHECK(s.labels[i] == data[i].label);
    }
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
        return logits(a, 1) - logits(a, 0) < logits(b, 1) - logits(b, 0);
    });
    for (std::size_t k = 1; k < idx.size(); ++k) {
        CHECK(s.scores[idx[k - 1]] <= s.scores[idx[k]]);
    }
}

TEST_CASE("snapshot: round trip, file codec, frozen teacher") {
    const auto data = random_windows(40, 4, 3);
    auto model = build_model(small_config(8, 4, 0.2));
    const auto snap = snapshot(model);
    const Matrix teacher_before = forward(snap.state(), data);
    TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 8;
    train_on_domain(model, data, tc);
    CHECK_FALSE(model.params == snap.state().params);
    CHECK(forward(snap.state(), data) == teacher_before);
    CHECK(snap.restore() == snap.state());

    const auto path = std::filesystem::temp_directory_path() / "driftids_ckpt_test.json";
    save_checkpoint(path, model, nlohmann::json{{"kind", "naive"}});
    nlohmann::json extra;
    const auto back = load_checkpoint(path, &extra);
    CHECK(back == model);
    CHECK(extra.at("kind") == "naive");
    std::filesystem::remove(path);

    auto j = model_to_json(model);
    j["params"][0]["shape"][0] = 13;
    CHECK_THROWS(model_from_json(j));
}
