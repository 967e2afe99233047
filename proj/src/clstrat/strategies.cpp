#include "driftids/clstrat/strategies.hpp"

#include <algorithm>

#include "driftids/errors.hpp"
#include "driftids/rng.hpp"

namespace driftids::clstrat {

using nlohmann::json;

namespace {

constexpr std::uint64_t kReplayStream = 0x7265706c;
constexpr std::uint64_t kGenerateStream = 0x67656e72;

Matrix flatten(std::span<const FeatureWindow> windows) {
    const std::size_t width = windows.front().features.size();
    Matrix out(windows.size(), width);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        require(windows[i].features.size() == width, ErrorKind::dimension,
                "generative replay: windows of unequal length");
        const auto src = windows[i].features.values();
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace

ReplayStrategy::ReplayStrategy(const ReplayConfig& config)
    : config_(config), buffer_(config.capacity, derive_seed({config.seed, kReplayStream})) {}

void ReplayStrategy::augment_batch(WindowBatch& batch, const BatchContext& ctx) {
    if (buffer_.empty() || config_.samples_per_batch == 0) {
        return;
    }
    auto replay = buffer_.sample(static_cast<std::int64_t>(config_.samples_per_batch),
                                 derive_seed({config_.seed, ctx.domain_index, ctx.epoch, ctx.batch_index,
                                              kReplayStream}));
    for (auto& w : replay) batch.push_back(std::move(w));
}

void ReplayStrategy::after_domain(const ModelState&, std::size_t domain_index,
                                  std::span<const FeatureWindow> train) {
    buffer_.insert(train, domain_index);
}

json ReplayStrategy::telemetry() const {
    return {{"capacity", buffer_.capacity()},
            {"size_trace", buffer_.size_trace()},
            {"max_size", buffer_.max_size_seen()}};
}

void GenerativeReplayStrategy::before_domain(const ModelState& model, std::size_t domain_index) {
    if (domain_index > 0) {
        labeller_ = model;
    }
}

std::vector<FeatureWindow> GenerativeReplayStrategy::generate(std::size_t n, std::uint64_t seed) const {
    require(generator_.has_value(), ErrorKind::contract, "generative replay: generator not trained yet");
    std::vector<FeatureWindow> out;
    if (n == 0) {
        return out;
    }
    require(labeller_.has_value(), ErrorKind::contract, "generative replay: no labelling classifier");
    const Matrix flat = generator_->sample(n, seed);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        FeatureWindow w;
        const auto row = flat.row(i);
        w.features = Matrix(window_length_, dataplane::kFeatureDim, std::vector<double>(row.begin(), row.end()));
        w.source = {-1, -1};
        out.push_back(std::move(w));
    }
    const auto scores = idsmodel::predict_scores(*labeller_, out);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].label = scores.scores[i] >= 0.5 ? 1 : 0;
    }
    return out;
}

void GenerativeReplayStrategy::augment_batch(WindowBatch& batch, const BatchContext& ctx) {
    if (!generator_ || !labeller_ || config_.samples_per_batch == 0) {
        return;
    }
    auto extra = generate(config_.samples_per_batch,
                          derive_seed({config_.seed, ctx.domain_index, ctx.epoch, ctx.batch_index,
                                       kGenerateStream}));
    for (auto& w : extra) batch.push_back(std::move(w));
}

void GenerativeReplayStrategy::after_domain(const ModelState&, std::size_t domain_index,
                                            std::span<const FeatureWindow> train) {
    require(!train.empty(), ErrorKind::data, "generative replay: empty training set");
    window_length_ = train.front().length();
    Matrix data = flatten(train);
    if (generator_) {
        // Scholar recursion: mix in an equal number of samples from the previous generator.
        const Matrix old = generator_->sample(train.size(), derive_seed({config_.seed, domain_index, 0x6f6c64}));
        Matrix mixed(data.rows() + old.rows(), data.cols());
        std::copy(data.values().begin(), data.values().end(), mixed.values().begin());
        std::copy(old.values().begin(), old.values().end(),
                  mixed.values().begin() + static_cast<std::ptrdiff_t>(data.size()));
        data = std::move(mixed);
    } else {
        VaeConfig vc;
        vc.input_dim = data.cols();
        vc.hidden = config_.hidden;
        vc.latent = config_.latent;
        vc.seed = config_.seed;
        generator_.emplace(vc);
    }
    generator_losses_.push_back(generator_->train(data, config_.epochs, config_.batch_size,
                                                  config_.learning_rate,
                                                  derive_seed({config_.seed, domain_index, 0x747261})));
}

json GenerativeReplayStrategy::telemetry() const {
    return {{"generator_final_losses", generator_losses_}, {"samples_per_batch", config_.samples_per_batch}};
}

const std::vector<std::string>& strategy_names() {
    static const std::vector<std::string> names = {"naive", "replay", "ewc", "si", "lwf", "gr"};
    return names;
}

std::string display_name(const std::string& method) {
    if (method == "naive") return "W/O CL";
    if (method == "replay") return "Replay";
    if (method == "ewc") return "EWC";
    if (method == "si") return "SI";
    if (method == "lwf") return "LwF";
    if (method == "gr") return "GR";
    fail(ErrorKind::config, "unknown strategy '" + method + "'");
}

json default_hyperparameters(const std::string& method) {
    if (method == "naive") return json::object();
    if (method == "replay") return {{"capacity", 1000}, {"samples_per_batch", nullptr}};
    if (method == "ewc") return {{"lambda", 100.0}, {"fisher_samples", 512}};
    if (method == "si") return {{"c", 0.5}, {"xi", 0.1}};
    if (method == "lwf") return {{"temperature", 2.0}, {"weight", 1.0}};
    if (method == "gr") {
        return {{"samples_per_batch", nullptr}, {"latent", 16}, {"hidden", 64},
                {"epochs", 20},                 {"batch_size", 64}, {"learning_rate", 1e-3}};
    }
    fail(ErrorKind::config, "unknown strategy '" + method + "'");
}

json neutral_hyperparameters(const std::string& method) {
    if (method == "naive") return json::object();
    if (method == "replay") return {{"capacity", 0}};
    if (method == "ewc") return {{"lambda", 0.0}};
    if (method == "si") return {{"c", 0.0}};
    if (method == "lwf") return {{"weight", 0.0}};
    if (method == "gr") return {{"samples_per_batch", 0}};
    fail(ErrorKind::config, "unknown strategy '" + method + "'");
}

std::unique_ptr<Strategy> make_strategy(const std::string& method, const json& hyper,
                                        const StrategyContext& ctx) {
    json h = default_hyperparameters(method);
    if (!hyper.is_null()) {
        require(hyper.is_object(), ErrorKind::config, "strategy hyperparameters must be an object");
        for (const auto& [key, value] : hyper.items()) {
            require(h.contains(key), ErrorKind::config,
                    "unknown hyperparameter '" + key + "' for strategy " + method);
            h[key] = value;
        }
    }
    auto per_batch = [&](const char* key) {
        return h[key].is_null() ? ctx.batch_size : h[key].get<std::size_t>();
    };
    try {
        if (method == "naive") {
            return std::make_unique<NaiveStrategy>();
        }
        if (method == "replay") {
            return std::make_unique<ReplayStrategy>(
                ReplayConfig{h["capacity"].get<std::size_t>(), per_batch("samples_per_batch"), ctx.seed});
        }
        if (method == "ewc") {
            EwcState s;
            s.lambda = h["lambda"].get<double>();
            s.fisher_samples = h["fisher_samples"].get<std::size_t>();
            s.seed = ctx.seed;
            require(s.lambda >= 0.0, ErrorKind::config, "ewc lambda must be >= 0");
            return std::make_unique<EwcStrategy>(std::move(s));
        }
        if (method == "si") {
            SiState s;
            s.c = h["c"].get<double>();
            s.xi = h["xi"].get<double>();
            require(s.c >= 0.0 && s.xi > 0.0, ErrorKind::config, "si requires c >= 0 and xi > 0");
            return std::make_unique<SiStrategy>(std::move(s));
        }
        if (method == "lwf") {
            LwfState s;
            s.temperature = h["temperature"].get<double>();
            s.weight = h["weight"].get<double>();
            require(s.temperature > 0.0 && s.weight >= 0.0, ErrorKind::config,
                    "lwf requires temperature > 0 and weight >= 0");
            return std::make_unique<LwfStrategy>(std::move(s));
        }
        GenReplayConfig c;
        c.samples_per_batch = per_batch("samples_per_batch");
        c.latent = h["latent"].get<std::size_t>();
        c.hidden = h["hidden"].get<std::size_t>();
        c.epochs = h["epochs"].get<std::size_t>();
        c.batch_size = h["batch_size"].get<std::size_t>();
        c.learning_rate = h["learning_rate"].get<double>();
        c.seed = ctx.seed;
        return std::make_unique<GenerativeReplayStrategy>(c);
    } catch (const json::exception& e) {
        fail(ErrorKind::config, "strategy " + method + ": " + e.what());
    }
}

}  // namespace driftids::clstrat
