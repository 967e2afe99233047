#include "driftids/idsmodel/checkpoint.hpp"

#include <fstream>

namespace driftids::idsmodel {

using nlohmann::json;

namespace {

template <typename Tag>
json tensors_json(const numgrad::NamedTensors<Tag>& tensors) {
    json arr = json::array();
    for (std::size_t i = 0; i < tensors.count(); ++i) {
        const Matrix& m = tensors[i];
        arr.push_back({{"name", tensors.name(i)},
                       {"shape", {m.rows(), m.cols()}},
                       {"values", std::vector<double>(m.values().begin(), m.values().end())}});
    }
    return arr;
}

template <typename Tag>
numgrad::NamedTensors<Tag> tensors_from(const json& arr) {
    require(arr.is_array(), ErrorKind::schema, "checkpoint: tensor list must be an array");
    numgrad::NamedTensors<Tag> out;
    for (const auto& t : arr) {
        const auto rows = t.at("shape").at(0).get<std::size_t>();
        const auto cols = t.at("shape").at(1).get<std::size_t>();
        out.add(t.at("name").get<std::string>(),
                Matrix(rows, cols, t.at("values").get<std::vector<double>>()));
    }
    return out;
}

}  // namespace

json tensors_to_json(const numgrad::ParamSet& tensors) { return tensors_json(tensors); }
json tensors_to_json(const numgrad::GradSet& tensors) { return tensors_json(tensors); }
numgrad::ParamSet params_from_json(const json& j) { return tensors_from<numgrad::ParamTag>(j); }
numgrad::GradSet grads_from_json(const json& j) { return tensors_from<numgrad::GradTag>(j); }

json config_to_json(const ModelConfig& c) {
    return {{"input_dim", c.input_dim},       {"hidden_size", c.hidden_size},
            {"fc_size", c.fc_size},           {"dropout_rate", c.dropout_rate},
            {"num_classes", c.num_classes},   {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.input_dim = j.value("input_dim", c.input_dim);
    c.hidden_size = j.value("hidden_size", c.hidden_size);
    c.fc_size = j.value("fc_size", c.fc_size);
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.seed = j.value("seed", c.seed);
    return c;
}

json model_to_json(const ModelState& model) {
    return {{"format", "drift-ids-checkpoint"},
            {"version", 1},
            {"config", config_to_json(model.config)},
            {"params", tensors_to_json(model.params)},
            {"adam",
             {{"step", model.adam.step},
              {"beta1", model.adam.config.beta1},
              {"beta2", model.adam.config.beta2},
              {"epsilon", model.adam.config.epsilon},
              {"first_moment", tensors_to_json(model.adam.first_moment)},
              {"second_moment", tensors_to_json(model.adam.second_moment)}}}};
}

ModelState model_from_json(const json& j) {
    require(j.value("format", std::string()) == "drift-ids-checkpoint", ErrorKind::schema,
            "checkpoint: unrecognized format tag");
    require(j.value("version", 0) == 1, ErrorKind::schema, "checkpoint: unsupported version");
    ModelState model;
    model.config = config_from_json(j.at("config"));
    model.config.validate();
    model.params = params_from_json(j.at("params"));
    const ModelState fresh = build_model(model.config);
    require(model.params.same_layout(fresh.params), ErrorKind::schema,
            "checkpoint: parameter shapes do not match config");
    const json& a = j.at("adam");
    model.adam.step = a.at("step").get<std::uint64_t>();
    model.adam.config.beta1 = a.at("beta1").get<double>();
    model.adam.config.beta2 = a.at("beta2").get<double>();
    model.adam.config.epsilon = a.at("epsilon").get<double>();
    model.adam.first_moment = grads_from_json(a.at("first_moment"));
    model.adam.second_moment = grads_from_json(a.at("second_moment"));
    require(model.params.same_layout(model.adam.first_moment) &&
                model.params.same_layout(model.adam.second_moment),
            ErrorKind::schema, "checkpoint: optimizer state shapes do not match parameters");
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const ModelState& model,
                     const json& strategy_state) {
    json j = model_to_json(model);
    if (!strategy_state.is_null()) {
        j["strategy"] = strategy_state;
    }
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorKind::io, "cannot write checkpoint " + path.string());
    out << j.dump() << '\n';
    require(static_cast<bool>(out), ErrorKind::io, "failed writing checkpoint " + path.string());
}

ModelState load_checkpoint(const std::filesystem::path& path, json* strategy_state) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::io, "cannot read checkpoint " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(ErrorKind::schema, "checkpoint " + path.string() + ": " + e.what());
    }
    if (strategy_state != nullptr) {
        *strategy_state = j.contains("strategy") ? j["strategy"] : json();
    }
    return model_from_json(j);
}

}  // namespace driftids::idsmodel
