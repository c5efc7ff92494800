// Copyright 2026 The QSF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "qsf/checkpoint.hpp"

#include "qsf/errors.hpp"

#include <fstream>
#include <sstream>

namespace qsf {

nlohmann::ordered_json to_json(const StackConfig &cfg) {
    nlohmann::ordered_json j;
    j["kind"] = std::string(to_string(cfg.kind));
    j["n_layers"] = cfg.n_layers;
    j["hidden"] = cfg.hidden;
    j["dropout"] = cfg.dropout;
    j["n_features"] = cfg.n_features;
    j["window"] = cfg.window;
    j["n_qubits"] = cfg.vqc_shape.n_qubits;
    j["n_qlayers"] = cfg.vqc_shape.n_qlayers;
    j["n_vrotations"] = cfg.vqc_shape.n_vrotations;
    j["entangle"] = std::string(to_string(cfg.entangler));
    j["vqc_mode"] = std::string(to_string(cfg.vqc_mode));
    j["shared_out_proj"] = cfg.shared_out_proj;
    return j;
}

StackConfig stack_config_from_json(const nlohmann::json &j) {
    StackConfig cfg;
    cfg.kind = model_kind_from_string(j.at("kind").get<std::string>());
    cfg.n_layers = j.at("n_layers").get<std::size_t>();
    cfg.hidden = j.at("hidden").get<std::size_t>();
    cfg.dropout = j.at("dropout").get<double>();
    cfg.n_features = j.at("n_features").get<std::size_t>();
    cfg.window = j.at("window").get<std::size_t>();
    cfg.vqc_shape.n_qubits = j.at("n_qubits").get<std::size_t>();
    cfg.vqc_shape.n_qlayers = j.at("n_qlayers").get<std::size_t>();
    cfg.vqc_shape.n_vrotations = j.at("n_vrotations").get<std::size_t>();
    cfg.entangler = entangler_from_string(j.at("entangle").get<std::string>());
    cfg.vqc_mode = vqc_mode_from_string(j.at("vqc_mode").get<std::string>());
    cfg.shared_out_proj = j.at("shared_out_proj").get<bool>();
    cfg.validate();
    return cfg;
}

StackModel Checkpoint::model() const {
    StackModel m(config);
    m.set_params(params);
    return m;
}

void write_checkpoint(const Checkpoint &ckpt, std::ostream &out) {
    nlohmann::ordered_json j;
    j["config"] = to_json(ckpt.config);
    j["seed"] = ckpt.seed;
    j["target"] = ckpt.target_name;
    j["features"] = ckpt.feature_names;
    j["scaler"] = ckpt.scaler.to_json();
    auto &tensors = j["tensors"];
    tensors = nlohmann::ordered_json::array();
    for (const auto &t : ckpt.params) {
        tensors.push_back({{"name", t.name}, {"shape", t.shape}, {"values", t.values}});
    }
    out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n' << j.dump(1) << '\n';
}

void save_checkpoint(const Checkpoint &ckpt, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write checkpoint '" + path.string() + "'");
    }
    write_checkpoint(ckpt, out);
}

Checkpoint read_checkpoint(std::istream &in, const std::string &source) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(source + ": empty checkpoint");
    }
    std::istringstream head(line);
    std::string magic;
    int version = 0;
    if (!(head >> magic >> version) || magic != kCheckpointMagic) {
        throw DataError(source + ": not a checkpoint (missing " + std::string(kCheckpointMagic) +
                        " header)");
    }
    if (version != kCheckpointVersion) {
        throw DataError(source + ": unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint ckpt;
    try {
        const auto j = nlohmann::json::parse(in);
        ckpt.config = stack_config_from_json(j.at("config"));
        ckpt.seed = j.at("seed").get<std::uint64_t>();
        ckpt.target_name = j.at("target").get<std::string>();
        ckpt.feature_names = j.at("features").get<std::vector<std::string>>();
        ckpt.scaler = ScalerParams::from_json(j.at("scaler"));
        // Start from the layout the config implies so names and shapes are checked.
        StackModel shell(ckpt.config);
        ParameterSet p = shell.params();
        const auto &tensors = j.at("tensors");
        if (tensors.size() != p.size()) {
            throw DataError(source + ": expected " + std::to_string(p.size()) + " tensors, got " +
                            std::to_string(tensors.size()));
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            const auto &t = tensors[i];
            const auto name = t.at("name").get<std::string>();
            if (name != p[i].name || t.at("shape").get<std::vector<std::size_t>>() != p[i].shape) {
                throw DataError(source + ": tensor '" + name + "' does not match the layout of '" +
                                p[i].name + "'");
            }
            auto values = t.at("values").get<std::vector<double>>();
            if (values.size() != p[i].values.size()) {
                throw DataError(source + ": tensor '" + name + "' has the wrong element count");
            }
            p[i].values = std::move(values);
        }
        ckpt.params = std::move(p);
    } catch (const nlohmann::json::exception &e) {
        throw DataError(source + ": malformed checkpoint body: " + e.what());
    } catch (const ConfigError &e) {
        throw DataError(source + ": invalid model configuration: " + e.what());
    }
    if (ckpt.feature_names.size() != ckpt.config.n_features) {
        throw DataError(source + ": feature list length does not match n_features");
    }
    return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open checkpoint '" + path.string() + "'");
    }
    return read_checkpoint(in, path.string());
}

} // namespace qsf
