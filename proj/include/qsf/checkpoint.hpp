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
#pragma once

#include "qsf/datapipe.hpp"
#include "qsf/recurrent.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace qsf {

inline constexpr std::string_view kCheckpointMagic = "QSFCKPT";
inline constexpr int kCheckpointVersion = 1;

/// Everything needed to rebuild a model and map its outputs back to
/// physical units. On disk: a "QSFCKPT <version>" line followed by JSON.
struct Checkpoint {
    StackConfig config;
    ParameterSet params;
    std::uint64_t seed{0};
    ScalerParams scaler;
    std::vector<std::string> feature_names;
    std::string target_name;

    [[nodiscard]] StackModel model() const;
};

[[nodiscard]] nlohmann::ordered_json to_json(const StackConfig &cfg);
[[nodiscard]] StackConfig stack_config_from_json(const nlohmann::json &j);

void write_checkpoint(const Checkpoint &ckpt, std::ostream &out);
void save_checkpoint(const Checkpoint &ckpt, const std::filesystem::path &path);
/// Throws DataError on a bad magic line, unsupported version or malformed body.
[[nodiscard]] Checkpoint read_checkpoint(std::istream &in, const std::string &source);
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace qsf
