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
/**
 * @file
 * Command-line front end: run configuration, config files and the
 * synth/preprocess/train/evaluate/predict/compare/grid commands.
 */
#pragma once

#include "qsf/datapipe.hpp"
#include "qsf/recurrent.hpp"
#include "qsf/training.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace qsf::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kTrainingError = 3 };

using KeyValues = std::map<std::string, std::string>;

/// Flat `key = value` lines; blank lines and lines starting with '#' are
/// skipped. Throws ConfigError on malformed lines or repeated keys.
[[nodiscard]] KeyValues parse_config_text(std::istream &in, const std::string &source);
[[nodiscard]] KeyValues read_config_file(const std::filesystem::path &path);

/// Every setting a command can consume. Values not given keep the defaults
/// below; keys outside this set are rejected.
struct RunConfig {
    // Synthetic data.
    std::size_t days{14};
    double capacity_mw{200.0};
    double seasonal_amp{0.2};
    double cloud_amp{0.3};
    double noise_sd{0.02};

    // Preprocessing.
    std::string input;
    Schema schema{Schema::Simulated};
    std::int64_t step_minutes{15};
    std::vector<std::size_t> lags{1, 2, 3};
    double train_ratio{0.8};

    // Model.
    ModelKind model{ModelKind::Classical};
    std::size_t hidden{16};
    std::size_t n_layers{2};
    double dropout{0.2};
    std::size_t n_qubits{2};
    std::size_t n_qlayers{1};
    std::size_t n_vrotations{3};
    VqcMode vqc_mode{VqcMode::Four};
    Entangler entangle{Entangler::Staircase};
    bool shared_out_proj{false};

    // Training.
    std::string data;
    std::string target; ///< empty: the schema's power column
    std::vector<std::string> features; ///< empty: every column
    std::size_t window{8};
    std::size_t batch_size{32};
    double lr{0.001};
    std::size_t epochs{20};
    std::uint64_t seed{42};
    bool shuffle{true};
    std::size_t train_limit{0}; ///< keep only the first N training windows; 0 keeps all
    std::size_t threads{1};
    bool no_timing{false};

    // Evaluation and reporting.
    std::string checkpoint;
    std::size_t horizon{0}; ///< number of windows to predict; 0 means all
    bool extended_metrics{false};
    std::string history_a;
    std::string history_b;
    std::string label_a{"a"};
    std::string label_b{"b"};
    std::string grid;
    std::string out;

    /// Throws ConfigError on unknown keys or out-of-range values.
    static RunConfig from_values(const KeyValues &values);
    static const std::vector<std::string> &known_keys();

    [[nodiscard]] std::string target_or_default() const;
    [[nodiscard]] StackConfig stack_config(std::size_t n_features) const;
    [[nodiscard]] TrainConfig train_config() const;
    [[nodiscard]] SynthConfig synth_config() const;
};

/// Convergence epoch (1-based): first epoch whose test loss is within 1% of
/// the minimum test loss of the run.
[[nodiscard]] std::size_t convergence_epoch(const std::vector<double> &test_loss);

/// Runs the tool. Returns an ExitCode value.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace qsf::cli
