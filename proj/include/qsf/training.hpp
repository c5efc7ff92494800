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
#include "qsf/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace qsf {

struct TrainConfig {
    std::size_t epochs{20};
    std::size_t batch_size{32};
    double lr{0.001};
    std::uint64_t seed{42};
    bool shuffle_train{true};
    std::size_t threads{1};
    /// When false, wall_seconds is recorded as 0 so histories are reproducible byte for byte.
    bool record_wall_time{true};

    void validate() const;
};

struct EpochHistory {
    std::vector<double> train_loss;
    std::vector<double> test_loss;
    std::vector<double> wall_seconds;

    [[nodiscard]] std::size_t epochs() const noexcept { return test_loss.size(); }

    void write_csv(std::ostream &out) const;
    void write_csv(const std::filesystem::path &path) const;
    static EpochHistory read_csv(const std::filesystem::path &path);
    static EpochHistory parse_csv(std::istream &in, const std::string &source);
};

/// Mean of squared residuals. Throws DataError on length mismatch or N = 0.
[[nodiscard]] double mse_loss(std::span<const double> pred, std::span<const double> target);

/// Bias-corrected Adam over a ParameterSet.
class AdamState {
  public:
    AdamState() = default;
    AdamState(const ParameterSet &like, double lr, double beta1 = 0.9, double beta2 = 0.999,
              double eps = 1e-8);

    [[nodiscard]] std::size_t step_count() const noexcept { return t_; }
    [[nodiscard]] const ParameterSet &first_moment() const noexcept { return m_; }
    [[nodiscard]] const ParameterSet &second_moment() const noexcept { return v_; }
    [[nodiscard]] double lr() const noexcept { return lr_; }

    /// Throws TrainingError naming the parameter on a non-finite gradient;
    /// parameters are left untouched in that case.
    void step(ParameterSet &params, const ParameterSet &grads);

  private:
    ParameterSet m_;
    ParameterSet v_;
    std::size_t t_{0};
    double lr_{0.001};
    double beta1_{0.9};
    double beta2_{0.999};
    double eps_{1e-8};
};

inline void adam_step(ParameterSet &params, const ParameterSet &grads, AdamState &state) {
    state.step(params, grads);
}

/// Deterministic per-sample dropout seed.
[[nodiscard]] std::uint64_t sample_seed(std::uint64_t run_seed, std::uint64_t epoch,
                                        std::uint64_t sample);

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)> &fn);

/// Eval-mode predictions for every sample, in dataset order.
[[nodiscard]] std::vector<double> predict_all(const StackModel &model, const WindowedDataset &ds,
                                              std::size_t threads = 1);

/// Eval-mode MSE over the whole dataset.
[[nodiscard]] double evaluate_mse(const StackModel &model, const WindowedDataset &ds,
                                  std::size_t threads = 1);

struct BatchGradient {
    double loss{0.0}; ///< mean squared error over the batch
    double sum_squared{0.0};
    std::vector<double> squared; ///< per-sample squared error, in `indices` order
    ParameterSet grads;
};

/// Gradient of the batch MSE. Per-sample gradients are reduced in index order,
/// so the result does not depend on `threads`. `seeds` may be empty in eval mode.
[[nodiscard]] BatchGradient batch_gradient(const StackModel &model, const WindowedDataset &ds,
                                           std::span<const std::size_t> indices, Mode mode,
                                           std::span<const std::uint64_t> seeds,
                                           std::size_t threads = 1);

using EpochCallback = std::function<void(std::size_t epoch, double train_loss, double test_loss)>;

/// Per epoch: shuffle, one Adam update per batch (last batch may be short),
/// then an eval-mode pass over the test set. Losses are on scaled targets.
EpochHistory train(StackModel &model, const WindowedDataset &train_set,
                   const WindowedDataset &test_set, const TrainConfig &cfg,
                   const EpochCallback &on_epoch = {});

/// Worst relative error between the analytic batch-MSE gradient and central
/// differences with step `h`, over every parameter. Relative error is
/// (|g - fd| - abs_floor) / max(|g|, |fd|), and 0 when |g - fd| <= abs_floor.
[[nodiscard]] double grad_check(const StackModel &model, const WindowedDataset &ds,
                                std::span<const std::size_t> indices, double h,
                                double abs_floor = 1e-8);

} // namespace qsf
