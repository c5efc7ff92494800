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
 * Classical LSTM and quantum QLSTM cells, and the two-layer stack
 *   input -> cell layer -> dropout -> cell layer -> dropout -> linear
 * with hand-written backpropagation through time.
 *
 * Both cells read v_t = concat(h_{t-1}, x_t).
 */
#pragma once

#include "qsf/tensor.hpp"
#include "qsf/vqc.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace qsf {

struct CellState {
    std::vector<double> h;
    std::vector<double> c;

    static CellState zeros(std::size_t hidden) {
        return {std::vector<double>(hidden, 0.0), std::vector<double>(hidden, 0.0)};
    }
};

/// Gate order used for every per-gate array below.
enum Gate : std::size_t { kForget = 0, kInput = 1, kUpdate = 2, kOutput = 3 };

// ---------------------------------------------------------------------------
// Classical cell
// ---------------------------------------------------------------------------

/// Non-owning view of W_g [hidden x (hidden + input)] and b_g [hidden].
struct LstmCellView {
    std::size_t input{0};
    std::size_t hidden{0};
    std::array<std::span<const double>, 4> W;
    std::array<std::span<const double>, 4> b;

    void validate() const;
};

struct LstmCellGrads {
    std::array<std::span<double>, 4> W;
    std::array<std::span<double>, 4> b;
};

/// Owning parameters for standalone use of a single cell.
struct LstmCellParams {
    std::size_t input{0};
    std::size_t hidden{0};
    std::array<std::vector<double>, 4> W;
    std::array<std::vector<double>, 4> b;

    static LstmCellParams zeros(std::size_t input, std::size_t hidden);
    [[nodiscard]] LstmCellView view() const;
};

struct LstmStepCache {
    std::vector<double> v;
    std::array<std::vector<double>, 4> act; ///< f, i, C, o
    std::vector<double> c_prev;
    std::vector<double> tanh_c;
};

struct CellStep {
    CellState state;
    std::vector<double> output; ///< what the next layer sees (h_t unless six-VQC mode)
};

CellStep lstm_step(std::span<const double> x, const CellState &state,
                   const LstmCellView &params, LstmStepCache *cache = nullptr);

/// Accumulates parameter gradients into `grads`; writes dx, dh_prev, dc_prev.
void lstm_step_backward(const LstmCellView &params, const LstmStepCache &cache,
                        std::span<const double> dh, std::span<const double> dc,
                        const LstmCellGrads &grads, std::span<double> dx,
                        std::span<double> dh_prev, std::span<double> dc_prev);

[[nodiscard]] CellState lstm_cell_step(std::span<const double> x, const CellState &state,
                                       const LstmCellParams &params);

// ---------------------------------------------------------------------------
// Quantum cell
// ---------------------------------------------------------------------------

enum class VqcMode {
    /// Four gate circuits; h_t = o_t * tanh(c_t).
    Four,
    /// Adds a hidden-path circuit (h_t = VQC_5(o_t * tanh(c_t))) and an
    /// output circuit (y_t = VQC_6(o_t * tanh(c_t))).
    Six,
};

std::string_view to_string(VqcMode m);
VqcMode vqc_mode_from_string(std::string_view s);

/// Linear map y = W x + b with W [out x in].
struct LinearView {
    std::size_t in{0};
    std::size_t out{0};
    std::span<const double> W;
    std::span<const double> b;
};

struct LinearGrads {
    std::span<double> W;
    std::span<double> b;
};

/// Non-owning QLSTM parameters.
///
/// `gate_vqc` holds four circuits (forget, input, update, output).
/// `gate_out` holds four per-gate projections n_qubits -> hidden, or a single
/// shared one. In six-VQC mode `path_in`, `path_vqc` and `path_out` hold the
/// hidden-path (index 0) and output (index 1) circuits with their own
/// hidden -> n_qubits and n_qubits -> hidden projections.
struct QlstmCellView {
    std::size_t input{0};
    std::size_t hidden{0};
    VqcShape shape;
    Entangler entangler{Entangler::Staircase};
    VqcMode mode{VqcMode::Four};

    LinearView input_proj;
    std::array<std::span<const double>, 4> gate_vqc;
    std::vector<LinearView> gate_out;

    std::array<LinearView, 2> path_in;
    std::array<std::span<const double>, 2> path_vqc;
    std::array<LinearView, 2> path_out;

    [[nodiscard]] const LinearView &out_for(std::size_t g) const {
        return gate_out.size() == 1 ? gate_out[0] : gate_out[g];
    }
    void validate() const;
};

struct QlstmCellGrads {
    LinearGrads input_proj;
    std::array<std::span<double>, 4> gate_vqc;
    std::vector<LinearGrads> gate_out;
    std::array<LinearGrads, 2> path_in;
    std::array<std::span<double>, 2> path_vqc;
    std::array<LinearGrads, 2> path_out;
};

/// Owning QLSTM parameters for standalone use of a single cell.
struct QlstmCellParams {
    std::size_t input{0};
    std::size_t hidden{0};
    VqcShape shape;
    Entangler entangler{Entangler::Staircase};
    VqcMode mode{VqcMode::Four};
    bool shared_out{false};

    std::vector<double> in_W, in_b;
    std::array<std::vector<double>, 4> gate_vqc;
    std::vector<std::vector<double>> out_W, out_b;
    std::array<std::vector<double>, 2> path_in_W, path_in_b, path_vqc, path_out_W, path_out_b;

    static QlstmCellParams zeros(std::size_t input, std::size_t hidden, VqcShape shape,
                                 VqcMode mode = VqcMode::Four, bool shared_out = false);
    [[nodiscard]] QlstmCellView view() const;
};

struct QlstmStepCache {
    std::vector<double> v;
    std::vector<double> v_proj; ///< input to the four gate circuits
    std::array<std::vector<double>, 4> q; ///< measured <Z> per gate circuit
    std::array<std::vector<double>, 4> act;
    std::vector<double> c_prev;
    std::vector<double> tanh_c;
    std::vector<double> u; ///< o * tanh(c)
    std::array<std::vector<double>, 2> path_x;
    std::array<std::vector<double>, 2> path_q;
};

CellStep qlstm_step(std::span<const double> x, const CellState &state,
                    const QlstmCellView &params, QlstmStepCache *cache = nullptr);

/// `dy` is the gradient on this step's output, `dh`/`dc` the gradients
/// arriving from step t+1. In four-VQC mode output and h coincide and the
/// two are summed.
void qlstm_step_backward(const QlstmCellView &params, const QlstmStepCache &cache,
                         std::span<const double> dy, std::span<const double> dh,
                         std::span<const double> dc, const QlstmCellGrads &grads,
                         std::span<double> dx, std::span<double> dh_prev,
                         std::span<double> dc_prev);

[[nodiscard]] CellState qlstm_cell_step(std::span<const double> x, const CellState &state,
                                        const QlstmCellParams &params);

// ---------------------------------------------------------------------------
// Stack
// ---------------------------------------------------------------------------

enum class ModelKind { Classical, Quantum };
enum class Mode { Train, Eval };

std::string_view to_string(ModelKind k);
ModelKind model_kind_from_string(std::string_view s);

struct StackConfig {
    ModelKind kind{ModelKind::Classical};
    std::size_t n_layers{2}; ///< 0, 1 or 2; 0 means a linear head on x_T only
    std::size_t hidden{16};
    double dropout{0.2};
    std::size_t n_features{1};
    std::size_t window{8};
    VqcShape vqc_shape{};
    Entangler entangler{Entangler::Staircase};
    VqcMode vqc_mode{VqcMode::Four};
    bool shared_out_proj{false};

    void validate() const;
    bool operator==(const StackConfig &) const = default;
};

/// Per-sample record of a forward pass, consumed by StackModel::backward.
struct StackTrace {
    double prediction{0.0};
    std::vector<std::vector<LstmStepCache>> lstm;   // [layer][t]
    std::vector<std::vector<QlstmStepCache>> qlstm; // [layer][t]
    std::vector<std::vector<double>> masks;         // [layer] flattened [T x width]
    std::vector<double> head_input;
};

class StackModel {
  public:
    /// All parameters zero.
    explicit StackModel(StackConfig cfg);

    /// Seeded initialization: LSTM weights and biases U(-1/sqrt(hidden),
    /// 1/sqrt(hidden)); linear projections and head U(-1/sqrt(fan_in),
    /// 1/sqrt(fan_in)); circuit angles U(-pi/100, pi/100).
    static StackModel initialized(StackConfig cfg, std::uint64_t seed);

    [[nodiscard]] const StackConfig &config() const noexcept { return cfg_; }
    [[nodiscard]] ParameterSet &params() noexcept { return params_; }
    [[nodiscard]] const ParameterSet &params() const noexcept { return params_; }

    /// Replace parameter values; layout must match.
    void set_params(ParameterSet p);

    /// `window` is row-major [window x n_features]. Eval mode ignores the seed.
    [[nodiscard]] double forward(std::span<const double> window, Mode mode,
                                 std::uint64_t dropout_seed = 0) const;

    [[nodiscard]] StackTrace forward_trace(std::span<const double> window, Mode mode,
                                           std::uint64_t dropout_seed = 0) const;

    /// Accumulates d_prediction * d(prediction)/d(params) into `grads`.
    void backward(const StackTrace &trace, double d_prediction, ParameterSet &grads) const;

  private:
    struct LayerIdx {
        std::size_t input{0};
        // classical: W[4], b[4]
        std::array<std::size_t, 4> W{}, b{};
        // quantum
        std::size_t in_W{0}, in_b{0};
        std::array<std::size_t, 4> vqc{};
        std::vector<std::size_t> out_W, out_b;
        std::array<std::size_t, 2> path_in_W{}, path_in_b{}, path_vqc{}, path_out_W{},
            path_out_b{};
    };

    [[nodiscard]] LstmCellView lstm_view(const LayerIdx &l) const;
    [[nodiscard]] QlstmCellView qlstm_view(const LayerIdx &l) const;
    [[nodiscard]] LstmCellGrads lstm_grads(const LayerIdx &l, ParameterSet &g) const;
    [[nodiscard]] QlstmCellGrads qlstm_grads(const LayerIdx &l, ParameterSet &g) const;
    [[nodiscard]] std::size_t head_width() const;

    StackConfig cfg_;
    ParameterSet params_;
    std::vector<LayerIdx> layers_;
    std::size_t head_W_{0}, head_b_{0};
};

} // namespace qsf
