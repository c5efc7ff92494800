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
 * Variational quantum circuit used by the QLSTM gates.
 *
 * A circuit on n qubits is:
 *   1. encoding: per qubit H, RY(atan x_i), RZ(atan x_i^2)
 *   2. n_qlayers x (entangling CNOTs, then RX/RY/RZ cycling rotations)
 *   3. <Z_i> on every qubit
 *
 * Gradients use the parameter-shift rule on every rotation, including the
 * encoding rotations, and chain the latter back to the raw features.
 */
#pragma once

#include "qsf/statevec.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace qsf {

inline constexpr std::size_t kMaxVqcQubits = 8;
inline constexpr std::size_t kMaxVqcLayers = 4;

struct VqcShape {
    std::size_t n_qubits{2};
    std::size_t n_qlayers{1};
    std::size_t n_vrotations{3};

    /// Throws ConfigError unless n_qubits in [1, 8], n_qlayers in [1, 4]
    /// and n_vrotations >= 1.
    void validate() const;

    [[nodiscard]] std::size_t n_params() const noexcept {
        return n_qlayers * n_qubits * n_vrotations;
    }

    bool operator==(const VqcShape &) const = default;
};

/// CNOT wiring inside one ansatz layer.
enum class Entangler {
    /// For each offset r in 1..n-1 and each qubit i: CNOT(i, (i+r) mod n).
    Staircase,
    /// Offset 1 only: CNOT(i, (i+1) mod n).
    Ring,
};

std::string_view to_string(Entangler e);
Entangler entangler_from_string(std::string_view s);

/// Non-owning view of one circuit's angles, laid out [layer][qubit][rotation].
struct VqcView {
    VqcShape shape;
    std::span<const double> angles;

    [[nodiscard]] double angle(std::size_t layer, std::size_t qubit,
                               std::size_t rot) const {
        return angles[(layer * shape.n_qubits + qubit) * shape.n_vrotations + rot];
    }
};

class VqcParams {
  public:
    explicit VqcParams(VqcShape shape);
    VqcParams(VqcShape shape, std::vector<double> angles);

    /// Angles drawn uniformly from [-pi/100, pi/100].
    static VqcParams random_small(VqcShape shape, std::mt19937_64 &rng);

    [[nodiscard]] const VqcShape &shape() const noexcept { return shape_; }
    [[nodiscard]] std::span<const double> angles() const noexcept { return angles_; }
    [[nodiscard]] std::span<double> angles() noexcept { return angles_; }

    double &angle(std::size_t layer, std::size_t qubit, std::size_t rot) {
        return angles_[(layer * shape_.n_qubits + qubit) * shape_.n_vrotations + rot];
    }

    [[nodiscard]] VqcView view() const noexcept { return {shape_, angles_}; }
    operator VqcView() const noexcept { return view(); } // NOLINT

  private:
    VqcShape shape_;
    std::vector<double> angles_;
};

/// Fill `out` with angles uniform in [-pi/100, pi/100].
void init_small_angles(std::span<double> out, std::mt19937_64 &rng);

struct EncodingAngles {
    std::vector<double> ry; ///< atan(x_i)
    std::vector<double> rz; ///< atan(x_i^2)
};

/// Throws DataError naming the first non-finite index.
[[nodiscard]] EncodingAngles encode_features(std::span<const double> features);

[[nodiscard]] StateVector prepare_state(const EncodingAngles &angles);

/// The CNOT list of one entangling sublayer.
[[nodiscard]] std::vector<GateOp> entangling_layer(std::size_t n_qubits,
                                                   Entangler entangler);

/// Full ansatz gate list (entangling + variational sublayers, all layers).
[[nodiscard]] std::vector<GateOp> ansatz_gates(const VqcView &params,
                                               Entangler entangler = Entangler::Staircase);

/// Throws ConfigError if the state and parameter qubit counts disagree.
[[nodiscard]] StateVector apply_ansatz(StateVector state, const VqcView &params,
                                       Entangler entangler = Entangler::Staircase);

/// <Z_i> of the full circuit, one entry per qubit, each in [-1, 1].
[[nodiscard]] std::vector<double> vqc_forward(std::span<const double> features,
                                              const VqcView &params,
                                              Entangler entangler = Entangler::Staircase);

/// Row-major Jacobians of the circuit outputs. Row o holds d<Z_o>/d(.).
struct VqcJacobian {
    std::size_t n_outputs{0};
    std::size_t n_params{0};
    std::vector<double> d_params;   ///< [n_outputs x n_params]
    std::vector<double> d_features; ///< [n_outputs x n_outputs]

    [[nodiscard]] double param(std::size_t out, std::size_t k) const {
        return d_params[out * n_params + k];
    }
    [[nodiscard]] double feature(std::size_t out, std::size_t i) const {
        return d_features[out * n_outputs + i];
    }
};

[[nodiscard]] VqcJacobian vqc_gradient(std::span<const double> features,
                                       const VqcView &params,
                                       Entangler entangler = Entangler::Staircase);

/// Vector-Jacobian product: given dL/d<Z>, accumulate dL/dangles into
/// `d_angles` and dL/dfeatures into `d_features`. Same shift-rule evaluation
/// as vqc_gradient, without materialising the Jacobian.
void vqc_backward(std::span<const double> features, const VqcView &params,
                  Entangler entangler, std::span<const double> d_outputs,
                  std::span<double> d_angles, std::span<double> d_features);

} // namespace qsf
