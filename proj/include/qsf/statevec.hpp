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
 * Dense statevector simulator with the {H, RX, RY, RZ, CNOT} gate set and
 * exact Pauli-Z expectation values.
 *
 * Qubit 0 is the least-significant bit of the amplitude index.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace qsf {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 12;

enum class GateKind { H, RX, RY, RZ, CNOT };

std::string_view to_string(GateKind kind);

/// One gate application. `angle` is ignored for H and CNOT; for CNOT
/// `targets` is ordered [control, target].
struct GateOp {
    GateKind kind{GateKind::H};
    double angle{0.0};
    std::vector<std::size_t> targets;

    static GateOp h(std::size_t q) { return {GateKind::H, 0.0, {q}}; }
    static GateOp rx(std::size_t q, double theta) { return {GateKind::RX, theta, {q}}; }
    static GateOp ry(std::size_t q, double theta) { return {GateKind::RY, theta, {q}}; }
    static GateOp rz(std::size_t q, double theta) { return {GateKind::RZ, theta, {q}}; }
    static GateOp cnot(std::size_t control, std::size_t target) {
        return {GateKind::CNOT, 0.0, {control, target}};
    }

    bool operator==(const GateOp &) const = default;
};

class StateVector {
  public:
    /// |0...0> on `n_qubits` qubits. Throws ConfigError outside [1, kMaxQubits].
    static StateVector zero_state(std::size_t n_qubits);

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t size() const noexcept { return amplitudes_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const noexcept {
        return amplitudes_;
    }

    /// Apply `gate` in place. Throws IndexError on bad wires, ConfigError on a
    /// non-finite angle.
    void apply(const GateOp &gate);

    void apply_h(std::size_t q);
    void apply_rx(std::size_t q, double theta);
    void apply_ry(std::size_t q, double theta);
    void apply_rz(std::size_t q, double theta);
    void apply_cnot(std::size_t control, std::size_t target);

    [[nodiscard]] double norm_squared() const noexcept;

  private:
    explicit StateVector(std::size_t n_qubits);

    void check_wire(std::size_t q) const;

    std::size_t n_qubits_;
    std::vector<Complex> amplitudes_;
};

/// Value-semantics wrapper around StateVector::apply.
[[nodiscard]] StateVector apply_gate(StateVector state, const GateOp &gate);

/// Exact <Z_qubit>. Throws IndexError when `qubit` >= n_qubits.
[[nodiscard]] double expectation_z(const StateVector &state, std::size_t qubit);

/// <Z_i> for every qubit, computed in a single pass over the amplitudes.
[[nodiscard]] std::vector<double> expectation_z_all(const StateVector &state);

} // namespace qsf
