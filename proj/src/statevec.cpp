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
#include "qsf/statevec.hpp"

#include "qsf/errors.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace qsf {

namespace {

// Visits every (i0, i1) amplitude pair that differs only in bit `q`, with
// bit q clear in i0.
template <class F> void for_each_pair(std::size_t size, std::size_t q, F &&f) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t block = 0; block < size; block += 2 * stride) {
        for (std::size_t k = block; k < block + stride; ++k) {
            f(k, k | stride);
        }
    }
}

} // namespace

std::string_view to_string(GateKind kind) {
    switch (kind) {
    case GateKind::H:
        return "H";
    case GateKind::RX:
        return "RX";
    case GateKind::RY:
        return "RY";
    case GateKind::RZ:
        return "RZ";
    case GateKind::CNOT:
        return "CNOT";
    }
    return "?";
}

StateVector::StateVector(std::size_t n_qubits)
    : n_qubits_(n_qubits), amplitudes_(std::size_t{1} << n_qubits, Complex{0.0, 0.0}) {
    amplitudes_[0] = Complex{1.0, 0.0};
}

StateVector StateVector::zero_state(std::size_t n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ConfigError("n_qubits must lie in [1, " + std::to_string(kMaxQubits) +
                          "], got " + std::to_string(n_qubits));
    }
    return StateVector(n_qubits);
}

void StateVector::check_wire(std::size_t q) const {
    if (q >= n_qubits_) {
        throw IndexError("qubit index " + std::to_string(q) + " out of range for " +
                         std::to_string(n_qubits_) + "-qubit state");
    }
}

void StateVector::apply(const GateOp &gate) {
    const std::size_t expected = gate.kind == GateKind::CNOT ? 2 : 1;
    if (gate.targets.size() != expected) {
        throw IndexError(std::string(to_string(gate.kind)) + " expects " +
                         std::to_string(expected) + " target(s), got " +
                         std::to_string(gate.targets.size()));
    }
    switch (gate.kind) {
    case GateKind::H:
        apply_h(gate.targets[0]);
        break;
    case GateKind::RX:
        apply_rx(gate.targets[0], gate.angle);
        break;
    case GateKind::RY:
        apply_ry(gate.targets[0], gate.angle);
        break;
    case GateKind::RZ:
        apply_rz(gate.targets[0], gate.angle);
        break;
    case GateKind::CNOT:
        apply_cnot(gate.targets[0], gate.targets[1]);
        break;
    }
}

void StateVector::apply_h(std::size_t q) {
    check_wire(q);
    const double s = 1.0 / std::sqrt(2.0);
    for_each_pair(amplitudes_.size(), q, [&](std::size_t i0, std::size_t i1) {
        const Complex a = amplitudes_[i0];
        const Complex b = amplitudes_[i1];
        amplitudes_[i0] = s * (a + b);
        amplitudes_[i1] = s * (a - b);
    });
}

void StateVector::apply_rx(std::size_t q, double theta) {
    check_wire(q);
    if (!std::isfinite(theta)) {
        throw ConfigError("RX angle must be finite");
    }
    const double c = std::cos(theta / 2);
    const double s = std::sin(theta / 2);
    const Complex mis{0.0, -s};
    for_each_pair(amplitudes_.size(), q, [&](std::size_t i0, std::size_t i1) {
        const Complex a = amplitudes_[i0];
        const Complex b = amplitudes_[i1];
        amplitudes_[i0] = c * a + mis * b;
        amplitudes_[i1] = mis * a + c * b;
    });
}

void StateVector::apply_ry(std::size_t q, double theta) {
    check_wire(q);
    if (!std::isfinite(theta)) {
        throw ConfigError("RY angle must be finite");
    }
    const double c = std::cos(theta / 2);
    const double s = std::sin(theta / 2);
    for_each_pair(amplitudes_.size(), q, [&](std::size_t i0, std::size_t i1) {
        const Complex a = amplitudes_[i0];
        const Complex b = amplitudes_[i1];
        amplitudes_[i0] = c * a - s * b;
        amplitudes_[i1] = s * a + c * b;
    });
}

void StateVector::apply_rz(std::size_t q, double theta) {
    check_wire(q);
    if (!std::isfinite(theta)) {
        throw ConfigError("RZ angle must be finite");
    }
    const Complex lo = std::polar(1.0, -theta / 2);
    const Complex hi = std::polar(1.0, theta / 2);
    for_each_pair(amplitudes_.size(), q, [&](std::size_t i0, std::size_t i1) {
        amplitudes_[i0] *= lo;
        amplitudes_[i1] *= hi;
    });
}

void StateVector::apply_cnot(std::size_t control, std::size_t target) {
    check_wire(control);
    check_wire(target);
    if (control == target) {
        throw IndexError("CNOT control and target must differ (both " +
                         std::to_string(control) + ")");
    }
    const std::size_t cmask = std::size_t{1} << control;
    for_each_pair(amplitudes_.size(), target, [&](std::size_t i0, std::size_t i1) {
        if (i0 & cmask) {
            std::swap(amplitudes_[i0], amplitudes_[i1]);
        }
    });
}

double StateVector::norm_squared() const noexcept {
    double total = 0.0;
    for (const auto &a : amplitudes_) {
        total += std::norm(a);
    }
    return total;
}

StateVector apply_gate(StateVector state, const GateOp &gate) {
    state.apply(gate);
    return state;
}

double expectation_z(const StateVector &state, std::size_t qubit) {
    if (qubit >= state.n_qubits()) {
        throw IndexError("qubit index " + std::to_string(qubit) + " out of range for " +
                         std::to_string(state.n_qubits()) + "-qubit state");
    }
    const auto amps = state.amplitudes();
    const std::size_t mask = std::size_t{1} << qubit;
    double total = 0.0;
    for (std::size_t b = 0; b < amps.size(); ++b) {
        const double p = std::norm(amps[b]);
        total += (b & mask) ? -p : p;
    }
    return total;
}

std::vector<double> expectation_z_all(const StateVector &state) {
    const auto amps = state.amplitudes();
    const std::size_t n = state.n_qubits();
    std::vector<double> out(n, 0.0);
    for (std::size_t b = 0; b < amps.size(); ++b) {
        const double p = std::norm(amps[b]);
        for (std::size_t q = 0; q < n; ++q) {
            out[q] += ((b >> q) & 1U) ? -p : p;
        }
    }
    return out;
}

} // namespace qsf
