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
#include "qsf/vqc.hpp"

#include "qsf/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qsf {

namespace {

constexpr double kShift = std::numbers::pi / 2;

// A gate plus the index of the differentiable slot feeding its angle, or -1.
// Slots: [0, n) encoding RY, [n, 2n) encoding RZ, [2n, 2n + P) ansatz angles.
struct TapeOp {
    GateOp op;
    int slot;
};

std::vector<TapeOp> build_tape(const EncodingAngles &enc, const VqcView &params,
                               Entangler entangler) {
    const std::size_t n = params.shape.n_qubits;
    std::vector<TapeOp> tape;
    tape.reserve(3 * n + params.shape.n_qlayers * (n * n + params.shape.n_params()));
    for (std::size_t q = 0; q < n; ++q) {
        tape.push_back({GateOp::h(q), -1});
        tape.push_back({GateOp::ry(q, enc.ry[q]), static_cast<int>(q)});
        tape.push_back({GateOp::rz(q, enc.rz[q]), static_cast<int>(n + q)});
    }
    const auto ent = entangling_layer(n, entangler);
    const std::size_t rots = params.shape.n_vrotations;
    for (std::size_t layer = 0; layer < params.shape.n_qlayers; ++layer) {
        for (const auto &g : ent) {
            tape.push_back({g, -1});
        }
        for (std::size_t q = 0; q < n; ++q) {
            for (std::size_t r = 0; r < rots; ++r) {
                const std::size_t k = (layer * n + q) * rots + r;
                const double theta = params.angles[k];
                GateOp g = r % 3 == 0   ? GateOp::rx(q, theta)
                           : r % 3 == 1 ? GateOp::ry(q, theta)
                                        : GateOp::rz(q, theta);
                tape.push_back({g, static_cast<int>(2 * n + k)});
            }
        }
    }
    return tape;
}

std::vector<double> run_tape(const std::vector<TapeOp> &tape, std::size_t n_qubits,
                             int shifted_slot, double shift) {
    auto state = StateVector::zero_state(n_qubits);
    for (const auto &t : tape) {
        if (t.slot == shifted_slot && shifted_slot >= 0) {
            GateOp g = t.op;
            g.angle += shift;
            state.apply(g);
        } else {
            state.apply(t.op);
        }
    }
    return expectation_z_all(state);
}

void check_dims(std::span<const double> features, const VqcView &params) {
    params.shape.validate();
    if (features.size() != params.shape.n_qubits) {
        throw ConfigError("VQC expects " + std::to_string(params.shape.n_qubits) +
                          " features, got " + std::to_string(features.size()));
    }
    if (params.angles.size() != params.shape.n_params()) {
        throw ConfigError("VQC angle tensor has " + std::to_string(params.angles.size()) +
                          " entries, shape requires " +
                          std::to_string(params.shape.n_params()));
    }
}

} // namespace

void VqcShape::validate() const {
    if (n_qubits < 1 || n_qubits > kMaxVqcQubits) {
        throw ConfigError("n_qubits must lie in [1, " + std::to_string(kMaxVqcQubits) +
                          "], got " + std::to_string(n_qubits));
    }
    if (n_qlayers < 1 || n_qlayers > kMaxVqcLayers) {
        throw ConfigError("n_qlayers must lie in [1, " + std::to_string(kMaxVqcLayers) +
                          "], got " + std::to_string(n_qlayers));
    }
    if (n_vrotations < 1) {
        throw ConfigError("n_vrotations must be >= 1");
    }
}

std::string_view to_string(Entangler e) {
    return e == Entangler::Ring ? "ring" : "staircase";
}

Entangler entangler_from_string(std::string_view s) {
    if (s == "staircase") {
        return Entangler::Staircase;
    }
    if (s == "ring") {
        return Entangler::Ring;
    }
    throw ConfigError("unknown entangler '" + std::string(s) +
                      "' (expected staircase or ring)");
}

VqcParams::VqcParams(VqcShape shape) : shape_(shape), angles_(shape.n_params(), 0.0) {
    shape_.validate();
}

VqcParams::VqcParams(VqcShape shape, std::vector<double> angles)
    : shape_(shape), angles_(std::move(angles)) {
    shape_.validate();
    if (angles_.size() != shape_.n_params()) {
        throw ConfigError("VQC angle tensor has " + std::to_string(angles_.size()) +
                          " entries, shape requires " + std::to_string(shape_.n_params()));
    }
    for (double a : angles_) {
        if (!std::isfinite(a)) {
            throw ConfigError("VQC angles must be finite");
        }
    }
}

void init_small_angles(std::span<double> out, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> dist(-std::numbers::pi / 100,
                                                std::numbers::pi / 100);
    for (auto &a : out) {
        a = dist(rng);
    }
}

VqcParams VqcParams::random_small(VqcShape shape, std::mt19937_64 &rng) {
    VqcParams p(shape);
    init_small_angles(p.angles_, rng);
    return p;
}

EncodingAngles encode_features(std::span<const double> features) {
    EncodingAngles enc;
    enc.ry.reserve(features.size());
    enc.rz.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double x = features[i];
        if (!std::isfinite(x)) {
            throw DataError("non-finite feature at index " + std::to_string(i));
        }
        enc.ry.push_back(std::atan(x));
        enc.rz.push_back(std::atan(x * x));
    }
    return enc;
}

StateVector prepare_state(const EncodingAngles &angles) {
    if (angles.ry.size() != angles.rz.size()) {
        throw ConfigError("encoding angle vectors differ in length");
    }
    auto state = StateVector::zero_state(angles.ry.size());
    for (std::size_t q = 0; q < angles.ry.size(); ++q) {
        state.apply_h(q);
        state.apply_ry(q, angles.ry[q]);
        state.apply_rz(q, angles.rz[q]);
    }
    return state;
}

std::vector<GateOp> entangling_layer(std::size_t n_qubits, Entangler entangler) {
    std::vector<GateOp> gates;
    if (n_qubits < 2) {
        return gates;
    }
    const std::size_t max_offset = entangler == Entangler::Ring ? 1 : n_qubits - 1;
    for (std::size_t r = 1; r <= max_offset; ++r) {
        for (std::size_t i = 0; i < n_qubits; ++i) {
            gates.push_back(GateOp::cnot(i, (i + r) % n_qubits));
        }
    }
    // With two qubits the ring wraps onto the same pair twice; keep it as
    // written so both patterns agree at n = 2.
    return gates;
}

std::vector<GateOp> ansatz_gates(const VqcView &params, Entangler entangler) {
    params.shape.validate();
    const std::size_t n = params.shape.n_qubits;
    const auto ent = entangling_layer(n, entangler);
    std::vector<GateOp> gates;
    for (std::size_t layer = 0; layer < params.shape.n_qlayers; ++layer) {
        gates.insert(gates.end(), ent.begin(), ent.end());
        for (std::size_t q = 0; q < n; ++q) {
            for (std::size_t r = 0; r < params.shape.n_vrotations; ++r) {
                const double theta = params.angle(layer, q, r);
                switch (r % 3) {
                case 0:
                    gates.push_back(GateOp::rx(q, theta));
                    break;
                case 1:
                    gates.push_back(GateOp::ry(q, theta));
                    break;
                default:
                    gates.push_back(GateOp::rz(q, theta));
                    break;
                }
            }
        }
    }
    return gates;
}

StateVector apply_ansatz(StateVector state, const VqcView &params, Entangler entangler) {
    if (state.n_qubits() != params.shape.n_qubits) {
        throw ConfigError("ansatz built for " + std::to_string(params.shape.n_qubits) +
                          " qubits applied to a " + std::to_string(state.n_qubits()) +
                          "-qubit state");
    }
    if (params.angles.size() != params.shape.n_params()) {
        throw ConfigError("VQC angle tensor does not match its shape");
    }
    for (const auto &g : ansatz_gates(params, entangler)) {
        state.apply(g);
    }
    return state;
}

std::vector<double> vqc_forward(std::span<const double> features, const VqcView &params,
                                Entangler entangler) {
    check_dims(features, params);
    const auto enc = encode_features(features);
    return run_tape(build_tape(enc, params, entangler), params.shape.n_qubits, -1, 0.0);
}

VqcJacobian vqc_gradient(std::span<const double> features, const VqcView &params,
                         Entangler entangler) {
    check_dims(features, params);
    const std::size_t n = params.shape.n_qubits;
    const std::size_t n_params = params.shape.n_params();
    const auto enc = encode_features(features);
    const auto tape = build_tape(enc, params, entangler);

    // d<Z_o>/d(slot) for every slot via the shift rule.
    const std::size_t n_slots = 2 * n + n_params;
    std::vector<double> d_slots(n * n_slots, 0.0);
    for (std::size_t s = 0; s < n_slots; ++s) {
        const auto plus = run_tape(tape, n, static_cast<int>(s), kShift);
        const auto minus = run_tape(tape, n, static_cast<int>(s), -kShift);
        for (std::size_t o = 0; o < n; ++o) {
            d_slots[o * n_slots + s] = 0.5 * (plus[o] - minus[o]);
        }
    }

    VqcJacobian jac;
    jac.n_outputs = n;
    jac.n_params = n_params;
    jac.d_params.resize(n * n_params);
    jac.d_features.resize(n * n);
    for (std::size_t o = 0; o < n; ++o) {
        const double *row = &d_slots[o * n_slots];
        for (std::size_t k = 0; k < n_params; ++k) {
            jac.d_params[o * n_params + k] = row[2 * n + k];
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double x = features[i];
            const double x2 = x * x;
            jac.d_features[o * n + i] =
                row[i] / (1.0 + x2) + row[n + i] * (2.0 * x / (1.0 + x2 * x2));
        }
    }
    return jac;
}

void vqc_backward(std::span<const double> features, const VqcView &params,
                  Entangler entangler, std::span<const double> d_outputs,
                  std::span<double> d_angles, std::span<double> d_features) {
    const auto jac = vqc_gradient(features, params, entangler);
    const std::size_t n = jac.n_outputs;
    if (d_outputs.size() != n || d_angles.size() != jac.n_params || d_features.size() != n) {
        throw ConfigError("vqc_backward buffer sizes do not match the circuit");
    }
    for (std::size_t o = 0; o < n; ++o) {
        const double g = d_outputs[o];
        if (g == 0.0) {
            continue;
        }
        for (std::size_t k = 0; k < jac.n_params; ++k) {
            d_angles[k] += g * jac.param(o, k);
        }
        for (std::size_t i = 0; i < n; ++i) {
            d_features[i] += g * jac.feature(o, i);
        }
    }
}

} // namespace qsf
