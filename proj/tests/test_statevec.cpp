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
#include "qsf/errors.hpp"
#include "qsf/statevec.hpp"

#include "support/dense_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace qsf {
namespace {

constexpr double kPi = std::numbers::pi;

GateOp random_gate(std::mt19937_64 &rng, std::size_t n) {
    std::uniform_int_distribution<std::size_t> kind(0, n > 1 ? 4 : 3);
    std::uniform_int_distribution<std::size_t> wire(0, n - 1);
    std::uniform_real_distribution<double> angle(-2 * kPi, 2 * kPi);
    switch (kind(rng)) {
    case 0:
        return GateOp::h(wire(rng));
    case 1:
        return GateOp::rx(wire(rng), angle(rng));
    case 2:
        return GateOp::ry(wire(rng), angle(rng));
    case 3:
        return GateOp::rz(wire(rng), angle(rng));
    default: {
        const auto c = wire(rng);
        auto t = wire(rng);
        while (t == c) {
            t = wire(rng);
        }
        return GateOp::cnot(c, t);
    }
    }
}

oracle::Matrix dense_gate(const GateOp &g, std::size_t n) {
    switch (g.kind) {
    case GateKind::H:
        return oracle::embed(oracle::h2(), g.targets[0], n);
    case GateKind::RX:
        return oracle::embed(oracle::rx2(g.angle), g.targets[0], n);
    case GateKind::RY:
        return oracle::embed(oracle::ry2(g.angle), g.targets[0], n);
    case GateKind::RZ:
        return oracle::embed(oracle::rz2(g.angle), g.targets[0], n);
    case GateKind::CNOT:
        return oracle::cnot(g.targets[0], g.targets[1], n);
    }
    return {};
}

TEST(StateVector, ZeroStateOneQubit) {
    const auto s = StateVector::zero_state(1);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.amplitudes()[0], Complex(1.0, 0.0));
    EXPECT_EQ(s.amplitudes()[1], Complex(0.0, 0.0));
}

TEST(StateVector, ZeroStateTwoQubits) {
    const auto s = StateVector::zero_state(2);
    ASSERT_EQ(s.size(), 4u);
    EXPECT_EQ(s.amplitudes()[0], Complex(1.0, 0.0));
    for (std::size_t i = 1; i < 4; ++i) {
        EXPECT_EQ(s.amplitudes()[i], Complex(0.0, 0.0));
    }
}

TEST(StateVector, ZeroStateRejectsOutOfRange) {
    EXPECT_THROW((void)StateVector::zero_state(13), ConfigError);
    EXPECT_THROW((void)StateVector::zero_state(0), ConfigError);
    EXPECT_NO_THROW((void)StateVector::zero_state(12));
}

TEST(StateVector, HadamardOnZero) {
    const auto s = apply_gate(StateVector::zero_state(1), GateOp::h(0));
    const double r = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(s.amplitudes()[0].real(), r, 1e-15);
    EXPECT_NEAR(s.amplitudes()[1].real(), r, 1e-15);
}

TEST(StateVector, CnotTruthTable) {
    // Qubit 0 set (index 1); control 0 flips qubit 1, giving index 3.
    auto s = apply_gate(StateVector::zero_state(2), GateOp::ry(0, kPi));
    s = apply_gate(s, GateOp::cnot(0, 1));
    EXPECT_NEAR(std::abs(s.amplitudes()[3]), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(s.amplitudes()[1]), 0.0, 1e-12);
}

TEST(StateVector, CnotControlClearLeavesTarget) {
    auto s = apply_gate(StateVector::zero_state(2), GateOp::ry(1, kPi));
    s = apply_gate(s, GateOp::cnot(0, 1));
    EXPECT_NEAR(std::abs(s.amplitudes()[2]), 1.0, 1e-12);
}

TEST(StateVector, RyPiFlipsZero) {
    const auto s = apply_gate(StateVector::zero_state(1), GateOp::ry(0, kPi));
    EXPECT_NEAR(std::abs(s.amplitudes()[0]), 0.0, 1e-12);
    EXPECT_NEAR(s.amplitudes()[1].real(), 1.0, 1e-12);
}

TEST(StateVector, RzUsesSymmetricPhase) {
    auto s = apply_gate(StateVector::zero_state(1), GateOp::h(0));
    s = apply_gate(s, GateOp::rz(0, 0.7));
    const double r = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(s.amplitudes()[0] - r * std::polar(1.0, -0.35)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s.amplitudes()[1] - r * std::polar(1.0, 0.35)), 0.0, 1e-15);
}

TEST(StateVector, BadWiresThrowIndexError) {
    auto s = StateVector::zero_state(2);
    EXPECT_THROW(s.apply(GateOp::h(2)), IndexError);
    EXPECT_THROW(s.apply(GateOp::cnot(0, 5)), IndexError);
    EXPECT_THROW(s.apply(GateOp::cnot(1, 1)), IndexError);
    EXPECT_THROW((void)expectation_z(s, 2), IndexError);
}

TEST(StateVector, NonFiniteAngleRejected) {
    auto s = StateVector::zero_state(1);
    EXPECT_THROW(s.apply(GateOp::rx(0, std::nan(""))), ConfigError);
    EXPECT_THROW(s.apply(GateOp::ry(0, INFINITY)), ConfigError);
}

TEST(Expectation, ZeroStateIsPlusOne) {
    EXPECT_EQ(expectation_z(StateVector::zero_state(1), 0), 1.0);
}

TEST(Expectation, EqualSuperpositionIsZero) {
    const auto s = apply_gate(StateVector::zero_state(1), GateOp::h(0));
    EXPECT_NEAR(expectation_z(s, 0), 0.0, 1e-12);
}

TEST(Expectation, RyHalfPi) {
    const auto s = apply_gate(StateVector::zero_state(1), GateOp::ry(0, kPi / 2));
    EXPECT_NEAR(expectation_z(s, 0), 0.0, 1e-12);
}

TEST(Expectation, AllQubitsExamples) {
    auto s = StateVector::zero_state(2);
    EXPECT_EQ(expectation_z_all(s), (std::vector<double>{1.0, 1.0}));
    auto hh = apply_gate(apply_gate(s, GateOp::h(0)), GateOp::h(1));
    const auto z = expectation_z_all(hh);
    EXPECT_NEAR(z[0], 0.0, 1e-12);
    EXPECT_NEAR(z[1], 0.0, 1e-12);
    const auto q1 = apply_gate(s, GateOp::ry(1, kPi));
    const auto z1 = expectation_z_all(q1);
    EXPECT_NEAR(z1[0], 1.0, 1e-12);
    EXPECT_NEAR(z1[1], -1.0, 1e-12);
}

TEST(Expectation, AllMatchesSingleQubitCalls) {
    std::mt19937_64 rng(5);
    auto s = StateVector::zero_state(4);
    for (int k = 0; k < 30; ++k) {
        s.apply(random_gate(rng, 4));
    }
    const auto all = expectation_z_all(s);
    for (std::size_t q = 0; q < 4; ++q) {
        EXPECT_EQ(all[q], expectation_z(s, q));
    }
}

TEST(StateVectorProperty, NormPreservedOverRandomCircuits) {
    std::mt19937_64 rng(11);
    for (std::size_t n = 1; n <= 6; ++n) {
        auto s = StateVector::zero_state(n);
        for (int k = 0; k < 100; ++k) {
            s.apply(random_gate(rng, n));
        }
        EXPECT_NEAR(s.norm_squared(), 1.0, 1e-10) << n << " qubits";
    }
}

TEST(StateVectorProperty, RotationRoundTrip) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    auto base = StateVector::zero_state(3);
    for (int k = 0; k < 20; ++k) {
        base.apply(random_gate(rng, 3));
    }
    for (auto kind : {GateKind::RX, GateKind::RY, GateKind::RZ}) {
        const double th = angle(rng);
        auto s = apply_gate(base, GateOp{kind, th, {1}});
        s = apply_gate(s, GateOp{kind, -th, {1}});
        for (std::size_t i = 0; i < s.size(); ++i) {
            EXPECT_NEAR(std::abs(s.amplitudes()[i] - base.amplitudes()[i]), 0.0, 1e-12);
        }
    }
}

TEST(StateVectorProperty, CnotIsExactInvolution) {
    std::mt19937_64 rng(13);
    auto base = StateVector::zero_state(4);
    for (int k = 0; k < 40; ++k) {
        base.apply(random_gate(rng, 4));
    }
    auto s = apply_gate(apply_gate(base, GateOp::cnot(2, 0)), GateOp::cnot(2, 0));
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(s.amplitudes()[i], base.amplitudes()[i]);
    }
}

TEST(StateVectorProperty, CosineLawForRy) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> angle(-4 * kPi, 4 * kPi);
    for (int k = 0; k < 100; ++k) {
        const double th = angle(rng);
        const auto s = apply_gate(StateVector::zero_state(1), GateOp::ry(0, th));
        EXPECT_NEAR(expectation_z(s, 0), std::cos(th), 1e-12);
    }
}

TEST(StateVectorProperty, BitOrderingOfBasisStates) {
    for (std::size_t b = 0; b < 8; ++b) {
        auto s = StateVector::zero_state(3);
        for (std::size_t q = 0; q < 3; ++q) {
            if ((b >> q) & 1U) {
                s.apply(GateOp::ry(q, kPi));
            }
        }
        const auto z = expectation_z_all(s);
        for (std::size_t q = 0; q < 3; ++q) {
            EXPECT_NEAR(z[q], ((b >> q) & 1U) ? -1.0 : 1.0, 1e-12);
        }
        EXPECT_NEAR(std::abs(s.amplitudes()[b]), 1.0, 1e-12);
    }
}

TEST(StateVectorOracle, MatchesDenseKroneckerSimulator) {
    std::mt19937_64 rng(15);
    for (std::size_t n = 1; n <= 4; ++n) {
        auto s = StateVector::zero_state(n);
        auto psi = oracle::zero_ket(n);
        for (int k = 0; k < 40; ++k) {
            const auto g = random_gate(rng, n);
            s.apply(g);
            psi = oracle::apply(dense_gate(g, n), psi);
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            EXPECT_NEAR(std::abs(s.amplitudes()[i] - psi[i]), 0.0, 1e-12);
        }
        for (std::size_t q = 0; q < n; ++q) {
            EXPECT_NEAR(expectation_z(s, q), oracle::expect_z(psi, q, n), 1e-12);
        }
    }
}

TEST(StateVector, ApplyGateLeavesInputUntouched) {
    const auto s = StateVector::zero_state(1);
    const auto t = apply_gate(s, GateOp::h(0));
    EXPECT_EQ(s.amplitudes()[0], Complex(1.0, 0.0));
    EXPECT_NE(t.amplitudes()[1], Complex(0.0, 0.0));
}

} // namespace
} // namespace qsf
