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
// Test-only reference simulator. Every gate becomes a full 2^n x 2^n matrix
// assembled from Kronecker products, so it shares no code with the strided
// in-place simulator under test.
#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace qsf::oracle {

using Cx = std::complex<double>;
using Matrix = std::vector<std::vector<Cx>>;
using Ket = std::vector<Cx>;

Matrix identity(std::size_t dim);
Matrix kron(const Matrix &a, const Matrix &b);
Matrix matmul(const Matrix &a, const Matrix &b);
Ket apply(const Matrix &m, const Ket &v);

Matrix h2();
Matrix rx2(double theta);
Matrix ry2(double theta);
Matrix rz2(double theta);

/// `u` acting on `qubit` of an n-qubit register (qubit 0 = least significant bit).
Matrix embed(const Matrix &u, std::size_t qubit, std::size_t n);
/// |0><0|_c (x) I + |1><1|_c (x) X_t.
Matrix cnot(std::size_t control, std::size_t target, std::size_t n);

Ket zero_ket(std::size_t n);
double expect_z(const Ket &psi, std::size_t qubit, std::size_t n);

/// The circuit, rebuilt from its written definition: per qubit H, RY(atan x),
/// RZ(atan x^2); then per layer the CNOT sublayer and the RX/RY/RZ cycle.
/// `angles` is [layer][qubit][rotation] flattened. `ring` selects offset 1 only.
std::vector<double> vqc(const std::vector<double> &features, const std::vector<double> &angles,
                        std::size_t n_qlayers, std::size_t n_vrotations, bool ring = false);

} // namespace qsf::oracle
