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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qsf {

/// Named dense real tensor, row-major.
struct Tensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

/// Ordered collection of named tensors. Gradients and optimizer moments use
/// the same layout via zeros_like().
class ParameterSet {
  public:
    /// Registers a zero-filled tensor and returns its index.
    std::size_t add(std::string name, std::vector<std::size_t> shape);

    [[nodiscard]] std::size_t size() const noexcept { return tensors_.size(); }
    [[nodiscard]] std::size_t scalar_count() const noexcept;

    Tensor &operator[](std::size_t i) { return tensors_[i]; }
    const Tensor &operator[](std::size_t i) const { return tensors_[i]; }

    [[nodiscard]] std::span<double> values(std::size_t i) { return tensors_[i].values; }
    [[nodiscard]] std::span<const double> values(std::size_t i) const {
        return tensors_[i].values;
    }

    /// Throws IndexError when missing.
    [[nodiscard]] std::size_t index_of(std::string_view name) const;
    [[nodiscard]] const Tensor *find(std::string_view name) const;

    [[nodiscard]] ParameterSet zeros_like() const;
    void fill(double v);
    /// this += other, tensor by tensor; layouts must match.
    void accumulate(const ParameterSet &other);
    void scale(double s);

    [[nodiscard]] bool same_layout(const ParameterSet &other) const;

    auto begin() { return tensors_.begin(); }
    auto end() { return tensors_.end(); }
    auto begin() const { return tensors_.begin(); }
    auto end() const { return tensors_.end(); }

  private:
    std::vector<Tensor> tensors_;
};

} // namespace qsf
