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
#include "qsf/tensor.hpp"

#include "qsf/errors.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace qsf {

std::size_t ParameterSet::add(std::string name, std::vector<std::size_t> shape) {
    if (find(name) != nullptr) {
        throw ConfigError("duplicate parameter name '" + name + "'");
    }
    const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                          std::multiplies<>());
    tensors_.push_back(Tensor{std::move(name), std::move(shape), std::vector<double>(n, 0.0)});
    return tensors_.size() - 1;
}

std::size_t ParameterSet::scalar_count() const noexcept {
    std::size_t n = 0;
    for (const auto &t : tensors_) {
        n += t.size();
    }
    return n;
}

std::size_t ParameterSet::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
        if (tensors_[i].name == name) {
            return i;
        }
    }
    throw IndexError("no parameter named '" + std::string(name) + "'");
}

const Tensor *ParameterSet::find(std::string_view name) const {
    for (const auto &t : tensors_) {
        if (t.name == name) {
            return &t;
        }
    }
    return nullptr;
}

ParameterSet ParameterSet::zeros_like() const {
    ParameterSet out = *this;
    out.fill(0.0);
    return out;
}

void ParameterSet::fill(double v) {
    for (auto &t : tensors_) {
        std::fill(t.values.begin(), t.values.end(), v);
    }
}

void ParameterSet::accumulate(const ParameterSet &other) {
    if (!same_layout(other)) {
        throw ConfigError("parameter layouts differ");
    }
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
        auto &dst = tensors_[i].values;
        const auto &src = other.tensors_[i].values;
        for (std::size_t k = 0; k < dst.size(); ++k) {
            dst[k] += src[k];
        }
    }
}

void ParameterSet::scale(double s) {
    for (auto &t : tensors_) {
        for (auto &v : t.values) {
            v *= s;
        }
    }
}

bool ParameterSet::same_layout(const ParameterSet &other) const {
    if (tensors_.size() != other.tensors_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
        if (tensors_[i].name != other.tensors_[i].name ||
            tensors_[i].shape != other.tensors_[i].shape) {
            return false;
        }
    }
    return true;
}

} // namespace qsf
