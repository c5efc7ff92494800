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
#include "qsf/training.hpp"

#include "qsf/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <utility>

namespace qsf {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::vector<std::string> split_fields(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) {
            field.pop_back();
        }
        out.push_back(field);
    }
    return out;
}

} // namespace

void TrainConfig::validate() const {
    if (epochs < 1) {
        throw ConfigError("epochs must be >= 1");
    }
    if (batch_size < 1) {
        throw ConfigError("batch_size must be >= 1");
    }
    if (!(lr >= 0.0) || !std::isfinite(lr)) {
        throw ConfigError("lr must be a finite non-negative number");
    }
    if (threads < 1) {
        throw ConfigError("threads must be >= 1");
    }
}

// ---------------------------------------------------------------------------
// History
// ---------------------------------------------------------------------------

void EpochHistory::write_csv(std::ostream &out) const {
    out << "epoch,train_loss,test_loss,wall_seconds\n";
    for (std::size_t e = 0; e < test_loss.size(); ++e) {
        out << (e + 1) << ',' << format_double(train_loss[e]) << ','
            << format_double(test_loss[e]) << ','
            << format_double(e < wall_seconds.size() ? wall_seconds[e] : 0.0) << '\n';
    }
}

void EpochHistory::write_csv(const std::filesystem::path &path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    write_csv(out);
}

EpochHistory EpochHistory::parse_csv(std::istream &in, const std::string &source) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(source + ": empty history file");
    }
    const auto header = split_fields(line);
    const std::vector<std::string> expected{"epoch", "train_loss", "test_loss", "wall_seconds"};
    if (header != expected) {
        throw DataError(source + ": header must be epoch,train_loss,test_loss,wall_seconds");
    }
    EpochHistory h;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        ++row;
        const auto f = split_fields(line);
        if (f.size() != 4) {
            throw DataError(source + ": row " + std::to_string(row) + " needs 4 fields");
        }
        try {
            std::size_t used = 0;
            const auto epoch = std::stoul(f[0], &used);
            if (used != f[0].size() || epoch != row) {
                throw DataError(source + ": row " + std::to_string(row) +
                                " has epoch " + f[0] + ", expected " + std::to_string(row));
            }
            double vals[3];
            for (int k = 0; k < 3; ++k) {
                vals[k] = std::stod(f[k + 1], &used);
                if (used != f[k + 1].size() || !std::isfinite(vals[k]) || vals[k] < 0.0) {
                    throw DataError(source + ": row " + std::to_string(row) +
                                    " has an invalid value '" + f[k + 1] + "'");
                }
            }
            h.train_loss.push_back(vals[0]);
            h.test_loss.push_back(vals[1]);
            h.wall_seconds.push_back(vals[2]);
        } catch (const std::logic_error &) {
            throw DataError(source + ": row " + std::to_string(row) + " is not numeric");
        }
    }
    if (h.epochs() == 0) {
        throw DataError(source + ": history has no epochs");
    }
    return h;
}

EpochHistory EpochHistory::read_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open history '" + path.string() + "'");
    }
    return parse_csv(in, path.string());
}

// ---------------------------------------------------------------------------
// Loss and optimizer
// ---------------------------------------------------------------------------

double mse_loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size()) {
        throw DataError("mse_loss length mismatch: " + std::to_string(pred.size()) + " vs " +
                        std::to_string(target.size()));
    }
    if (pred.empty()) {
        throw DataError("mse_loss of an empty batch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double r = pred[i] - target[i];
        s += r * r;
    }
    return s / static_cast<double>(pred.size());
}

AdamState::AdamState(const ParameterSet &like, double lr, double beta1, double beta2, double eps)
    : m_(like.zeros_like()), v_(like.zeros_like()), lr_(lr), beta1_(beta1), beta2_(beta2),
      eps_(eps) {}

void AdamState::step(ParameterSet &params, const ParameterSet &grads) {
    if (!params.same_layout(grads) || !params.same_layout(m_)) {
        throw ConfigError("Adam: parameter, gradient and moment layouts differ");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        for (double g : grads[i].values) {
            if (!std::isfinite(g)) {
                throw TrainingError("non-finite gradient for parameter '" + grads[i].name + "'");
            }
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params.values(i);
        auto m = m_.values(i);
        auto v = v_.values(i);
        const auto g = grads.values(i);
        for (std::size_t k = 0; k < p.size(); ++k) {
            m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
            v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
            const double m_hat = m[k] / bc1;
            const double v_hat = v[k] / bc2;
            p[k] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
        }
    }
}

// ---------------------------------------------------------------------------
// Batches
// ---------------------------------------------------------------------------

std::uint64_t sample_seed(std::uint64_t run_seed, std::uint64_t epoch, std::uint64_t sample) {
    return splitmix64(splitmix64(splitmix64(run_seed) ^ epoch) ^ sample);
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)> &fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += threads) {
                        fn(i);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

std::vector<double> predict_all(const StackModel &model, const WindowedDataset &ds,
                                std::size_t threads) {
    std::vector<double> out(ds.size());
    parallel_for(ds.size(), threads,
                 [&](std::size_t k) { out[k] = model.forward(ds.sample(k), Mode::Eval); });
    return out;
}

double evaluate_mse(const StackModel &model, const WindowedDataset &ds, std::size_t threads) {
    const auto pred = predict_all(model, ds, threads);
    return mse_loss(pred, ds.targets);
}

BatchGradient batch_gradient(const StackModel &model, const WindowedDataset &ds,
                             std::span<const std::size_t> indices, Mode mode,
                             std::span<const std::uint64_t> seeds, std::size_t threads) {
    if (indices.empty()) {
        throw DataError("empty batch");
    }
    const std::size_t B = indices.size();
    std::vector<ParameterSet> per_sample(B);
    std::vector<double> sq(B);
    const double scale = 2.0 / static_cast<double>(B);
    parallel_for(B, threads, [&](std::size_t k) {
        const std::uint64_t seed = seeds.empty() ? 0 : seeds[k];
        const auto trace = model.forward_trace(ds.sample(indices[k]), mode, seed);
        const double r = trace.prediction - ds.targets[indices[k]];
        sq[k] = r * r;
        per_sample[k] = model.params().zeros_like();
        model.backward(trace, scale * r, per_sample[k]);
    });

    BatchGradient out;
    out.grads = model.params().zeros_like();
    for (std::size_t k = 0; k < B; ++k) {
        out.grads.accumulate(per_sample[k]);
        out.sum_squared += sq[k];
    }
    out.loss = out.sum_squared / static_cast<double>(B);
    out.squared = std::move(sq);
    return out;
}

EpochHistory train(StackModel &model, const WindowedDataset &train_set,
                   const WindowedDataset &test_set, const TrainConfig &cfg,
                   const EpochCallback &on_epoch) {
    cfg.validate();
    if (train_set.size() == 0 || test_set.size() == 0) {
        throw DataError("training and test sets must be non-empty");
    }
    for (const auto *ds : {&train_set, &test_set}) {
        if (ds->n_features != model.config().n_features ||
            ds->window != model.config().window) {
            throw ConfigError("dataset shape [" + std::to_string(ds->window) + " x " +
                              std::to_string(ds->n_features) +
                              "] does not match the model configuration");
        }
    }

    AdamState adam(model.params(), cfg.lr);
    EpochHistory history;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto plan =
            batches(train_set.size(), cfg.batch_size, cfg.shuffle_train, sample_seed(cfg.seed, epoch, ~0ULL));
        std::vector<double> sample_sq(train_set.size(), 0.0);
        for (std::size_t b = 0; b < plan.size(); ++b) {
            const auto &idx = plan[b];
            std::vector<std::uint64_t> seeds(idx.size());
            for (std::size_t k = 0; k < idx.size(); ++k) {
                seeds[k] = sample_seed(cfg.seed, epoch, idx[k]);
            }
            auto bg = batch_gradient(model, train_set, idx, Mode::Train, seeds, cfg.threads);
            if (!std::isfinite(bg.loss)) {
                throw TrainingError("non-finite training loss at epoch " +
                                    std::to_string(epoch + 1) + ", batch " +
                                    std::to_string(b + 1));
            }
            try {
                adam.step(model.params(), bg.grads);
            } catch (const TrainingError &e) {
                throw TrainingError(std::string(e.what()) + " at epoch " +
                                    std::to_string(epoch + 1) + ", batch " +
                                    std::to_string(b + 1));
            }
            for (std::size_t k = 0; k < idx.size(); ++k) {
                sample_sq[idx[k]] = bg.squared[k];
            }
        }
        // Summed in sample order so the value does not depend on the shuffle.
        double sum_sq = 0.0;
        for (double v : sample_sq) {
            sum_sq += v;
        }
        const double train_loss = sum_sq / static_cast<double>(train_set.size());
        const double test_loss = evaluate_mse(model, test_set, cfg.threads);
        if (!std::isfinite(test_loss)) {
            throw TrainingError("non-finite test loss at epoch " + std::to_string(epoch + 1));
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        history.train_loss.push_back(train_loss);
        history.test_loss.push_back(test_loss);
        history.wall_seconds.push_back(cfg.record_wall_time ? wall : 0.0);
        if (on_epoch) {
            on_epoch(epoch + 1, train_loss, test_loss);
        }
    }
    return history;
}

double grad_check(const StackModel &model, const WindowedDataset &ds,
                  std::span<const std::size_t> indices, double h, double abs_floor) {
    const auto analytic = batch_gradient(model, ds, indices, Mode::Eval, {}).grads;
    StackModel probe = model;
    auto loss_at = [&]() {
        std::vector<double> pred;
        std::vector<double> target;
        for (auto k : indices) {
            pred.push_back(probe.forward(ds.sample(k), Mode::Eval));
            target.push_back(ds.targets[k]);
        }
        return mse_loss(pred, target);
    };
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.params().size(); ++i) {
        auto vals = probe.params().values(i);
        for (std::size_t k = 0; k < vals.size(); ++k) {
            const double saved = vals[k];
            vals[k] = saved + h;
            const double up = loss_at();
            vals[k] = saved - h;
            const double down = loss_at();
            vals[k] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double g = analytic.values(i)[k];
            const double excess = std::abs(g - fd) - abs_floor;
            if (excess > 0.0) {
                worst = std::max(worst, excess / std::max(std::abs(g), std::abs(fd)));
            }
        }
    }
    return worst;
}

} // namespace qsf
