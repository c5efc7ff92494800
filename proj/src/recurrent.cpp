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
#include "qsf/recurrent.hpp"

#include "qsf/errors.hpp"

#include <cmath>
#include <random>
#include <string>

namespace qsf {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// y = W x + b, W is [rows x cols].
std::vector<double> affine(std::span<const double> W, std::span<const double> b,
                           std::span<const double> x, std::size_t rows, std::size_t cols) {
    std::vector<double> y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = b[r];
        const double *w = &W[r * cols];
        for (std::size_t c = 0; c < cols; ++c) {
            acc += w[c] * x[c];
        }
        y[r] = acc;
    }
    return y;
}

// out += W^T dz
void affine_input_grad(std::span<const double> W, std::span<const double> dz,
                       std::size_t rows, std::size_t cols, std::span<double> out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = dz[r];
        const double *w = &W[r * cols];
        for (std::size_t c = 0; c < cols; ++c) {
            out[c] += w[c] * g;
        }
    }
}

// dW += dz x^T, db += dz
void affine_param_grad(std::span<const double> dz, std::span<const double> x,
                       std::size_t rows, std::size_t cols, std::span<double> dW,
                       std::span<double> db) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = dz[r];
        db[r] += g;
        double *w = &dW[r * cols];
        for (std::size_t c = 0; c < cols; ++c) {
            w[c] += g * x[c];
        }
    }
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
    std::vector<double> v(a.begin(), a.end());
    v.insert(v.end(), b.begin(), b.end());
    return v;
}

void require(bool ok, const std::string &what) {
    if (!ok) {
        throw ConfigError(what);
    }
}

void check_linear(const LinearView &l, const std::string &name) {
    require(l.W.size() == l.in * l.out && l.b.size() == l.out,
            name + ": projection tensor sizes do not match " + std::to_string(l.out) + "x" +
                std::to_string(l.in));
}

void check_step_inputs(std::span<const double> x, const CellState &state, std::size_t input,
                       std::size_t hidden) {
    require(x.size() == input, "cell expects input of size " + std::to_string(input) +
                                   ", got " + std::to_string(x.size()));
    require(state.h.size() == hidden && state.c.size() == hidden,
            "cell state size does not match hidden=" + std::to_string(hidden));
}

} // namespace

// ---------------------------------------------------------------------------
// Classical cell
// ---------------------------------------------------------------------------

void LstmCellView::validate() const {
    require(hidden >= 1, "LSTM hidden size must be >= 1");
    for (std::size_t g = 0; g < 4; ++g) {
        require(W[g].size() == hidden * (hidden + input) && b[g].size() == hidden,
                "LSTM gate tensors do not match hidden=" + std::to_string(hidden) +
                    ", input=" + std::to_string(input));
    }
}

LstmCellParams LstmCellParams::zeros(std::size_t input, std::size_t hidden) {
    LstmCellParams p;
    p.input = input;
    p.hidden = hidden;
    for (std::size_t g = 0; g < 4; ++g) {
        p.W[g].assign(hidden * (hidden + input), 0.0);
        p.b[g].assign(hidden, 0.0);
    }
    return p;
}

LstmCellView LstmCellParams::view() const {
    LstmCellView v;
    v.input = input;
    v.hidden = hidden;
    for (std::size_t g = 0; g < 4; ++g) {
        v.W[g] = W[g];
        v.b[g] = b[g];
    }
    return v;
}

CellStep lstm_step(std::span<const double> x, const CellState &state,
                   const LstmCellView &params, LstmStepCache *cache) {
    params.validate();
    check_step_inputs(x, state, params.input, params.hidden);
    const std::size_t H = params.hidden;
    const std::size_t cols = H + params.input;
    auto v = concat(state.h, x);

    std::array<std::vector<double>, 4> act;
    for (std::size_t g = 0; g < 4; ++g) {
        act[g] = affine(params.W[g], params.b[g], v, H, cols);
        for (auto &z : act[g]) {
            z = g == kUpdate ? std::tanh(z) : sigmoid(z);
        }
    }

    CellStep out;
    out.state.c.resize(H);
    out.state.h.resize(H);
    std::vector<double> tanh_c(H);
    for (std::size_t j = 0; j < H; ++j) {
        out.state.c[j] = act[kForget][j] * state.c[j] + act[kInput][j] * act[kUpdate][j];
        tanh_c[j] = std::tanh(out.state.c[j]);
        out.state.h[j] = act[kOutput][j] * tanh_c[j];
    }
    out.output = out.state.h;
    if (cache != nullptr) {
        cache->v = std::move(v);
        cache->act = std::move(act);
        cache->c_prev = state.c;
        cache->tanh_c = std::move(tanh_c);
    }
    return out;
}

void lstm_step_backward(const LstmCellView &params, const LstmStepCache &cache,
                        std::span<const double> dh, std::span<const double> dc,
                        const LstmCellGrads &grads, std::span<double> dx,
                        std::span<double> dh_prev, std::span<double> dc_prev) {
    const std::size_t H = params.hidden;
    const std::size_t cols = H + params.input;
    const auto &f = cache.act[kForget];
    const auto &i = cache.act[kInput];
    const auto &C = cache.act[kUpdate];
    const auto &o = cache.act[kOutput];

    std::array<std::vector<double>, 4> dz;
    for (auto &d : dz) {
        d.assign(H, 0.0);
    }
    for (std::size_t j = 0; j < H; ++j) {
        const double tc = cache.tanh_c[j];
        const double d_o = dh[j] * tc;
        const double dct = dc[j] + dh[j] * o[j] * (1.0 - tc * tc);
        dz[kForget][j] = dct * cache.c_prev[j] * f[j] * (1.0 - f[j]);
        dz[kInput][j] = dct * C[j] * i[j] * (1.0 - i[j]);
        dz[kUpdate][j] = dct * i[j] * (1.0 - C[j] * C[j]);
        dz[kOutput][j] = d_o * o[j] * (1.0 - o[j]);
        dc_prev[j] = dct * f[j];
    }

    std::vector<double> dv(cols, 0.0);
    for (std::size_t g = 0; g < 4; ++g) {
        affine_param_grad(dz[g], cache.v, H, cols, grads.W[g], grads.b[g]);
        affine_input_grad(params.W[g], dz[g], H, cols, dv);
    }
    for (std::size_t j = 0; j < H; ++j) {
        dh_prev[j] = dv[j];
    }
    for (std::size_t k = 0; k < params.input; ++k) {
        dx[k] = dv[H + k];
    }
}

CellState lstm_cell_step(std::span<const double> x, const CellState &state,
                         const LstmCellParams &params) {
    return lstm_step(x, state, params.view()).state;
}

// ---------------------------------------------------------------------------
// Quantum cell
// ---------------------------------------------------------------------------

std::string_view to_string(VqcMode m) { return m == VqcMode::Six ? "six" : "four"; }

VqcMode vqc_mode_from_string(std::string_view s) {
    if (s == "four" || s == "4") {
        return VqcMode::Four;
    }
    if (s == "six" || s == "6") {
        return VqcMode::Six;
    }
    throw ConfigError("unknown vqc_mode '" + std::string(s) + "' (expected four or six)");
}

void QlstmCellView::validate() const {
    shape.validate();
    require(hidden >= 1, "QLSTM hidden size must be >= 1");
    const std::size_t n = shape.n_qubits;
    require(input_proj.in == hidden + input && input_proj.out == n,
            "QLSTM input projection must map hidden+input -> n_qubits");
    check_linear(input_proj, "input projection");
    for (const auto &a : gate_vqc) {
        require(a.size() == shape.n_params(), "QLSTM gate circuits must share one VqcShape");
    }
    require(gate_out.size() == 1 || gate_out.size() == 4,
            "QLSTM needs one shared or four per-gate output projections");
    for (const auto &l : gate_out) {
        require(l.in == n && l.out == hidden, "QLSTM output projection must map n_qubits -> hidden");
        check_linear(l, "output projection");
    }
    if (mode == VqcMode::Six) {
        for (std::size_t p = 0; p < 2; ++p) {
            require(path_in[p].in == hidden && path_in[p].out == n,
                    "six-VQC path input projection must map hidden -> n_qubits");
            check_linear(path_in[p], "six-VQC path input");
            require(path_vqc[p].size() == shape.n_params(),
                    "six-VQC path circuit must share the gate VqcShape");
            require(path_out[p].in == n && path_out[p].out == hidden,
                    "six-VQC path output projection must map n_qubits -> hidden");
            check_linear(path_out[p], "six-VQC path output");
        }
    }
}

QlstmCellParams QlstmCellParams::zeros(std::size_t input, std::size_t hidden, VqcShape shape,
                                       VqcMode mode, bool shared_out) {
    shape.validate();
    const std::size_t n = shape.n_qubits;
    QlstmCellParams p;
    p.input = input;
    p.hidden = hidden;
    p.shape = shape;
    p.mode = mode;
    p.shared_out = shared_out;
    p.in_W.assign(n * (hidden + input), 0.0);
    p.in_b.assign(n, 0.0);
    for (auto &a : p.gate_vqc) {
        a.assign(shape.n_params(), 0.0);
    }
    const std::size_t n_out = shared_out ? 1 : 4;
    p.out_W.assign(n_out, std::vector<double>(hidden * n, 0.0));
    p.out_b.assign(n_out, std::vector<double>(hidden, 0.0));
    if (mode == VqcMode::Six) {
        for (std::size_t k = 0; k < 2; ++k) {
            p.path_in_W[k].assign(n * hidden, 0.0);
            p.path_in_b[k].assign(n, 0.0);
            p.path_vqc[k].assign(shape.n_params(), 0.0);
            p.path_out_W[k].assign(hidden * n, 0.0);
            p.path_out_b[k].assign(hidden, 0.0);
        }
    }
    return p;
}

QlstmCellView QlstmCellParams::view() const {
    const std::size_t n = shape.n_qubits;
    QlstmCellView v;
    v.input = input;
    v.hidden = hidden;
    v.shape = shape;
    v.entangler = entangler;
    v.mode = mode;
    v.input_proj = {hidden + input, n, in_W, in_b};
    for (std::size_t g = 0; g < 4; ++g) {
        v.gate_vqc[g] = gate_vqc[g];
    }
    for (std::size_t k = 0; k < out_W.size(); ++k) {
        v.gate_out.push_back({n, hidden, out_W[k], out_b[k]});
    }
    if (mode == VqcMode::Six) {
        for (std::size_t k = 0; k < 2; ++k) {
            v.path_in[k] = {hidden, n, path_in_W[k], path_in_b[k]};
            v.path_vqc[k] = path_vqc[k];
            v.path_out[k] = {n, hidden, path_out_W[k], path_out_b[k]};
        }
    }
    return v;
}

CellStep qlstm_step(std::span<const double> x, const CellState &state,
                    const QlstmCellView &params, QlstmStepCache *cache) {
    params.validate();
    check_step_inputs(x, state, params.input, params.hidden);
    const std::size_t H = params.hidden;
    const std::size_t n = params.shape.n_qubits;

    auto v = concat(state.h, x);
    auto v_proj = affine(params.input_proj.W, params.input_proj.b, v, n, H + params.input);

    std::array<std::vector<double>, 4> q;
    std::array<std::vector<double>, 4> act;
    for (std::size_t g = 0; g < 4; ++g) {
        q[g] = vqc_forward(v_proj, VqcView{params.shape, params.gate_vqc[g]}, params.entangler);
        const auto &out = params.out_for(g);
        act[g] = affine(out.W, out.b, q[g], H, n);
        for (auto &z : act[g]) {
            z = g == kUpdate ? std::tanh(z) : sigmoid(z);
        }
    }

    CellStep step;
    step.state.c.resize(H);
    std::vector<double> tanh_c(H);
    std::vector<double> u(H);
    for (std::size_t j = 0; j < H; ++j) {
        step.state.c[j] = act[kForget][j] * state.c[j] + act[kInput][j] * act[kUpdate][j];
        tanh_c[j] = std::tanh(step.state.c[j]);
        u[j] = act[kOutput][j] * tanh_c[j];
    }

    std::array<std::vector<double>, 2> path_x;
    std::array<std::vector<double>, 2> path_q;
    if (params.mode == VqcMode::Six) {
        std::array<std::vector<double>, 2> path_y;
        for (std::size_t p = 0; p < 2; ++p) {
            path_x[p] = affine(params.path_in[p].W, params.path_in[p].b, u, n, H);
            path_q[p] = vqc_forward(path_x[p], VqcView{params.shape, params.path_vqc[p]},
                                    params.entangler);
            path_y[p] = affine(params.path_out[p].W, params.path_out[p].b, path_q[p], H, n);
        }
        step.state.h = std::move(path_y[0]);
        step.output = std::move(path_y[1]);
    } else {
        step.state.h = u;
        step.output = u;
    }

    if (cache != nullptr) {
        cache->v = std::move(v);
        cache->v_proj = std::move(v_proj);
        cache->q = std::move(q);
        cache->act = std::move(act);
        cache->c_prev = state.c;
        cache->tanh_c = std::move(tanh_c);
        cache->u = std::move(u);
        cache->path_x = std::move(path_x);
        cache->path_q = std::move(path_q);
    }
    return step;
}

void qlstm_step_backward(const QlstmCellView &params, const QlstmStepCache &cache,
                         std::span<const double> dy, std::span<const double> dh,
                         std::span<const double> dc, const QlstmCellGrads &grads,
                         std::span<double> dx, std::span<double> dh_prev,
                         std::span<double> dc_prev) {
    const std::size_t H = params.hidden;
    const std::size_t n = params.shape.n_qubits;
    const std::size_t cols = H + params.input;

    // Gradient on u = o * tanh(c).
    std::vector<double> du(H, 0.0);
    if (params.mode == VqcMode::Six) {
        const std::array<std::span<const double>, 2> upstream{dh, dy};
        for (std::size_t p = 0; p < 2; ++p) {
            const auto &out = params.path_out[p];
            affine_param_grad(upstream[p], cache.path_q[p], H, n, grads.path_out[p].W,
                              grads.path_out[p].b);
            std::vector<double> dq(n, 0.0);
            affine_input_grad(out.W, upstream[p], H, n, dq);
            std::vector<double> dpx(n, 0.0);
            vqc_backward(cache.path_x[p], VqcView{params.shape, params.path_vqc[p]},
                         params.entangler, dq, grads.path_vqc[p], dpx);
            affine_param_grad(dpx, cache.u, n, H, grads.path_in[p].W, grads.path_in[p].b);
            affine_input_grad(params.path_in[p].W, dpx, n, H, du);
        }
    } else {
        for (std::size_t j = 0; j < H; ++j) {
            du[j] = dy[j] + dh[j];
        }
    }

    const auto &f = cache.act[kForget];
    const auto &i = cache.act[kInput];
    const auto &C = cache.act[kUpdate];
    const auto &o = cache.act[kOutput];
    std::array<std::vector<double>, 4> dz;
    for (auto &d : dz) {
        d.assign(H, 0.0);
    }
    for (std::size_t j = 0; j < H; ++j) {
        const double tc = cache.tanh_c[j];
        const double d_o = du[j] * tc;
        const double dct = dc[j] + du[j] * o[j] * (1.0 - tc * tc);
        dz[kForget][j] = dct * cache.c_prev[j] * f[j] * (1.0 - f[j]);
        dz[kInput][j] = dct * C[j] * i[j] * (1.0 - i[j]);
        dz[kUpdate][j] = dct * i[j] * (1.0 - C[j] * C[j]);
        dz[kOutput][j] = d_o * o[j] * (1.0 - o[j]);
        dc_prev[j] = dct * f[j];
    }

    std::vector<double> dv_proj(n, 0.0);
    for (std::size_t g = 0; g < 4; ++g) {
        const std::size_t k = params.gate_out.size() == 1 ? 0 : g;
        affine_param_grad(dz[g], cache.q[g], H, n, grads.gate_out[k].W, grads.gate_out[k].b);
        std::vector<double> dq(n, 0.0);
        affine_input_grad(params.gate_out[k].W, dz[g], H, n, dq);
        vqc_backward(cache.v_proj, VqcView{params.shape, params.gate_vqc[g]}, params.entangler,
                     dq, grads.gate_vqc[g], dv_proj);
    }

    affine_param_grad(dv_proj, cache.v, n, cols, grads.input_proj.W, grads.input_proj.b);
    std::vector<double> dv(cols, 0.0);
    affine_input_grad(params.input_proj.W, dv_proj, n, cols, dv);
    for (std::size_t j = 0; j < H; ++j) {
        dh_prev[j] = dv[j];
    }
    for (std::size_t k = 0; k < params.input; ++k) {
        dx[k] = dv[H + k];
    }
}

CellState qlstm_cell_step(std::span<const double> x, const CellState &state,
                          const QlstmCellParams &params) {
    return qlstm_step(x, state, params.view()).state;
}

// ---------------------------------------------------------------------------
// Stack
// ---------------------------------------------------------------------------

std::string_view to_string(ModelKind k) {
    return k == ModelKind::Quantum ? "quantum" : "classical";
}

ModelKind model_kind_from_string(std::string_view s) {
    if (s == "classical" || s == "lstm") {
        return ModelKind::Classical;
    }
    if (s == "quantum" || s == "qlstm") {
        return ModelKind::Quantum;
    }
    throw ConfigError("unknown model kind '" + std::string(s) +
                      "' (expected classical or quantum)");
}

void StackConfig::validate() const {
    require(n_layers <= 2, "n_layers must be 0, 1 or 2, got " + std::to_string(n_layers));
    require(hidden >= 1, "hidden must be >= 1");
    require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
    require(n_features >= 1, "n_features must be >= 1");
    require(window >= 1, "window must be >= 1");
    if (kind == ModelKind::Quantum) {
        vqc_shape.validate();
    }
}

StackModel::StackModel(StackConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    const std::size_t H = cfg_.hidden;
    const std::size_t n = cfg_.vqc_shape.n_qubits;
    const std::vector<std::size_t> vqc_dims{cfg_.vqc_shape.n_qlayers, n,
                                            cfg_.vqc_shape.n_vrotations};
    static constexpr std::array<const char *, 4> kGateNames{"f", "i", "C", "o"};

    std::size_t input = cfg_.n_features;
    for (std::size_t l = 0; l < cfg_.n_layers; ++l) {
        LayerIdx idx;
        idx.input = input;
        if (cfg_.kind == ModelKind::Classical) {
            const std::string pre = "lstm" + std::to_string(l) + ".";
            for (std::size_t g = 0; g < 4; ++g) {
                idx.W[g] = params_.add(pre + "W_" + kGateNames[g], {H, H + input});
                idx.b[g] = params_.add(pre + "b_" + kGateNames[g], {H});
            }
        } else {
            const std::string pre = "qlstm" + std::to_string(l) + ".";
            idx.in_W = params_.add(pre + "in.W", {n, H + input});
            idx.in_b = params_.add(pre + "in.b", {n});
            for (std::size_t g = 0; g < 4; ++g) {
                idx.vqc[g] = params_.add(pre + "vqc_" + kGateNames[g], vqc_dims);
            }
            if (cfg_.shared_out_proj) {
                idx.out_W.push_back(params_.add(pre + "out.W", {H, n}));
                idx.out_b.push_back(params_.add(pre + "out.b", {H}));
            } else {
                for (std::size_t g = 0; g < 4; ++g) {
                    idx.out_W.push_back(
                        params_.add(pre + "out_" + kGateNames[g] + ".W", {H, n}));
                    idx.out_b.push_back(params_.add(pre + "out_" + kGateNames[g] + ".b", {H}));
                }
            }
            if (cfg_.vqc_mode == VqcMode::Six) {
                static constexpr std::array<const char *, 2> kPathNames{"h", "y"};
                for (std::size_t p = 0; p < 2; ++p) {
                    const std::string pp = pre + kPathNames[p];
                    idx.path_in_W[p] = params_.add(pp + "_in.W", {n, H});
                    idx.path_in_b[p] = params_.add(pp + "_in.b", {n});
                    idx.path_vqc[p] = params_.add(pre + "vqc_" + kPathNames[p], vqc_dims);
                    idx.path_out_W[p] = params_.add(pp + "_out.W", {H, n});
                    idx.path_out_b[p] = params_.add(pp + "_out.b", {H});
                }
            }
        }
        layers_.push_back(std::move(idx));
        input = H;
    }
    head_W_ = params_.add("head.W", {1, head_width()});
    head_b_ = params_.add("head.b", {1});
}

std::size_t StackModel::head_width() const {
    return cfg_.n_layers == 0 ? cfg_.n_features : cfg_.hidden;
}

StackModel StackModel::initialized(StackConfig cfg, std::uint64_t seed) {
    StackModel m(cfg);
    std::mt19937_64 rng(seed);
    const double lstm_bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
    for (auto &t : m.params_) {
        const bool is_vqc = t.name.find(".vqc_") != std::string::npos;
        if (is_vqc) {
            init_small_angles(t.values, rng);
            continue;
        }
        double bound = lstm_bound;
        if (t.name.rfind("lstm", 0) != 0) {
            // Linear projection or head: fan-in is the W column count. Biases
            // follow their W, registered immediately before them.
            std::size_t fan_in = 1;
            if (t.shape.size() == 2) {
                fan_in = t.shape[1];
            } else {
                const std::string w_name = t.name.substr(0, t.name.size() - 1) + "W";
                if (const Tensor *w = m.params_.find(w_name); w != nullptr) {
                    fan_in = w->shape[1];
                }
            }
            bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        }
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto &v : t.values) {
            v = dist(rng);
        }
    }
    return m;
}

void StackModel::set_params(ParameterSet p) {
    if (!params_.same_layout(p)) {
        throw ConfigError("parameter layout does not match the model configuration");
    }
    params_ = std::move(p);
}

LstmCellView StackModel::lstm_view(const LayerIdx &l) const {
    LstmCellView v;
    v.input = l.input;
    v.hidden = cfg_.hidden;
    for (std::size_t g = 0; g < 4; ++g) {
        v.W[g] = params_.values(l.W[g]);
        v.b[g] = params_.values(l.b[g]);
    }
    return v;
}

QlstmCellView StackModel::qlstm_view(const LayerIdx &l) const {
    const std::size_t H = cfg_.hidden;
    const std::size_t n = cfg_.vqc_shape.n_qubits;
    QlstmCellView v;
    v.input = l.input;
    v.hidden = H;
    v.shape = cfg_.vqc_shape;
    v.entangler = cfg_.entangler;
    v.mode = cfg_.vqc_mode;
    v.input_proj = {H + l.input, n, params_.values(l.in_W), params_.values(l.in_b)};
    for (std::size_t g = 0; g < 4; ++g) {
        v.gate_vqc[g] = params_.values(l.vqc[g]);
    }
    for (std::size_t k = 0; k < l.out_W.size(); ++k) {
        v.gate_out.push_back({n, H, params_.values(l.out_W[k]), params_.values(l.out_b[k])});
    }
    if (cfg_.vqc_mode == VqcMode::Six) {
        for (std::size_t p = 0; p < 2; ++p) {
            v.path_in[p] = {H, n, params_.values(l.path_in_W[p]), params_.values(l.path_in_b[p])};
            v.path_vqc[p] = params_.values(l.path_vqc[p]);
            v.path_out[p] = {n, H, params_.values(l.path_out_W[p]),
                             params_.values(l.path_out_b[p])};
        }
    }
    return v;
}

LstmCellGrads StackModel::lstm_grads(const LayerIdx &l, ParameterSet &g) const {
    LstmCellGrads out;
    for (std::size_t k = 0; k < 4; ++k) {
        out.W[k] = g.values(l.W[k]);
        out.b[k] = g.values(l.b[k]);
    }
    return out;
}

QlstmCellGrads StackModel::qlstm_grads(const LayerIdx &l, ParameterSet &g) const {
    QlstmCellGrads out;
    out.input_proj = {g.values(l.in_W), g.values(l.in_b)};
    for (std::size_t k = 0; k < 4; ++k) {
        out.gate_vqc[k] = g.values(l.vqc[k]);
    }
    for (std::size_t k = 0; k < l.out_W.size(); ++k) {
        out.gate_out.push_back({g.values(l.out_W[k]), g.values(l.out_b[k])});
    }
    if (cfg_.vqc_mode == VqcMode::Six) {
        for (std::size_t p = 0; p < 2; ++p) {
            out.path_in[p] = {g.values(l.path_in_W[p]), g.values(l.path_in_b[p])};
            out.path_vqc[p] = g.values(l.path_vqc[p]);
            out.path_out[p] = {g.values(l.path_out_W[p]), g.values(l.path_out_b[p])};
        }
    }
    return out;
}

double StackModel::forward(std::span<const double> window, Mode mode,
                           std::uint64_t dropout_seed) const {
    return forward_trace(window, mode, dropout_seed).prediction;
}

StackTrace StackModel::forward_trace(std::span<const double> window, Mode mode,
                                     std::uint64_t dropout_seed) const {
    const std::size_t T = cfg_.window;
    const std::size_t F = cfg_.n_features;
    if (window.size() != T * F) {
        throw DataError("window must hold " + std::to_string(T) + "x" + std::to_string(F) +
                        " values, got " + std::to_string(window.size()));
    }

    StackTrace trace;
    const bool drop = mode == Mode::Train && cfg_.dropout > 0.0;
    std::mt19937_64 rng(dropout_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double keep_scale = 1.0 / (1.0 - cfg_.dropout);

    std::vector<std::vector<double>> seq(T);
    for (std::size_t t = 0; t < T; ++t) {
        seq[t].assign(window.begin() + t * F, window.begin() + (t + 1) * F);
    }

    const bool quantum = cfg_.kind == ModelKind::Quantum;
    for (const auto &layer : layers_) {
        auto state = CellState::zeros(cfg_.hidden);
        std::vector<std::vector<double>> outputs(T);
        if (quantum) {
            const auto view = qlstm_view(layer);
            auto &caches = trace.qlstm.emplace_back(T);
            for (std::size_t t = 0; t < T; ++t) {
                auto step = qlstm_step(seq[t], state, view, &caches[t]);
                state = std::move(step.state);
                outputs[t] = std::move(step.output);
            }
        } else {
            const auto view = lstm_view(layer);
            auto &caches = trace.lstm.emplace_back(T);
            for (std::size_t t = 0; t < T; ++t) {
                auto step = lstm_step(seq[t], state, view, &caches[t]);
                state = std::move(step.state);
                outputs[t] = std::move(step.output);
            }
        }
        auto &mask = trace.masks.emplace_back();
        if (drop) {
            mask.resize(T * cfg_.hidden);
            for (std::size_t t = 0; t < T; ++t) {
                for (std::size_t j = 0; j < cfg_.hidden; ++j) {
                    const double m = unif(rng) < cfg_.dropout ? 0.0 : keep_scale;
                    mask[t * cfg_.hidden + j] = m;
                    outputs[t][j] *= m;
                }
            }
        }
        seq = std::move(outputs);
    }

    trace.head_input = seq[T - 1];
    const auto hw = params_.values(head_W_);
    double pred = params_.values(head_b_)[0];
    for (std::size_t j = 0; j < trace.head_input.size(); ++j) {
        pred += hw[j] * trace.head_input[j];
    }
    trace.prediction = pred;
    return trace;
}

void StackModel::backward(const StackTrace &trace, double d_prediction,
                          ParameterSet &grads) const {
    if (!grads.same_layout(params_)) {
        throw ConfigError("gradient buffer layout does not match the model");
    }
    const std::size_t T = cfg_.window;
    const std::size_t H = cfg_.hidden;
    const auto hw = params_.values(head_W_);
    auto dhw = grads.values(head_W_);
    grads.values(head_b_)[0] += d_prediction;
    for (std::size_t j = 0; j < trace.head_input.size(); ++j) {
        dhw[j] += d_prediction * trace.head_input[j];
    }
    if (layers_.empty()) {
        return;
    }

    std::vector<std::vector<double>> dseq(T, std::vector<double>(H, 0.0));
    for (std::size_t j = 0; j < H; ++j) {
        dseq[T - 1][j] = d_prediction * hw[j];
    }

    const bool quantum = cfg_.kind == ModelKind::Quantum;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const auto &layer = layers_[li];
        const auto &mask = trace.masks[li];
        if (!mask.empty()) {
            for (std::size_t t = 0; t < T; ++t) {
                for (std::size_t j = 0; j < H; ++j) {
                    dseq[t][j] *= mask[t * H + j];
                }
            }
        }
        std::vector<std::vector<double>> dinputs(T, std::vector<double>(layer.input, 0.0));
        std::vector<double> dh_next(H, 0.0);
        std::vector<double> dc_next(H, 0.0);
        std::vector<double> dh_prev(H);
        std::vector<double> dc_prev(H);
        if (quantum) {
            const auto view = qlstm_view(layer);
            const auto g = qlstm_grads(layer, grads);
            for (std::size_t t = T; t-- > 0;) {
                qlstm_step_backward(view, trace.qlstm[li][t], dseq[t], dh_next, dc_next, g,
                                    dinputs[t], dh_prev, dc_prev);
                std::swap(dh_next, dh_prev);
                std::swap(dc_next, dc_prev);
            }
        } else {
            const auto view = lstm_view(layer);
            const auto g = lstm_grads(layer, grads);
            std::vector<double> dh(H);
            for (std::size_t t = T; t-- > 0;) {
                for (std::size_t j = 0; j < H; ++j) {
                    dh[j] = dseq[t][j] + dh_next[j];
                }
                lstm_step_backward(view, trace.lstm[li][t], dh, dc_next, g, dinputs[t],
                                   dh_prev, dc_prev);
                std::swap(dh_next, dh_prev);
                std::swap(dc_next, dc_prev);
            }
        }
        dseq = std::move(dinputs);
    }
}

} // namespace qsf
