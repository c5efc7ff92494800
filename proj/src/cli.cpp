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
#include "qsf/cli.hpp"

#include "qsf/checkpoint.hpp"
#include "qsf/errors.hpp"
#include "qsf/evalstats.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace qsf::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = s.find(sep, pos);
        out.push_back(trim(s.substr(pos, next == std::string_view::npos ? next : next - pos)));
        if (next == std::string_view::npos) {
            break;
        }
        pos = next + 1;
    }
    return out;
}

[[noreturn]] void bad_value(const std::string &key, const std::string &text,
                            const std::string &expected) {
    throw ConfigError("invalid value '" + text + "' for '" + key + "': expected " + expected);
}

std::uint64_t parse_uint(const std::string &key, const std::string &text, std::uint64_t lo,
                         std::uint64_t hi) {
    std::uint64_t v = 0;
    const auto *end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end || v < lo || v > hi) {
        bad_value(key, text, "an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
}

double parse_real(const std::string &key, const std::string &text, double lo, double hi,
                  bool lo_open, bool hi_open, const std::string &range) {
    double v = 0.0;
    const auto *end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    const bool ok = !text.empty() && ec == std::errc{} && ptr == end && std::isfinite(v) &&
                    (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
    if (!ok) {
        bad_value(key, text, "a number in " + range);
    }
    return v;
}

bool parse_bool(const std::string &key, const std::string &text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no" || text == "off") {
        return false;
    }
    bad_value(key, text, "true or false");
}

template <typename Fn>
auto parse_enum(const std::string &key, const std::string &text, const std::string &expected,
                Fn fn) {
    try {
        return fn(text);
    } catch (const std::exception &) {
        bad_value(key, text, expected);
    }
}

using Setter = std::function<void(RunConfig &, const std::string &key, const std::string &)>;

Setter size_setter(std::size_t RunConfig::*field, std::uint64_t lo, std::uint64_t hi) {
    return [=](RunConfig &rc, const std::string &k, const std::string &v) {
        rc.*field = static_cast<std::size_t>(parse_uint(k, v, lo, hi));
    };
}

Setter string_setter(std::string RunConfig::*field) {
    return [=](RunConfig &rc, const std::string &, const std::string &v) { rc.*field = v; };
}

Setter bool_setter(bool RunConfig::*field) {
    return [=](RunConfig &rc, const std::string &k, const std::string &v) {
        rc.*field = parse_bool(k, v);
    };
}

const std::map<std::string, Setter> &setters() {
    constexpr std::uint64_t kBig = 1ULL << 40;
    static const std::map<std::string, Setter> table = {
        {"days", size_setter(&RunConfig::days, 1, 3660)},
        {"capacity_mw",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.capacity_mw = parse_real(k, v, 0.0, 1e6, true, false, "(0, 1e6]");
         }},
        {"seasonal_amp",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.seasonal_amp = parse_real(k, v, 0.0, 1.0, false, true, "[0, 1)");
         }},
        {"cloud_amp",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.cloud_amp = parse_real(k, v, 0.0, 1.0, false, false, "[0, 1]");
         }},
        {"noise_sd",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.noise_sd = parse_real(k, v, 0.0, 1.0, false, false, "[0, 1]");
         }},
        {"input", string_setter(&RunConfig::input)},
        {"schema",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.schema = parse_enum(k, v, "real_plant or simulated",
                                    [](const std::string &s) { return schema_from_string(s); });
         }},
        {"step_minutes",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.step_minutes = static_cast<std::int64_t>(parse_uint(k, v, 1, 1440));
         }},
        {"lags",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.lags.clear();
             if (v.empty() || v == "none") {
                 return;
             }
             for (const auto &item : split(v, ',')) {
                 rc.lags.push_back(static_cast<std::size_t>(parse_uint(k, item, 1, 1000)));
             }
         }},
        {"train_ratio",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.train_ratio = parse_real(k, v, 0.0, 1.0, true, true, "(0, 1)");
         }},
        {"model",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.model = parse_enum(k, v, "classical or quantum",
                                   [](const std::string &s) { return model_kind_from_string(s); });
         }},
        {"hidden", size_setter(&RunConfig::hidden, 1, 256)},
        {"n_layers", size_setter(&RunConfig::n_layers, 0, 2)},
        {"dropout",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.dropout = parse_real(k, v, 0.0, 1.0, false, true, "[0, 1)");
         }},
        {"n_qubits", size_setter(&RunConfig::n_qubits, 2, 8)},
        {"n_qlayers", size_setter(&RunConfig::n_qlayers, 1, 4)},
        {"n_vrotations", size_setter(&RunConfig::n_vrotations, 1, 12)},
        {"vqc_mode",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.vqc_mode = parse_enum(k, v, "four or six",
                                      [](const std::string &s) { return vqc_mode_from_string(s); });
         }},
        {"entangle",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.entangle = parse_enum(k, v, "staircase or ring", [](const std::string &s) {
                 return entangler_from_string(s);
             });
         }},
        {"shared_out_proj", bool_setter(&RunConfig::shared_out_proj)},
        {"data", string_setter(&RunConfig::data)},
        {"target", string_setter(&RunConfig::target)},
        {"features",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.features.clear();
             if (v.empty() || v == "all") {
                 return;
             }
             for (auto &item : split(v, ',')) {
                 if (item.empty()) {
                     bad_value(k, v, "a comma-separated list of column names");
                 }
                 rc.features.push_back(std::move(item));
             }
         }},
        {"window", size_setter(&RunConfig::window, 1, 512)},
        {"batch_size", size_setter(&RunConfig::batch_size, 1, kBig)},
        {"lr",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.lr = parse_real(k, v, 0.0, 10.0, true, false, "(0, 10]");
         }},
        {"epochs", size_setter(&RunConfig::epochs, 1, 100000)},
        {"seed",
         [](RunConfig &rc, const std::string &k, const std::string &v) {
             rc.seed = parse_uint(k, v, 0, std::numeric_limits<std::uint64_t>::max());
         }},
        {"shuffle", bool_setter(&RunConfig::shuffle)},
        {"train_limit", size_setter(&RunConfig::train_limit, 0, kBig)},
        {"threads", size_setter(&RunConfig::threads, 1, 256)},
        {"no_timing", bool_setter(&RunConfig::no_timing)},
        {"checkpoint", string_setter(&RunConfig::checkpoint)},
        {"horizon", size_setter(&RunConfig::horizon, 0, kBig)},
        {"extended_metrics", bool_setter(&RunConfig::extended_metrics)},
        {"history_a", string_setter(&RunConfig::history_a)},
        {"history_b", string_setter(&RunConfig::history_b)},
        {"label_a", string_setter(&RunConfig::label_a)},
        {"label_b", string_setter(&RunConfig::label_b)},
        {"grid", string_setter(&RunConfig::grid)},
        {"out", string_setter(&RunConfig::out)},
    };
    return table;
}

// Keys a grid may sweep over.
const std::vector<std::string> kGridKeys = {
    "model",    "hidden",          "n_layers", "dropout",    "n_qubits", "n_qlayers",
    "n_vrotations", "vqc_mode",    "entangle", "shared_out_proj", "window", "batch_size",
    "lr",       "epochs"};

constexpr std::size_t kMaxGridPoints = 64;

// ---------------------------------------------------------------------------
// Shared helpers for the commands
// ---------------------------------------------------------------------------

fs::path output_dir(const RunConfig &rc) {
    const fs::path dir = rc.out.empty() ? fs::path(".") : fs::path(rc.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    return dir;
}

void write_json(const ojson &j, const fs::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw DataError("write failed for '" + path.string() + "'");
    }
}

std::ofstream open_output(const fs::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    return out;
}

fs::path require_file(const std::string &path, const std::string &what) {
    if (path.empty()) {
        throw ConfigError("missing required setting: " + what);
    }
    if (!fs::is_regular_file(path)) {
        throw DataError(what + " '" + path + "' does not exist");
    }
    return path;
}

struct ProcessedData {
    TimeSeriesFrame train;
    TimeSeriesFrame test;
    ScalerParams scaler;
};

ProcessedData load_processed(const RunConfig &rc) {
    if (rc.data.empty()) {
        throw ConfigError("missing required setting: data (directory written by preprocess)");
    }
    const fs::path dir(rc.data);
    ProcessedData d;
    d.train = read_frame_csv(require_file((dir / "train.csv").string(), "training data"));
    d.test = read_frame_csv(require_file((dir / "test.csv").string(), "test data"));
    d.scaler = load_scaler(require_file((dir / "scaler.json").string(), "scaler sidecar"));
    return d;
}

WindowedDataset head(const WindowedDataset &ds, std::size_t n) {
    if (n == 0 || n >= ds.size()) {
        return ds;
    }
    WindowedDataset out = ds;
    const std::size_t stride = ds.window * ds.n_features;
    out.inputs.resize(n * stride);
    out.targets.resize(n);
    out.target_times.resize(n);
    return out;
}

struct TrainOutcome {
    StackModel model;
    EpochHistory history;
    WindowedDataset test;
    std::vector<double> test_pred;
};

TrainOutcome train_model(const RunConfig &rc, const ProcessedData &data, std::ostream *log) {
    const auto target = rc.target_or_default();
    const auto train_ds = head(make_windows(data.train, rc.window, target, rc.features),
                               rc.train_limit);
    auto test_ds = make_windows(data.test, rc.window, target, rc.features);
    (void)data.scaler.range(target);

    auto model = StackModel::initialized(rc.stack_config(train_ds.n_features), rc.seed);
    const auto tc = rc.train_config();
    EpochCallback cb;
    if (log != nullptr) {
        cb = [&](std::size_t e, double tr, double te) {
            *log << "epoch " << e << '/' << tc.epochs << " train_loss=" << format_double(tr)
                 << " test_loss=" << format_double(te) << '\n';
        };
    }
    auto history = train(model, train_ds, test_ds, tc, cb);
    auto pred = predict_all(model, test_ds, rc.threads);
    return {std::move(model), std::move(history), std::move(test_ds), std::move(pred)};
}

ojson metrics_json(const WindowedDataset &ds, std::span<const double> pred,
                   const ScalerParams &scaler, bool extended) {
    const auto actual_phys = inverse_transform(ds.targets, scaler, ds.target_name);
    const auto pred_phys = inverse_transform(pred, scaler, ds.target_name);
    ojson j;
    j["target"] = ds.target_name;
    j["n"] = ds.size();
    j["scaled"] = to_json(metric_report(ds.targets, pred));
    j["physical"] = to_json(metric_report(actual_phys, pred_phys));
    if (extended) {
        j["extended"] = {{"scaled", to_json(extended_metrics(ds.targets, pred))},
                         {"physical", to_json(extended_metrics(actual_phys, pred_phys))}};
    }
    return j;
}

void write_predictions(const fs::path &dir, const WindowedDataset &ds,
                       std::span<const double> pred, const ScalerParams &scaler) {
    const auto actual = inverse_transform(ds.targets, scaler, ds.target_name);
    const auto predicted = inverse_transform(pred, scaler, ds.target_name);
    auto p = open_output(dir / "predictions.csv");
    auto r = open_output(dir / "residuals.csv");
    p << "timestamp,actual,predicted\n";
    r << "timestamp,residual\n";
    for (std::size_t k = 0; k < pred.size(); ++k) {
        const auto ts = format_timestamp(ds.target_times[k]);
        p << ts << ',' << format_double(actual[k]) << ',' << format_double(predicted[k]) << '\n';
        r << ts << ',' << format_double(actual[k] - predicted[k]) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_synth(const RunConfig &rc, std::ostream &out) {
    const auto cfg = rc.synth_config();
    const auto frame = synth_solar(cfg);
    const auto dir = output_dir(rc);
    write_schema_csv(frame, Schema::Simulated, dir / "synth.csv");
    ojson manifest;
    manifest["file"] = "synth.csv";
    manifest["schema"] = std::string(to_string(Schema::Simulated));
    manifest["rows"] = frame.rows();
    manifest["generator"] = cfg.to_json();
    write_json(manifest, dir / "synth_manifest.json");
    out << "wrote " << (dir / "synth.csv").string() << " (" << frame.rows() << " rows)\n";
    return kOk;
}

int cmd_preprocess(const RunConfig &rc, std::ostream &out) {
    const auto input = require_file(rc.input, "input");
    const auto raw = load_csv(input, rc.schema);
    const auto resampled = interpolate_to_target(raw, rc.step_minutes * 60);
    const auto engineered = engineer_features(resampled, rc.lags);
    const auto [train, test] = split_chronological(engineered, rc.train_ratio);
    if (train.rows() == 0 || test.rows() == 0) {
        throw DataError("split of " + std::to_string(engineered.rows()) +
                        " rows leaves an empty partition");
    }
    const auto scaler = fit_scaler(train);
    const auto dir = output_dir(rc);
    write_frame_csv(transform(train, scaler), dir / "train.csv");
    write_frame_csv(transform(test, scaler), dir / "test.csv");
    save_scaler(scaler, dir / "scaler.json");
    out << "wrote " << (dir / "train.csv").string() << " (" << train.rows() << " rows), "
        << (dir / "test.csv").string() << " (" << test.rows() << " rows), "
        << (dir / "scaler.json").string() << '\n';
    return kOk;
}

int cmd_train(const RunConfig &rc, std::ostream &out) {
    const auto data = load_processed(rc);
    const auto result = train_model(rc, data, &out);
    const auto dir = output_dir(rc);

    Checkpoint ckpt;
    ckpt.config = result.model.config();
    ckpt.params = result.model.params();
    ckpt.seed = rc.seed;
    ckpt.scaler = data.scaler;
    ckpt.feature_names = result.test.feature_names;
    ckpt.target_name = result.test.target_name;
    save_checkpoint(ckpt, dir / "checkpoint.qsf");
    result.history.write_csv(dir / "history.csv");
    write_json(metrics_json(result.test, result.test_pred, data.scaler, rc.extended_metrics),
               dir / "metrics.json");
    write_predictions(dir, result.test, result.test_pred, data.scaler);
    out << "wrote " << (dir / "checkpoint.qsf").string() << ", history.csv, metrics.json, "
        << "predictions.csv, residuals.csv\n";
    return kOk;
}

int cmd_predict(const RunConfig &rc, std::ostream &out, bool with_metrics) {
    const auto ckpt = load_checkpoint(require_file(rc.checkpoint, "checkpoint"));
    const auto frame = read_frame_csv(require_file(rc.input, "input"));
    for (const auto &name : ckpt.feature_names) {
        if (frame.find(name) == nullptr) {
            throw DataError("input lacks feature column '" + name + "' required by the checkpoint");
        }
        (void)ckpt.scaler.range(name);
    }
    (void)ckpt.scaler.range(ckpt.target_name);
    auto ds = make_windows(frame, ckpt.config.window, ckpt.target_name, ckpt.feature_names);
    if (rc.horizon > ds.size()) {
        throw DataError("horizon " + std::to_string(rc.horizon) + " exceeds the " +
                        std::to_string(ds.size()) + " windows available in '" + rc.input + "'");
    }
    ds = head(ds, rc.horizon);
    const auto model = ckpt.model();
    const auto pred = predict_all(model, ds, rc.threads);
    const auto dir = output_dir(rc);
    write_predictions(dir, ds, pred, ckpt.scaler);
    out << "wrote " << (dir / "predictions.csv").string() << " (" << pred.size() << " rows)\n";
    if (with_metrics) {
        const auto j = metrics_json(ds, pred, ckpt.scaler, rc.extended_metrics);
        write_json(j, dir / "metrics.json");
        out << "scaled mse=" << format_double(j["scaled"]["mse"].get<double>()) << '\n';
    }
    return kOk;
}

ojson model_summary(const std::string &label, const std::string &file, const EpochHistory &h) {
    ojson j;
    j["label"] = label;
    j["file"] = file;
    j["epochs"] = h.epochs();
    j["convergence_epoch"] = convergence_epoch(h.test_loss);
    j["epoch1_test_loss"] = json_number(h.test_loss.front());
    j["final_test_loss"] = json_number(h.test_loss.back());
    j["min_test_loss"] = json_number(*std::min_element(h.test_loss.begin(), h.test_loss.end()));
    j["mean_wall_seconds"] = json_number(sample_mean(h.wall_seconds));
    j["stability"] = to_json(stability(h));
    return j;
}

ojson loss_tests(const std::vector<double> &a, const std::vector<double> &b) {
    ojson j;
    j["paired"] = a.size() == b.size() ? to_json(t_test(a, b, TestKind::Paired)) : ojson(nullptr);
    j["pooled"] = to_json(t_test(a, b, TestKind::PooledIndependent));
    return j;
}

int cmd_compare(const RunConfig &rc, std::ostream &out) {
    const auto a = EpochHistory::read_csv(require_file(rc.history_a, "history_a"));
    const auto b = EpochHistory::read_csv(require_file(rc.history_b, "history_b"));
    for (const auto *h : {&a, &b}) {
        if (h->epochs() < 2) {
            throw DataError("comparison needs at least 2 epochs per history");
        }
    }
    ojson j;
    j["models"] = {model_summary(rc.label_a, rc.history_a, a),
                   model_summary(rc.label_b, rc.history_b, b)};
    j["difference"] = rc.label_a + " - " + rc.label_b;
    j["train_loss"] = loss_tests(a.train_loss, b.train_loss);
    j["test_loss"] = loss_tests(a.test_loss, b.test_loss);
    const double e1a = a.test_loss.front();
    const double e1b = b.test_loss.front();
    j["lower_epoch1_test_loss"] = e1a < e1b ? rc.label_a : (e1b < e1a ? rc.label_b : "tie");

    const auto dir = output_dir(rc);
    write_json(j, dir / "compare.json");
    out << rc.label_a << ": convergence epoch " << j["models"][0]["convergence_epoch"] << ", "
        << rc.label_b << ": convergence epoch " << j["models"][1]["convergence_epoch"] << '\n';
    out << "test loss pooled t=" << j["test_loss"]["pooled"]["t_statistic"].dump()
        << " p=" << j["test_loss"]["pooled"]["p_value"].dump() << '\n';
    out << "wrote " << (dir / "compare.json").string() << '\n';
    return kOk;
}

std::vector<std::pair<std::string, std::vector<std::string>>> parse_grid(const std::string &text) {
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    if (trim(text).empty()) {
        throw ConfigError("grid needs axes like 'hidden=8,16;lr=0.001,0.01'");
    }
    std::size_t combos = 1;
    for (const auto &part : split(text, ';')) {
        if (part.empty()) {
            continue;
        }
        const auto eq = part.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("grid axis '" + part + "' must look like key=v1,v2");
        }
        const auto key = trim(std::string_view(part).substr(0, eq));
        if (std::find(kGridKeys.begin(), kGridKeys.end(), key) == kGridKeys.end()) {
            throw ConfigError("'" + key + "' cannot be searched over in a grid");
        }
        for (const auto &[k, _] : axes) {
            if (k == key) {
                throw ConfigError("grid axis '" + key + "' appears twice");
            }
        }
        auto values = split(std::string_view(part).substr(eq + 1), ',');
        if (values.empty() || std::any_of(values.begin(), values.end(),
                                          [](const std::string &v) { return v.empty(); })) {
            throw ConfigError("grid axis '" + key + "' has an empty value");
        }
        combos *= values.size();
        if (combos > kMaxGridPoints) {
            throw ConfigError("grid has more than " + std::to_string(kMaxGridPoints) +
                              " combinations");
        }
        axes.emplace_back(key, std::move(values));
    }
    if (axes.empty()) {
        throw ConfigError("grid string has no axes");
    }
    return axes;
}

int cmd_grid(const RunConfig &rc, const KeyValues &base, std::ostream &out) {
    const auto axes = parse_grid(rc.grid);
    std::size_t combos = 1;
    for (const auto &ax : axes) {
        combos *= ax.second.size();
    }
    // Validate every point before spending time on training.
    std::vector<std::pair<RunConfig, std::vector<std::string>>> points;
    for (std::size_t c = 0; c < combos; ++c) {
        KeyValues kv = base;
        std::vector<std::string> chosen;
        std::size_t rem = c;
        std::vector<std::size_t> pick(axes.size());
        for (std::size_t a = axes.size(); a-- > 0;) {
            pick[a] = rem % axes[a].second.size();
            rem /= axes[a].second.size();
        }
        for (std::size_t a = 0; a < axes.size(); ++a) {
            kv[axes[a].first] = axes[a].second[pick[a]];
            chosen.push_back(axes[a].second[pick[a]]);
        }
        kv.erase("grid");
        points.emplace_back(RunConfig::from_values(kv), std::move(chosen));
    }

    const auto data = load_processed(rc);
    struct Row {
        std::size_t index;
        std::vector<std::string> values;
        double train_loss;
        MetricReport metrics;
    };
    std::vector<Row> rows;
    for (std::size_t c = 0; c < points.size(); ++c) {
        const auto &[cfg, chosen] = points[c];
        const auto result = train_model(cfg, data, nullptr);
        rows.push_back({c, chosen, result.history.train_loss.back(),
                        metric_report(result.test.targets, result.test_pred)});
        out << "point " << (c + 1) << '/' << points.size()
            << " test_mse=" << format_double(rows.back().metrics.mse) << '\n';
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row &x, const Row &y) { return x.metrics.mse < y.metrics.mse; });

    const auto dir = output_dir(rc);
    auto csv = open_output(dir / "grid.csv");
    csv << "rank";
    for (const auto &ax : axes) {
        csv << ',' << ax.first;
    }
    csv << ",final_train_loss,test_mse,test_mae,test_rmse\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        csv << (r + 1);
        for (const auto &v : rows[r].values) {
            csv << ',' << v;
        }
        csv << ',' << format_double(rows[r].train_loss) << ','
            << format_double(rows[r].metrics.mse) << ',' << format_double(rows[r].metrics.mae)
            << ',' << format_double(rows[r].metrics.rmse) << '\n';
    }
    out << "wrote " << (dir / "grid.csv").string() << '\n';
    return kOk;
}

void key_option(CLI::App *app, const std::string &flag, const std::string &key, KeyValues &flags,
                const std::string &help) {
    app->add_option_function<std::string>(
        flag, [&flags, key](const std::string &v) { flags[key] = v; }, help);
}

void key_flag(CLI::App *app, const std::string &flag, const std::string &key, KeyValues &flags,
              const std::string &help) {
    app->add_flag_callback(flag, [&flags, key] { flags[key] = "true"; }, help);
}

void add_model_options(CLI::App *cmd, KeyValues &f) {
    key_option(cmd, "--data", "data", f, "Directory holding train.csv, test.csv and scaler.json");
    key_option(cmd, "--model", "model", f, "classical or quantum");
    key_option(cmd, "--hidden", "hidden", f, "Hidden units per recurrent layer");
    key_option(cmd, "--n-layers", "n_layers", f, "Recurrent layers (0-2)");
    key_option(cmd, "--dropout", "dropout", f, "Dropout rate between layers");
    key_option(cmd, "--n-qubits", "n_qubits", f, "Qubits per circuit (2-8)");
    key_option(cmd, "--n-qlayers", "n_qlayers", f, "Ansatz layers per circuit (1-4)");
    key_option(cmd, "--n-vrotations", "n_vrotations", f, "Rotations per qubit per layer");
    key_option(cmd, "--vqc-mode", "vqc_mode", f, "four or six circuits per cell");
    key_option(cmd, "--entangle", "entangle", f, "staircase or ring");
    key_option(cmd, "--shared-out-proj", "shared_out_proj", f, "Share one output projection");
    key_option(cmd, "--target", "target", f, "Target column");
    key_option(cmd, "--features", "features", f, "Comma-separated feature columns, or 'all'");
    key_option(cmd, "--window", "window", f, "Timesteps per input window");
    key_option(cmd, "--batch-size", "batch_size", f, "Samples per Adam update");
    key_option(cmd, "--lr", "lr", f, "Adam learning rate");
    key_option(cmd, "--epochs", "epochs", f, "Training epochs");
    key_option(cmd, "--shuffle", "shuffle", f, "Shuffle training windows each epoch");
    key_option(cmd, "--train-limit", "train_limit", f, "Use only the first N training windows");
}

} // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

KeyValues parse_config_text(std::istream &in, const std::string &source) {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const auto key = trim(std::string_view(text).substr(0, eq));
        if (key.empty()) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        }
        if (!kv.emplace(key, trim(std::string_view(text).substr(eq + 1))).second) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": key '" + key +
                              "' set twice");
        }
    }
    return kv;
}

KeyValues read_config_file(const fs::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open config file '" + path.string() + "'");
    }
    return parse_config_text(in, path.string());
}

RunConfig RunConfig::from_values(const KeyValues &values) {
    RunConfig rc;
    const auto &table = setters();
    for (const auto &[key, value] : values) {
        const auto it = table.find(key);
        if (it == table.end()) {
            throw ConfigError("unknown setting '" + key + "'");
        }
        it->second(rc, key, value);
    }
    return rc;
}

const std::vector<std::string> &RunConfig::known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto &[name, _] : setters()) {
            k.push_back(name);
        }
        return k;
    }();
    return keys;
}

std::string RunConfig::target_or_default() const {
    return target.empty() ? default_target(schema) : target;
}

StackConfig RunConfig::stack_config(std::size_t n_features) const {
    StackConfig cfg;
    cfg.kind = model;
    cfg.n_layers = n_layers;
    cfg.hidden = hidden;
    cfg.dropout = dropout;
    cfg.n_features = n_features;
    cfg.window = window;
    cfg.vqc_shape = {n_qubits, n_qlayers, n_vrotations};
    cfg.entangler = entangle;
    cfg.vqc_mode = vqc_mode;
    cfg.shared_out_proj = shared_out_proj;
    cfg.validate();
    return cfg;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch_size;
    tc.lr = lr;
    tc.seed = seed;
    tc.shuffle_train = shuffle;
    tc.threads = threads;
    tc.record_wall_time = !no_timing;
    return tc;
}

SynthConfig RunConfig::synth_config() const {
    SynthConfig sc;
    sc.days = days;
    sc.step_minutes = step_minutes;
    sc.seed = seed;
    sc.capacity_mw = capacity_mw;
    sc.seasonal_amp = seasonal_amp;
    sc.cloud_amp = cloud_amp;
    sc.noise_sd = noise_sd;
    return sc;
}

std::size_t convergence_epoch(const std::vector<double> &test_loss) {
    if (test_loss.empty()) {
        throw DataError("convergence epoch of an empty history");
    }
    const double best = *std::min_element(test_loss.begin(), test_loss.end());
    const double bound = best + 0.01 * std::abs(best);
    for (std::size_t e = 0; e < test_loss.size(); ++e) {
        if (test_loss[e] <= bound) {
            return e + 1;
        }
    }
    return test_loss.size();
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Quantum and classical LSTM solar power forecasting"};
    app.name("qsf");
    app.require_subcommand(1);
    app.fallthrough();

    KeyValues flags;
    std::string config_path;
    app.add_option("--config", config_path, "Flat key=value config file");
    key_option(&app, "--seed", "seed", flags, "Random seed");
    key_option(&app, "--out", "out", flags, "Output directory (default $QSF_OUT or .)");
    key_option(&app, "--threads", "threads", flags, "Worker threads for batch gradients");
    key_flag(&app, "--extended-metrics", "extended_metrics", flags, "Also report MAPE and R^2");
    key_flag(&app, "--no-timing", "no_timing", flags, "Record wall_seconds as 0");

    auto *synth = app.add_subcommand("synth", "Write a synthetic solar plant dataset");
    key_option(synth, "--days", "days", flags, "Days to generate");
    key_option(synth, "--step-minutes", "step_minutes", flags, "Sampling interval");
    key_option(synth, "--capacity-mw", "capacity_mw", flags, "Plant capacity");
    key_option(synth, "--seasonal-amp", "seasonal_amp", flags, "Seasonal modulation amplitude");
    key_option(synth, "--cloud-amp", "cloud_amp", flags, "Daily cloud attenuation amplitude");
    key_option(synth, "--noise-sd", "noise_sd", flags, "Noise level relative to capacity");

    auto *pre = app.add_subcommand("preprocess", "Resample, engineer features, split and scale");
    key_option(pre, "--input", "input", flags, "Raw CSV");
    key_option(pre, "--schema", "schema", flags, "real_plant or simulated");
    key_option(pre, "--step-minutes", "step_minutes", flags, "Resampling interval");
    key_option(pre, "--lags", "lags", flags, "Comma-separated lag steps, or 'none'");
    key_option(pre, "--train-ratio", "train_ratio", flags, "Chronological train fraction");

    auto *trn = app.add_subcommand("train", "Train a model on preprocessed data");
    add_model_options(trn, flags);
    key_option(trn, "--schema", "schema", flags, "Schema used to pick the default target");

    auto *eval = app.add_subcommand("evaluate", "Predict with a checkpoint and report metrics");
    auto *pred = app.add_subcommand("predict", "Predict with a checkpoint");
    for (auto *cmd : {eval, pred}) {
        key_option(cmd, "--checkpoint", "checkpoint", flags, "Checkpoint written by train");
        key_option(cmd, "--input", "input", flags, "Scaled frame CSV (train.csv or test.csv)");
        key_option(cmd, "--horizon", "horizon", flags, "Predict only the first N windows");
    }

    auto *cmp = app.add_subcommand("compare", "Compare two training histories");
    key_option(cmp, "history_a", "history_a", flags, "First history.csv");
    key_option(cmp, "history_b", "history_b", flags, "Second history.csv");
    key_option(cmp, "--label-a", "label_a", flags, "Name of the first model");
    key_option(cmp, "--label-b", "label_b", flags, "Name of the second model");

    auto *grid = app.add_subcommand("grid", "Exhaustive hyperparameter grid (at most 64 points)");
    add_model_options(grid, flags);
    key_option(grid, "--schema", "schema", flags, "Schema used to pick the default target");
    key_option(grid, "--grid", "grid", flags, "Axes such as 'hidden=8,16;lr=0.001,0.01'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }

    try {
        KeyValues merged;
        if (!config_path.empty()) {
            merged = read_config_file(config_path);
        }
        for (const auto &[k, v] : flags) {
            merged[k] = v;
        }
        if (merged.find("out") == merged.end()) {
            if (const char *env = std::getenv("QSF_OUT"); env != nullptr && *env != '\0') {
                merged["out"] = env;
            }
        }
        const auto rc = RunConfig::from_values(merged);

        if (app.got_subcommand(synth)) {
            return cmd_synth(rc, out);
        }
        if (app.got_subcommand(pre)) {
            return cmd_preprocess(rc, out);
        }
        if (app.got_subcommand(trn)) {
            return cmd_train(rc, out);
        }
        if (app.got_subcommand(eval)) {
            return cmd_predict(rc, out, true);
        }
        if (app.got_subcommand(pred)) {
            return cmd_predict(rc, out, false);
        }
        if (app.got_subcommand(cmp)) {
            return cmd_compare(rc, out);
        }
        return cmd_grid(rc, merged, out);
    } catch (const ConfigError &e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const TrainingError &e) {
        err << "training failed: " << e.what() << '\n';
        return kTrainingError;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
}

} // namespace qsf::cli
