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
#include "qsf/datapipe.hpp"

#include "qsf/errors.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace qsf {

namespace {

namespace chr = std::chrono;

struct SchemaColumn {
    const char *name;
    ColumnRole role;
};

struct SchemaDef {
    const char *datetime;
    std::vector<SchemaColumn> columns;
    bool day_first_allowed;
};

const SchemaDef &schema_def(Schema s) {
    static const SchemaDef real_plant{"DATE_TIME",
                                      {{"DC_POWER", ColumnRole::Power},
                                       {"AC_POWER", ColumnRole::Power},
                                       {"DAILY_YIELD", ColumnRole::Power},
                                       {"TOTAL_YIELD", ColumnRole::Power},
                                       {"AMBIENT_TEMPERATURE", ColumnRole::Weather},
                                       {"MODULE_TEMPERATURE", ColumnRole::Weather},
                                       {"IRRADIATION", ColumnRole::Weather}},
                                      true};
    static const SchemaDef simulated{"datetime",
                                     {{"power_mw", ColumnRole::Power},
                                      {"temperature", ColumnRole::Weather},
                                      {"dhi", ColumnRole::Weather},
                                      {"cloud_type", ColumnRole::Weather},
                                      {"relative_humidity", ColumnRole::Weather},
                                      {"dew_point", ColumnRole::Weather},
                                      {"pressure", ColumnRole::Weather},
                                      {"wind_speed", ColumnRole::Weather},
                                      {"solar_angle", ColumnRole::Weather}},
                                     false};
    return s == Schema::RealPlant ? real_plant : simulated;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) {
        s.remove_prefix(1);
    }
    while (!s.empty() &&
           (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) {
        return std::nullopt;
    }
    if (s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

bool parse_int(std::string_view s, int &out) {
    if (s.empty()) {
        return false;
    }
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::optional<Timestamp> make_timestamp(int y, int mo, int d, int h, int mi, int s) {
    const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(mo)},
                                  chr::day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 59) {
        return std::nullopt;
    }
    const auto days = chr::sys_days{ymd}.time_since_epoch().count();
    return static_cast<Timestamp>(days) * 86400 + h * 3600 + mi * 60 + s;
}

std::string describe_row(const std::string &source, std::size_t data_row) {
    return source + ": row " + std::to_string(data_row);
}

} // namespace

std::string_view to_string(Schema s) {
    return s == Schema::RealPlant ? "real_plant" : "simulated";
}

Schema schema_from_string(std::string_view s) {
    if (s == "real_plant") {
        return Schema::RealPlant;
    }
    if (s == "simulated") {
        return Schema::Simulated;
    }
    throw ConfigError("unknown schema '" + std::string(s) +
                      "' (expected real_plant or simulated)");
}

std::string default_target(Schema s) { return s == Schema::RealPlant ? "AC_POWER" : "power_mw"; }

// ---------------------------------------------------------------------------
// Frame
// ---------------------------------------------------------------------------

const Column *TimeSeriesFrame::find(std::string_view name) const {
    for (const auto &c : columns) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

const Column &TimeSeriesFrame::column(std::string_view name) const {
    if (const auto *c = find(name)) {
        return *c;
    }
    throw DataError("frame has no column '" + std::string(name) + "'");
}

std::vector<std::string> TimeSeriesFrame::column_names() const {
    std::vector<std::string> names;
    names.reserve(columns.size());
    for (const auto &c : columns) {
        names.push_back(c.name);
    }
    return names;
}

TimeSeriesFrame TimeSeriesFrame::slice(std::size_t begin, std::size_t end) const {
    end = std::min(end, rows());
    begin = std::min(begin, end);
    TimeSeriesFrame out;
    out.timestamps.assign(timestamps.begin() + begin, timestamps.begin() + end);
    for (const auto &c : columns) {
        out.columns.push_back(
            {c.name, c.role, std::vector<double>(c.values.begin() + begin, c.values.begin() + end)});
    }
    return out;
}

void TimeSeriesFrame::validate() const {
    for (std::size_t r = 1; r < timestamps.size(); ++r) {
        if (timestamps[r] <= timestamps[r - 1]) {
            throw DataError("timestamps not strictly increasing at row " + std::to_string(r + 1) +
                            " (" + format_timestamp(timestamps[r]) + " after " +
                            format_timestamp(timestamps[r - 1]) + ")");
        }
    }
    for (const auto &c : columns) {
        if (c.values.size() != timestamps.size()) {
            throw DataError("column '" + c.name + "' has " + std::to_string(c.values.size()) +
                            " values for " + std::to_string(timestamps.size()) + " timestamps");
        }
        for (std::size_t r = 0; r < c.values.size(); ++r) {
            if (!std::isfinite(c.values[r])) {
                throw DataError("non-finite value at row " + std::to_string(r + 1) +
                                ", column '" + c.name + "'");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Timestamps
// ---------------------------------------------------------------------------

std::optional<Timestamp> parse_timestamp(std::string_view text, bool allow_day_first) {
    text = trim(text);
    const auto space = text.find(' ');
    if (space == std::string_view::npos) {
        return std::nullopt;
    }
    const auto date = text.substr(0, space);
    const auto time = trim(text.substr(space + 1));

    int h = 0;
    int mi = 0;
    int s = 0;
    if (time.size() == 8 && time[2] == ':' && time[5] == ':') {
        if (!parse_int(time.substr(0, 2), h) || !parse_int(time.substr(3, 2), mi) ||
            !parse_int(time.substr(6, 2), s)) {
            return std::nullopt;
        }
    } else if (time.size() == 5 && time[2] == ':') {
        if (!parse_int(time.substr(0, 2), h) || !parse_int(time.substr(3, 2), mi)) {
            return std::nullopt;
        }
    } else {
        return std::nullopt;
    }

    int y = 0;
    int mo = 0;
    int d = 0;
    if (date.size() == 10 && date[4] == '-' && date[7] == '-') {
        if (!parse_int(date.substr(0, 4), y) || !parse_int(date.substr(5, 2), mo) ||
            !parse_int(date.substr(8, 2), d)) {
            return std::nullopt;
        }
    } else if (allow_day_first && date.size() == 10 && date[2] == '-' && date[5] == '-') {
        if (!parse_int(date.substr(0, 2), d) || !parse_int(date.substr(3, 2), mo) ||
            !parse_int(date.substr(6, 4), y)) {
            return std::nullopt;
        }
    } else {
        return std::nullopt;
    }
    return make_timestamp(y, mo, d, h, mi, s);
}

CalendarFields calendar(Timestamp t) {
    auto days = t / 86400;
    auto secs = t % 86400;
    if (secs < 0) {
        secs += 86400;
        days -= 1;
    }
    const chr::sys_days sd{chr::days{days}};
    const chr::year_month_day ymd{sd};
    const chr::weekday wd{sd};
    const chr::sys_days jan1{ymd.year() / chr::January / 1};
    CalendarFields f{};
    f.hour = static_cast<int>(secs / 3600);
    f.minute = static_cast<int>((secs % 3600) / 60);
    f.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
    f.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
    f.day_of_week = static_cast<int>(wd.iso_encoding()) - 1;
    f.day_of_year = static_cast<int>((sd - jan1).count()) + 1;
    return f;
}

std::string format_timestamp(Timestamp t) {
    const chr::sys_seconds tp{chr::seconds{t}};
    const auto day = chr::floor<chr::days>(tp);
    const chr::year_month_day ymd{day};
    const chr::hh_mm_ss hms{tp - day};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

TimeSeriesFrame parse_csv(std::istream &in, Schema schema, const std::string &source) {
    const auto &def = schema_def(schema);
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(source + ": empty file");
    }
    const auto header = split_csv_line(line);
    auto locate = [&](std::string_view name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return i;
            }
        }
        throw DataError(source + ": missing required column '" + std::string(name) + "' for " +
                        std::string(to_string(schema)) + " schema");
    };
    const std::size_t dt_col = locate(def.datetime);
    std::vector<std::size_t> idx;
    TimeSeriesFrame frame;
    for (const auto &c : def.columns) {
        idx.push_back(locate(c.name));
        frame.columns.push_back({c.name, c.role, {}});
    }

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        ++row;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw DataError(describe_row(source, row) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(cells.size()));
        }
        const auto ts = parse_timestamp(cells[dt_col], def.day_first_allowed);
        if (!ts) {
            throw DataError(describe_row(source, row) + ", column '" + def.datetime +
                            "': unparseable datetime '" + std::string(cells[dt_col]) + "'");
        }
        if (!frame.timestamps.empty() && *ts <= frame.timestamps.back()) {
            throw DataError(describe_row(source, row) + ": timestamp " + format_timestamp(*ts) +
                            (*ts == frame.timestamps.back() ? " duplicates" : " precedes") +
                            " the previous row");
        }
        frame.timestamps.push_back(*ts);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const auto v = parse_number(cells[idx[k]]);
            if (!v) {
                throw DataError(describe_row(source, row) + ", column '" + def.columns[k].name +
                                "': missing or non-numeric value '" +
                                std::string(cells[idx[k]]) + "'");
            }
            frame.columns[k].values.push_back(*v);
        }
    }
    if (frame.rows() == 0) {
        throw DataError(source + ": no data rows");
    }
    return frame;
}

TimeSeriesFrame load_csv(const std::filesystem::path &path, Schema schema) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    return parse_csv(in, schema, path.string());
}

TimeSeriesFrame read_frame_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    const std::string source = path.string();
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(source + ": empty file");
    }
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "timestamp") {
        throw DataError(source + ": first column must be 'timestamp'");
    }
    TimeSeriesFrame frame;
    for (std::size_t i = 1; i < header.size(); ++i) {
        frame.columns.push_back({std::string(header[i]), ColumnRole::Other, {}});
    }
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        ++row;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw DataError(describe_row(source, row) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(cells.size()));
        }
        const auto ts = parse_timestamp(cells[0]);
        if (!ts) {
            throw DataError(describe_row(source, row) + ": unparseable timestamp '" +
                            std::string(cells[0]) + "'");
        }
        frame.timestamps.push_back(*ts);
        for (std::size_t k = 1; k < cells.size(); ++k) {
            const auto v = parse_number(cells[k]);
            if (!v) {
                throw DataError(describe_row(source, row) + ", column '" + std::string(header[k]) +
                                "': missing or non-numeric value");
            }
            frame.columns[k - 1].values.push_back(*v);
        }
    }
    frame.validate();
    return frame;
}

void write_frame_csv(const TimeSeriesFrame &frame, std::ostream &out) {
    out << "timestamp";
    for (const auto &c : frame.columns) {
        out << ',' << c.name;
    }
    out << '\n';
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        out << format_timestamp(frame.timestamps[r]);
        for (const auto &c : frame.columns) {
            out << ',' << format_double(c.values[r]);
        }
        out << '\n';
    }
}

void write_frame_csv(const TimeSeriesFrame &frame, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    write_frame_csv(frame, out);
    if (!out) {
        throw DataError("write failed for '" + path.string() + "'");
    }
}

void write_schema_csv(const TimeSeriesFrame &frame, Schema schema, std::ostream &out) {
    const auto &def = schema_def(schema);
    std::vector<const Column *> cols;
    for (const auto &sc : def.columns) {
        cols.push_back(&frame.column(sc.name));
    }
    out << def.datetime;
    for (const auto *c : cols) {
        out << ',' << c->name;
    }
    out << '\n';
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        out << format_timestamp(frame.timestamps[r]);
        for (const auto *c : cols) {
            out << ',' << format_double(c->values[r]);
        }
        out << '\n';
    }
}

void write_schema_csv(const TimeSeriesFrame &frame, Schema schema,
                      const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    write_schema_csv(frame, schema, out);
    if (!out) {
        throw DataError("write failed for '" + path.string() + "'");
    }
}

// ---------------------------------------------------------------------------
// Resampling and features
// ---------------------------------------------------------------------------

TimeSeriesFrame interpolate_to_target(const TimeSeriesFrame &frame, std::int64_t step_seconds) {
    if (step_seconds <= 0) {
        throw DataError("interpolation step must be positive");
    }
    if (frame.rows() == 0) {
        throw DataError("cannot interpolate an empty frame");
    }
    std::vector<std::int64_t> gaps;
    for (std::size_t r = 1; r < frame.rows(); ++r) {
        const auto gap = frame.timestamps[r] - frame.timestamps[r - 1];
        if (gap <= 0 || gap % step_seconds != 0) {
            throw DataError("spacing of " + std::to_string(gap) + " s at row " +
                            std::to_string(r + 1) + " is not a multiple of the " +
                            std::to_string(step_seconds) + " s target step");
        }
        gaps.push_back(gap / step_seconds);
    }

    TimeSeriesFrame out;
    for (const auto &c : frame.columns) {
        out.columns.push_back({c.name, c.role, {}});
    }
    for (std::size_t r = 0; r + 1 < frame.rows(); ++r) {
        const auto m = gaps[r];
        for (std::int64_t k = 0; k < m; ++k) {
            out.timestamps.push_back(frame.timestamps[r] + k * step_seconds);
            for (std::size_t ci = 0; ci < frame.columns.size(); ++ci) {
                const double a = frame.columns[ci].values[r];
                const double b = frame.columns[ci].values[r + 1];
                out.columns[ci].values.push_back(
                    k == 0 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(m));
            }
        }
    }
    out.timestamps.push_back(frame.timestamps.back());
    for (std::size_t ci = 0; ci < frame.columns.size(); ++ci) {
        out.columns[ci].values.push_back(frame.columns[ci].values.back());
    }
    return out;
}

TimeSeriesFrame engineer_features(const TimeSeriesFrame &frame,
                                  std::span<const std::size_t> lags) {
    std::size_t max_lag = 0;
    for (auto k : lags) {
        if (k < 1) {
            throw DataError("lags must be >= 1");
        }
        max_lag = std::max(max_lag, k);
    }
    if (max_lag >= frame.rows()) {
        throw DataError("max lag " + std::to_string(max_lag) + " needs more than " +
                        std::to_string(frame.rows()) + " rows");
    }

    TimeSeriesFrame full = frame;
    Column hour{"hour", ColumnRole::Temporal, {}};
    Column day{"day", ColumnRole::Temporal, {}};
    Column month{"month", ColumnRole::Temporal, {}};
    Column dow{"day_of_week", ColumnRole::Temporal, {}};
    for (auto t : frame.timestamps) {
        const auto f = calendar(t);
        hour.values.push_back(f.hour);
        day.values.push_back(f.day);
        month.values.push_back(f.month);
        dow.values.push_back(f.day_of_week);
    }
    full.columns.push_back(std::move(hour));
    full.columns.push_back(std::move(day));
    full.columns.push_back(std::move(month));
    full.columns.push_back(std::move(dow));

    for (const auto &c : frame.columns) {
        if (c.role != ColumnRole::Power && c.role != ColumnRole::Weather) {
            continue;
        }
        for (auto k : lags) {
            Column lag{c.name + "_lag" + std::to_string(k), ColumnRole::Lag,
                       std::vector<double>(frame.rows(), 0.0)};
            for (std::size_t r = k; r < frame.rows(); ++r) {
                lag.values[r] = c.values[r - k];
            }
            full.columns.push_back(std::move(lag));
        }
    }
    return full.slice(max_lag, full.rows());
}

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

ScalerParams::ScalerParams(std::vector<ColumnRange> columns)
    : columns_(std::move(columns)), fitted_(true) {
    for (const auto &c : columns_) {
        if (!(c.max >= c.min)) {
            throw DataError("scaler range for '" + c.name + "' has max < min");
        }
    }
}

const ColumnRange &ScalerParams::range(std::string_view column) const {
    if (!fitted_) {
        throw StateError("scaler has not been fitted");
    }
    for (const auto &c : columns_) {
        if (c.name == column) {
            return c;
        }
    }
    throw DataError("scaler has no range for column '" + std::string(column) + "'");
}

nlohmann::ordered_json ScalerParams::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto &c : columns_) {
        j[c.name] = {{"min", c.min}, {"max", c.max}};
    }
    return j;
}

ScalerParams ScalerParams::from_json(const nlohmann::json &j) {
    if (!j.is_object()) {
        throw DataError("scaler JSON must be an object of column -> {min, max}");
    }
    std::vector<ColumnRange> cols;
    for (const auto &[name, v] : j.items()) {
        if (!v.is_object() || !v.contains("min") || !v.contains("max") ||
            !v["min"].is_number() || !v["max"].is_number()) {
            throw DataError("scaler entry '" + name + "' needs numeric min and max");
        }
        cols.push_back({name, v["min"].get<double>(), v["max"].get<double>()});
    }
    return ScalerParams(std::move(cols));
}

ScalerParams fit_scaler(const TimeSeriesFrame &train) {
    if (train.rows() == 0) {
        throw DataError("cannot fit a scaler on an empty frame");
    }
    std::vector<ColumnRange> cols;
    for (const auto &c : train.columns) {
        const auto [lo, hi] = std::minmax_element(c.values.begin(), c.values.end());
        cols.push_back({c.name, *lo, *hi});
    }
    return ScalerParams(std::move(cols));
}

double scale_value(double x, const ColumnRange &r) {
    return r.constant() ? 0.0 : (x - r.min) / (r.max - r.min);
}

double unscale_value(double x, const ColumnRange &r) {
    return r.constant() ? r.min : x * (r.max - r.min) + r.min;
}

TimeSeriesFrame transform(const TimeSeriesFrame &frame, const ScalerParams &scaler) {
    if (!scaler.fitted()) {
        throw StateError("transform requires a fitted scaler");
    }
    TimeSeriesFrame out = frame;
    for (auto &c : out.columns) {
        const auto &r = scaler.range(c.name);
        for (auto &v : c.values) {
            v = scale_value(v, r);
        }
    }
    return out;
}

std::vector<double> inverse_transform(std::span<const double> values, const ScalerParams &scaler,
                                      std::string_view column) {
    const auto &r = scaler.range(column);
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) {
        out.push_back(unscale_value(v, r));
    }
    return out;
}

void save_scaler(const ScalerParams &scaler, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << scaler.to_json().dump(2) << '\n';
}

ScalerParams load_scaler(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open scaler file '" + path.string() + "'");
    }
    try {
        return ScalerParams::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception &e) {
        throw DataError("malformed scaler file '" + path.string() + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Split, windows, batches
// ---------------------------------------------------------------------------

std::pair<TimeSeriesFrame, TimeSeriesFrame> split_chronological(const TimeSeriesFrame &frame,
                                                                double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw DataError("split ratio must lie in (0, 1)");
    }
    if (frame.rows() < 2) {
        throw DataError("need at least 2 rows to split");
    }
    // The small epsilon absorbs representation error in ratios like 0.8.
    const auto cut = static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(frame.rows()) + 1e-9));
    return {frame.slice(0, cut), frame.slice(cut, frame.rows())};
}

WindowedDataset make_windows(const TimeSeriesFrame &frame, std::size_t window,
                             const std::string &target_column,
                             const std::vector<std::string> &features) {
    if (window < 1) {
        throw DataError("window must be >= 1");
    }
    if (frame.rows() <= window) {
        throw DataError("series of length " + std::to_string(frame.rows()) +
                        " is too short for window " + std::to_string(window));
    }
    const auto &target = frame.column(target_column);
    std::vector<const Column *> cols;
    WindowedDataset ds;
    if (features.empty()) {
        for (const auto &c : frame.columns) {
            cols.push_back(&c);
        }
    } else {
        for (const auto &name : features) {
            cols.push_back(&frame.column(name));
        }
    }
    for (const auto *c : cols) {
        ds.feature_names.push_back(c->name);
    }
    ds.window = window;
    ds.n_features = cols.size();
    ds.target_name = target_column;
    const std::size_t n = frame.rows() - window;
    ds.inputs.reserve(n * window * cols.size());
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t t = k; t < k + window; ++t) {
            for (const auto *c : cols) {
                ds.inputs.push_back(c->values[t]);
            }
        }
        ds.targets.push_back(target.values[k + window]);
        ds.target_times.push_back(frame.timestamps[k + window]);
    }
    return ds;
}

std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch_size, bool shuffle,
                                              std::uint64_t seed) {
    if (batch_size < 1) {
        throw ConfigError("batch_size must be >= 1");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (shuffle) {
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
    }
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic plant
// ---------------------------------------------------------------------------

nlohmann::ordered_json SynthConfig::to_json() const {
    return {{"generator", "synth_solar"},
            {"days", days},
            {"step_minutes", step_minutes},
            {"seed", seed},
            {"start", format_timestamp(start)},
            {"capacity_mw", capacity_mw},
            {"seasonal_amp", seasonal_amp},
            {"cloud_amp", cloud_amp},
            {"noise_sd", noise_sd},
            {"irradiance_peak", irradiance_peak}};
}

double synth_daylight(double hour_of_day) {
    if (hour_of_day <= 6.0 || hour_of_day >= 18.0) {
        return 0.0;
    }
    return std::sin(std::numbers::pi * (hour_of_day - 6.0) / 12.0);
}

double synth_season(const SynthConfig &cfg, int day_of_year) {
    return 1.0 + cfg.seasonal_amp *
                     std::cos(2.0 * std::numbers::pi * (day_of_year - 172) / 365.0);
}

double synth_clear_sky_power(const SynthConfig &cfg, Timestamp t) {
    const auto f = calendar(t);
    const double hour = f.hour + f.minute / 60.0;
    return cfg.capacity_mw * synth_season(cfg, f.day_of_year) * synth_daylight(hour);
}

TimeSeriesFrame synth_solar(const SynthConfig &cfg) {
    if (cfg.days < 1) {
        throw ConfigError("synth days must be >= 1");
    }
    if (cfg.step_minutes < 1 || 1440 % cfg.step_minutes != 0) {
        throw ConfigError("synth step_minutes must divide a day evenly");
    }
    const std::size_t per_day = static_cast<std::size_t>(1440 / cfg.step_minutes);
    const std::size_t rows = cfg.days * per_day;

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const auto &def = schema_def(Schema::Simulated);
    TimeSeriesFrame frame;
    for (const auto &c : def.columns) {
        frame.columns.push_back({c.name, c.role, {}});
        frame.columns.back().values.reserve(rows);
    }
    auto col = [&](std::size_t i) -> std::vector<double> & { return frame.columns[i].values; };

    constexpr double two_pi = 2.0 * std::numbers::pi;
    double cloud_u = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const Timestamp t = cfg.start + static_cast<Timestamp>(r) * cfg.step_minutes * 60;
        if (r % per_day == 0) {
            cloud_u = unif(rng);
        }
        const double e_power = gauss(rng);
        const double e_irr = gauss(rng);
        const double e_temp = gauss(rng);
        const double e_rh = gauss(rng);
        const double e_wind = gauss(rng);

        const auto f = calendar(t);
        const double hour = f.hour + f.minute / 60.0;
        const double daylight = synth_daylight(hour);
        const double season = synth_season(cfg, f.day_of_year);
        const double cloud = 1.0 - cfg.cloud_amp * cloud_u;

        double power = 0.0;
        if (daylight > 0.0) {
            power = cfg.capacity_mw * season * daylight * cloud +
                    cfg.noise_sd * cfg.capacity_mw * daylight * e_power;
            power = std::max(0.0, power);
        }
        const double irr = std::max(0.0, cfg.irradiance_peak * season * daylight * cloud +
                                             20.0 * daylight * e_irr);
        const double temp = 22.0 + 8.0 * std::cos(two_pi * (f.day_of_year - 200) / 365.0) +
                            6.0 * std::sin(two_pi * (hour - 9.0) / 24.0) + 0.5 * e_temp;
        const double rh = std::clamp(60.0 - 1.5 * (temp - 22.0) + 2.0 * e_rh, 0.0, 100.0);

        col(0).push_back(power);
        col(1).push_back(temp);
        col(2).push_back(irr);
        col(3).push_back(std::floor(4.0 * cloud_u));
        col(4).push_back(rh);
        col(5).push_back(temp - (100.0 - rh) / 5.0);
        col(6).push_back(1013.0 + 3.0 * std::sin(two_pi * f.day_of_year / 30.0));
        col(7).push_back(std::max(0.0, 3.0 + 1.5 * std::sin(two_pi * hour / 24.0) + 0.5 * e_wind));
        col(8).push_back(90.0 - 90.0 * std::sin(std::numbers::pi * (hour - 6.0) / 12.0));
        frame.timestamps.push_back(t);
    }
    return frame;
}

} // namespace qsf
