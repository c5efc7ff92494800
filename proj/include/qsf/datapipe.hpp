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
/**
 * @file
 * Time-series preparation: CSV ingestion, resampling, calendar and lag
 * features, min-max scaling, chronological split, supervised windows and
 * batching, plus a closed-form synthetic PV plant generator.
 *
 * Timestamps are naive local times stored as seconds since 1970-01-01.
 */
#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qsf {

using Timestamp = std::int64_t;

/// Column layouts accepted by load_csv.
enum class Schema {
    /// Plant export: DATE_TIME, DC_POWER, AC_POWER, DAILY_YIELD, TOTAL_YIELD,
    /// AMBIENT_TEMPERATURE, MODULE_TEMPERATURE, IRRADIATION.
    RealPlant,
    /// Utility-scale simulation: datetime, power_mw, temperature, dhi,
    /// cloud_type, relative_humidity, dew_point, pressure, wind_speed,
    /// solar_angle.
    Simulated,
};

std::string_view to_string(Schema s);
Schema schema_from_string(std::string_view s);
/// Column forecast by default for a schema (AC_POWER / power_mw).
std::string default_target(Schema s);

enum class ColumnRole { Power, Weather, Temporal, Lag, Other };

struct Column {
    std::string name;
    ColumnRole role{ColumnRole::Other};
    std::vector<double> values;
};

struct TimeSeriesFrame {
    std::vector<Timestamp> timestamps;
    std::vector<Column> columns;

    [[nodiscard]] std::size_t rows() const noexcept { return timestamps.size(); }
    [[nodiscard]] const Column *find(std::string_view name) const;
    /// Throws DataError when absent.
    [[nodiscard]] const Column &column(std::string_view name) const;
    [[nodiscard]] std::vector<std::string> column_names() const;
    /// Rows [begin, end).
    [[nodiscard]] TimeSeriesFrame slice(std::size_t begin, std::size_t end) const;
    /// Strictly increasing timestamps, equal column lengths, finite values.
    void validate() const;
};

/// "YYYY-MM-DD HH:MM:SS" (seconds optional). With `allow_day_first`, also
/// "DD-MM-YYYY HH:MM[:SS]". Returns nullopt when unparseable.
std::optional<Timestamp> parse_timestamp(std::string_view text, bool allow_day_first = false);
std::string format_timestamp(Timestamp t);

struct CalendarFields {
    int hour;        ///< 0-23
    int day;         ///< 1-31
    int month;       ///< 1-12
    int day_of_week; ///< 0 = Monday ... 6 = Sunday
    int day_of_year; ///< 1-366
    int minute;
};
CalendarFields calendar(Timestamp t);

/// Parse a schema CSV. `source` names the input in error messages.
TimeSeriesFrame parse_csv(std::istream &in, Schema schema, const std::string &source);
TimeSeriesFrame load_csv(const std::filesystem::path &path, Schema schema);

/// Generic frame CSV: "timestamp" then numeric columns, as written by
/// write_frame_csv. Roles are not persisted and read back as Other.
TimeSeriesFrame read_frame_csv(const std::filesystem::path &path);
void write_frame_csv(const TimeSeriesFrame &frame, const std::filesystem::path &path);
void write_frame_csv(const TimeSeriesFrame &frame, std::ostream &out);

/// Writes the schema's own header and columns, so load_csv reads it back.
void write_schema_csv(const TimeSeriesFrame &frame, Schema schema, std::ostream &out);
void write_schema_csv(const TimeSeriesFrame &frame, Schema schema,
                      const std::filesystem::path &path);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Linear resampling onto a uniform `step_seconds` grid spanning the frame.
/// Every gap must be a positive multiple of the step.
TimeSeriesFrame interpolate_to_target(const TimeSeriesFrame &frame, std::int64_t step_seconds);

/// Appends hour/day/month/day_of_week and `<col>_lag<k>` for every power and
/// weather column; drops the first max(lags) rows.
TimeSeriesFrame engineer_features(const TimeSeriesFrame &frame,
                                  std::span<const std::size_t> lags);

struct ColumnRange {
    std::string name;
    double min{0.0};
    double max{0.0};

    [[nodiscard]] bool constant() const noexcept { return max == min; }
    bool operator==(const ColumnRange &) const = default;
};

/// Per-column min/max fitted on the training partition.
class ScalerParams {
  public:
    ScalerParams() = default;
    explicit ScalerParams(std::vector<ColumnRange> columns);

    [[nodiscard]] bool fitted() const noexcept { return fitted_; }
    [[nodiscard]] const std::vector<ColumnRange> &columns() const noexcept { return columns_; }
    /// Throws StateError if unfitted, DataError if the column is unknown.
    [[nodiscard]] const ColumnRange &range(std::string_view column) const;

    [[nodiscard]] nlohmann::ordered_json to_json() const;
    static ScalerParams from_json(const nlohmann::json &j);

    bool operator==(const ScalerParams &) const = default;

  private:
    std::vector<ColumnRange> columns_;
    bool fitted_{false};
};

[[nodiscard]] ScalerParams fit_scaler(const TimeSeriesFrame &train);
/// x' = (x - min) / (max - min); constant columns map to 0. Values outside
/// the fitted range are not clipped.
[[nodiscard]] TimeSeriesFrame transform(const TimeSeriesFrame &frame, const ScalerParams &scaler);
[[nodiscard]] double scale_value(double x, const ColumnRange &r);
[[nodiscard]] double unscale_value(double x, const ColumnRange &r);
[[nodiscard]] std::vector<double> inverse_transform(std::span<const double> values,
                                                    const ScalerParams &scaler,
                                                    std::string_view column);

void save_scaler(const ScalerParams &scaler, const std::filesystem::path &path);
ScalerParams load_scaler(const std::filesystem::path &path);

/// First floor(ratio * N) rows train, the rest test.
std::pair<TimeSeriesFrame, TimeSeriesFrame> split_chronological(const TimeSeriesFrame &frame,
                                                                double ratio = 0.8);

struct WindowedDataset {
    std::vector<double> inputs; ///< [N x window x n_features], row-major
    std::vector<double> targets;
    std::vector<Timestamp> target_times;
    std::size_t window{0};
    std::size_t n_features{0};
    std::vector<std::string> feature_names;
    std::string target_name;
    ScalerParams scaler;

    [[nodiscard]] std::size_t size() const noexcept { return targets.size(); }
    [[nodiscard]] std::span<const double> sample(std::size_t k) const {
        return std::span<const double>(inputs).subspan(k * window * n_features,
                                                       window * n_features);
    }
};

/// Sample k covers rows [k, k + window) of `features`; its target is
/// `target_column` at row k + window. Empty `features` selects every column.
WindowedDataset make_windows(const TimeSeriesFrame &frame, std::size_t window,
                             const std::string &target_column,
                             const std::vector<std::string> &features = {});

/// Index batches of at most `batch_size`; the last one may be short.
std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch_size, bool shuffle,
                                              std::uint64_t seed);

/// Parameters of the synthetic plant. With noise_sd = cloud_amp = 0 the
/// power at time t is exactly
///   capacity_mw * season(doy) * daylight(hour)
/// with daylight(h) = sin(pi (h - 6) / 12) on (6, 18), else 0, and
/// season(doy) = 1 + seasonal_amp * cos(2 pi (doy - 172) / 365).
/// Otherwise each day draws u ~ U(0,1), scales power by 1 - cloud_amp * u and
/// adds noise_sd * capacity_mw * daylight * N(0,1), clipped at 0.
struct SynthConfig {
    std::size_t days{14};
    std::int64_t step_minutes{15};
    std::uint64_t seed{42};
    Timestamp start{1149120000}; // 2006-06-01 00:00:00
    double capacity_mw{200.0};
    double seasonal_amp{0.2};
    double cloud_amp{0.3};
    double noise_sd{0.02};
    double irradiance_peak{1000.0};

    [[nodiscard]] nlohmann::ordered_json to_json() const;
};

[[nodiscard]] double synth_daylight(double hour_of_day);
[[nodiscard]] double synth_season(const SynthConfig &cfg, int day_of_year);
/// Noise- and cloud-free power at `t`.
[[nodiscard]] double synth_clear_sky_power(const SynthConfig &cfg, Timestamp t);

/// Frame in the Simulated schema layout.
[[nodiscard]] TimeSeriesFrame synth_solar(const SynthConfig &cfg);

} // namespace qsf
