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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace qsf {
namespace {

namespace fs = std::filesystem;

constexpr Timestamp kMinute = 60;

Timestamp ts(std::string_view text) {
    const auto t = parse_timestamp(text);
    if (!t) {
        throw std::invalid_argument("bad fixture timestamp");
    }
    return *t;
}

/// One-column frame with timestamps `start + k * step`.
TimeSeriesFrame series(const std::vector<double> &values, Timestamp step = 30 * kMinute,
                       ColumnRole role = ColumnRole::Power, const std::string &name = "p") {
    TimeSeriesFrame f;
    const Timestamp start = ts("2006-06-15 00:00:00");
    for (std::size_t k = 0; k < values.size(); ++k) {
        f.timestamps.push_back(start + static_cast<Timestamp>(k) * step);
    }
    f.columns.push_back({name, role, values});
    return f;
}

const char *kSimHeader = "datetime,power_mw,temperature,dhi,cloud_type,relative_humidity,"
                         "dew_point,pressure,wind_speed,solar_angle\n";

std::string sim_row(const std::string &when, const std::string &power) {
    return when + "," + power + ",20,100,0,50,10,1010,3,45\n";
}

std::string what_of(const std::function<void()> &fn) {
    try {
        fn();
    } catch (const DataError &e) {
        return e.what();
    }
    return "";
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

TEST(LoadCsv, WellFormedSimulatedFile) {
    std::stringstream in(std::string(kSimHeader) + sim_row("2019-01-01 00:00:00", "0") +
                         sim_row("2019-01-01 00:30:00", "1.5") +
                         sim_row("2019-01-01 01:00:00", "3"));
    const auto f = parse_csv(in, Schema::Simulated, "sim.csv");
    EXPECT_EQ(f.rows(), 3u);
    ASSERT_NE(f.find("power_mw"), nullptr);
    EXPECT_EQ(f.column("power_mw").values, (std::vector<double>{0.0, 1.5, 3.0}));
    EXPECT_EQ(f.column("power_mw").role, ColumnRole::Power);
    EXPECT_EQ(f.column("dhi").role, ColumnRole::Weather);
    EXPECT_EQ(f.timestamps[1] - f.timestamps[0], 30 * kMinute);
}

TEST(LoadCsv, MissingValueNamesRowAndColumn) {
    std::stringstream in(std::string(kSimHeader) + sim_row("2019-01-01 00:00:00", "0") +
                         sim_row("2019-01-01 00:30:00", "NaN"));
    const auto msg = what_of([&] { (void)parse_csv(in, Schema::Simulated, "sim.csv"); });
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("power_mw"), std::string::npos) << msg;
    EXPECT_NE(msg.find("sim.csv"), std::string::npos) << msg;
}

TEST(LoadCsv, EmptyCellIsRejected) {
    std::stringstream in(std::string(kSimHeader) + sim_row("2019-01-01 00:00:00", ""));
    EXPECT_THROW((void)parse_csv(in, Schema::Simulated, "sim.csv"), DataError);
}

TEST(LoadCsv, OutOfOrderAndDuplicateTimestamps) {
    std::stringstream unordered(std::string(kSimHeader) + sim_row("2019-01-01 01:00:00", "0") +
                                sim_row("2019-01-01 00:30:00", "1"));
    EXPECT_THROW((void)parse_csv(unordered, Schema::Simulated, "a"), DataError);
    std::stringstream dup(std::string(kSimHeader) + sim_row("2019-01-01 01:00:00", "0") +
                          sim_row("2019-01-01 01:00:00", "1"));
    EXPECT_THROW((void)parse_csv(dup, Schema::Simulated, "b"), DataError);
}

TEST(LoadCsv, MissingColumnAndBadDatetime) {
    std::stringstream no_col("datetime,power_mw\n2019-01-01 00:00:00,1\n");
    const auto msg = what_of([&] { (void)parse_csv(no_col, Schema::Simulated, "x"); });
    EXPECT_NE(msg.find("temperature"), std::string::npos) << msg;
    std::stringstream bad_dt(std::string(kSimHeader) + sim_row("2019-13-01 00:00:00", "0"));
    EXPECT_THROW((void)parse_csv(bad_dt, Schema::Simulated, "x"), DataError);
}

TEST(LoadCsv, RealPlantAcceptsDayFirstDates) {
    std::stringstream in("DATE_TIME,DC_POWER,AC_POWER,DAILY_YIELD,TOTAL_YIELD,"
                         "AMBIENT_TEMPERATURE,MODULE_TEMPERATURE,IRRADIATION\n"
                         "15-05-2020 00:00,0,0,0,6259559,25.1,22.8,0\n"
                         "15-05-2020 00:15,0,0,0,6259559,25.0,22.6,0\n");
    const auto f = parse_csv(in, Schema::RealPlant, "plant.csv");
    ASSERT_EQ(f.rows(), 2u);
    EXPECT_EQ(f.timestamps[0], ts("2020-05-15 00:00:00"));
    EXPECT_EQ(default_target(Schema::RealPlant), "AC_POWER");
}

TEST(LoadCsv, MissingFileIsDataError) {
    EXPECT_THROW((void)load_csv("/nonexistent/file.csv", Schema::Simulated), DataError);
}

TEST(LoadCsv, SchemaCsvRoundTrip) {
    SynthConfig sc;
    sc.days = 1;
    const auto f = synth_solar(sc);
    std::stringstream buf;
    write_schema_csv(f, Schema::Simulated, buf);
    const auto back = parse_csv(buf, Schema::Simulated, "roundtrip");
    EXPECT_EQ(back.timestamps, f.timestamps);
    for (const auto &c : f.columns) {
        EXPECT_EQ(back.column(c.name).values, c.values) << c.name;
    }
}

TEST(Timestamps, ParseFormatRoundTrip) {
    for (const char *s : {"1970-01-01 00:00:00", "2006-06-15 13:35:00", "2024-02-29 23:59:59"}) {
        EXPECT_EQ(format_timestamp(ts(s)), s);
    }
    EXPECT_EQ(parse_timestamp("2006-06-15 13:35"), ts("2006-06-15 13:35:00"));
    EXPECT_FALSE(parse_timestamp("2023-02-29 00:00:00"));
    EXPECT_FALSE(parse_timestamp("15-06-2006 13:35"));
    EXPECT_TRUE(parse_timestamp("15-06-2006 13:35", true));
}

TEST(Timestamps, Calendar) {
    const auto c = calendar(ts("2006-06-15 13:35:00"));
    EXPECT_EQ(c.hour, 13);
    EXPECT_EQ(c.month, 6);
    EXPECT_EQ(c.day, 15);
    EXPECT_EQ(c.minute, 35);
    EXPECT_EQ(c.day_of_week, 3); // Thursday
    EXPECT_EQ(c.day_of_year, 166);
}

// ---------------------------------------------------------------------------
// Interpolation
// ---------------------------------------------------------------------------

TEST(Interpolate, Midpoint) {
    const auto out = interpolate_to_target(series({0.0, 30.0}), 15 * kMinute);
    ASSERT_EQ(out.rows(), 3u);
    EXPECT_EQ(out.column("p").values[1], 15.0);
    EXPECT_EQ(out.timestamps[1] - out.timestamps[0], 15 * kMinute);
}

TEST(Interpolate, UniformSlope) {
    const auto out = interpolate_to_target(series({0.0, 6.0}), 5 * kMinute);
    EXPECT_EQ(out.column("p").values, (std::vector<double>{0, 1, 2, 3, 4, 5, 6}));
    for (std::size_t r = 1; r < out.rows(); ++r) {
        EXPECT_EQ(out.timestamps[r] - out.timestamps[r - 1], 5 * kMinute);
    }
}

TEST(Interpolate, ConstantColumn) {
    const auto out = interpolate_to_target(series({2.5, 2.5, 2.5}), 5 * kMinute);
    for (double v : out.column("p").values) {
        EXPECT_EQ(v, 2.5);
    }
}

TEST(Interpolate, NonMultipleSpacingIsDataError) {
    EXPECT_THROW((void)interpolate_to_target(series({0.0, 1.0}), 7 * kMinute), DataError);
}

TEST(Interpolate, OriginalSamplesSurviveBitExactly) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    std::vector<double> v(40);
    for (auto &x : v) {
        x = n01(rng) * 1e3;
    }
    const auto in = series(v);
    const auto out = interpolate_to_target(in, 5 * kMinute);
    ASSERT_EQ(out.rows(), (v.size() - 1) * 6 + 1);
    for (std::size_t k = 0; k < v.size(); ++k) {
        EXPECT_EQ(out.timestamps[k * 6], in.timestamps[k]);
        EXPECT_EQ(out.column("p").values[k * 6], v[k]);
    }
}

TEST(Interpolate, IrregularMultiplesAreFilled) {
    auto f = series({0.0, 10.0});
    f.timestamps[1] = f.timestamps[0] + 50 * kMinute;
    const auto out = interpolate_to_target(f, 10 * kMinute);
    EXPECT_EQ(out.column("p").values, (std::vector<double>{0, 2, 4, 6, 8, 10}));
}

// ---------------------------------------------------------------------------
// Feature engineering
// ---------------------------------------------------------------------------

TEST(Features, CalendarColumns) {
    auto f = series({1.0, 2.0});
    f.timestamps = {ts("2006-06-15 13:35:00"), ts("2006-06-15 14:35:00")};
    const auto out = engineer_features(f, std::vector<std::size_t>{});
    EXPECT_EQ(out.column("hour").values[0], 13.0);
    EXPECT_EQ(out.column("month").values[0], 6.0);
    EXPECT_EQ(out.column("day").values[0], 15.0);
    EXPECT_EQ(out.column("day_of_week").values[0], 3.0);
}

TEST(Features, SingleLag) {
    const auto out = engineer_features(series({5.0, 7.0, 9.0}), std::vector<std::size_t>{1});
    EXPECT_EQ(out.rows(), 2u);
    EXPECT_EQ(out.column("p_lag1").values, (std::vector<double>{5.0, 7.0}));
    EXPECT_EQ(out.column("p").values, (std::vector<double>{7.0, 9.0}));
}

TEST(Features, NoLagsKeepsLength) {
    const auto in = series({5.0, 7.0, 9.0});
    const auto out = engineer_features(in, std::vector<std::size_t>{});
    EXPECT_EQ(out.rows(), 3u);
    EXPECT_EQ(out.columns.size(), 5u);
    EXPECT_EQ(out.find("p_lag1"), nullptr);
}

TEST(Features, LagsOnlyForPowerAndWeather) {
    auto f = series({1, 2, 3, 4, 5});
    f.columns.push_back({"w", ColumnRole::Weather, {10, 20, 30, 40, 50}});
    f.columns.push_back({"x", ColumnRole::Other, {0, 0, 0, 0, 0}});
    const auto out = engineer_features(f, std::vector<std::size_t>{1, 3});
    EXPECT_EQ(out.rows(), 2u);
    EXPECT_EQ(out.column("w_lag3").values, (std::vector<double>{10, 20}));
    EXPECT_EQ(out.column("p_lag1").values, (std::vector<double>{3, 4}));
    EXPECT_EQ(out.find("x_lag1"), nullptr);
}

TEST(Features, LagTooLongIsDataError) {
    EXPECT_THROW((void)engineer_features(series({1, 2, 3}), std::vector<std::size_t>{3}),
                 DataError);
    EXPECT_THROW((void)engineer_features(series({1, 2, 3}), std::vector<std::size_t>{0}),
                 DataError);
}

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

TEST(Scaler, Examples) {
    const auto f = series({0.0, 5.0, 10.0});
    const auto s = fit_scaler(f);
    EXPECT_EQ(transform(f, s).column("p").values, (std::vector<double>{0.0, 0.5, 1.0}));
    const ColumnRange r{"p", 0.0, 10.0};
    EXPECT_EQ(unscale_value(0.5, r), 5.0);
    const std::vector<double> half{0.5};
    EXPECT_EQ(inverse_transform(half, s, "p")[0], 5.0);
}

TEST(Scaler, ConstantColumnConvention) {
    const auto f = series({3.0, 3.0});
    const auto s = fit_scaler(f);
    EXPECT_TRUE(s.range("p").constant());
    EXPECT_EQ(transform(f, s).column("p").values, (std::vector<double>{0.0, 0.0}));
    const std::vector<double> zeros{0.0, 0.0};
    EXPECT_EQ(inverse_transform(zeros, s, "p"), (std::vector<double>{3.0, 3.0}));
}

TEST(Scaler, UnfittedIsStateErrorUnknownIsDataError) {
    const ScalerParams empty;
    EXPECT_THROW((void)transform(series({1.0, 2.0}), empty), StateError);
    const auto s = fit_scaler(series({1.0, 2.0}));
    EXPECT_THROW((void)s.range("nope"), DataError);
}

TEST(Scaler, RoundTripWithin1e12) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1e4, 1e4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(30);
        for (auto &x : v) {
            x = u(rng);
        }
        const auto f = series(v);
        const auto s = fit_scaler(f);
        const auto scaled = transform(f, s).column("p").values;
        const auto back = inverse_transform(scaled, s, "p");
        const double span = s.range("p").max - s.range("p").min;
        for (std::size_t k = 0; k < v.size(); ++k) {
            EXPECT_LE(scaled[k], 1.0);
            EXPECT_GE(scaled[k], 0.0);
            EXPECT_NEAR(back[k], v[k], 1e-12 * std::max(1.0, span));
        }
    }
}

TEST(Scaler, TestValuesAreNotClipped) {
    const auto s = fit_scaler(series({0.0, 10.0}));
    const auto t = transform(series({-5.0, 20.0}), s).column("p").values;
    EXPECT_EQ(t, (std::vector<double>{-0.5, 2.0}));
}

TEST(Scaler, JsonAndFileRoundTrip) {
    auto f = series({0.0, 5.0, 10.0});
    f.columns.push_back({"w", ColumnRole::Weather, {1.0, 1.0, 1.0}});
    const auto s = fit_scaler(f);
    EXPECT_EQ(ScalerParams::from_json(s.to_json()), s);
    const auto path = fs::temp_directory_path() / "qsf_scaler_test.json";
    save_scaler(s, path);
    EXPECT_EQ(load_scaler(path), s);
    fs::remove(path);
    EXPECT_THROW((void)load_scaler("/nonexistent/scaler.json"), DataError);
}

// ---------------------------------------------------------------------------
// Split, windows, batches
// ---------------------------------------------------------------------------

std::vector<double> iota_values(std::size_t n, double start = 1.0) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        v[k] = start + static_cast<double>(k);
    }
    return v;
}

TEST(Split, FloorRule) {
    for (auto [n, train] : std::vector<std::pair<std::size_t, std::size_t>>{
             {10, 8}, {5, 4}, {2, 1}, {7, 5}, {1000, 800}, {1001, 800}}) {
        const auto [a, b] = split_chronological(series(iota_values(n)), 0.8);
        EXPECT_EQ(a.rows(), train) << n;
        EXPECT_EQ(b.rows(), n - train) << n;
    }
}

TEST(Split, OrderPreserved) {
    const auto [a, b] = split_chronological(series(iota_values(10)), 0.8);
    EXPECT_EQ(a.column("p").values, iota_values(8));
    EXPECT_EQ(b.column("p").values, (std::vector<double>{9.0, 10.0}));
    EXPECT_LT(a.timestamps.back(), b.timestamps.front());
}

TEST(Split, TooShortIsDataError) {
    EXPECT_THROW((void)split_chronological(series({1.0}), 0.8), DataError);
}

TEST(Windows, CountIsLengthMinusWindow) {
    EXPECT_EQ(make_windows(series(iota_values(10)), 8, "p").size(), 2u);
    EXPECT_THROW((void)make_windows(series(iota_values(8)), 8, "p"), DataError);
}

TEST(Windows, SmallExample) {
    const auto ds = make_windows(series(iota_values(5)), 2, "p");
    ASSERT_EQ(ds.size(), 3u);
    EXPECT_EQ(ds.inputs, (std::vector<double>{1, 2, 2, 3, 3, 4}));
    EXPECT_EQ(ds.targets, (std::vector<double>{3, 4, 5}));
    EXPECT_EQ(ds.window, 2u);
    EXPECT_EQ(ds.n_features, 1u);
}

TEST(Windows, FeatureSelectionAndOrder) {
    auto f = series({1, 2, 3, 4});
    f.columns.push_back({"w", ColumnRole::Weather, {10, 20, 30, 40}});
    const auto ds = make_windows(f, 2, "p", {"w", "p"});
    EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"w", "p"}));
    EXPECT_EQ(ds.inputs, (std::vector<double>{10, 1, 20, 2, 20, 2, 30, 3}));
    EXPECT_EQ(ds.target_times[0], f.timestamps[2]);
    EXPECT_THROW((void)make_windows(f, 2, "p", {"missing"}), DataError);
    EXPECT_THROW((void)make_windows(f, 2, "missing"), DataError);
}

TEST(Windows, ReconstructSeriesFromWindowsAndTargets) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n01;
    std::vector<double> v(60);
    for (auto &x : v) {
        x = n01(rng);
    }
    for (std::size_t window : {1u, 3u, 8u}) {
        const auto ds = make_windows(series(v), window, "p");
        std::vector<double> rebuilt(ds.sample(0).begin(), ds.sample(0).end());
        rebuilt.insert(rebuilt.end(), ds.targets.begin(), ds.targets.end());
        EXPECT_EQ(rebuilt, v);
        for (std::size_t k = 0; k < ds.size(); ++k) {
            for (std::size_t t = 0; t < window; ++t) {
                ASSERT_EQ(ds.sample(k)[t], v[k + t]);
            }
        }
    }
}

TEST(Batches, SizesAndRemainder) {
    const auto b = batches(70, 32, false, 0);
    ASSERT_EQ(b.size(), 3u);
    EXPECT_EQ(b[0].size(), 32u);
    EXPECT_EQ(b[1].size(), 32u);
    EXPECT_EQ(b[2].size(), 6u);
    EXPECT_EQ(b[0][0], 0u);
    EXPECT_EQ(b[2][5], 69u);
    EXPECT_EQ(batches(64, 32, false, 0).size(), 2u);
    EXPECT_EQ(batches(1, 32, true, 0).size(), 1u);
}

TEST(Batches, ChronologicalWhenNotShuffled) {
    EXPECT_EQ(batches(70, 32, false, 1), batches(70, 32, false, 2));
    const auto b = batches(10, 4, false, 0);
    std::size_t expect = 0;
    for (const auto &batch : b) {
        for (auto i : batch) {
            EXPECT_EQ(i, expect++);
        }
    }
}

TEST(Batches, SeededShuffle) {
    const auto a = batches(70, 32, true, 5);
    EXPECT_EQ(a, batches(70, 32, true, 5));
    EXPECT_NE(a, batches(70, 32, true, 6));
    std::set<std::size_t> all;
    for (const auto &batch : a) {
        all.insert(batch.begin(), batch.end());
    }
    EXPECT_EQ(all.size(), 70u);
    EXPECT_EQ(*all.rbegin(), 69u);
}

// ---------------------------------------------------------------------------
// Synthetic plant
// ---------------------------------------------------------------------------

TEST(Synth, MidnightPowerIsZero) {
    SynthConfig sc;
    sc.days = 5;
    sc.noise_sd = 0.2;
    const auto f = synth_solar(sc);
    const auto &p = f.column("power_mw").values;
    std::size_t midnights = 0;
    for (std::size_t r = 0; r < f.rows(); ++r) {
        EXPECT_GE(p[r], 0.0);
        if (calendar(f.timestamps[r]).hour == 0) {
            EXPECT_EQ(p[r], 0.0);
            ++midnights;
        }
    }
    EXPECT_GT(midnights, 0u);
}

TEST(Synth, ZeroNoiseNoonMatchesClosedForm) {
    SynthConfig sc;
    sc.days = 3;
    sc.noise_sd = 0.0;
    sc.cloud_amp = 0.0;
    const auto f = synth_solar(sc);
    std::size_t noons = 0;
    for (std::size_t r = 0; r < f.rows(); ++r) {
        const auto c = calendar(f.timestamps[r]);
        if (c.hour == 12 && c.minute == 0) {
            const double expected =
                sc.capacity_mw *
                (1.0 + sc.seasonal_amp *
                           std::cos(2.0 * std::numbers::pi * (c.day_of_year - 172) / 365.0));
            EXPECT_NEAR(f.column("power_mw").values[r], expected, 1e-9);
            ++noons;
        }
    }
    EXPECT_EQ(noons, 3u);
    EXPECT_EQ(synth_daylight(12.0), 1.0);
    EXPECT_EQ(synth_daylight(6.0), 0.0);
    EXPECT_EQ(synth_daylight(19.0), 0.0);
}

TEST(Synth, SeededReproducibility) {
    SynthConfig sc;
    sc.days = 2;
    const auto a = synth_solar(sc);
    const auto b = synth_solar(sc);
    EXPECT_EQ(a.timestamps, b.timestamps);
    for (std::size_t c = 0; c < a.columns.size(); ++c) {
        EXPECT_EQ(a.columns[c].values, b.columns[c].values);
    }
    sc.seed = 43;
    EXPECT_NE(synth_solar(sc).column("power_mw").values, a.column("power_mw").values);
}

TEST(Synth, ShapeAndValidity) {
    SynthConfig sc;
    sc.days = 2;
    sc.step_minutes = 30;
    const auto f = synth_solar(sc);
    EXPECT_EQ(f.rows(), 96u);
    EXPECT_NO_THROW(f.validate());
    EXPECT_NE(f.find("temperature"), nullptr);
    EXPECT_NE(f.find("dhi"), nullptr);
    sc.days = 0;
    EXPECT_THROW((void)synth_solar(sc), ConfigError);
}

TEST(Synth, IrradianceTracksPower) {
    SynthConfig sc;
    sc.days = 4;
    const auto f = synth_solar(sc);
    const auto &p = f.column("power_mw").values;
    const auto &d = f.column("dhi").values;
    double mp = 0.0;
    double md = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        mp += p[k];
        md += d[k];
    }
    mp /= static_cast<double>(p.size());
    md /= static_cast<double>(p.size());
    double cov = 0.0;
    double vp = 0.0;
    double vd = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        cov += (p[k] - mp) * (d[k] - md);
        vp += (p[k] - mp) * (p[k] - mp);
        vd += (d[k] - md) * (d[k] - md);
    }
    EXPECT_GT(cov / std::sqrt(vp * vd), 0.9);
}

} // namespace
} // namespace qsf
