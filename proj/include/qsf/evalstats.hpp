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
 * Forecast error metrics and two-sample comparison statistics.
 */
#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <span>
#include <string_view>

namespace qsf {

struct EpochHistory;

struct MetricReport {
    double mae{0.0};
    double mse{0.0};
    double rmse{0.0};
};

/// Optional metrics, reported only on request.
struct ExtendedMetrics {
    double mape{0.0}; ///< percent, over entries with y != 0
    double r2{0.0};
};

[[nodiscard]] double mae(std::span<const double> y, std::span<const double> y_hat);
[[nodiscard]] double mse(std::span<const double> y, std::span<const double> y_hat);
[[nodiscard]] double rmse(std::span<const double> y, std::span<const double> y_hat);
[[nodiscard]] MetricReport metric_report(std::span<const double> y, std::span<const double> y_hat);
[[nodiscard]] ExtendedMetrics extended_metrics(std::span<const double> y,
                                               std::span<const double> y_hat);

enum class TestKind { Paired, PooledIndependent };
std::string_view to_string(TestKind k);

struct StatTestResult {
    TestKind kind{TestKind::Paired};
    double t_statistic{0.0}; ///< +/-infinity when the spread is zero but means differ
    double p_value{1.0};     ///< two-sided
    double cohens_d{0.0};
    double df{0.0};
    std::size_t n1{0};
    std::size_t n2{0};
};

/// Regularized incomplete beta I_x(a, b) by continued fraction.
[[nodiscard]] double incomplete_beta(double x, double a, double b);
/// Two-sided Student-t tail probability P(|T| >= |t|) with `df` degrees of
/// freedom, via I_{df/(df+t^2)}(df/2, 1/2).
[[nodiscard]] double student_t_two_sided_p(double t, double df);

/// Paired: t on differences a - b, df = n - 1. Pooled: pooled-SD t with
/// df = n1 + n2 - 2. Cohen's d always uses the pooled SD of a and b.
[[nodiscard]] StatTestResult t_test(std::span<const double> a, std::span<const double> b,
                                    TestKind kind);

/// (mean(a) - mean(b)) / s_p. Zero s_p gives 0 for equal means, else +/-inf.
[[nodiscard]] double cohens_d(std::span<const double> a, std::span<const double> b);

struct StabilityReport {
    double train_loss_sd{0.0};
    double test_loss_sd{0.0};
    double mean_test_loss{0.0};
    double median_test_loss{0.0};
};

[[nodiscard]] StabilityReport stability(const EpochHistory &history);

[[nodiscard]] double sample_mean(std::span<const double> x);
/// n - 1 denominator.
[[nodiscard]] double sample_variance(std::span<const double> x);
[[nodiscard]] double median(std::span<const double> x);

/// Non-finite numbers serialize as the strings "inf", "-inf", "nan".
[[nodiscard]] nlohmann::ordered_json json_number(double v);
[[nodiscard]] nlohmann::ordered_json to_json(const MetricReport &m);
[[nodiscard]] nlohmann::ordered_json to_json(const ExtendedMetrics &m);
[[nodiscard]] nlohmann::ordered_json to_json(const StatTestResult &r);
[[nodiscard]] nlohmann::ordered_json to_json(const StabilityReport &s);

} // namespace qsf
