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
#include "qsf/evalstats.hpp"

#include "qsf/errors.hpp"
#include "qsf/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace qsf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pair(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size()) {
        throw DataError("length mismatch: " + std::to_string(y.size()) + " vs " +
                        std::to_string(y_hat.size()));
    }
    if (y.empty()) {
        throw DataError("metrics need at least one value");
    }
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double x, double a, double b) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) {
        d = kTiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            break;
        }
    }
    return h;
}

} // namespace

double mae(std::span<const double> y, std::span<const double> y_hat) {
    check_pair(y, y_hat);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        s += std::abs(y[i] - y_hat[i]);
    }
    return s / static_cast<double>(y.size());
}

double mse(std::span<const double> y, std::span<const double> y_hat) {
    check_pair(y, y_hat);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - y_hat[i];
        s += r * r;
    }
    return s / static_cast<double>(y.size());
}

double rmse(std::span<const double> y, std::span<const double> y_hat) {
    return std::sqrt(mse(y, y_hat));
}

MetricReport metric_report(std::span<const double> y, std::span<const double> y_hat) {
    MetricReport m;
    m.mae = mae(y, y_hat);
    m.mse = mse(y, y_hat);
    m.rmse = std::sqrt(m.mse);
    return m;
}

ExtendedMetrics extended_metrics(std::span<const double> y, std::span<const double> y_hat) {
    check_pair(y, y_hat);
    ExtendedMetrics out;
    double ape = 0.0;
    std::size_t n_nonzero = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0.0) {
            ape += std::abs((y[i] - y_hat[i]) / y[i]);
            ++n_nonzero;
        }
    }
    out.mape = n_nonzero == 0 ? 0.0 : 100.0 * ape / static_cast<double>(n_nonzero);
    const double mean = sample_mean(y);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    out.r2 = ss_tot == 0.0 ? (ss_res == 0.0 ? 1.0 : 0.0) : 1.0 - ss_res / ss_tot;
    return out;
}

std::string_view to_string(TestKind k) {
    return k == TestKind::Paired ? "paired" : "pooled_independent";
}

double incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0)) {
        throw DataError("incomplete beta needs a, b > 0");
    }
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    // The continued fraction converges fastest for x < (a + 1) / (a + b + 2).
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(x, a, b) / a;
    }
    return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) {
        throw DataError("degrees of freedom must be positive");
    }
    if (std::isnan(t)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (std::isinf(t)) {
        return 0.0;
    }
    const double p = incomplete_beta(df / (df + t * t), df / 2.0, 0.5);
    return std::clamp(p, 0.0, 1.0);
}

double sample_mean(std::span<const double> x) {
    if (x.empty()) {
        throw DataError("mean of an empty sample");
    }
    double s = 0.0;
    for (double v : x) {
        s += v;
    }
    return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) {
        throw DataError("sample variance needs at least 2 values");
    }
    const double m = sample_mean(x);
    double s = 0.0;
    for (double v : x) {
        s += (v - m) * (v - m);
    }
    return s / static_cast<double>(x.size() - 1);
}

double median(std::span<const double> x) {
    if (x.empty()) {
        throw DataError("median of an empty sample");
    }
    std::vector<double> v(x.begin(), x.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw DataError("Cohen's d needs at least 2 values per sample");
    }
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const double diff = sample_mean(a) - sample_mean(b);
    const double sp = std::sqrt(((n1 - 1.0) * sample_variance(a) +
                                 (n2 - 1.0) * sample_variance(b)) /
                                (n1 + n2 - 2.0));
    if (sp == 0.0) {
        return diff == 0.0 ? 0.0 : std::copysign(kInf, diff);
    }
    return diff / sp;
}

StatTestResult t_test(std::span<const double> a, std::span<const double> b, TestKind kind) {
    StatTestResult r;
    r.kind = kind;
    r.n1 = a.size();
    r.n2 = b.size();
    if (kind == TestKind::Paired) {
        if (a.size() != b.size() || a.size() < 2) {
            throw DataError("paired t-test needs equal lengths >= 2 (got " +
                            std::to_string(a.size()) + " and " + std::to_string(b.size()) + ")");
        }
        std::vector<double> d(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            d[i] = a[i] - b[i];
        }
        const double n = static_cast<double>(d.size());
        const double mean = sample_mean(d);
        const double sd = std::sqrt(sample_variance(d));
        r.df = n - 1.0;
        if (sd == 0.0) {
            r.t_statistic = mean == 0.0 ? 0.0 : std::copysign(kInf, mean);
        } else {
            r.t_statistic = mean / (sd / std::sqrt(n));
        }
    } else {
        if (a.size() < 2 || b.size() < 2) {
            throw DataError("pooled t-test needs at least 2 values per sample");
        }
        const double n1 = static_cast<double>(a.size());
        const double n2 = static_cast<double>(b.size());
        const double diff = sample_mean(a) - sample_mean(b);
        const double sp = std::sqrt(((n1 - 1.0) * sample_variance(a) +
                                     (n2 - 1.0) * sample_variance(b)) /
                                    (n1 + n2 - 2.0));
        r.df = n1 + n2 - 2.0;
        if (sp == 0.0) {
            r.t_statistic = diff == 0.0 ? 0.0 : std::copysign(kInf, diff);
        } else {
            // Reduces to sp * sqrt(2 / n) when n1 == n2 == n.
            r.t_statistic = diff / (sp * std::sqrt(1.0 / n1 + 1.0 / n2));
        }
    }
    r.p_value = r.t_statistic == 0.0 ? 1.0 : student_t_two_sided_p(r.t_statistic, r.df);
    r.cohens_d = cohens_d(a, b);
    return r;
}

StabilityReport stability(const EpochHistory &history) {
    if (history.train_loss.size() < 2 || history.test_loss.size() < 2) {
        throw DataError("stability needs at least 2 epochs, got " +
                        std::to_string(history.test_loss.size()));
    }
    StabilityReport s;
    s.train_loss_sd = std::sqrt(sample_variance(history.train_loss));
    s.test_loss_sd = std::sqrt(sample_variance(history.test_loss));
    s.mean_test_loss = sample_mean(history.test_loss);
    s.median_test_loss = median(history.test_loss);
    return s;
}

nlohmann::ordered_json json_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

nlohmann::ordered_json to_json(const MetricReport &m) {
    return {{"mae", json_number(m.mae)}, {"mse", json_number(m.mse)}, {"rmse", json_number(m.rmse)}};
}

nlohmann::ordered_json to_json(const ExtendedMetrics &m) {
    return {{"mape", json_number(m.mape)}, {"r2", json_number(m.r2)}};
}

nlohmann::ordered_json to_json(const StatTestResult &r) {
    return {{"kind", std::string(to_string(r.kind))},
            {"t_statistic", json_number(r.t_statistic)},
            {"p_value", json_number(r.p_value)},
            {"cohens_d", json_number(r.cohens_d)},
            {"df", json_number(r.df)},
            {"n1", r.n1},
            {"n2", r.n2}};
}

nlohmann::ordered_json to_json(const StabilityReport &s) {
    return {{"train_loss_sd", json_number(s.train_loss_sd)},
            {"test_loss_sd", json_number(s.test_loss_sd)},
            {"mean_test_loss", json_number(s.mean_test_loss)},
            {"median_test_loss", json_number(s.median_test_loss)}};
}

} // namespace qsf
