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
#include "qsf/errors.hpp"
#include "qsf/evalstats.hpp"
#include "qsf/training.hpp"

#include "support/stats_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

namespace qsf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec = std::vector<double>;

Vec random_sample(std::mt19937_64 &rng, std::size_t n, double mu, double sd) {
    std::normal_distribution<double> g(mu, sd);
    Vec v(n);
    for (auto &x : v) {
        x = g(rng);
    }
    return v;
}

double tol(double ref) { return 1e-9 * std::max(1.0, std::abs(ref)); }

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

TEST(Metrics, Examples) {
    const auto a = metric_report(Vec{1, 2}, Vec{1, 3});
    EXPECT_DOUBLE_EQ(a.mae, 0.5);
    EXPECT_DOUBLE_EQ(a.mse, 0.5);
    EXPECT_DOUBLE_EQ(a.rmse, std::sqrt(0.5));

    const auto z = metric_report(Vec{4, 5, 6}, Vec{4, 5, 6});
    EXPECT_EQ(z.mae, 0.0);
    EXPECT_EQ(z.mse, 0.0);
    EXPECT_EQ(z.rmse, 0.0);

    const auto b = metric_report(Vec{0, 0, 0}, Vec{1, -1, 2});
    EXPECT_DOUBLE_EQ(b.mae, 4.0 / 3.0);
    EXPECT_DOUBLE_EQ(b.mse, 2.0);
    EXPECT_DOUBLE_EQ(b.rmse, std::sqrt(2.0));
}

TEST(Metrics, Errors) {
    EXPECT_THROW((void)mae(Vec{1}, Vec{1, 2}), DataError);
    EXPECT_THROW((void)mse(Vec{}, Vec{}), DataError);
    EXPECT_THROW((void)rmse(Vec{1, 2}, Vec{1}), DataError);
}

TEST(Metrics, Identities) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 17;
        const auto y = random_sample(rng, n, 0.0, 2.0);
        const auto yh = random_sample(rng, n, 0.5, 1.0);
        const auto m = metric_report(y, yh);
        EXPECT_NEAR(m.rmse * m.rmse, m.mse, 1e-12 * std::max(1.0, m.mse));
        EXPECT_LE(m.mae, m.rmse * (1.0 + 1e-15));
        EXPECT_GE(m.mae, 0.0);
    }
}

TEST(Metrics, ExtendedDefinitions) {
    const auto e = extended_metrics(Vec{1, 2, 4}, Vec{1, 3, 3});
    EXPECT_DOUBLE_EQ(e.mape, 100.0 * (0.0 + 0.5 + 0.25) / 3.0);
    // ss_res = 0 + 1 + 1, ss_tot around mean 7/3.
    const double mean = 7.0 / 3.0;
    const double ss_tot = (1 - mean) * (1 - mean) + (2 - mean) * (2 - mean) + (4 - mean) * (4 - mean);
    EXPECT_DOUBLE_EQ(e.r2, 1.0 - 2.0 / ss_tot);
    const auto zeros = extended_metrics(Vec{0, 2}, Vec{1, 1});
    EXPECT_DOUBLE_EQ(zeros.mape, 50.0);
}

// ---------------------------------------------------------------------------
// Student t distribution
// ---------------------------------------------------------------------------

TEST(StudentT, KnownValues) {
    EXPECT_EQ(student_t_two_sided_p(0.0, 5.0), 1.0);
    // df = 1 is Cauchy: P(|T| >= 1) = 0.5.
    EXPECT_NEAR(student_t_two_sided_p(1.0, 1.0), 0.5, 1e-14);
    // df = 2 has a closed form: p = 1 - t / sqrt(2 + t^2).
    for (double t : {0.3, 1.0, 2.5, 10.0}) {
        EXPECT_NEAR(student_t_two_sided_p(t, 2.0), 1.0 - t / std::sqrt(2.0 + t * t), 1e-14);
        EXPECT_EQ(student_t_two_sided_p(-t, 2.0), student_t_two_sided_p(t, 2.0));
    }
    EXPECT_EQ(student_t_two_sided_p(kInf, 3.0), 0.0);
    EXPECT_THROW((void)student_t_two_sided_p(1.0, 0.0), DataError);
}

TEST(StudentT, IncompleteBetaEdges) {
    EXPECT_EQ(incomplete_beta(0.0, 2.0, 3.0), 0.0);
    EXPECT_EQ(incomplete_beta(1.0, 2.0, 3.0), 1.0);
    // I_x(1, 1) = x and I_x(a, 1) = x^a.
    EXPECT_NEAR(incomplete_beta(0.37, 1.0, 1.0), 0.37, 1e-15);
    EXPECT_NEAR(incomplete_beta(0.6, 3.0, 1.0), 0.216, 1e-14);
    EXPECT_THROW((void)incomplete_beta(0.5, 0.0, 1.0), DataError);
}

TEST(StudentT, MatchesQuadratureOracle) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ut(-8.0, 8.0);
    std::uniform_real_distribution<double> udf(1.0, 60.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double t = ut(rng);
        const double df = udf(rng);
        EXPECT_NEAR(student_t_two_sided_p(t, df), oracle::t_two_sided_quadrature(t, df), 1e-9)
            << "t=" << t << " df=" << df;
    }
}

TEST(StudentT, MatchesTrapezoidOracle) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ut(-6.0, 6.0);
    std::uniform_real_distribution<double> udf(1.0, 40.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double t = ut(rng);
        const double df = udf(rng);
        const double p = student_t_two_sided_p(t, df);
        EXPECT_NEAR(p, oracle::t_two_sided_trapezoid(t, df, 1e-4), 1e-6)
            << "t=" << t << " df=" << df;
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
}

// ---------------------------------------------------------------------------
// t tests and effect size
// ---------------------------------------------------------------------------

TEST(TTest, IdenticalSamples) {
    const Vec a{0.4, 0.1, 0.9, 0.3};
    for (auto kind : {TestKind::Paired, TestKind::PooledIndependent}) {
        const auto r = t_test(a, a, kind);
        EXPECT_EQ(r.t_statistic, 0.0);
        EXPECT_EQ(r.p_value, 1.0);
        EXPECT_EQ(r.cohens_d, 0.0);
    }
    const Vec c{2, 2, 2};
    const auto r = t_test(c, c, TestKind::PooledIndependent);
    EXPECT_EQ(r.t_statistic, 0.0);
    EXPECT_EQ(r.p_value, 1.0);
}

TEST(TTest, ZeroVarianceDifferencesGiveInfinitySentinel) {
    const auto r = t_test(Vec{1, 2, 3}, Vec{0, 1, 2}, TestKind::Paired);
    EXPECT_EQ(r.t_statistic, kInf);
    EXPECT_EQ(r.p_value, 0.0);
    const auto neg = t_test(Vec{0, 1, 2}, Vec{1, 2, 3}, TestKind::Paired);
    EXPECT_EQ(neg.t_statistic, -kInf);
    EXPECT_EQ(neg.p_value, 0.0);
    const auto pooled = t_test(Vec{0, 0}, Vec{1, 1}, TestKind::PooledIndependent);
    EXPECT_EQ(pooled.t_statistic, -kInf);
    EXPECT_EQ(pooled.p_value, 0.0);
}

TEST(TTest, PairedExampleMatchesOracle) {
    const Vec a{1, 2, 3, 4};
    const Vec b{2, 2, 2, 2};
    const auto r = t_test(a, b, TestKind::Paired);
    const auto o = oracle::paired(a, b);
    // d = [-1, 0, 1, 2]: mean 0.5, s_d = sqrt(5/3).
    EXPECT_NEAR(r.t_statistic, 0.5 / (std::sqrt(5.0 / 3.0) / 2.0), 1e-12);
    EXPECT_NEAR(r.t_statistic, o.t, 1e-9);
    EXPECT_NEAR(r.p_value, o.p, 1e-9);
    EXPECT_EQ(r.df, 3.0);
    EXPECT_EQ(r.n1, 4u);
    EXPECT_EQ(r.n2, 4u);
    EXPECT_EQ(r.kind, TestKind::Paired);
}

TEST(TTest, RandomPairsMatchOracle) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n1 = 2 + trial % 19;
        const std::size_t n2 = trial % 3 == 0 ? n1 : 2 + (trial * 7) % 23;
        const auto a = random_sample(rng, n1, 0.0, 1.0);
        const auto b = random_sample(rng, n2, 0.3 * (trial % 5), 0.5 + 0.1 * (trial % 4));

        const auto pr = t_test(a, b, TestKind::PooledIndependent);
        const auto po = oracle::pooled(a, b);
        EXPECT_NEAR(pr.t_statistic, po.t, tol(po.t));
        EXPECT_NEAR(pr.p_value, po.p, 1e-9);
        EXPECT_NEAR(pr.cohens_d, po.d, tol(po.d));
        EXPECT_EQ(pr.df, po.df);

        if (n1 == n2) {
            const auto r = t_test(a, b, TestKind::Paired);
            const auto o = oracle::paired(a, b);
            EXPECT_NEAR(r.t_statistic, o.t, tol(o.t));
            EXPECT_NEAR(r.p_value, o.p, 1e-9);
            EXPECT_NEAR(r.cohens_d, o.d, tol(o.d));
            EXPECT_EQ(r.df, o.df);
        }
    }
}

TEST(TTest, EqualSizesReduceToTwoOverN) {
    const Vec a{1.0, 2.5, 3.0, 0.5};
    const Vec b{2.0, 2.0, 4.5, 3.5};
    const auto r = t_test(a, b, TestKind::PooledIndependent);
    const double sp = std::sqrt((sample_variance(a) + sample_variance(b)) / 2.0);
    EXPECT_NEAR(r.t_statistic, (sample_mean(a) - sample_mean(b)) / (sp * std::sqrt(2.0 / 4.0)),
                1e-12);
}

TEST(TTest, InputValidation) {
    EXPECT_THROW((void)t_test(Vec{1, 2}, Vec{1, 2, 3}, TestKind::Paired), DataError);
    EXPECT_THROW((void)t_test(Vec{1}, Vec{1}, TestKind::Paired), DataError);
    EXPECT_THROW((void)t_test(Vec{1}, Vec{1, 2}, TestKind::PooledIndependent), DataError);
}

TEST(TTest, TranslationInvariance) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = random_sample(rng, 8, 0.0, 1.0);
        const auto b = random_sample(rng, 8, 0.4, 1.2);
        const double shift = std::uniform_real_distribution<double>(-10.0, 10.0)(rng);
        Vec as = a;
        Vec bs = b;
        for (auto &x : as) {
            x += shift;
        }
        for (auto &x : bs) {
            x += shift;
        }
        for (auto kind : {TestKind::Paired, TestKind::PooledIndependent}) {
            const auto r0 = t_test(a, b, kind);
            const auto r1 = t_test(as, bs, kind);
            EXPECT_NEAR(r0.t_statistic, r1.t_statistic, 1e-12);
            EXPECT_NEAR(r0.p_value, r1.p_value, 1e-12);
        }
        EXPECT_NEAR(cohens_d(a, b), cohens_d(as, bs), 1e-12);
    }
}

TEST(CohensD, Examples) {
    EXPECT_EQ(cohens_d(Vec{0, 0}, Vec{1, 1}), -kInf);
    EXPECT_EQ(cohens_d(Vec{1, 1}, Vec{0, 0}), kInf);
    EXPECT_EQ(cohens_d(Vec{3, 3}, Vec{3, 3}), 0.0);
    const Vec a{0.2, 0.9, 0.4};
    EXPECT_EQ(cohens_d(a, a), 0.0);
    EXPECT_DOUBLE_EQ(cohens_d(Vec{1, 2, 3}, Vec{3, 4, 5}), -2.0);
    EXPECT_THROW((void)cohens_d(Vec{1}, Vec{1, 2}), DataError);
}

TEST(CohensD, ScaleInvariance) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        auto a = random_sample(rng, 6, 0.0, 1.0);
        auto b = random_sample(rng, 9, 1.0, 2.0);
        const double d0 = cohens_d(a, b);
        const double k = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
        for (auto &x : a) {
            x *= k;
        }
        for (auto &x : b) {
            x *= k;
        }
        EXPECT_NEAR(cohens_d(a, b), d0, 1e-10);
    }
}

// ---------------------------------------------------------------------------
// Stability and serialization
// ---------------------------------------------------------------------------

EpochHistory history_of(const Vec &train, const Vec &test) {
    EpochHistory h;
    h.train_loss = train;
    h.test_loss = test;
    h.wall_seconds.assign(test.size(), 0.0);
    return h;
}

TEST(Stability, ConstantSeries) {
    const auto s = stability(history_of(Vec(5, 0.1), Vec(5, 0.1)));
    EXPECT_EQ(s.train_loss_sd, 0.0);
    EXPECT_EQ(s.test_loss_sd, 0.0);
    EXPECT_DOUBLE_EQ(s.mean_test_loss, 0.1);
    EXPECT_DOUBLE_EQ(s.median_test_loss, 0.1);
}

TEST(Stability, FourEpochs) {
    const auto s = stability(history_of(Vec{4, 3, 2, 1}, Vec{1, 2, 3, 4}));
    EXPECT_DOUBLE_EQ(s.mean_test_loss, 2.5);
    EXPECT_DOUBLE_EQ(s.median_test_loss, 2.5);
    EXPECT_DOUBLE_EQ(s.test_loss_sd, std::sqrt(5.0 / 3.0));
    EXPECT_DOUBLE_EQ(s.train_loss_sd, std::sqrt(5.0 / 3.0));
}

TEST(Stability, SingleEpochIsDataError) {
    EXPECT_THROW((void)stability(history_of(Vec{1}, Vec{1})), DataError);
}

TEST(Stability, MedianWithinRange) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const auto x = random_sample(rng, 2 + trial, 1.0, 1.0);
        const double m = median(x);
        EXPECT_GE(m, *std::min_element(x.begin(), x.end()));
        EXPECT_LE(m, *std::max_element(x.begin(), x.end()));
    }
    EXPECT_EQ(median(Vec{3, 1, 2}), 2.0);
    EXPECT_EQ(median(Vec{4, 1, 3, 2}), 2.5);
}

TEST(Json, SentinelsAndKeys) {
    EXPECT_EQ(json_number(kInf), "inf");
    EXPECT_EQ(json_number(-kInf), "-inf");
    EXPECT_EQ(json_number(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(json_number(0.25), 0.25);

    const auto r = to_json(t_test(Vec{1, 2, 3}, Vec{0, 1, 2}, TestKind::Paired));
    EXPECT_EQ(r["t_statistic"], "inf");
    EXPECT_EQ(r["p_value"], 0.0);
    for (const char *k : {"kind", "t_statistic", "p_value", "cohens_d", "df", "n1", "n2"}) {
        EXPECT_TRUE(r.contains(k)) << k;
    }
    EXPECT_EQ(r["kind"], "paired");

    const auto m = to_json(metric_report(Vec{1, 2}, Vec{1, 3}));
    EXPECT_EQ(m.size(), 3u);
    for (const char *k : {"mae", "mse", "rmse"}) {
        EXPECT_TRUE(m.contains(k)) << k;
    }
    const auto s = to_json(stability(history_of(Vec{1, 2}, Vec{1, 2})));
    for (const char *k : {"train_loss_sd", "test_loss_sd", "mean_test_loss", "median_test_loss"}) {
        EXPECT_TRUE(s.contains(k)) << k;
    }
    EXPECT_EQ(to_string(TestKind::PooledIndependent), "pooled_independent");
}

} // namespace
} // namespace qsf
