#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "robopose/evalstats.hpp"

using namespace robopose;
using namespace robopose::stats;

namespace {

PairedMeasurements pm(std::vector<double> x, std::vector<double> y) { return {std::move(x), std::move(y)}; }

PairedMeasurements random_pairs(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> U(0, 180);
    std::normal_distribution<double> N(0, 6);
    PairedMeasurements m;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = U(rng);
        m.reference.push_back(y);
        m.algorithmic.push_back(y + N(rng));
    }
    return m;
}

}  // namespace

TEST(ErrorStats, HandValues) {
    const auto z = error_stats(pm({1, 2, 3}, {1, 2, 3}));
    EXPECT_EQ(z.mean, 0.0);
    EXPECT_EQ(z.std, 0.0);
    EXPECT_EQ(z.median, 0.0);

    const auto e = error_stats(pm({1, 3}, {0, 0}));
    EXPECT_DOUBLE_EQ(e.mean, 2.0);
    EXPECT_DOUBLE_EQ(e.median, 2.0);
    EXPECT_DOUBLE_EQ(e.std, std::sqrt(2.0));
    EXPECT_THROW(error_stats(pm({1}, {2})), InsufficientDataError);
}

TEST(ErrorStats, MatchesTwoPassOracle) {
    std::mt19937_64 rng(48);
    for (int t = 0; t < 50; ++t) {
        const auto m = random_pairs(rng, 48);
        const auto e = error_stats(m);
        const auto o = oracle::abs_error_moments(m.algorithmic, m.reference);
        EXPECT_NEAR(e.mean, o.mean, 1e-9);
        EXPECT_NEAR(e.std, o.std, 1e-9);
        EXPECT_NEAR(e.median, o.median, 1e-9);
    }
}

TEST(Validation, RejectsBadSeries) {
    EXPECT_THROW(pm({1, 2}, {1}).validate(), DomainError);
    EXPECT_THROW(pm({}, {}).validate(), DomainError);
    EXPECT_THROW(pm({1, NAN}, {1, 2}).validate(), DomainError);
}

TEST(Pearson, SignsAndOracle) {
    EXPECT_NEAR(pearson(pm({1, 2, 3, 4}, {2, 4, 6, 8})), 1.0, 1e-15);
    EXPECT_NEAR(pearson(pm({1, 2, 3, 4}, {-1, -2, -3, -4})), -1.0, 1e-15);
    EXPECT_THROW(pearson(pm({1, 2, 3}, {5, 5, 5})), UndefinedCorrelationError);
    std::mt19937_64 rng(100);
    for (int t = 0; t < 100; ++t) {
        const auto m = random_pairs(rng, 100);
        EXPECT_NEAR(pearson(m), oracle::pearson(m.algorithmic, m.reference), 1e-12);
    }
}

TEST(Spearman, OrderAndTies) {
    EXPECT_NEAR(spearman(pm({1, 2, 3, 4}, {10, 20, 35, 90})), 1.0, 1e-15);
    EXPECT_NEAR(spearman(pm({1, 2, 3, 4}, {9, 5, 2, 1})), -1.0, 1e-15);
    const auto ties = pm({1, 2, 2, 3}, {1, 2, 3, 4});
    EXPECT_NEAR(spearman(ties), oracle::pearson(oracle::ranks(ties.algorithmic), oracle::ranks(ties.reference)), 1e-12);
    EXPECT_EQ(average_ranks(std::vector<double>{1, 2, 2, 3}), (std::vector<double>{1, 2.5, 2.5, 4}));
    EXPECT_THROW(spearman(pm({2, 2, 2}, {1, 2, 3})), UndefinedCorrelationError);
}

TEST(Spearman, MonotoneInvariance) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 20; ++t) {
        auto m = random_pairs(rng, 30);
        const double base = spearman(m);
        EXPECT_NEAR(base, oracle::spearman(m.algorithmic, m.reference), 1e-12);
        for (double& v : m.algorithmic) v = std::exp(v / 60.0);
        EXPECT_NEAR(spearman(m), base, 1e-12);
        EXPECT_LE(std::abs(base), 1.0);
    }
}

TEST(BlandAltman, PublishedLimitsOfAgreement) {
    const auto l = limits_of_agreement(2.25, 5.68);
    EXPECT_NEAR(l.upper, 13.38, 0.01);
    EXPECT_NEAR(l.lower, -8.88, 0.01);
}

TEST(BlandAltman, IdenticalSeriesAndOracle) {
    const auto z = bland_altman(pm({3, 4, 5}, {3, 4, 5}));
    EXPECT_EQ(z.upper_loa, 0.0);
    EXPECT_EQ(z.lower_loa, 0.0);
    EXPECT_THROW(bland_altman(pm({1}, {1})), InsufficientDataError);

    std::mt19937_64 rng(9);
    for (int t = 0; t < 50; ++t) {
        const auto m = random_pairs(rng, 40);
        const auto b = bland_altman(m);
        const auto o = oracle::bland_altman(m.algorithmic, m.reference);
        EXPECT_NEAR(b.mean_diff, o.mean, 1e-12);
        EXPECT_NEAR(b.std_diff, o.std, 1e-12);
        EXPECT_NEAR(b.upper_loa, o.upper, 1e-12);
        EXPECT_NEAR(b.lower_loa, o.lower, 1e-12);
        ASSERT_EQ(b.points.size(), m.size());
        EXPECT_NEAR(b.points[0].first, 0.5 * (m.algorithmic[0] + m.reference[0]), 1e-12);
        EXPECT_NEAR(b.points[0].second, m.algorithmic[0] - m.reference[0], 1e-12);

        const auto swapped = bland_altman(pm(m.reference, m.algorithmic));
        EXPECT_NEAR(swapped.mean_diff, -b.mean_diff, 1e-12);
        EXPECT_NEAR(swapped.upper_loa, -b.lower_loa, 1e-12);
    }
}

TEST(ErrorRange, Binning) {
    const auto zero = error_range_distribution(pm({1, 2}, {1, 2}));
    ASSERT_EQ(zero.size(), 1u);
    EXPECT_EQ(zero[0].count, 2u);
    EXPECT_DOUBLE_EQ(zero[0].fraction, 1.0);

    const auto two = error_range_distribution(pm({3.6, 9.0}, {0, 0}), 180.0, 4.0);
    ASSERT_EQ(two.size(), 2u);
    EXPECT_EQ(two[0].count, 1u);
    EXPECT_EQ(two[1].count, 1u);
    EXPECT_DOUBLE_EQ(two[1].lower_pct, 4.0);
    EXPECT_DOUBLE_EQ(two[1].upper_pct, 8.0);
}

TEST(ErrorRange, NaiveBinningOracle) {
    std::mt19937_64 rng(4);
    const auto m = random_pairs(rng, 200);
    const auto h = error_range_distribution(m);
    double sum = 0;
    for (std::size_t b = 0; b < h.size(); ++b) {
        std::size_t n = 0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double pct = std::abs(m.algorithmic[i] - m.reference[i]) / 180.0 * 100.0;
            n += static_cast<std::size_t>(std::floor(pct / 4.0)) == b;
        }
        EXPECT_EQ(h[b].count, n);
        sum += h[b].fraction;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Classification, PerfectAndConstantPredictor) {
    ConfusionMatrix diag{{"A", "B", "C"}, {{5, 0, 0}, {0, 3, 0}, {0, 0, 7}}};
    const auto r = classification_report(diag);
    EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(r.kappa, 1.0);
    EXPECT_DOUBLE_EQ(r.fm, 1.0);
    for (const auto& c : r.per_class) EXPECT_DOUBLE_EQ(c.f1, 1.0);

    ConfusionMatrix flat{{"A", "B"}, {{50, 0}, {50, 0}}};
    const auto f = classification_report(flat);
    EXPECT_DOUBLE_EQ(f.accuracy, 0.5);
    EXPECT_NEAR(f.kappa, 0.0, 1e-15);
    EXPECT_TRUE(f.per_class[1].undefined);
    EXPECT_EQ(f.per_class[1].precision, 0.0);
}

TEST(Classification, RandomMatricesMatchOracle) {
    std::mt19937_64 rng(33);
    std::uniform_int_distribution<long> C(0, 30);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::vector<long>> m(3, std::vector<long>(3));
        for (auto& row : m)
            for (auto& v : row) v = C(rng);
        const auto r = classification_report(ConfusionMatrix{{"A", "B", "C"}, m});
        const auto o = oracle::classification(m);
        EXPECT_NEAR(r.accuracy, o.accuracy, 1e-12);
        EXPECT_NEAR(r.kappa, o.kappa, 1e-12);
        EXPECT_NEAR(r.fm, o.fm, 1e-12);
        EXPECT_NEAR(r.macro_avg.f1, o.macro_f1, 1e-12);
        EXPECT_NEAR(r.weighted_avg.precision, o.weighted_p, 1e-12);
        EXPECT_NEAR(r.weighted_avg.recall, o.weighted_r, 1e-12);
        EXPECT_LE(r.kappa, r.accuracy + 1e-15);
        for (std::size_t k = 0; k < 3; ++k) {
            const auto& c = r.per_class[k];
            EXPECT_NEAR(c.precision, o.precision[k], 1e-12);
            EXPECT_NEAR(c.recall, o.recall[k], 1e-12);
            EXPECT_NEAR(c.f1, o.f1[k], 1e-12);
            EXPECT_GE(c.f1, std::min(c.precision, c.recall) - 1e-12);
            EXPECT_LE(c.f1, std::max(c.precision, c.recall) + 1e-12);
        }
    }
}

TEST(Classification, FromLabelsAndErrors) {
    const std::vector<std::string> actual{"A", "B", "B", "C"}, pred{"A", "B", "C", "C"};
    const auto cm = ConfusionMatrix::from_labels({"A", "B", "C"}, actual, pred);
    EXPECT_EQ(cm.counts, (std::vector<std::vector<long>>{{1, 0, 0}, {0, 1, 1}, {0, 0, 1}}));
    EXPECT_THROW(ConfusionMatrix::from_labels({"A"}, actual, pred), DomainError);
    EXPECT_THROW(classification_report(ConfusionMatrix{{"A", "B"}, {{0, 0}, {0, 0}}}), InsufficientDataError);
    EXPECT_THROW((ConfusionMatrix{{"A", "B"}, {{1, -1}, {0, 0}}}.validate()), DomainError);
}
