#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "robopose/types.hpp"

namespace robopose::stats {

/// Algorithmic values x_i against reference values y_i (degrees).
struct PairedMeasurements {
    std::vector<double> algorithmic;
    std::vector<double> reference;

    /// Throws DomainError on unequal lengths, empty series or non-finite values.
    void validate() const;
    std::size_t size() const { return algorithmic.size(); }
};

struct ErrorStats {
    double mean = 0.0;
    double std = 0.0;  // sample (n - 1)
    double median = 0.0;
};

/// Statistics of |x_i - y_i|. Throws InsufficientDataError when n < 2.
ErrorStats error_stats(const PairedMeasurements& m);

/// Throws UndefinedCorrelationError when either series is constant.
double pearson(const PairedMeasurements& m);

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// 1 - 6 sum d_i^2 / (n (n^2 - 1)) on rank differences; with tied values the
/// coefficient is computed as Pearson on average ranks, which it equals when untied.
double spearman(const PairedMeasurements& m);

struct BlandAltman {
    double mean_diff = 0.0;
    double std_diff = 0.0;
    double upper_loa = 0.0;
    double lower_loa = 0.0;
    /// (mean of pair, x - y) per sample.
    std::vector<std::pair<double, double>> points;
};

struct LimitsOfAgreement {
    double upper = 0.0;
    double lower = 0.0;
};

/// d +/- 1.96 s.
LimitsOfAgreement limits_of_agreement(double mean_diff, double std_diff);

BlandAltman bland_altman(const PairedMeasurements& m);

struct HistogramBin {
    double lower_pct = 0.0;
    double upper_pct = 0.0;
    std::size_t count = 0;
    double fraction = 0.0;
};

/// |x - y| as a percentage of full_range, in bins [0, w), [w, 2w), ...
/// Bins run up to the one holding the largest error.
std::vector<HistogramBin> error_range_distribution(const PairedMeasurements& m, double full_range = 180.0,
                                                   double bin_width_pct = 4.0);

/// Rows are actual classes, columns predicted.
struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<std::vector<long>> counts;

    /// Throws DomainError when not square or any count is negative.
    void validate() const;
    long total() const;

    /// Matrix over `classes` filled from paired label lists. Labels outside `classes` throw DomainError.
    static ConfusionMatrix from_labels(std::vector<std::string> classes, std::span<const std::string> actual,
                                       std::span<const std::string> predicted);
};

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double fm = 0.0;  // sqrt(P * R)
    long support = 0;
    /// Set when any of P, R, F1 hit a zero denominator and were reported as 0.
    bool undefined = false;
};

struct AveragedMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct ClassificationReport {
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    AveragedMetrics macro_avg;
    AveragedMetrics weighted_avg;
    double kappa = 0.0;
    /// Macro mean of per-class sqrt(P * R).
    double fm = 0.0;
    long total = 0;
};

/// Throws InsufficientDataError when the matrix holds no samples.
ClassificationReport classification_report(const ConfusionMatrix& cm);

}  // namespace robopose::stats
