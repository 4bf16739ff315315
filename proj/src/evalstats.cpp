#include "robopose/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace robopose::stats {

void PairedMeasurements::validate() const {
    if (algorithmic.size() != reference.size()) throw DomainError("paired series differ in length");
    if (algorithmic.empty()) throw DomainError("paired series are empty");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(algorithmic.begin(), algorithmic.end(), finite) ||
        !std::all_of(reference.begin(), reference.end(), finite)) {
        throw DomainError("paired series contain non-finite values");
    }
}

namespace {

void require_pairs(const PairedMeasurements& m, std::size_t min_n) {
    m.validate();
    if (m.size() < min_n) throw InsufficientDataError("need at least " + std::to_string(min_n) + " pairs");
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sample_std(std::span<const double> v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double pearson_raw(std::span<const double> x, std::span<const double> y) {
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("correlation undefined for a constant series");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

bool has_ties(std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) != s.end();
}

double safe_div(double num, double den, bool& undefined) {
    if (den == 0.0) {
        undefined = true;
        return 0.0;
    }
    return num / den;
}

}  // namespace

ErrorStats error_stats(const PairedMeasurements& m) {
    require_pairs(m, 2);
    std::vector<double> err(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) err[i] = std::abs(m.algorithmic[i] - m.reference[i]);
    ErrorStats s;
    s.mean = mean_of(err);
    s.std = sample_std(err, s.mean);
    s.median = median_of(err);
    return s;
}

double pearson(const PairedMeasurements& m) {
    require_pairs(m, 2);
    return pearson_raw(m.algorithmic, m.reference);
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double spearman(const PairedMeasurements& m) {
    require_pairs(m, 2);
    const auto rx = average_ranks(m.algorithmic);
    const auto ry = average_ranks(m.reference);
    if (has_ties(m.algorithmic) || has_ties(m.reference)) return pearson_raw(rx, ry);

    const double n = static_cast<double>(m.size());
    double sum_d2 = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) sum_d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    return 1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0));
}

LimitsOfAgreement limits_of_agreement(double mean_diff, double std_diff) {
    return {mean_diff + 1.96 * std_diff, mean_diff - 1.96 * std_diff};
}

BlandAltman bland_altman(const PairedMeasurements& m) {
    require_pairs(m, 2);
    std::vector<double> d(m.size());
    BlandAltman out;
    out.points.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        d[i] = m.algorithmic[i] - m.reference[i];
        out.points.emplace_back(0.5 * (m.algorithmic[i] + m.reference[i]), d[i]);
    }
    out.mean_diff = mean_of(d);
    out.std_diff = sample_std(d, out.mean_diff);
    const auto loa = limits_of_agreement(out.mean_diff, out.std_diff);
    out.upper_loa = loa.upper;
    out.lower_loa = loa.lower;
    return out;
}

std::vector<HistogramBin> error_range_distribution(const PairedMeasurements& m, double full_range, double bin_width_pct) {
    m.validate();
    if (!(full_range > 0.0)) throw DomainError("full_range must be > 0");
    if (!(bin_width_pct > 0.0)) throw DomainError("bin width must be > 0");

    std::vector<std::size_t> idx(m.size());
    std::size_t max_bin = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double pct = std::abs(m.algorithmic[i] - m.reference[i]) * 100.0 / full_range;
        idx[i] = static_cast<std::size_t>(std::floor(pct / bin_width_pct));
        max_bin = std::max(max_bin, idx[i]);
    }
    std::vector<HistogramBin> bins(max_bin + 1);
    for (std::size_t b = 0; b < bins.size(); ++b) {
        bins[b].lower_pct = static_cast<double>(b) * bin_width_pct;
        bins[b].upper_pct = static_cast<double>(b + 1) * bin_width_pct;
    }
    for (std::size_t i : idx) ++bins[i].count;
    for (auto& b : bins) b.fraction = static_cast<double>(b.count) / static_cast<double>(m.size());
    return bins;
}

void ConfusionMatrix::validate() const {
    if (counts.size() != classes.size()) throw DomainError("confusion matrix row count differs from class count");
    for (const auto& row : counts) {
        if (row.size() != classes.size()) throw DomainError("confusion matrix is not square");
        for (long c : row) {
            if (c < 0) throw DomainError("confusion matrix has a negative count");
        }
    }
}

long ConfusionMatrix::total() const {
    long t = 0;
    for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
    return t;
}

ConfusionMatrix ConfusionMatrix::from_labels(std::vector<std::string> classes, std::span<const std::string> actual,
                                             std::span<const std::string> predicted) {
    if (actual.size() != predicted.size()) throw DomainError("label lists differ in length");
    ConfusionMatrix cm{std::move(classes), {}};
    const std::size_t k = cm.classes.size();
    cm.counts.assign(k, std::vector<long>(k, 0));
    auto index_of = [&](const std::string& label) {
        const auto it = std::find(cm.classes.begin(), cm.classes.end(), label);
        if (it == cm.classes.end()) throw DomainError("label not in class list: " + label);
        return static_cast<std::size_t>(it - cm.classes.begin());
    };
    for (std::size_t i = 0; i < actual.size(); ++i) ++cm.counts[index_of(actual[i])][index_of(predicted[i])];
    return cm;
}

ClassificationReport classification_report(const ConfusionMatrix& cm) {
    cm.validate();
    const long total = cm.total();
    if (cm.classes.empty() || total == 0) throw InsufficientDataError("confusion matrix holds no samples");

    const std::size_t k = cm.classes.size();
    const double n = static_cast<double>(total);
    std::vector<double> row_sum(k, 0.0), col_sum(k, 0.0);
    double trace = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            row_sum[i] += static_cast<double>(cm.counts[i][j]);
            col_sum[j] += static_cast<double>(cm.counts[i][j]);
        }
        trace += static_cast<double>(cm.counts[i][i]);
    }

    ClassificationReport r;
    r.total = total;
    r.accuracy = trace / n;

    double p_e = 0.0;
    for (std::size_t i = 0; i < k; ++i) p_e += (row_sum[i] / n) * (col_sum[i] / n);
    r.kappa = p_e == 1.0 ? 1.0 : (r.accuracy - p_e) / (1.0 - p_e);

    for (std::size_t i = 0; i < k; ++i) {
        ClassMetrics c;
        c.label = cm.classes[i];
        c.support = static_cast<long>(row_sum[i]);
        const double tp = static_cast<double>(cm.counts[i][i]);
        c.precision = safe_div(tp, col_sum[i], c.undefined);
        c.recall = safe_div(tp, row_sum[i], c.undefined);
        c.f1 = safe_div(2.0 * c.precision * c.recall, c.precision + c.recall, c.undefined);
        c.fm = std::sqrt(c.precision * c.recall);
        r.per_class.push_back(c);
    }

    const double kd = static_cast<double>(k);
    for (const auto& c : r.per_class) {
        r.macro_avg.precision += c.precision / kd;
        r.macro_avg.recall += c.recall / kd;
        r.macro_avg.f1 += c.f1 / kd;
        r.fm += c.fm / kd;
        const double w = static_cast<double>(c.support) / n;
        r.weighted_avg.precision += w * c.precision;
        r.weighted_avg.recall += w * c.recall;
        r.weighted_avg.f1 += w * c.f1;
    }
    return r;
}

}  // namespace robopose::stats
