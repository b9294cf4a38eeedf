#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kslab/beta.hpp"
#include "kslab/error.hpp"
#include "kslab/ingest.hpp"

// Descriptive statistics with population (divide-by-n) central moments.
// Skewness is mu3 / mu2^{3/2}; kurtosis is mu4 / mu2^2 (non-excess).

namespace kslab {

struct ShapeMoments {
    double s = 0.0;
    double k = 0.0;
};

struct MomentSummary {
    std::size_t n = 0;
    double min = 0.0;
    double max = 0.0;
    double sum = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double rms = 0.0;
    double std_dev = 0.0;
    double variance = 0.0;
    double std_err = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    double mu_over_sigma = 0.0;
    double cv = 0.0;             // sigma / mu
    double nonparam_skew = 0.0;  // 3 (mu - m) / sigma
    std::optional<double> rho;   // help variable; empty when not Beta-representable
    double outlier_low = 0.0;    // mu - 2 sigma
    double outlier_high = 0.0;   // mu + 2 sigma
};

struct SKPoint {
    std::string group_key;
    double s = 0.0;
    double k = 0.0;
    std::size_t n = 0;
};

struct SkippedGroup {
    std::string group_key;
    std::size_t n = 0;
    std::string reason;
};

struct SKCloud {
    std::vector<SKPoint> points;
    std::vector<SkippedGroup> skipped;
};

struct HistogramBin {
    double low = 0.0;
    double high = 0.0;
    std::size_t count = 0;
};

namespace detail {

/// Mean as a coarse head plus the mean residual (corrected two-pass).
struct SplitMean {
    double head = 0.0;
    double correction = 0.0;
    [[nodiscard]] double value() const { return head + correction; }
};

inline SplitMean split_mean(std::span<const double> values)
{
    const auto n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double x : values) sum += x;
    SplitMean m;
    m.head = sum / n;
    double resid = 0.0;
    for (double x : values) resid += x - m.head;
    m.correction = resid / n;
    return m;
}

} // namespace detail

namespace detail {

/// Central moments mu_2..mu_4 accumulated in extended precision about a
/// two-pass mean, with the residual offset folded back in.
inline std::array<long double, 3> central_moments_ext(std::span<const double> values)
{
    const auto n = static_cast<long double>(values.size());
    long double sum = 0.0L;
    for (double x : values) sum += x;
    const long double head = sum / n;
    long double s1 = 0.0L, s2 = 0.0L, s3 = 0.0L, s4 = 0.0L;
    for (double x : values) {
        const long double d = static_cast<long double>(x) - head;
        const long double d2 = d * d;
        s1 += d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    if (s2 == 0.0L) fail(ErrorKind::zero_variance, "central_moments: all values are equal");
    const long double e = s1 / n, r2 = s2 / n, r3 = s3 / n, r4 = s4 / n;
    const long double e2 = e * e;
    return {r2 - e2, r3 - 3.0L * e * r2 + 2.0L * e2 * e, r4 - 4.0L * e * r3 + 6.0L * e2 * r2 - 3.0L * e2 * e2};
}

inline void require_spread(std::span<const double> values, const char* who)
{
    if (values.empty()) fail(ErrorKind::empty_input, std::string(who) + ": empty sample");
    if (values.size() == 1) fail(ErrorKind::degenerate_sample, std::string(who) + ": a single value has no spread");
}

} // namespace detail

/// Central moments mu_1..mu_order (mu_1 is zero by construction).
inline std::vector<double> central_moments(std::span<const double> values, int order)
{
    if (order < 2 || order > 4) fail(ErrorKind::domain, "central_moments: order must be 2, 3 or 4");
    detail::require_spread(values, "central_moments");
    const auto mu = detail::central_moments_ext(values);
    std::vector<double> out{0.0, static_cast<double>(mu[0]), static_cast<double>(mu[1]), static_cast<double>(mu[2])};
    out.resize(static_cast<std::size_t>(order));
    return out;
}

inline ShapeMoments shape_moments(std::span<const double> values)
{
    detail::require_spread(values, "central_moments");
    const auto mu = detail::central_moments_ext(values);
    return {static_cast<double>(mu[1] / (mu[0] * std::sqrt(mu[0]))), static_cast<double>(mu[2] / (mu[0] * mu[0]))};
}

/// Median with the midpoint convention for even n.
inline double median(std::span<const double> values)
{
    if (values.empty()) fail(ErrorKind::empty_input, "median: empty sample");
    std::vector<double> v(values.begin(), values.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return lower + 0.5 * (upper - lower);
}

inline MomentSummary summarize(std::span<const double> values)
{
    detail::require_spread(values, "central_moments");
    const auto mu = detail::central_moments_ext(values);
    const auto mean = detail::split_mean(values);

    MomentSummary out;
    out.n = values.size();
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    out.min = *lo;
    out.max = *hi;
    double sum = 0.0, sumsq = 0.0;
    for (double x : values) {
        sum += x;
        sumsq += x * x;
    }
    const auto n = static_cast<double>(out.n);
    out.sum = sum;
    out.mean = mean.value();
    out.median = median(values);
    out.rms = std::sqrt(sumsq / n);
    out.variance = static_cast<double>(mu[0]);
    out.std_dev = std::sqrt(out.variance);
    out.std_err = out.std_dev / std::sqrt(n);
    out.skewness = static_cast<double>(mu[1] / (mu[0] * std::sqrt(mu[0])));
    out.kurtosis = static_cast<double>(mu[2] / (mu[0] * mu[0]));
    out.mu_over_sigma = out.mean / out.std_dev;
    out.cv = out.std_dev / out.mean;
    out.nonparam_skew = 3.0 * (out.mean - out.median) / out.std_dev;
    if (6.0 + 3.0 * out.skewness * out.skewness - 2.0 * out.kurtosis > 0.0)
        out.rho = help_variable(out.skewness, out.kurtosis);
    out.outlier_low = out.mean - 2.0 * out.std_dev;
    out.outlier_high = out.mean + 2.0 * out.std_dev;
    return out;
}

/// One (S, K) point per group with at least `min_n` values. Groups below the
/// threshold, or with zero variance, are reported in `skipped`.
inline SKCloud group_sk_points(const GroupedDataset& data, std::size_t min_n = 4)
{
    SKCloud cloud;
    for (const auto& [key, values] : data.groups) {
        if (values.size() < std::max<std::size_t>(min_n, 2)) {
            cloud.skipped.push_back({key, values.size(), "fewer than " + std::to_string(min_n) + " values"});
            continue;
        }
        try {
            const auto sk = shape_moments(values);
            cloud.points.push_back({key, sk.s, sk.k, values.size()});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::zero_variance) throw;
            cloud.skipped.push_back({key, values.size(), "zero variance"});
        }
    }
    if (cloud.points.empty())
        fail(ErrorKind::empty_input, "group_sk_points: every group was skipped (" + std::to_string(cloud.skipped.size())
                                         + " groups below min_n=" + std::to_string(min_n) + " or constant)");
    return cloud;
}

/// Indices of values strictly outside (mu - 2 sigma, mu + 2 sigma).
inline std::vector<std::size_t> detect_outliers(std::span<const double> values, double mu, double sigma)
{
    if (!(sigma > 0.0)) fail(ErrorKind::domain, "detect_outliers: sigma must be positive");
    const double lo = mu - 2.0 * sigma;
    const double hi = mu + 2.0 * sigma;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] < lo || values[i] > hi) idx.push_back(i);
    return idx;
}

/// Equal-width bins over [min, max]; right-open except the last bin.
inline std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t n_bins)
{
    if (n_bins < 1) fail(ErrorKind::domain, "histogram: need at least one bin");
    if (values.empty()) fail(ErrorKind::empty_input, "histogram: empty sample");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (lo == hi) return {{lo, hi, values.size()}};

    const double width = (hi - lo) / static_cast<double>(n_bins);
    std::vector<HistogramBin> bins(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        bins[i].low = lo + width * static_cast<double>(i);
        bins[i].high = i + 1 == n_bins ? hi : lo + width * static_cast<double>(i + 1);
    }
    for (double x : values) {
        auto i = static_cast<std::size_t>(std::min<double>(std::floor((x - lo) / width), static_cast<double>(n_bins - 1)));
        while (i > 0 && x < bins[i].low) --i;
        while (i + 1 < n_bins && x >= bins[i + 1].low) ++i;
        ++bins[i].count;
    }
    return bins;
}

} // namespace kslab
