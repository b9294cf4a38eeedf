#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "kslab/detail/number_format.hpp"
#include "kslab/error.hpp"
#include "kslab/moments.hpp"
#include "kslab/optimize.hpp"

// Kurtosis-skewness relations fitted across a cloud of (S, K) points:
//   quadratic  K = p S^2 + q
//   power      K = p S^nu + q   (nu free)
// Fits run in raw (S, K) space; R^2 is computed on K.

namespace kslab {

enum class KSModel { quadratic, power };

inline const char* to_string(KSModel m) { return m == KSModel::quadratic ? "quadratic" : "power"; }

struct KSFitResult {
    KSModel model = KSModel::quadratic;
    double p = 0.0;
    double q = 0.0;
    double nu = 2.0;
    double se_p = 0.0;
    double se_q = 0.0;
    double se_nu = 0.0;  // zero for the quadratic model, where nu is fixed
    double r_squared = 0.0;
    double sse = 0.0;
    std::size_t n_points = 0;
    std::vector<double> residuals;  // K - fitted, in input order
    std::optional<std::string> warning;

    [[nodiscard]] double predict(double s) const { return p * std::pow(s, nu) + q; }
};

struct PowerFitOptions {
    double nu_lo = 0.5;
    double nu_hi = 4.0;
    double nu_tol = 1e-6;
};

namespace detail {

// Sorting by (s, k) fixes the summation order, so every reported number is
// independent of the order the points arrive in.
inline std::vector<std::pair<double, double>> canonical_sk(std::span<const SKPoint> points)
{
    std::vector<std::pair<double, double>> sk;
    sk.reserve(points.size());
    for (const auto& pt : points) sk.emplace_back(pt.s, pt.k);
    std::sort(sk.begin(), sk.end());
    return sk;
}

struct SimpleRegression {
    double slope = 0.0;
    double intercept = 0.0;
    double sse = 0.0;
    double sxx = 0.0;
    double xbar = 0.0;
};

/// y = slope * x + intercept by centered least squares.
inline SimpleRegression simple_regression(std::span<const double> x, std::span<const double> y)
{
    const auto n = static_cast<double>(x.size());
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xbar += x[i];
        ybar += y[i];
    }
    xbar /= n;
    ybar /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - xbar;
        sxx += dx * dx;
        sxy += dx * (y[i] - ybar);
    }
    SimpleRegression r;
    r.sxx = sxx;
    r.xbar = xbar;
    if (sxx == 0.0) return r;
    r.slope = sxy / sxx;
    r.intercept = ybar - r.slope * xbar;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (r.slope * x[i] + r.intercept);
        r.sse += e * e;
    }
    return r;
}

inline double total_sum_of_squares(std::span<const double> y)
{
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double sst = 0.0;
    for (double v : y) sst += (v - mean) * (v - mean);
    return sst;
}

inline double r_squared_from(double sse, double sst)
{
    if (sst == 0.0) return sse == 0.0 ? 1.0 : 0.0;
    return std::clamp(1.0 - sse / sst, 0.0, 1.0);
}

inline void fill_residuals(KSFitResult& r, std::span<const SKPoint> points)
{
    r.residuals.clear();
    r.residuals.reserve(points.size());
    for (const auto& pt : points) r.residuals.push_back(pt.k - r.predict(pt.s));
}

} // namespace detail

inline KSFitResult fit_quadratic(std::span<const SKPoint> points)
{
    if (points.size() < 3) fail(ErrorKind::insufficient_data, "fit_quadratic: need at least 3 points");
    const auto sk = detail::canonical_sk(points);
    std::vector<double> x, y;
    for (const auto& [s, k] : sk) {
        x.push_back(s * s);
        y.push_back(k);
    }
    const auto reg = detail::simple_regression(x, y);
    if (reg.sxx == 0.0)
        fail(ErrorKind::singular_design, "fit_quadratic: all S^2 values are equal; slope is not identifiable");

    KSFitResult r;
    r.model = KSModel::quadratic;
    r.p = reg.slope;
    r.q = reg.intercept;
    r.nu = 2.0;
    r.n_points = points.size();
    r.sse = reg.sse;
    const auto n = static_cast<double>(sk.size());
    const double sigma2 = reg.sse / (n - 2.0);
    r.se_p = std::sqrt(sigma2 / reg.sxx);
    r.se_q = std::sqrt(sigma2 * (1.0 / n + reg.xbar * reg.xbar / reg.sxx));
    r.r_squared = detail::r_squared_from(reg.sse, detail::total_sum_of_squares(y));
    detail::fill_residuals(r, points);
    return r;
}

/// SSE of the best (p, q) at a fixed exponent, with the S values already
/// sorted canonically.
inline double profiled_power_sse(std::span<const std::pair<double, double>> sk, double nu)
{
    std::vector<double> x, y;
    x.reserve(sk.size());
    y.reserve(sk.size());
    for (const auto& [s, k] : sk) {
        x.push_back(std::pow(s, nu));
        y.push_back(k);
    }
    const auto reg = detail::simple_regression(x, y);
    if (reg.sxx == 0.0) return detail::total_sum_of_squares(y);
    return reg.sse;
}

/// Power-law relation. nu is profiled by golden-section search (the model is
/// linear in p, q at fixed nu), then (p, q, nu) are polished jointly by
/// Levenberg-Marquardt inside the bracket.
inline KSFitResult fit_power(std::span<const SKPoint> points, const PowerFitOptions& opt = {})
{
    if (points.size() < 4) fail(ErrorKind::insufficient_data, "fit_power: need at least 4 points");
    for (const auto& pt : points)
        if (!(pt.s > 0.0))
            fail(ErrorKind::domain, "fit_power: S must be positive for a real power; group '" + pt.group_key
                                        + "' has S=" + detail::format_full(pt.s));
    const auto sk = detail::canonical_sk(points);
    {
        bool distinct = false;
        for (const auto& [s, k] : sk) distinct = distinct || s != sk.front().first;
        if (!distinct) fail(ErrorKind::singular_design, "fit_power: all S values are equal");
    }

    const auto profile = optimize::golden_section(
        [&](double nu) { return profiled_power_sse(sk, nu); }, opt.nu_lo, opt.nu_hi, opt.nu_tol);

    std::vector<double> x, y;
    for (const auto& [s, k] : sk) {
        x.push_back(std::pow(s, profile.x));
        y.push_back(k);
    }
    const auto reg = detail::simple_regression(x, y);

    const auto n = static_cast<Eigen::Index>(sk.size());
    auto model = [&](const Eigen::VectorXd& th, Eigen::VectorXd& res, Eigen::MatrixXd& J) {
        const double p = th[0], q = th[1], nu = th[2];
        if (!(nu >= opt.nu_lo && nu <= opt.nu_hi)) return false;
        res.resize(n);
        J.resize(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = sk[static_cast<std::size_t>(i)].first;
            const double sn = std::pow(s, nu);
            res[i] = sk[static_cast<std::size_t>(i)].second - (p * sn + q);
            J(i, 0) = sn;
            J(i, 1) = 1.0;
            J(i, 2) = p * sn * std::log(s);
        }
        return res.allFinite();
    };
    Eigen::VectorXd start(3);
    start << reg.slope, reg.intercept, profile.x;
    const auto lm = optimize::levenberg_marquardt(model, start);

    KSFitResult r;
    r.model = KSModel::power;
    r.p = lm.params[0];
    r.q = lm.params[1];
    r.nu = lm.params[2];
    r.sse = lm.sse;
    r.n_points = points.size();

    Eigen::VectorXd res;
    Eigen::MatrixXd J;
    model(lm.params, res, J);
    const auto cov = optimize::covariance(J, lm.sse / static_cast<double>(n - 3));
    r.se_p = std::sqrt(cov(0, 0));
    r.se_q = std::sqrt(cov(1, 1));
    r.se_nu = std::sqrt(cov(2, 2));
    r.r_squared = detail::r_squared_from(lm.sse, detail::total_sum_of_squares(y));
    if (profile.at_boundary || r.nu - opt.nu_lo <= 2.0 * opt.nu_tol || opt.nu_hi - r.nu <= 2.0 * opt.nu_tol)
        r.warning = "exponent minimum lies on the search bracket boundary [" + detail::format_full(opt.nu_lo) + ", "
                    + detail::format_full(opt.nu_hi) + "]";
    if (!lm.converged) {
        std::string w = "Levenberg-Marquardt refinement did not converge";
        r.warning = r.warning ? *r.warning + "; " + w : w;
    }
    detail::fill_residuals(r, points);
    return r;
}

/// Help variable implied by a quadratic relation K = p S^2 + q at skewness s:
/// rho = 6 [(p-1) S^2 + (q-1)] / [(3-2p) S^2 + 2 (3-q)].
inline double help_variable_from_pq(double p, double q, double s)
{
    const double s2 = s * s;
    const double denom = (3.0 - 2.0 * p) * s2 + 2.0 * (3.0 - q);
    if (denom == 0.0)
        fail(ErrorKind::not_beta_representable, "help_variable_from_pq: denominator vanishes");
    return 6.0 * ((p - 1.0) * s2 + (q - 1.0)) / denom;
}

} // namespace kslab
