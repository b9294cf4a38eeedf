#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "kslab/detail/number_format.hpp"
#include "kslab/error.hpp"

// Beta-law toolkit: special functions, closed-form shape moments, the
// method-of-moments inversion (S, K) -> (a, b), and the discrete laws that
// arise as limits of preferential attachment.
//
// Naming note: the Yule-Simon pmf is usually written f(a; b) with an integer
// first argument. Here the integer argument is always called `k` so it never
// collides with the Beta shape parameter `a`.

namespace kslab {

struct BetaParams {
    double a = 1.0;
    double b = 1.0;
};

struct BetaCalibration {
    double s_in = 0.0;
    double k_in = 0.0;
    double rho = 0.0;         // help variable, equals a + b
    double ab_product = 0.0;  // a * b
    double discriminant = 0.0;  // 1 - 4ab / rho^2
    std::pair<double, double> roots{};  // (smaller, larger) solution of x (rho - x) = ab
    BetaParams selected{};
};

namespace detail {

inline void require_shape(double a, double b, const char* who)
{
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
        fail(ErrorKind::domain, std::string(who) + ": shape parameters must be positive and finite (a="
                                    + format_full(a) + ", b=" + format_full(b) + ")");
}

} // namespace detail

inline double ln_gamma(double x)
{
    if (!(x > 0.0) || !std::isfinite(x))
        fail(ErrorKind::domain, "ln_gamma: argument must be positive, got " + detail::format_full(x));
    return boost::math::lgamma(x);
}

inline double beta_function(double a, double b)
{
    detail::require_shape(a, b, "beta_function");
    return boost::math::beta(a, b);
}

inline double ln_beta(double a, double b)
{
    detail::require_shape(a, b, "ln_beta");
    return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
}

/// Density of Beta(a, b). Zero outside (0, 1); at an endpoint the limiting
/// value is returned, which is +inf when that endpoint's exponent is negative.
inline double beta_pdf(double x, BetaParams p)
{
    detail::require_shape(p.a, p.b, "beta_pdf");
    if (x < 0.0 || x > 1.0 || std::isnan(x)) return 0.0;
    const double inv_b = 1.0 / beta_function(p.a, p.b);
    if (x == 0.0) {
        if (p.a < 1.0) return std::numeric_limits<double>::infinity();
        return p.a == 1.0 ? inv_b : 0.0;
    }
    if (x == 1.0) {
        if (p.b < 1.0) return std::numeric_limits<double>::infinity();
        return p.b == 1.0 ? inv_b : 0.0;
    }
    return std::exp((p.a - 1.0) * std::log(x) + (p.b - 1.0) * std::log1p(-x) - ln_beta(p.a, p.b));
}

/// Regularized incomplete Beta I_x(a, b).
inline double beta_cdf(double x, BetaParams p)
{
    detail::require_shape(p.a, p.b, "beta_cdf");
    if (!(x >= 0.0 && x <= 1.0))
        fail(ErrorKind::domain, "beta_cdf: x must lie in [0, 1], got " + detail::format_full(x));
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    return boost::math::ibeta(p.a, p.b, x);
}

inline double beta_skewness(BetaParams p)
{
    detail::require_shape(p.a, p.b, "beta_skewness");
    const double a = p.a, b = p.b, s = a + b;
    return 2.0 * (b - a) * std::sqrt(s + 1.0) / ((s + 2.0) * std::sqrt(a * b));
}

/// Non-excess kurtosis (3 in the normal limit).
inline double beta_kurtosis(BetaParams p)
{
    detail::require_shape(p.a, p.b, "beta_kurtosis");
    const double a = p.a, b = p.b, s = a + b;
    return 3.0 * (s + 1.0) * (2.0 * s * s + a * b * (s - 6.0)) / (a * b * (s + 2.0) * (s + 3.0));
}

/// rho = 6 (K - S^2 - 1) / (6 + 3 S^2 - 2 K). For moments of a Beta law
/// rho = a + b.
inline double help_variable(double s, double k)
{
    const double denom = 6.0 + 3.0 * s * s - 2.0 * k;
    if (!(denom > 0.0))
        fail(ErrorKind::not_beta_representable,
             "help_variable: 6 + 3S^2 - 2K = " + detail::format_full(denom)
                 + " is not positive; (S, K) = (" + detail::format_full(s) + ", " + detail::format_full(k)
                 + ") is not representable by a Beta law");
    return 6.0 * (k - s * s - 1.0) / denom;
}

/// Method-of-moments inversion of (S, K) into Beta shape parameters.
/// The larger root goes to b for positive skewness and to a for negative.
inline BetaCalibration calibrate_from_sk(double s, double k)
{
    BetaCalibration cal;
    cal.s_in = s;
    cal.k_in = k;
    cal.rho = help_variable(s, k);
    const double rho = cal.rho;

    auto infeasible = [&](const std::string& why) {
        fail(ErrorKind::infeasible_moments, "calibrate_from_sk: " + why + " (rho=" + detail::format_full(rho)
                                                + ", discriminant=" + detail::format_full(cal.discriminant) + ")");
    };
    if (!(rho > 0.0)) infeasible("help variable is not positive");

    const double denom = (rho + 2.0) * (rho + 3.0) * k - 3.0 * (rho - 6.0) * (rho + 1.0);
    cal.ab_product = 6.0 * rho * rho * (rho + 1.0) / denom;
    cal.discriminant = 1.0 - 24.0 * (rho + 1.0) / denom;
    if (!(denom > 0.0) || !(cal.ab_product > 0.0)) infeasible("a*b is not positive");

    // Zero skewness forces a == b; tiny negative values are rounding on the
    // symmetric boundary.
    constexpr double disc_slack = 64.0 * std::numeric_limits<double>::epsilon();
    if (s == 0.0 || (cal.discriminant < 0.0 && cal.discriminant > -disc_slack)) cal.discriminant = 0.0;
    if (cal.discriminant < 0.0) infeasible("negative discriminant");

    const double root = std::sqrt(cal.discriminant);
    const double lo = 0.5 * rho * (1.0 - root);
    const double hi = 0.5 * rho * (1.0 + root);

    // Same roots by direct extraction from x (rho - x) = ab; the product form
    // avoids the cancellation in `lo`.
    const double lo_direct = cal.ab_product / hi;
    if (std::abs(lo - lo_direct) > 1e-9 * std::max(1.0, rho))
        fail(ErrorKind::internal, "calibrate_from_sk: root cross-check failed (" + detail::format_full(lo) + " vs "
                                      + detail::format_full(lo_direct) + ")");

    cal.roots = {lo, hi};
    if (s > 0.0)
        cal.selected = {lo, hi};
    else if (s < 0.0)
        cal.selected = {hi, lo};
    else
        cal.selected = {0.5 * rho, 0.5 * rho};
    if (!(cal.selected.a > 0.0) || !(cal.selected.b > 0.0)) infeasible("nonpositive shape parameter");
    return cal;
}

/// Yule-Simon pmf f(k; b) = b B(k, b + 1), k = 1, 2, ...
inline double yule_simon_pmf(long long k, double b)
{
    if (k < 1) fail(ErrorKind::domain, "yule_simon_pmf: k must be >= 1");
    if (!(b > 0.0)) fail(ErrorKind::domain, "yule_simon_pmf: b must be positive");
    return b * beta_function(static_cast<double>(k), b + 1.0);
}

/// Long-time fraction of urns holding k balls when new urns start with k0
/// balls and attachment is proportional to (k + a):
///   P(k) = B(k + a, b) / B(k0 + a, b - 1),  k >= k0.
/// Normalized over k >= k0; zero below k0.
inline double urn_limit_pmf(long long k, long long k0, double a, double b)
{
    if (k0 < 0) fail(ErrorKind::domain, "urn_limit_pmf: k0 must be >= 0");
    if (!(k0 + a > 0.0)) fail(ErrorKind::domain, "urn_limit_pmf: k0 + a must be positive");
    if (!(b > 1.0)) fail(ErrorKind::domain, "urn_limit_pmf: b must exceed 1 (law is not normalizable otherwise)");
    if (k < k0) return 0.0;
    return beta_function(static_cast<double>(k) + a, b) / beta_function(static_cast<double>(k0) + a, b - 1.0);
}

/// Probability mass at or above k_from, closed form via
/// sum_{k>=m} B(k + a, b) = B(m + a, b - 1).
inline double urn_limit_tail(long long k_from, long long k0, double a, double b)
{
    (void)urn_limit_pmf(k0, k0, a, b);  // validates arguments
    const long long m = std::max(k_from, k0);
    return beta_function(static_cast<double>(m) + a, b - 1.0) / beta_function(static_cast<double>(k0) + a, b - 1.0);
}

} // namespace kslab
