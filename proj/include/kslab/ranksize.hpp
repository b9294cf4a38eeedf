#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kslab/beta.hpp"
#include "kslab/detail/number_format.hpp"
#include "kslab/error.hpp"
#include "kslab/optimize.hpp"

// Rank-size laws over an ascending ranking (rank 1 = smallest value):
//   ZIPF        d r^-alpha
//   YULE_SIMON  d r^-alpha exp(-lambda r)
//   LAV3        kappa r^-gamma (N - r + 1)^-xi
//   LAV5        kappa (r + phi)^-gamma (N + 1 - r + psi)^-xi
//   LAV4        kappa r^xi (N - r + psi)^-gamma     (generalized discrete Beta)

namespace kslab {

enum class RankVariant { zipf, yule_simon, lav3, lav5, lav4 };

inline std::string_view to_string(RankVariant v)
{
    switch (v) {
        case RankVariant::zipf: return "zipf";
        case RankVariant::yule_simon: return "yule_simon";
        case RankVariant::lav3: return "lav3";
        case RankVariant::lav5: return "lav5";
        case RankVariant::lav4: return "lav4";
    }
    return "unknown";
}

inline RankVariant parse_rank_variant(std::string_view name)
{
    for (auto v : {RankVariant::zipf, RankVariant::yule_simon, RankVariant::lav3, RankVariant::lav5, RankVariant::lav4})
        if (name == to_string(v)) return v;
    if (name == "yule-simon" || name == "yule") return RankVariant::yule_simon;
    fail(ErrorKind::schema, "unknown rank model '" + std::string(name) + "'");
}

inline std::size_t parameter_count(RankVariant v)
{
    switch (v) {
        case RankVariant::zipf: return 2;
        case RankVariant::yule_simon: return 3;
        case RankVariant::lav3: return 3;
        case RankVariant::lav5: return 5;
        case RankVariant::lav4: return 4;
    }
    return 0;
}

/// Parameter names in storage order. The scale parameter is always first.
inline std::vector<std::string_view> parameter_names(RankVariant v)
{
    switch (v) {
        case RankVariant::zipf: return {"d", "alpha"};
        case RankVariant::yule_simon: return {"d", "alpha", "lambda"};
        case RankVariant::lav3: return {"kappa3", "gamma", "xi"};
        case RankVariant::lav5: return {"kappa5", "gamma", "xi", "phi", "psi"};
        case RankVariant::lav4: return {"kappa4", "gamma4", "xi4", "psi4"};
    }
    return {};
}

struct RankModelSpec {
    RankVariant variant = RankVariant::lav4;
    std::array<double, 5> params{};  // first parameter_count(variant) entries are used

    [[nodiscard]] std::size_t size() const { return parameter_count(variant); }
    [[nodiscard]] double scale() const { return params[0]; }

    static RankModelSpec zipf(double d, double alpha) { return {RankVariant::zipf, {d, alpha}}; }
    static RankModelSpec yule_simon(double d, double alpha, double lambda)
    {
        return {RankVariant::yule_simon, {d, alpha, lambda}};
    }
    static RankModelSpec lav3(double kappa, double gamma, double xi) { return {RankVariant::lav3, {kappa, gamma, xi}}; }
    static RankModelSpec lav5(double kappa, double gamma, double xi, double phi, double psi)
    {
        return {RankVariant::lav5, {kappa, gamma, xi, phi, psi}};
    }
    static RankModelSpec lav4(double kappa, double gamma, double xi, double psi)
    {
        return {RankVariant::lav4, {kappa, gamma, xi, psi}};
    }
};

struct RankedSeries {
    std::vector<double> values;  // nondecreasing
    [[nodiscard]] std::size_t n() const { return values.size(); }
};

struct RankFitResult {
    RankModelSpec spec;
    std::array<double, 5> std_errors{};
    double r_squared = 0.0;  // raw space
    double sse = 0.0;        // raw space
    double initial_sse = 0.0;  // raw-space SSE of the profile/log-linear initializer
    bool converged = true;
};

inline RankedSeries rank_ascending(std::span<const double> values)
{
    if (values.empty()) fail(ErrorKind::empty_input, "rank_ascending: empty series");
    RankedSeries out;
    out.values.assign(values.begin(), values.end());
    std::stable_sort(out.values.begin(), out.values.end());
    return out;
}

namespace detail {

// log of the model without the scale factor, plus its gradient with respect
// to the non-scale parameters. Returns false outside the domain.
inline bool rank_log_shape(const RankModelSpec& m, double r, double n, double& g, std::array<double, 4>& dg)
{
    const auto& p = m.params;
    switch (m.variant) {
        case RankVariant::zipf:
            g = -p[1] * std::log(r);
            dg[0] = -std::log(r);
            return true;
        case RankVariant::yule_simon:
            g = -p[1] * std::log(r) - p[2] * r;
            dg[0] = -std::log(r);
            dg[1] = -r;
            return true;
        case RankVariant::lav3: {
            const double upper = n - r + 1.0;
            g = -p[1] * std::log(r) - p[2] * std::log(upper);
            dg[0] = -std::log(r);
            dg[1] = -std::log(upper);
            return true;
        }
        case RankVariant::lav5: {
            const double lower = r + p[3];
            const double upper = n + 1.0 - r + p[4];
            if (!(lower > 0.0) || !(upper > 0.0)) return false;
            g = -p[1] * std::log(lower) - p[2] * std::log(upper);
            dg[0] = -std::log(lower);
            dg[1] = -std::log(upper);
            dg[2] = -p[1] / lower;
            dg[3] = -p[2] / upper;
            return true;
        }
        case RankVariant::lav4: {
            const double upper = n - r + p[3];
            if (!(upper > 0.0)) return false;
            g = p[2] * std::log(r) - p[1] * std::log(upper);
            dg[0] = -std::log(upper);  // gamma4
            dg[1] = std::log(r);       // xi4
            dg[2] = -p[1] / upper;     // psi4
            return true;
        }
    }
    return false;
}

inline double raw_sse(const RankModelSpec& spec, std::span<const double> y)
{
    const double n = static_cast<double>(y.size());
    double sse = 0.0;
    std::array<double, 4> dg{};
    for (std::size_t i = 0; i < y.size(); ++i) {
        double g = 0.0;
        if (!rank_log_shape(spec, static_cast<double>(i + 1), n, g, dg)) return std::numeric_limits<double>::infinity();
        const double e = y[i] - spec.params[0] * std::exp(g);
        sse += e * e;
    }
    return sse;
}

/// Log-space linear fit of variants that are linear in (ln scale, exponents)
/// once any offsets are fixed. For LAV4 the offset psi4 is taken from `spec`.
inline RankModelSpec log_linear_fit(RankVariant variant, std::span<const double> y, double psi = 0.0,
                                    double* log_sse = nullptr)
{
    const auto n = static_cast<Eigen::Index>(y.size());
    const double N = static_cast<double>(y.size());
    Eigen::Index cols = 0;
    switch (variant) {
        case RankVariant::zipf: cols = 2; break;
        case RankVariant::yule_simon:
        case RankVariant::lav3:
        case RankVariant::lav4: cols = 3; break;
        case RankVariant::lav5: cols = 3; break;
    }
    Eigen::MatrixXd X(n, cols);
    Eigen::VectorXd ly(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = static_cast<double>(i + 1);
        ly[i] = std::log(y[static_cast<std::size_t>(i)]);
        X(i, 0) = 1.0;
        X(i, 1) = std::log(r);
        switch (variant) {
            case RankVariant::zipf: break;
            case RankVariant::yule_simon: X(i, 2) = r; break;
            case RankVariant::lav3:
            case RankVariant::lav5: X(i, 2) = std::log(N - r + 1.0); break;
            case RankVariant::lav4: X(i, 2) = std::log(N - r + psi); break;
        }
    }
    const auto fit = optimize::linear_least_squares(X, ly);
    if (log_sse) *log_sse = fit.sse;
    const double kappa = std::exp(fit.coef[0]);
    switch (variant) {
        case RankVariant::zipf: return RankModelSpec::zipf(kappa, -fit.coef[1]);
        case RankVariant::yule_simon: return RankModelSpec::yule_simon(kappa, -fit.coef[1], -fit.coef[2]);
        case RankVariant::lav3: return RankModelSpec::lav3(kappa, -fit.coef[1], -fit.coef[2]);
        case RankVariant::lav5: return RankModelSpec::lav5(kappa, -fit.coef[1], -fit.coef[2], 0.0, 0.0);
        case RankVariant::lav4: return RankModelSpec::lav4(kappa, -fit.coef[2], fit.coef[1], psi);
    }
    return {};
}

} // namespace detail

inline double eval_rank_model(const RankModelSpec& spec, std::size_t r, std::size_t n)
{
    if (r < 1 || r > n) fail(ErrorKind::domain, "eval_rank_model: rank must lie in [1, N]");
    if (!(spec.scale() > 0.0)) fail(ErrorKind::domain, "eval_rank_model: scale parameter must be positive");
    double g = 0.0;
    std::array<double, 4> dg{};
    if (!detail::rank_log_shape(spec, static_cast<double>(r), static_cast<double>(n), g, dg))
        fail(ErrorKind::domain, "eval_rank_model: nonpositive base in a real power at rank " + std::to_string(r));
    return spec.scale() * std::exp(g);
}

struct RankFitOptions {
    double psi_lo = 1e-6;
    double psi_hi = 2.0;
    double psi_tol = 1e-8;
};

/// Least-squares fit of a rank-size law on raw values. A log-space linear
/// fit (profiled over psi4 for LAV4) provides the start; Levenberg-Marquardt
/// then refines in raw space, keeping psi4 inside its bracket. R^2 and SSE are raw-space.
inline RankFitResult fit_rank_model(const RankedSeries& series, RankVariant variant, const RankFitOptions& opt = {})
{
    const auto& y = series.values;
    const std::size_t k = parameter_count(variant);
    if (y.size() < k + 2)
        fail(ErrorKind::insufficient_data, "fit_rank_model: " + std::string(to_string(variant)) + " needs at least "
                                               + std::to_string(k + 2) + " values");
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0))
            fail(ErrorKind::domain, "fit_rank_model: values must be positive (rank " + std::to_string(i + 1)
                                        + " has " + detail::format_full(y[i]) + ")");
        if (i > 0 && y[i] < y[i - 1]) fail(ErrorKind::domain, "fit_rank_model: series is not ranked ascending");
    }

    RankModelSpec start;
    if (variant == RankVariant::lav4) {
        auto log_sse_at = [&](double psi) {
            double s = 0.0;
            detail::log_linear_fit(variant, y, psi, &s);
            return s;
        };
        const auto best = optimize::scan_then_golden(log_sse_at, opt.psi_lo, opt.psi_hi, opt.psi_tol);
        start = detail::log_linear_fit(variant, y, best.x);
    } else {
        start = detail::log_linear_fit(variant, y);
    }

    const auto n = static_cast<Eigen::Index>(y.size());
    const double N = static_cast<double>(y.size());
    const auto np = static_cast<Eigen::Index>(k);
    auto model = [&](const Eigen::VectorXd& th, Eigen::VectorXd& res, Eigen::MatrixXd& J) {
        RankModelSpec m{variant, {}};
        for (Eigen::Index j = 0; j < np; ++j) m.params[static_cast<std::size_t>(j)] = th[j];
        if (!(m.scale() > 0.0)) return false;
        if (variant == RankVariant::lav4 && !(th[3] >= opt.psi_lo && th[3] <= opt.psi_hi)) return false;
        res.resize(n);
        J.resize(n, np);
        std::array<double, 4> dg{};
        for (Eigen::Index i = 0; i < n; ++i) {
            double g = 0.0;
            if (!detail::rank_log_shape(m, static_cast<double>(i + 1), N, g, dg)) return false;
            const double shape = std::exp(g);
            const double fitted = m.scale() * shape;
            res[i] = y[static_cast<std::size_t>(i)] - fitted;
            J(i, 0) = shape;
            for (Eigen::Index j = 1; j < np; ++j) J(i, j) = fitted * dg[static_cast<std::size_t>(j - 1)];
        }
        return res.allFinite() && J.allFinite();
    };

    Eigen::VectorXd x0(np);
    for (Eigen::Index j = 0; j < np; ++j) x0[j] = start.params[static_cast<std::size_t>(j)];

    RankFitResult out;
    out.initial_sse = detail::raw_sse(start, y);
    const auto lm = optimize::levenberg_marquardt(model, x0);

    if (lm.converged && lm.sse <= out.initial_sse) {
        out.spec.variant = variant;
        for (Eigen::Index j = 0; j < np; ++j) out.spec.params[static_cast<std::size_t>(j)] = lm.params[j];
        out.sse = lm.sse;
        out.converged = true;
    } else {
        out.spec = start;
        out.sse = out.initial_sse;
        out.converged = false;
    }

    Eigen::VectorXd th(np), res;
    Eigen::MatrixXd J;
    for (Eigen::Index j = 0; j < np; ++j) th[j] = out.spec.params[static_cast<std::size_t>(j)];
    out.std_errors.fill(std::numeric_limits<double>::quiet_NaN());
    if (model(th, res, J) && n > np) {
        const auto cov = optimize::covariance(J, out.sse / static_cast<double>(n - np));
        for (Eigen::Index j = 0; j < np; ++j) out.std_errors[static_cast<std::size_t>(j)] = std::sqrt(cov(j, j));
    }

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= N;
    double sst = 0.0;
    for (double v : y) sst += (v - mean) * (v - mean);
    out.r_squared = sst == 0.0 ? (out.sse == 0.0 ? 1.0 : 0.0) : std::clamp(1.0 - out.sse / sst, 0.0, 1.0);
    return out;
}

inline RankFitResult fit_rank_model(std::span<const double> values, RankVariant variant, const RankFitOptions& opt = {})
{
    return fit_rank_model(rank_ascending(values), variant, opt);
}

/// LAV4 exponents map onto Beta shape parameters: a = xi4 + 1, b = gamma4 + 1.
inline BetaParams rank_fit_to_beta(const RankFitResult& fit)
{
    if (fit.spec.variant != RankVariant::lav4)
        fail(ErrorKind::unsupported, "rank_fit_to_beta: only the LAV4 model maps onto Beta parameters");
    const BetaParams bp{fit.spec.params[2] + 1.0, fit.spec.params[1] + 1.0};
    if (!(bp.a > 0.0) || !(bp.b > 0.0))
        fail(ErrorKind::domain, "rank_fit_to_beta: fitted exponents give nonpositive shape parameters");
    return bp;
}

} // namespace kslab
