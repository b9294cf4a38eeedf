#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "kslab/beta.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace kslab;

namespace {

const std::vector<double> shape_grid{0.5, 1.0, 2.0, 5.0, 10.0};

double log_log_slope(long long k1, long long k2, long long k0, double a, double b)
{
    double mx = 0, my = 0;
    int n = 0;
    for (long long k = k1; k <= k2; ++k, ++n) {
        mx += std::log(static_cast<double>(k));
        my += std::log(urn_limit_pmf(k, k0, a, b));
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (long long k = k1; k <= k2; ++k) {
        const double dx = std::log(static_cast<double>(k)) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(urn_limit_pmf(k, k0, a, b)) - my);
    }
    return sxy / sxx;
}

} // namespace

TEST(LnGamma, ClosedForms)
{
    EXPECT_NEAR(ln_gamma(1.0), 0.0, 1e-15);
    EXPECT_NEAR(ln_gamma(2.0), 0.0, 1e-15);
    EXPECT_NEAR(ln_gamma(5.0), std::log(24.0), 1e-14);
    EXPECT_NEAR(ln_gamma(5.0), 3.1780538, 1e-7);
    EXPECT_NEAR(ln_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-15);
    EXPECT_NEAR(ln_gamma(0.5), 0.5723649, 1e-7);
    double log_fact = 0.0;
    for (int n = 1; n <= 170; ++n) {
        EXPECT_NEAR(ln_gamma(n + 1.0), log_fact + std::log(static_cast<double>(n)), 1e-12 * std::max(1.0, log_fact))
            << n;
        log_fact += std::log(static_cast<double>(n));
    }
}

TEST(LnGamma, AgreesWithIndependentImplementation)
{
    for (double x = 1e-6; x < 1e6; x *= 1.37) {
        const double ref = std::lgamma(x);
        EXPECT_NEAR(ln_gamma(x), ref, 1e-12 * std::max(1.0, std::abs(ref))) << x;
    }
}

TEST(LnGamma, DomainErrors)
{
    EXPECT_EQ(kind_of([] { ln_gamma(0.0); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([] { ln_gamma(-1.5); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([] { ln_gamma(std::nan("")); }), ErrorKind::domain);
}

TEST(BetaFunction, Values)
{
    EXPECT_DOUBLE_EQ(beta_function(1, 1), 1.0);
    EXPECT_NEAR(beta_function(2, 3), 1.0 / 12.0, 1e-16);
    EXPECT_NEAR(beta_function(0.5, 0.5), std::numbers::pi, 1e-14);
    for (double a : shape_grid)
        for (double b : shape_grid) {
            EXPECT_LE(rel_err(beta_function(a, b), beta_function(b, a)), 1e-15);
            EXPECT_LE(rel_err(std::log(beta_function(a, b)), ln_beta(a, b)), 1e-12);
        }
    EXPECT_EQ(kind_of([] { beta_function(0, 1); }), ErrorKind::domain);
}

TEST(BetaPdf, Values)
{
    EXPECT_DOUBLE_EQ(beta_pdf(0.5, {1, 1}), 1.0);
    EXPECT_NEAR(beta_pdf(0.5, {2, 2}), 1.5, 1e-14);
    EXPECT_EQ(beta_pdf(-0.1, {2, 2}), 0.0);
    EXPECT_EQ(beta_pdf(1.1, {2, 2}), 0.0);
    EXPECT_EQ(beta_pdf(0.0, {2, 2}), 0.0);
    EXPECT_DOUBLE_EQ(beta_pdf(0.0, {1, 3}), 3.0);
    EXPECT_TRUE(std::isinf(beta_pdf(0.0, {0.5, 3})));
    EXPECT_TRUE(std::isinf(beta_pdf(1.0, {3, 0.5})));
}

TEST(BetaPdf, IntegratesToOne)
{
    for (double a : shape_grid)
        for (double b : shape_grid) {
            const double mass = oracle::integrate_weighted01(
                [](double) { return 1.0; }, [&](double u, double v) { return oracle::beta_pdf_reflected(u, v, a, b); });
            EXPECT_NEAR(mass, 1.0, 1e-10) << a << "," << b;
        }
}

TEST(BetaCdf, Values)
{
    EXPECT_NEAR(beta_cdf(0.3, {1, 1}), 0.3, 1e-15);
    EXPECT_NEAR(beta_cdf(0.5, {2, 2}), 0.5, 1e-15);
    EXPECT_NEAR(beta_cdf(0.5, {1, 2}), 0.75, 1e-15);
    EXPECT_EQ(beta_cdf(0.0, {2, 5}), 0.0);
    EXPECT_EQ(beta_cdf(1.0, {2, 5}), 1.0);
    EXPECT_EQ(kind_of([] { beta_cdf(1.5, {2, 5}); }), ErrorKind::domain);
}

TEST(BetaCdf, MonotoneAndExactAtOne)
{
    for (double a : shape_grid)
        for (double b : shape_grid) {
            double prev = 0.0;
            for (int i = 0; i <= 2000; ++i) {
                const double c = beta_cdf(i / 2000.0, {a, b});
                ASSERT_GE(c, prev) << a << "," << b << " at " << i;
                prev = c;
            }
            EXPECT_EQ(beta_cdf(1.0, {a, b}), 1.0);
        }
}

TEST(BetaCdf, MatchesIntegratedDensity)
{
    static boost::math::quadrature::tanh_sinh<double> integrator;
    for (double a : shape_grid)
        for (double b : shape_grid)
            for (double x : {0.05, 0.3, 0.5, 0.77, 0.99}) {
                const double ref = integrator.integrate([&](double t) { return beta_pdf(t, {a, b}); }, 0.0, x, 1e-14);
                EXPECT_NEAR(beta_cdf(x, {a, b}), ref, 1e-10) << a << "," << b << "," << x;
            }
}

TEST(BetaShape, ClosedFormValues)
{
    EXPECT_DOUBLE_EQ(beta_skewness({3, 3}), 0.0);
    EXPECT_NEAR(beta_skewness({1, 2}), 4.0 / (5.0 * std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(beta_skewness({1, 2}), 0.565685, 1e-6);
    EXPECT_NEAR(beta_kurtosis({1, 1}), 1.8, 1e-15);
    EXPECT_NEAR(beta_kurtosis({2, 2}), 15.0 / 7.0, 1e-15);
    EXPECT_NEAR(beta_kurtosis({1e4, 1e4}), 3.0, 1e-3);
    EXPECT_NEAR(beta_skewness({2, 1}), -beta_skewness({1, 2}), 1e-15);
}

TEST(BetaShape, AgreesWithQuadratureMoments)
{
    for (double a : shape_grid)
        for (double b : shape_grid) {
            const auto ref = oracle::beta_moments_by_quadrature(a, b);
            const auto raw = oracle::beta_moments_unnormalized(a, b);
            const double s = beta_skewness({a, b}), k = beta_kurtosis({a, b});
            EXPECT_NEAR(s, ref.skewness, 1e-8 * std::max(1.0, std::abs(ref.skewness))) << a << "," << b;
            EXPECT_LE(rel_err(k, ref.kurtosis), 1e-8) << a << "," << b;
            EXPECT_NEAR(s, raw.skewness, 1e-8 * std::max(1.0, std::abs(raw.skewness))) << a << "," << b;
            EXPECT_LE(rel_err(k, raw.kurtosis), 1e-8) << a << "," << b;
            EXPECT_NEAR(ref.mean, a / (a + b), 1e-12);
        }
}

TEST(HelpVariable, Values)
{
    EXPECT_NEAR(help_variable(0.0, 1.8), 2.0, 1e-15);
    EXPECT_NEAR(help_variable(0.565685, 2.4), 3.0, 1e-5);
    EXPECT_NEAR(help_variable(4.0 / (5.0 * std::sqrt(2.0)), 2.4), 3.0, 1e-13);
    EXPECT_EQ(kind_of([] { help_variable(0.0, 3.0); }), ErrorKind::not_beta_representable);
    EXPECT_EQ(kind_of([] { help_variable(1.0, 10.0); }), ErrorKind::not_beta_representable);
}

TEST(HelpVariable, EqualsShapeSum)
{
    for (double a : shape_grid)
        for (double b : shape_grid)
            EXPECT_NEAR(help_variable(beta_skewness({a, b}), beta_kurtosis({a, b})), a + b, 1e-9) << a << "," << b;
}

TEST(CalibrateFromSk, HandCases)
{
    const auto c = calibrate_from_sk(4.0 / (5.0 * std::sqrt(2.0)), 2.4);
    EXPECT_NEAR(c.rho, 3.0, 1e-12);
    EXPECT_NEAR(c.ab_product, 2.0, 1e-12);
    EXPECT_NEAR(c.selected.a, 1.0, 1e-9);
    EXPECT_NEAR(c.selected.b, 2.0, 1e-9);

    const auto rounded = calibrate_from_sk(0.565685, 2.4);
    EXPECT_NEAR(rounded.selected.a, 1.0, 1e-5);
    EXPECT_NEAR(rounded.selected.b, 2.0, 1e-5);

    const auto u = calibrate_from_sk(0.0, 1.8);
    EXPECT_NEAR(u.rho, 2.0, 1e-15);
    EXPECT_NEAR(u.ab_product, 1.0, 1e-14);
    EXPECT_NEAR(u.selected.a, 1.0, 1e-14);
    EXPECT_NEAR(u.selected.b, 1.0, 1e-14);
}

TEST(CalibrateFromSk, NegativeSkewSwapsRoots)
{
    const auto c = calibrate_from_sk(beta_skewness({5, 2}), beta_kurtosis({5, 2}));
    EXPECT_NEAR(c.selected.a, 5.0, 1e-8);
    EXPECT_NEAR(c.selected.b, 2.0, 1e-8);
    EXPECT_LE(c.roots.first, c.roots.second);
}

TEST(CalibrateFromSk, RoundTripGrid)
{
    for (double a : shape_grid)
        for (double b : shape_grid) {
            const auto c = calibrate_from_sk(beta_skewness({a, b}), beta_kurtosis({a, b}));
            EXPECT_NEAR(c.selected.a, a, 1e-6 * std::max(1.0, a)) << a << "," << b;
            EXPECT_NEAR(c.selected.b, b, 1e-6 * std::max(1.0, b)) << a << "," << b;
        }
}

TEST(CalibrateFromSk, ReferenceShapeSums)
{
    struct Case {
        double a, b, rho;
    };
    for (const auto& c : {Case{0.7556, 4.9668, 5.7224}, Case{0.8493, 5.0623, 5.9116}}) {
        EXPECT_NEAR(c.a + c.b, c.rho, 5e-5);
        const auto cal = calibrate_from_sk(beta_skewness({c.a, c.b}), beta_kurtosis({c.a, c.b}));
        EXPECT_NEAR(cal.rho, c.rho, 5e-5);
        EXPECT_NEAR(cal.selected.a, c.a, 1e-6);
        EXPECT_NEAR(cal.selected.b, c.b, 1e-6);
    }
}

TEST(CalibrateFromSk, InfeasibleMoments)
{
    EXPECT_EQ(kind_of([] { calibrate_from_sk(0.0, 1.0); }), ErrorKind::infeasible_moments);
    EXPECT_EQ(kind_of([] { calibrate_from_sk(2.0, 4.0); }), ErrorKind::infeasible_moments);
    EXPECT_EQ(kind_of([] { calibrate_from_sk(2.0, 20.0); }), ErrorKind::not_beta_representable);
}

TEST(YuleSimon, Values)
{
    EXPECT_NEAR(yule_simon_pmf(1, 1.0), 0.5, 1e-15);
    EXPECT_NEAR(yule_simon_pmf(2, 1.0), 1.0 / 6.0, 1e-15);
    for (long long k = 1; k < 50; ++k) EXPECT_NEAR(yule_simon_pmf(k, 1.0), 1.0 / (k * (k + 1.0)), 1e-15);
}

TEST(YuleSimon, TruncatedSum)
{
    double sum = 0.0;
    for (long long k = 1; k <= 1000000; ++k) sum += yule_simon_pmf(k, 1.5);
    EXPECT_NEAR(sum, 1.0, 1e-4);
}

TEST(UrnLimit, Values)
{
    EXPECT_NEAR(urn_limit_pmf(1, 1, 1.0, 2.0), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(urn_limit_pmf(0, 1, 0.0, 3.0), 0.0);
    EXPECT_EQ(kind_of([] { urn_limit_pmf(2, 1, 0.0, 1.0); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([] { urn_limit_pmf(2, 1, -1.0, 3.0); }), ErrorKind::domain);
}

TEST(UrnLimit, TruncatedSumForSquareTail)
{
    double sum = 0.0;
    for (long long k = 1; k <= 1000000; ++k) sum += urn_limit_pmf(k, 1, 0.0, 2.0);
    EXPECT_NEAR(sum, 1.0, 1e-6);
}

TEST(UrnLimit, TruncatedSumPlusClosedFormTailIsOne)
{
    for (double b : {1.5, 2.0, 3.0})
        for (double a : {0.0, 0.5, 2.0})
            for (long long k0 : {1LL, 3LL}) {
                double sum = 0.0;
                for (long long k = k0; k <= 100000; ++k) sum += urn_limit_pmf(k, k0, a, b);
                EXPECT_NEAR(sum + urn_limit_tail(100001, k0, a, b), 1.0, 1e-9) << a << "," << b << "," << k0;
            }
}

TEST(UrnLimit, RatioIdentity)
{
    for (double b : {1.5, 2.0, 3.0})
        for (double a : {0.0, 1.0})
            for (long long k = 1; k < 1000; ++k)
                EXPECT_NEAR(urn_limit_pmf(k + 1, 1, a, b) / urn_limit_pmf(k, 1, a, b), (k + a) / (k + a + b), 1e-12);
}

TEST(UrnLimit, MatchesRatioRecursion)
{
    for (double b : {1.5, 2.0, 3.0, 4.0}) {
        const auto ref = oracle::urn_limit_by_recursion(2, 0.5L, b, 5000);
        for (long long k = 2; k <= 5000; ++k)
            EXPECT_LE(rel_err(urn_limit_pmf(k, 2, 0.5, b), static_cast<double>(ref[static_cast<std::size_t>(k - 2)])),
                      1e-11)
                << b << "," << k;
    }
}

TEST(UrnLimit, TailDecaysWithExponentB)
{
    for (double b : {1.5, 2.0, 3.0}) {
        const double slope = log_log_slope(1000, 10000, 1, 0.0, b);
        EXPECT_NEAR(slope, -b, 0.05 * b) << b;
    }
}
