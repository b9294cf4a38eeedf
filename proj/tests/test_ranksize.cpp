#include <chrono>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "kslab/ranksize.hpp"
#include "kslab/rng.hpp"
#include "kslab/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace kslab;

namespace {

const auto ati_k = RankModelSpec::lav4(3.1426, 0.2884, 0.8853, 0.2649);

void expect_recovered(const RankModelSpec& truth, const RankFitResult& fit, double rel_tol)
{
    ASSERT_EQ(fit.spec.variant, truth.variant);
    const auto names = parameter_names(truth.variant);
    for (std::size_t j = 0; j < truth.size(); ++j)
        EXPECT_LE(std::abs(fit.spec.params[j] - truth.params[j]), rel_tol * std::max(1.0, std::abs(truth.params[j])))
            << names[j] << ": got " << fit.spec.params[j] << " want " << truth.params[j];
}

} // namespace

TEST(RankAscending, SortsTiesAndIdempotence)
{
    EXPECT_EQ(rank_ascending(std::vector<double>{3, 1, 2}).values, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(rank_ascending(std::vector<double>{1, 2, 3}).values, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(rank_ascending(std::vector<double>{2, 2, 1}).values, (std::vector<double>{1, 2, 2}));
    EXPECT_EQ(kind_of([] { rank_ascending(std::vector<double>{}); }), ErrorKind::empty_input);
}

TEST(RankVariantNames, RoundTrip)
{
    for (auto v : {RankVariant::zipf, RankVariant::yule_simon, RankVariant::lav3, RankVariant::lav5, RankVariant::lav4}) {
        EXPECT_EQ(parse_rank_variant(to_string(v)), v);
        EXPECT_EQ(parameter_names(v).size(), parameter_count(v));
    }
    EXPECT_EQ(kind_of([] { parse_rank_variant("lav9"); }), ErrorKind::schema);
}

TEST(EvalRankModel, FlatLav4)
{
    for (double psi : {0.1, 1.0, 2.0})
        for (std::size_t r = 1; r <= 20; ++r)
            EXPECT_DOUBLE_EQ(eval_rank_model(RankModelSpec::lav4(1, 0, 0, psi), r, 20), 1.0);
}

TEST(EvalRankModel, ReferenceLav4AtFirstRank)
{
    const double v = eval_rank_model(ati_k, 1, 110);
    const auto ref = oracle::lav4_long(3.1426L, 0.2884L, 0.8853L, 0.2649L, 1.0L, 110.0L);
    EXPECT_NEAR(v, static_cast<double>(ref), 1e-14);
    EXPECT_NEAR(v, 0.8117, 5e-5);
}

TEST(EvalRankModel, MatchesLongDoubleEverywhere)
{
    for (std::size_t r = 1; r <= 110; ++r) {
        const auto ref = oracle::lav4_long(3.1426L, 0.2884L, 0.8853L, 0.2649L, static_cast<long double>(r), 110.0L);
        EXPECT_LE(rel_err(eval_rank_model(ati_k, r, 110), static_cast<double>(ref)), 1e-14);
    }
}

TEST(EvalRankModel, Lav3IsLav5WithoutOffsets)
{
    const auto l3 = RankModelSpec::lav3(2.5, -0.4, 0.7);
    const auto l5 = RankModelSpec::lav5(2.5, -0.4, 0.7, 0.0, 0.0);
    for (std::size_t n : {5u, 50u, 110u})
        for (std::size_t r = 1; r <= n; ++r) EXPECT_EQ(eval_rank_model(l3, r, n), eval_rank_model(l5, r, n));
}

TEST(EvalRankModel, DomainErrors)
{
    EXPECT_EQ(kind_of([] { eval_rank_model(ati_k, 0, 10); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([] { eval_rank_model(ati_k, 11, 10); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([] { eval_rank_model(RankModelSpec::zipf(-1, 1), 1, 10); }), ErrorKind::domain);
}

TEST(FitRankModel, ReferenceLav4Recovery)
{
    const auto y = synthetic::rank_series(ati_k, 110);
    const auto t0 = std::chrono::steady_clock::now();
    const auto fit = fit_rank_model(rank_ascending(y), RankVariant::lav4);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    expect_recovered(ati_k, fit, 1e-4);
    EXPECT_GE(fit.r_squared, 0.9999);
    EXPECT_TRUE(fit.converged);
    EXPECT_LT(secs, 1.0);
}

TEST(FitRankModel, RoundTripEveryVariant)
{
    struct Case {
        RankModelSpec spec;
        double tol;
    };
    const std::vector<Case> cases{
        {RankModelSpec::zipf(5.0, -0.8), 1e-6},
        {RankModelSpec::yule_simon(2.0, -0.5, -0.01), 1e-4},
        {RankModelSpec::lav3(3.0, -0.7, 0.3), 1e-4},
        {RankModelSpec::lav5(3.0, -0.7, 0.3, 0.5, 0.8), 1e-4},
        {RankModelSpec::lav4(1.7, 0.1692, 0.4378, 0.1213), 1e-4},
        {RankModelSpec::lav4(3.1426, 0.2884, 0.8853, 0.2649), 1e-4},
    };
    for (const auto& c : cases) {
        const auto y = synthetic::rank_series(c.spec, 110);
        const auto fit = fit_rank_model(rank_ascending(y), c.spec.variant);
        SCOPED_TRACE(std::string(to_string(c.spec.variant)));
        expect_recovered(c.spec, fit, c.tol);
        EXPECT_LE(fit.sse, fit.initial_sse);
    }
}

TEST(FitRankModel, ConstantSeries)
{
    const std::vector<double> y(40, 7.5);
    for (auto v : {RankVariant::zipf, RankVariant::lav3, RankVariant::lav4}) {
        const auto fit = fit_rank_model(rank_ascending(y), v);
        EXPECT_NEAR(fit.spec.params[0], 7.5, 1e-8) << to_string(v);
        EXPECT_NEAR(fit.spec.params[1], 0.0, 1e-8) << to_string(v);
        if (v != RankVariant::zipf) {
            EXPECT_NEAR(fit.spec.params[2], 0.0, 1e-8) << to_string(v);
        }
    }
}

TEST(FitRankModel, PermutationInvariant)
{
    auto y = synthetic::rank_series(ati_k, 110);
    Rng rng(3);
    for (auto& v : y) v *= 1.0 + 0.05 * rng.normal();
    const auto ref = fit_rank_model(std::span<const double>(y), RankVariant::lav4);
    for (int trial = 0; trial < 3; ++trial) {
        for (std::size_t i = y.size() - 1; i > 0; --i)
            std::swap(y[i], y[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);
        const auto again = fit_rank_model(std::span<const double>(y), RankVariant::lav4);
        for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(again.spec.params[j], ref.spec.params[j]);
        EXPECT_EQ(again.sse, ref.sse);
    }
}

TEST(FitRankModel, RefinementNeverWorsensInitializer)
{
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        auto y = synthetic::rank_series(ati_k, 110);
        for (auto& v : y) v *= std::exp(0.1 * rng.normal());
        for (auto variant : {RankVariant::zipf, RankVariant::yule_simon, RankVariant::lav3, RankVariant::lav5,
                             RankVariant::lav4}) {
            const auto fit = fit_rank_model(std::span<const double>(y), variant);
            EXPECT_LE(fit.sse, fit.initial_sse) << to_string(variant);
            EXPECT_GE(fit.r_squared, 0.0);
            if (variant == RankVariant::lav4) {
                EXPECT_GT(fit.spec.params[3], 0.0);
                EXPECT_LE(fit.spec.params[3], 2.0);
            }
        }
    }
}

TEST(FitRankModel, RejectsDegenerateInput)
{
    EXPECT_EQ(kind_of([] { fit_rank_model(std::vector<double>{1, 2, 3, 4, 5}, RankVariant::lav4); }),
              ErrorKind::insufficient_data);
    EXPECT_EQ(kind_of([] { fit_rank_model(std::vector<double>{0, 1, 2, 3, 4, 5, 6}, RankVariant::lav4); }),
              ErrorKind::domain);
    RankedSeries unsorted{{3, 2, 1, 4, 5, 6, 7}};
    EXPECT_EQ(kind_of([&] { fit_rank_model(unsorted, RankVariant::zipf); }), ErrorKind::domain);
}

TEST(RankFitToBeta, ReferenceCorrespondences)
{
    RankFitResult fit;
    fit.spec = ati_k;
    const auto a = rank_fit_to_beta(fit);
    EXPECT_NEAR(a.a, 1.8853, 1e-12);
    EXPECT_NEAR(a.b, 1.2884, 1e-12);

    fit.spec = RankModelSpec::lav4(1, 0.1692, 0.4378, 0.2);
    const auto b = rank_fit_to_beta(fit);
    EXPECT_NEAR(b.a, 1.4378, 1e-12);
    EXPECT_NEAR(b.b, 1.1692, 1e-12);

    fit.spec = RankModelSpec::lav4(1, 0, 0, 0.2);
    const auto u = rank_fit_to_beta(fit);
    EXPECT_EQ(u.a, 1.0);
    EXPECT_EQ(u.b, 1.0);

    fit.spec = RankModelSpec::zipf(1, 1);
    EXPECT_EQ(kind_of([&] { rank_fit_to_beta(fit); }), ErrorKind::unsupported);
}
