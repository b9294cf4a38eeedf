// Fits every rank-size variant to one noisy series and compares them.
#include <cmath>
#include <cstdio>

#include "kslab/ranksize.hpp"
#include "kslab/rng.hpp"
#include "kslab/synthetic.hpp"

int main()
{
    using namespace kslab;

    auto y = synthetic::rank_series(RankModelSpec::lav4(3.1426, 0.2884, 0.8853, 0.2649), 110);
    Rng rng(5);
    for (auto& v : y) v *= std::exp(0.03 * rng.normal());
    const auto series = rank_ascending(y);

    for (auto variant : {RankVariant::zipf, RankVariant::yule_simon, RankVariant::lav3, RankVariant::lav5,
                         RankVariant::lav4}) {
        const auto fit = fit_rank_model(series, variant);
        const auto name = to_string(variant);
        std::printf("%-11.*s R2 %.6f  ", static_cast<int>(name.size()), name.data(), fit.r_squared);
        const auto names = parameter_names(variant);
        for (std::size_t j = 0; j < names.size(); ++j)
            std::printf(" %.*s=%.4f", static_cast<int>(names[j].size()), names[j].data(), fit.spec.params[j]);
        std::printf("\n");
        if (variant == RankVariant::lav4) {
            const auto beta = rank_fit_to_beta(fit);
            std::printf("            Beta(a, b) = (%.4f, %.4f)\n", beta.a, beta.b);
        }
    }
}
