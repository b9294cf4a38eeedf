#include <cstdio>

#include "kslab/beta.hpp"
#include "kslab/urnsim.hpp"

int main()
{
    using namespace kslab;

    const UrnConfig cfg{1, 0.0, 0.5, 200000, 7};
    const auto result = run(cfg);
    const double b = predicted_b(cfg);

    std::printf("urns %zu, balls %lld, predicted b %.4f\n", result.n_urns, result.total_balls, b);
    std::printf("%6s %12s %12s\n", "k", "empirical", "limit");
    for (long long k = 1; k <= 10; ++k) {
        const auto it = result.empirical_pmf.find(k);
        std::printf("%6lld %12.6f %12.6f\n", k, it == result.empirical_pmf.end() ? 0.0 : it->second,
                    urn_limit_pmf(k, cfg.k0, cfg.a_shift, b));
    }
    std::printf("TV distance %.5f, tail slope %.3f\n", tv_distance_to_limit(result, cfg.k0, cfg.a_shift, b),
                empirical_tail_slope(result, 10));
}
