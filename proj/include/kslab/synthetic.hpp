#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kslab/ingest.hpp"
#include "kslab/moments.hpp"
#include "kslab/ranksize.hpp"
#include "kslab/rng.hpp"

// Seeded generators standing in for city-level microdata.

namespace kslab::synthetic {

struct GroupedOptions {
    std::size_t groups = 110;
    std::size_t min_cities = 20;
    std::size_t max_cities = 320;
    double log_sigma_lo = 0.8;
    double log_sigma_hi = 1.8;
    std::uint64_t seed = 2011;
};

inline std::string group_code(std::size_t i)
{
    std::string code(3, 'A');
    code[0] = static_cast<char>('A' + (i / 676) % 26);
    code[1] = static_cast<char>('A' + (i / 26) % 26);
    code[2] = static_cast<char>('A' + i % 26);
    return code;
}

/// Groups of log-normal values; each group draws its own size and log-scale
/// spread, so the (S, K) cloud spans a range of skewness.
inline GroupedDataset grouped_lognormal(const GroupedOptions& opt = {})
{
    Rng rng(opt.seed);
    GroupedDataset data;
    data.value_label = "value";
    for (std::size_t g = 0; g < opt.groups; ++g) {
        const auto n = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(opt.min_cities), static_cast<std::int64_t>(opt.max_cities)));
        const double sigma = opt.log_sigma_lo + (opt.log_sigma_hi - opt.log_sigma_lo) * rng.uniform();
        auto& values = data.groups[group_code(g)];
        values.reserve(n);
        for (std::size_t i = 0; i < n; ++i) values.push_back(std::round(1000.0 * std::exp(8.0 + sigma * rng.normal())));
    }
    return data;
}

struct SKCloudOptions {
    std::size_t n = 110;
    double p = 1.05;
    double q = 0.4;
    double nu = 2.0;
    double noise_sigma = 0.5;
    double s_lo = 0.5;
    double s_hi = 17.0;
    std::uint64_t seed = 7;
};

/// Points with K = p S^nu + q + N(0, noise_sigma^2), S uniform on [s_lo, s_hi].
inline std::vector<SKPoint> sk_cloud(const SKCloudOptions& opt = {})
{
    Rng rng(opt.seed);
    std::vector<SKPoint> pts;
    pts.reserve(opt.n);
    for (std::size_t i = 0; i < opt.n; ++i) {
        const double s = opt.s_lo + (opt.s_hi - opt.s_lo) * rng.uniform();
        const double k = opt.p * std::pow(s, opt.nu) + opt.q + opt.noise_sigma * rng.normal();
        pts.push_back({"P" + std::to_string(i + 1), s, k, 0});
    }
    return pts;
}

/// Noiseless series y_r = model(r), r = 1..n.
inline std::vector<double> rank_series(const RankModelSpec& spec, std::size_t n)
{
    std::vector<double> y;
    y.reserve(n);
    for (std::size_t r = 1; r <= n; ++r) y.push_back(eval_rank_model(spec, r, n));
    return y;
}

} // namespace kslab::synthetic
