#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kslab/beta.hpp"
#include "kslab/error.hpp"
#include "kslab/rng.hpp"

// Polya urn with preferential attachment and urn creation (Simon's scheme):
// each step either opens a new urn holding k0 balls (probability alpha) or
// adds one ball to an existing urn chosen with probability proportional to
// (k + a_shift), where k is the urn's current ball count.

namespace kslab {

struct UrnConfig {
    long long k0 = 1;
    double a_shift = 0.0;
    double alpha = 0.5;
    std::uint64_t steps = 0;
    std::uint64_t seed = 1;

    void validate() const
    {
        if (k0 < 1) fail(ErrorKind::domain, "UrnConfig: k0 must be >= 1");
        if (!(static_cast<double>(k0) + a_shift > 0.0))
            fail(ErrorKind::domain, "UrnConfig: k0 + a_shift must be positive");
        if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::domain, "UrnConfig: alpha must lie in [0, 1]");
    }
};

/// Binary-indexed tree of urn weights with O(log n) append, update and
/// weighted selection.
class WeightTree {
public:
    void reserve(std::size_t n) { tree_.reserve(n + 1); }

    [[nodiscard]] std::size_t size() const { return tree_.size() - 1; }

    void push_back(double w)
    {
        const std::size_t i = tree_.size();  // 1-based index of the new slot
        const std::size_t low = i & (~i + 1);
        tree_.push_back(w + prefix(i - 1) - prefix(i - low));
    }

    void add(std::size_t index, double delta)
    {
        for (std::size_t i = index + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
    }

    /// Sum of weights [0, count).
    [[nodiscard]] double prefix(std::size_t count) const
    {
        double s = 0.0;
        for (std::size_t i = count; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

    [[nodiscard]] double total() const { return prefix(size()); }

    /// Smallest index whose inclusive prefix sum exceeds `target`.
    [[nodiscard]] std::size_t find(double target) const
    {
        std::size_t pos = 0;
        std::size_t mask = 1;
        while (mask * 2 <= size()) mask *= 2;
        for (; mask != 0; mask /= 2) {
            const std::size_t next = pos + mask;
            if (next <= size() && tree_[next] <= target) {
                pos = next;
                target -= tree_[next];
            }
        }
        return std::min(pos, size() - 1);
    }

private:
    std::vector<double> tree_{0.0};
};

class UrnState {
public:
    explicit UrnState(const UrnConfig& config) : k0_(config.k0), a_shift_(config.a_shift)
    {
        config.validate();
        sizes_.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(config.steps, 1u << 26)) + 1);
        weights_.reserve(sizes_.capacity());
        push_urn();
    }

    void open_urn()
    {
        push_urn();
        ++new_steps_;
    }

    void attach(std::size_t urn)
    {
        ++sizes_[urn];
        weights_.add(urn, 1.0);
        ++total_balls_;
        ++attach_steps_;
    }

    [[nodiscard]] std::size_t pick(double u) const { return weights_.find(u * weights_.total()); }

    [[nodiscard]] const std::vector<long long>& sizes() const { return sizes_; }
    [[nodiscard]] long long total_balls() const { return total_balls_; }
    [[nodiscard]] std::uint64_t new_urn_steps() const { return new_steps_; }
    [[nodiscard]] std::uint64_t attach_steps() const { return attach_steps_; }

private:
    void push_urn()
    {
        sizes_.push_back(k0_);
        weights_.push_back(static_cast<double>(k0_) + a_shift_);
        total_balls_ += k0_;
    }

    long long k0_;
    double a_shift_;
    std::vector<long long> sizes_;
    WeightTree weights_;
    long long total_balls_ = 0;
    std::uint64_t new_steps_ = 0;
    std::uint64_t attach_steps_ = 0;
};

inline void step(UrnState& state, const UrnConfig& config, Rng& rng)
{
    if (rng.bernoulli(config.alpha))
        state.open_urn();
    else
        state.attach(state.pick(rng.uniform()));
}

struct SimResult {
    std::vector<long long> urn_sizes;
    std::map<long long, std::size_t> counts;   // size -> number of urns
    std::map<long long, double> empirical_pmf;  // size -> fraction of urns
    std::size_t n_urns = 0;
    long long total_balls = 0;
};

inline SimResult summarize_urns(std::vector<long long> sizes)
{
    SimResult out;
    out.n_urns = sizes.size();
    for (long long s : sizes) {
        ++out.counts[s];
        out.total_balls += s;
    }
    for (const auto& [k, c] : out.counts)
        out.empirical_pmf[k] = static_cast<double>(c) / static_cast<double>(out.n_urns);
    out.urn_sizes = std::move(sizes);
    return out;
}

inline SimResult run(const UrnConfig& config)
{
    UrnState state(config);
    Rng rng(config.seed);
    for (std::uint64_t t = 0; t < config.steps; ++t) step(state, config, rng);
    return summarize_urns(state.sizes());
}

/// Exponent b of the limit law B(k + a, b) / B(k0 + a, b - 1) reached by the
/// process, from the stationary master equation:
///   b = 1 + (alpha (k0 + a) + 1 - alpha) / (1 - alpha)
/// which for k0 = 1 is 1 + (1 + a alpha) / (1 - alpha).
inline double predicted_b(const UrnConfig& config)
{
    config.validate();
    if (!(config.alpha > 0.0 && config.alpha < 1.0))
        fail(ErrorKind::domain, "predicted_b: alpha must lie strictly inside (0, 1)");
    const double a = config.a_shift, alpha = config.alpha, k0 = static_cast<double>(config.k0);
    return 1.0 + (alpha * (k0 + a) + 1.0 - alpha) / (1.0 - alpha);
}

/// Total-variation distance between the empirical pmf and the limit law;
/// mass of the limit law on sizes never observed is included.
inline double tv_distance_to_limit(const SimResult& result, long long k0, double a, double b)
{
    double l1 = 0.0;
    double covered = 0.0;
    long long k_max = k0;
    for (const auto& [k, f] : result.empirical_pmf) k_max = std::max(k_max, k);
    for (long long k = k0; k <= k_max; ++k) {
        const double p = urn_limit_pmf(k, k0, a, b);
        const auto it = result.empirical_pmf.find(k);
        const double f = it == result.empirical_pmf.end() ? 0.0 : it->second;
        l1 += std::abs(f - p);
        covered += p;
    }
    for (const auto& [k, f] : result.empirical_pmf)
        if (k < k0) l1 += f;
    l1 += std::max(0.0, 1.0 - covered);
    return 0.5 * l1;
}

/// Slope of log frequency density against log size over k >= k_min, using
/// logarithmic bins (ratio sqrt 2). Counts are divided by bin width;
/// the fit stops at the first empty bin.
inline double empirical_tail_slope(const SimResult& result, long long k_min)
{
    if (k_min < 1) fail(ErrorKind::domain, "empirical_tail_slope: k_min must be >= 1");
    std::size_t distinct = 0;
    long long k_max = 0;
    for (const auto& [k, c] : result.counts)
        if (k >= k_min && c > 0) {
            ++distinct;
            k_max = std::max(k_max, k);
        }
    if (distinct < 10)
        fail(ErrorKind::insufficient_data, "empirical_tail_slope: need at least 10 distinct sizes >= k_min, found "
                                               + std::to_string(distinct));

    std::vector<long long> edges{k_min};
    for (double e = static_cast<double>(k_min);;) {
        e *= std::sqrt(2.0);
        const auto next = std::max(edges.back() + 1, static_cast<long long>(std::ceil(e)));
        edges.push_back(std::min(next, k_max + 1));
        if (edges.back() == k_max + 1) break;
    }

    const double total = static_cast<double>(result.n_urns);
    std::vector<double> lx, ly;
    auto it = result.counts.lower_bound(k_min);
    for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
        const long long lo = edges[j], hi = edges[j + 1];
        std::size_t c = 0;
        for (; it != result.counts.end() && it->first < hi; ++it) c += it->second;
        if (c == 0) break;
        const double width = static_cast<double>(hi - lo);
        lx.push_back(0.5 * (std::log(static_cast<double>(lo)) + std::log(static_cast<double>(hi - 1))));
        ly.push_back(std::log(static_cast<double>(c) / width / total));
    }
    if (lx.size() < 2) fail(ErrorKind::insufficient_data, "empirical_tail_slope: fewer than two populated bins");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    return sxy / sxx;
}

} // namespace kslab
