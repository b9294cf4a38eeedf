#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "kslab/beta.hpp"
#include "kslab/detail/number_format.hpp"
#include "kslab/ingest.hpp"
#include "kslab/ksfit.hpp"
#include "kslab/moments.hpp"
#include "kslab/ranksize.hpp"
#include "kslab/urnsim.hpp"

// Text, CSV and JSON encodings of results. Machine-readable outputs carry
// full round-trip precision; only the human summary tables are rounded.

namespace kslab::report {

using detail::format_full;
using detail::format_rounded;

/// Ordered key-value block; written as `key = value` lines or a JSON object.
class KeyValueBlock {
public:
    KeyValueBlock& add(std::string key, std::string value)
    {
        entries_.emplace_back(std::move(key), Value{std::move(value), false, 0.0});
        return *this;
    }

    KeyValueBlock& add(std::string key, double value)
    {
        entries_.emplace_back(std::move(key), Value{format_full(value), true, value});
        return *this;
    }

    KeyValueBlock& add(std::string key, std::size_t value)
    {
        entries_.emplace_back(std::move(key), Value{std::to_string(value), true, static_cast<double>(value)});
        return *this;
    }

    KeyValueBlock& add(std::string key, bool value) { return add(std::move(key), std::string(value ? "true" : "false")); }

    void write_text(std::ostream& out) const
    {
        for (const auto& [k, v] : entries_) out << k << " = " << v.text << '\n';
    }

    [[nodiscard]] nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        for (const auto& [k, v] : entries_) {
            if (v.numeric && std::isfinite(v.number))
                j[k] = v.number;
            else
                j[k] = v.text;
        }
        return j;
    }

    void write_json(std::ostream& out) const { out << to_json().dump(2) << '\n'; }

    [[nodiscard]] const std::string* find(const std::string& key) const
    {
        for (const auto& [k, v] : entries_)
            if (k == key) return &v.text;
        return nullptr;
    }

private:
    struct Value {
        std::string text;
        bool numeric = false;
        double number = 0.0;
    };
    std::vector<std::pair<std::string, Value>> entries_;
};

inline std::string csv_field(const std::string& v)
{
    if (v.find_first_of(",\"\n\r") == std::string::npos) return v;
    std::string q = "\"";
    for (char c : v) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

/// Small rectangular table with a header; CSV or JSON array-of-objects.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void write_csv(std::ostream& out) const
    {
        for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << csv_field(columns[i]);
        out << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
            out << '\n';
        }
    }

    void write_json(std::ostream& out) const
    {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
            nlohmann::ordered_json obj = nlohmann::ordered_json::object();
            for (std::size_t i = 0; i < columns.size(); ++i) {
                if (auto v = detail::parse_double(row[i]); v && std::isfinite(*v))
                    obj[columns[i]] = *v;
                else
                    obj[columns[i]] = row[i];
            }
            arr.push_back(std::move(obj));
        }
        out << arr.dump(2) << '\n';
    }
};

inline Table sk_points_table(const std::vector<SKPoint>& points)
{
    Table t{{"group", "s", "k", "n"}, {}};
    for (const auto& p : points) t.rows.push_back({p.group_key, format_full(p.s), format_full(p.k), std::to_string(p.n)});
    return t;
}

inline std::vector<SKPoint> read_sk_points(std::istream& in, const std::string& source = "<stream>")
{
    const auto table = kslab::detail::read_table(in, source);
    const auto gcol = table.column("group");
    const auto scol = table.column("s");
    const auto kcol = table.column("k");
    const bool has_n = table.has_column("n");
    const auto ncol = has_n ? table.column("n") : 0;
    std::vector<SKPoint> pts;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        SKPoint p;
        p.group_key = table.rows[r][gcol];
        p.s = kslab::detail::cell_number(table, r, scol, source);
        p.k = kslab::detail::cell_number(table, r, kcol, source);
        if (has_n) p.n = static_cast<std::size_t>(kslab::detail::cell_number(table, r, ncol, source));
        pts.push_back(std::move(p));
    }
    if (pts.empty()) fail(ErrorKind::empty_input, source + ": no points");
    return pts;
}

inline Table histogram_table(const std::vector<HistogramBin>& bins)
{
    Table t{{"bin_low", "bin_high", "count"}, {}};
    for (const auto& b : bins) t.rows.push_back({format_full(b.low), format_full(b.high), std::to_string(b.count)});
    return t;
}

/// Descriptive-statistics table, one column per named series, using the
/// conventional summary-table row labels.
inline void write_summary_table(std::ostream& out, const std::vector<std::pair<std::string, MomentSummary>>& columns,
                                const std::string& title)
{
    struct Row {
        const char* label;
        double (*get)(const MomentSummary&);
    };
    static const Row rows[] = {
        {"Min.", [](const MomentSummary& m) { return m.min; }},
        {"Max.", [](const MomentSummary& m) { return m.max; }},
        {"Sum", [](const MomentSummary& m) { return m.sum; }},
        {"N_p", [](const MomentSummary& m) { return static_cast<double>(m.n); }},
        {"Mean (μ)", [](const MomentSummary& m) { return m.mean; }},
        {"Median (m)", [](const MomentSummary& m) { return m.median; }},
        {"RMS", [](const MomentSummary& m) { return m.rms; }},
        {"St. Dev. (σ)", [](const MomentSummary& m) { return m.std_dev; }},
        {"Variance", [](const MomentSummary& m) { return m.variance; }},
        {"Std Err.", [](const MomentSummary& m) { return m.std_err; }},
        {"Skewn.", [](const MomentSummary& m) { return m.skewness; }},
        {"Kurt.", [](const MomentSummary& m) { return m.kurtosis; }},
        {"μ/σ", [](const MomentSummary& m) { return m.mu_over_sigma; }},
        {"CV (σ/μ)", [](const MomentSummary& m) { return m.cv; }},
        {"3(μ-m)/σ", [](const MomentSummary& m) { return m.nonparam_skew; }},
        {"ρ", [](const MomentSummary& m) { return m.rho.value_or(std::numeric_limits<double>::quiet_NaN()); }},
        {"μ-2σ", [](const MomentSummary& m) { return m.outlier_low; }},
        {"μ+2σ", [](const MomentSummary& m) { return m.outlier_high; }},
    };

    out << title << "\n";
    out << std::left << std::setw(16) << "";
    for (const auto& [name, s] : columns) out << std::right << std::setw(14) << name;
    out << "\n";
    for (const auto& row : rows) {
        // Multi-byte labels (μ, σ, ρ) need padding by code points, not bytes.
        std::string label = row.label;
        std::size_t cps = 0;
        for (unsigned char c : label) cps += (c & 0xC0) != 0x80;
        out << label << std::string(cps < 16 ? 16 - cps : 1, ' ');
        for (const auto& [name, s] : columns) {
            const double v = row.get(s);
            out << std::right << std::setw(14)
                << (row.label == std::string("N_p") ? std::to_string(s.n) : format_rounded(v));
        }
        out << "\n";
    }
}

inline KeyValueBlock ks_fit_block(const KSFitResult& r)
{
    KeyValueBlock b;
    b.add("model", std::string(to_string(r.model)));
    b.add("nu", r.nu).add("nu_se", r.se_nu);
    b.add("p", r.p).add("p_se", r.se_p);
    b.add("q", r.q).add("q_se", r.se_q);
    b.add("R2", r.r_squared);
    b.add("sse", r.sse);
    b.add("n_points", r.n_points);
    b.add("fit_space", std::string("raw (S, K)"));
    b.add("r2_space", std::string("raw K"));
    if (r.warning) b.add("warning", *r.warning);
    return b;
}

inline Table ks_residuals_table(const std::vector<SKPoint>& points, const KSFitResult& r)
{
    Table t{{"group", "s", "k", "fitted", "residual"}, {}};
    for (std::size_t i = 0; i < points.size(); ++i)
        t.rows.push_back({points[i].group_key, format_full(points[i].s), format_full(points[i].k),
                          format_full(r.predict(points[i].s)), format_full(r.residuals[i])});
    return t;
}

/// The fitted relation sampled on a uniform S grid spanning the data.
inline Table ks_curve_table(const std::vector<SKPoint>& points, const KSFitResult& r, std::size_t samples = 200)
{
    double lo = points.front().s, hi = points.front().s;
    for (const auto& p : points) {
        lo = std::min(lo, p.s);
        hi = std::max(hi, p.s);
    }
    if (r.model == KSModel::power) lo = std::max(lo, 0.0);
    Table t{{"s", "k_fitted"}, {}};
    for (std::size_t i = 0; i < samples; ++i) {
        const double s = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
        t.rows.push_back({format_full(s), format_full(r.predict(s))});
    }
    return t;
}

inline KeyValueBlock rank_fit_block(const RankFitResult& r, const std::string& series_label)
{
    KeyValueBlock b;
    b.add("model", std::string(to_string(r.spec.variant)));
    b.add("series", series_label);
    const auto names = parameter_names(r.spec.variant);
    for (std::size_t i = 0; i < names.size(); ++i) {
        b.add(std::string(names[i]), r.spec.params[i]);
        b.add(std::string(names[i]) + "_se", r.std_errors[i]);
    }
    b.add("R2", r.r_squared);
    b.add("sse", r.sse);
    b.add("initial_sse", r.initial_sse);
    b.add("converged", r.converged);
    b.add("ranking", std::string("ascending (rank 1 = smallest)"));
    b.add("r2_space", std::string("raw values"));
    if (r.spec.variant == RankVariant::lav4) {
        b.add("beta_mapping", std::string("a = xi4 + 1, b = gamma4 + 1"));
        b.add("beta_a", r.spec.params[2] + 1.0);
        b.add("beta_b", r.spec.params[1] + 1.0);
    }
    return b;
}

inline Table rank_curve_table(const RankedSeries& series, const RankFitResult& r)
{
    Table t{{"rank", "value", "fitted"}, {}};
    for (std::size_t i = 0; i < series.n(); ++i) {
        double fitted = std::numeric_limits<double>::quiet_NaN();
        try {
            fitted = eval_rank_model(r.spec, i + 1, series.n());
        } catch (const Error&) {
        }
        t.rows.push_back({std::to_string(i + 1), format_full(series.values[i]), format_full(fitted)});
    }
    return t;
}

inline KeyValueBlock beta_calibration_block(const BetaCalibration& c)
{
    KeyValueBlock b;
    b.add("S", c.s_in).add("K", c.k_in);
    b.add("rho", c.rho);
    b.add("ab", c.ab_product);
    b.add("discriminant", c.discriminant);
    b.add("root_minus", c.roots.first).add("root_plus", c.roots.second);
    b.add("a", c.selected.a).add("b", c.selected.b);
    b.add("kurtosis_convention", std::string("non-excess"));
    return b;
}

/// `x,cdf` at 512 uniform points on [0, 1], shape parameters in a comment header.
inline void write_beta_cdf_csv(std::ostream& out, BetaParams p, std::size_t points = 512)
{
    out << "# a=" << format_full(p.a) << "\n";
    out << "# b=" << format_full(p.b) << "\n";
    out << "x,cdf\n";
    for (std::size_t i = 0; i < points; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(points - 1);
        out << format_full(x) << ',' << format_full(beta_cdf(x, p)) << '\n';
    }
}

inline Table simulation_table(const SimResult& r, long long k0, double a, double b)
{
    Table t{{"k", "count", "frequency", "limit_pmf"}, {}};
    for (const auto& [k, c] : r.counts)
        t.rows.push_back({std::to_string(k), std::to_string(c), format_full(r.empirical_pmf.at(k)),
                          format_full(urn_limit_pmf(k, k0, a, b))});
    return t;
}

} // namespace kslab::report
