#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kslab/beta.hpp"
#include "kslab/error.hpp"
#include "kslab/ingest.hpp"
#include "kslab/ksfit.hpp"
#include "kslab/moments.hpp"
#include "kslab/ranksize.hpp"
#include "kslab/report.hpp"
#include "kslab/rng.hpp"
#include "kslab/synthetic.hpp"
#include "kslab/urnsim.hpp"
#include "kslab/version.hpp"

// Subcommand implementations behind the `kslab` executable. Each returns a
// process exit status:
//   0 ok, 2 schema/input, 3 empty result, 4 fit domain, 5 internal.

namespace kslab::cli {

enum ExitCode : int { exit_ok = 0, exit_schema = 2, exit_empty = 3, exit_fit_domain = 4, exit_internal = 5 };

inline int exit_code_for(ErrorKind kind)
{
    switch (kind) {
        case ErrorKind::schema:
        case ErrorKind::parse:
        case ErrorKind::io:
        case ErrorKind::integrity: return exit_schema;
        case ErrorKind::empty_input: return exit_empty;
        case ErrorKind::internal: return exit_internal;
        default: return exit_fit_domain;
    }
}

enum class Format { csv, json };

inline Format parse_format(const std::string& s)
{
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    fail(ErrorKind::schema, "unknown format '" + s + "' (expected csv or json)");
}

namespace detail {

namespace fs = std::filesystem;

inline void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
    body(out);
    if (!out) fail(ErrorKind::io, "write failed for '" + path.string() + "'");
}

inline std::string table_name(const std::string& stem, Format f) { return stem + (f == Format::json ? ".json" : ".csv"); }
inline std::string block_name(const std::string& stem, Format f) { return stem + (f == Format::json ? ".json" : ".txt"); }

inline void write_table(const fs::path& dir, const std::string& stem, Format f, const report::Table& t,
                        std::vector<std::string>* written = nullptr)
{
    const auto name = table_name(stem, f);
    write_file(dir / name, [&](std::ostream& o) { f == Format::json ? t.write_json(o) : t.write_csv(o); });
    if (written) written->push_back(name);
}

inline void write_block(const fs::path& dir, const std::string& stem, Format f, const report::KeyValueBlock& b,
                        std::vector<std::string>* written = nullptr)
{
    const auto name = block_name(stem, f);
    write_file(dir / name, [&](std::ostream& o) { f == Format::json ? b.write_json(o) : b.write_text(o); });
    if (written) written->push_back(name);
}

template <class Body>
int guarded(std::ostream& err, Body&& body)
{
    try {
        return body();
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error [io]: " << e.what() << '\n';
        return exit_schema;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
}

inline std::vector<double> column_of(const std::vector<SKPoint>& pts, char which)
{
    std::vector<double> v;
    v.reserve(pts.size());
    for (const auto& p : pts) v.push_back(which == 's' ? p.s : p.k);
    return v;
}

/// summary.txt: the distribution of S and K across groups, plus outliers and
/// the groups that were skipped.
inline void write_sk_summary(std::ostream& out, const SKCloud& cloud, const GroupedDataset* data)
{
    const auto s = column_of(cloud.points, 's');
    const auto k = column_of(cloud.points, 'k');
    std::optional<MomentSummary> ss, ks;
    try {
        ss = summarize(s);
        ks = summarize(k);
    } catch (const Error& e) {
        out << "Distribution of S and K across groups: not summarized (" << e.what() << ")\n";
    }
    if (ss && ks) {
        report::write_summary_table(out, {{"S", *ss}, {"K", *ks}},
                                    "Distribution of skewness S and kurtosis K across groups (rounded)");
        auto list_outliers = [&](const char* name, const std::vector<double>& v, const MomentSummary& m) {
            const auto idx = detect_outliers(v, m.mean, m.std_dev);
            out << "\nOutliers in " << name << " outside (μ-2σ, μ+2σ):";
            if (idx.empty()) out << " none";
            for (auto i : idx) out << ' ' << cloud.points[i].group_key;
            out << '\n';
        };
        list_outliers("S", s, *ss);
        list_outliers("K", k, *ks);
    }
    out << "\nGroups with an (S, K) point: " << cloud.points.size() << '\n';
    out << "Groups skipped: " << cloud.skipped.size() << '\n';
    for (const auto& g : cloud.skipped) out << "  " << g.group_key << " (n=" << g.n << "): " << g.reason << '\n';
    if (data) {
        const auto small = data->small_groups();
        if (!small.empty()) {
            out << "Groups with fewer than " << GroupedDataset::small_group_threshold << " values:";
            for (const auto& g : small) out << ' ' << g;
            out << '\n';
        }
    }
    out << "\nConventions: population central moments (divide by n); kurtosis is non-excess (normal = 3); "
           "CV = σ/μ.\n";
}

inline report::Table group_summaries_table(const GroupedDataset& data)
{
    report::Table t{{"group", "n", "min", "max", "sum", "mean", "median", "rms", "std_dev", "variance", "std_err",
                     "skewness", "kurtosis", "cv", "nonparam_skew", "rho"},
                    {}};
    using kslab::detail::format_full;
    for (const auto& [key, values] : data.groups) {
        if (values.size() < 2) continue;
        try {
            const auto m = summarize(values);
            t.rows.push_back({key, std::to_string(m.n), format_full(m.min), format_full(m.max), format_full(m.sum),
                              format_full(m.mean), format_full(m.median), format_full(m.rms), format_full(m.std_dev),
                              format_full(m.variance), format_full(m.std_err), format_full(m.skewness),
                              format_full(m.kurtosis), format_full(m.cv), format_full(m.nonparam_skew),
                              m.rho ? format_full(*m.rho) : std::string("undefined")});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::zero_variance) throw;
        }
    }
    return t;
}

} // namespace detail

// ---------------------------------------------------------------- stats

struct StatsOptions {
    std::string input;
    std::string group_by = "province";
    std::string value_column = "value";
    std::string city_column;  // optional label column
    std::size_t min_n = 4;
    std::size_t hist_bins = 20;
    std::filesystem::path out_dir = ".";
    Format format = Format::csv;
};

inline int cmd_stats(const StatsOptions& opt, std::ostream& err)
{
    return detail::guarded(err, [&] {
        const auto data = parse_city_csv(opt.input, ColumnMap{opt.group_by, opt.city_column, opt.value_column});
        const auto cloud = group_sk_points(data, opt.min_n);
        detail::write_file(opt.out_dir / "summary.txt",
                           [&](std::ostream& o) { detail::write_sk_summary(o, cloud, &data); });
        detail::write_table(opt.out_dir, "sk_points", opt.format, report::sk_points_table(cloud.points));
        detail::write_table(opt.out_dir, "hist_s", opt.format,
                            report::histogram_table(histogram(detail::column_of(cloud.points, 's'), opt.hist_bins)));
        detail::write_table(opt.out_dir, "hist_k", opt.format,
                            report::histogram_table(histogram(detail::column_of(cloud.points, 'k'), opt.hist_bins)));
        return int{exit_ok};
    });
}

// ---------------------------------------------------------------- fit / rank-fit

struct FitOptions {
    std::string input;
    std::string model = "quadratic";  // quadratic | power | rank:<variant>
    char target = 'k';                // series used by rank models
    PowerFitOptions power{};
    RankFitOptions rank{};
    std::filesystem::path out_dir = ".";
    Format format = Format::csv;
};

namespace detail {

/// Loads a series for rank fitting: the `s`/`k` column of an sk_points file,
/// or the `value` column of a plain series file.
inline std::vector<double> load_rank_series(const std::string& path, char target)
{
    auto in = kslab::detail::open_input(path);
    const auto table = kslab::detail::read_table(in, path);
    std::string col;
    if (table.has_column("s") && table.has_column("k"))
        col = std::string(1, target);
    else
        col = "value";
    const auto c = table.column(col);
    std::vector<double> v;
    for (std::size_t r = 0; r < table.rows.size(); ++r) v.push_back(kslab::detail::cell_number(table, r, c, path));
    if (v.empty()) fail(ErrorKind::empty_input, path + ": empty series");
    return v;
}

inline void write_rank_outputs(const std::filesystem::path& dir, Format f, const RankedSeries& series,
                               const RankFitResult& fit, const std::string& label, const std::string& suffix,
                               std::vector<std::string>* written = nullptr)
{
    const std::string stem = "rank_fit_" + std::string(to_string(fit.spec.variant)) + suffix;
    write_block(dir, stem, f, report::rank_fit_block(fit, label), written);
    write_table(dir, "rank_curve_" + std::string(to_string(fit.spec.variant)) + suffix, f,
                report::rank_curve_table(series, fit), written);
}

inline void write_ks_outputs(const std::filesystem::path& dir, Format f, const std::vector<SKPoint>& pts,
                             const KSFitResult& fit, std::vector<std::string>* written = nullptr)
{
    const std::string m = to_string(fit.model);
    write_block(dir, "ks_fit_" + m, f, report::ks_fit_block(fit), written);
    write_table(dir, "ks_residuals_" + m, f, report::ks_residuals_table(pts, fit), written);
    write_table(dir, "ks_curve_" + m, f, report::ks_curve_table(pts, fit), written);
}

} // namespace detail

inline int cmd_fit(const FitOptions& opt, std::ostream& err)
{
    return detail::guarded(err, [&] {
        if (opt.target != 's' && opt.target != 'k') fail(ErrorKind::schema, "target must be 's' or 'k'");
        if (opt.model.rfind("rank:", 0) == 0) {
            const auto variant = parse_rank_variant(opt.model.substr(5));
            const auto series = rank_ascending(detail::load_rank_series(opt.input, opt.target));
            const auto fit = fit_rank_model(series, variant, opt.rank);
            detail::write_rank_outputs(opt.out_dir, opt.format, series, fit, std::string(1, opt.target),
                                       std::string("_") + opt.target);
            return int{exit_ok};
        }
        auto in = kslab::detail::open_input(opt.input);
        const auto pts = report::read_sk_points(in, opt.input);
        KSFitResult fit;
        if (opt.model == "quadratic")
            fit = fit_quadratic(pts);
        else if (opt.model == "power")
            fit = fit_power(pts, opt.power);
        else
            fail(ErrorKind::schema, "unknown model '" + opt.model + "' (quadratic, power, rank:<variant>)");
        detail::write_ks_outputs(opt.out_dir, opt.format, pts, fit);
        return int{exit_ok};
    });
}

struct RankFitCmdOptions {
    std::string input;
    RankVariant variant = RankVariant::lav4;
    char target = 'k';
    RankFitOptions rank{};
    std::filesystem::path out_dir = ".";
    Format format = Format::csv;
};

inline int cmd_rank_fit(const RankFitCmdOptions& opt, std::ostream& err)
{
    return detail::guarded(err, [&] {
        const auto series = rank_ascending(detail::load_rank_series(opt.input, opt.target));
        const auto fit = fit_rank_model(series, opt.variant, opt.rank);
        detail::write_rank_outputs(opt.out_dir, opt.format, series, fit, opt.input, "");
        return int{exit_ok};
    });
}

// ---------------------------------------------------------------- beta-calibrate

struct BetaCalibrateOptions {
    std::optional<double> s, k;  // moment route
    std::optional<double> a, b;  // forward route: emit the moments and CDF of Beta(a, b)
    std::filesystem::path out_dir = ".";
    Format format = Format::csv;
};

inline int cmd_beta_calibrate(const BetaCalibrateOptions& opt, std::ostream& err)
{
    return detail::guarded(err, [&] {
        BetaParams params;
        report::KeyValueBlock block;
        if (opt.s && opt.k) {
            const auto cal = calibrate_from_sk(*opt.s, *opt.k);
            block = report::beta_calibration_block(cal);
            params = cal.selected;
        } else if (opt.a && opt.b) {
            params = {*opt.a, *opt.b};
            const double s = beta_skewness(params), k = beta_kurtosis(params);
            block.add("a", params.a).add("b", params.b);
            block.add("S", s).add("K", k);
            block.add("rho", params.a + params.b);
            block.add("kurtosis_convention", std::string("non-excess"));
        } else {
            fail(ErrorKind::schema, "beta-calibrate needs either --s and --k, or --a and --b");
        }
        detail::write_block(opt.out_dir, "beta_calibration", opt.format, block);
        detail::write_file(opt.out_dir / "beta_cdf.csv", [&](std::ostream& o) { report::write_beta_cdf_csv(o, params); });
        return int{exit_ok};
    });
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    UrnConfig config{1, 0.0, 0.5, 200000, 1};
    long long tail_k_min = 10;
    std::filesystem::path out_dir = ".";
    Format format = Format::csv;
};

namespace detail {

inline report::KeyValueBlock simulation_block(const UrnConfig& cfg, const SimResult& sim, long long tail_k_min)
{
    report::KeyValueBlock b;
    b.add("k0", std::to_string(cfg.k0)).add("a_shift", cfg.a_shift).add("alpha", cfg.alpha);
    b.add("steps", std::to_string(cfg.steps)).add("seed", std::to_string(cfg.seed));
    b.add("rng", std::string(Rng::name));
    b.add("n_urns", sim.n_urns).add("total_balls", std::to_string(sim.total_balls));
    if (cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        const double b_pred = predicted_b(cfg);
        b.add("predicted_b", b_pred);
        b.add("tv_distance", tv_distance_to_limit(sim, cfg.k0, cfg.a_shift, b_pred));
        b.add("limit_tail_exponent", -b_pred);
    }
    try {
        b.add("empirical_tail_slope", empirical_tail_slope(sim, tail_k_min));
        b.add("tail_k_min", std::to_string(tail_k_min));
    } catch (const Error& e) {
        b.add("empirical_tail_slope", std::string("undefined (") + e.what() + ")");
    }
    return b;
}

inline void write_simulation(const std::filesystem::path& dir, Format f, const UrnConfig& cfg, const SimResult& sim,
                             long long tail_k_min, std::vector<std::string>* written = nullptr)
{
    write_block(dir, "sim_summary", f, simulation_block(cfg, sim, tail_k_min), written);
    if (cfg.alpha > 0.0 && cfg.alpha < 1.0)
        write_table(dir, "sim", f, report::simulation_table(sim, cfg.k0, cfg.a_shift, predicted_b(cfg)), written);
}

} // namespace detail

inline int cmd_simulate(const SimulateOptions& opt, std::ostream& err)
{
    return detail::guarded(err, [&] {
        const auto sim = run(opt.config);
        detail::write_simulation(opt.out_dir, opt.format, opt.config, sim, opt.tail_k_min);
        return int{exit_ok};
    });
}

// ---------------------------------------------------------------- pipeline

struct PipelineConfig {
    std::string input;  // empty: use the built-in synthetic generator
    std::string group_by = "province";
    std::string value_column = "value";
    std::string city_column;
    std::size_t min_n = 4;
    std::size_t hist_bins = 20;
    std::uint64_t seed = 2011;
    std::size_t synthetic_groups = 110;
    double nu_lo = 0.5, nu_hi = 4.0;
    double psi_hi = 2.0;
    std::string rank_model = "lav4";
    bool simulate = false;
    std::uint64_t sim_steps = 200000;
    double sim_alpha = 0.5;
    double sim_a_shift = 0.0;
    long long sim_k0 = 1;
    Format format = Format::csv;
};

/// Applies `key = value` lines ('#' starts a comment) onto `cfg`.
inline void apply_config(std::istream& in, PipelineConfig& cfg, const std::string& source = "<config>")
{
    std::string line;
    std::size_t line_no = 0;
    auto bad = [&](const std::string& what) {
        fail(ErrorKind::schema, source + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto trimmed = kslab::detail::trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string_view::npos) bad("expected key = value");
        const std::string key(kslab::detail::trim(trimmed.substr(0, eq)));
        const std::string val(kslab::detail::trim(trimmed.substr(eq + 1)));
        auto num = [&] {
            auto v = kslab::detail::parse_double(val);
            if (!v) bad("'" + key + "' expects a number");
            return *v;
        };
        auto count = [&] {
            auto v = kslab::detail::parse_integer(val);
            if (!v || *v < 0) bad("'" + key + "' expects a nonnegative integer");
            return static_cast<std::uint64_t>(*v);
        };
        auto flag = [&] {
            if (val == "true" || val == "1" || val == "yes") return true;
            if (val == "false" || val == "0" || val == "no") return false;
            bad("'" + key + "' expects true or false");
            return false;
        };
        if (key == "input") cfg.input = val;
        else if (key == "group_by") cfg.group_by = val;
        else if (key == "value_column") cfg.value_column = val;
        else if (key == "city_column") cfg.city_column = val;
        else if (key == "min_n") cfg.min_n = count();
        else if (key == "hist_bins") cfg.hist_bins = count();
        else if (key == "seed") cfg.seed = count();
        else if (key == "synthetic_groups") cfg.synthetic_groups = count();
        else if (key == "nu_lo") cfg.nu_lo = num();
        else if (key == "nu_hi") cfg.nu_hi = num();
        else if (key == "psi_hi") cfg.psi_hi = num();
        else if (key == "rank_model") cfg.rank_model = val;
        else if (key == "simulate") cfg.simulate = flag();
        else if (key == "sim_steps") cfg.sim_steps = count();
        else if (key == "sim_alpha") cfg.sim_alpha = num();
        else if (key == "sim_a_shift") cfg.sim_a_shift = num();
        else if (key == "sim_k0") cfg.sim_k0 = static_cast<long long>(count());
        else if (key == "format") cfg.format = parse_format(val);
        else bad("unknown key '" + key + "'");
    }
}

inline void load_config(const std::string& path, PipelineConfig& cfg)
{
    auto in = kslab::detail::open_input(path);
    apply_config(in, cfg, path);
}

namespace detail {

struct SectionLog {
    struct Entry {
        std::string name;
        std::string status;  // ok | skipped | failed
        std::string detail;
    };
    std::vector<Entry> entries;
    std::vector<std::string> files;
    int first_failure = exit_ok;

    void ok(const std::string& name) { entries.push_back({name, "ok", ""}); }
    void skipped(const std::string& name, const std::string& why) { entries.push_back({name, "skipped", why}); }
    void failed(const std::string& name, const Error& e)
    {
        entries.push_back({name, "failed", std::string(to_string(e.kind())) + ": " + e.what()});
        if (first_failure == exit_ok) first_failure = exit_code_for(e.kind());
    }

    /// Runs `body`; errors are logged and reported as false.
    template <class Body>
    bool run(const std::string& name, Body&& body)
    {
        try {
            body();
            ok(name);
            return true;
        } catch (const Error& e) {
            failed(name, e);
            return false;
        }
    }
};

} // namespace detail

/// End-to-end analysis into one directory. Sections that cannot run are
/// recorded as skipped (with a reason) or failed in manifest.txt.
inline int cmd_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out_dir, std::ostream& err)
{
    return detail::guarded(err, [&] {
        const Format f = cfg.format;
        detail::SectionLog log;
        auto* files = &log.files;

        GroupedDataset data;
        std::string source;
        if (cfg.input.empty()) {
            synthetic::GroupedOptions gen;
            gen.groups = cfg.synthetic_groups;
            gen.seed = cfg.seed;
            data = synthetic::grouped_lognormal(gen);
            source = "synthetic:grouped_lognormal(groups=" + std::to_string(cfg.synthetic_groups)
                     + ", seed=" + std::to_string(cfg.seed) + ")";
        } else {
            data = parse_city_csv(cfg.input, ColumnMap{cfg.group_by, cfg.city_column, cfg.value_column});
            source = cfg.input;
        }
        std::filesystem::create_directories(out_dir);

        // Pooled statistics over every value, and over group sizes.
        log.run("dataset_summary", [&] {
            std::vector<double> pooled, sizes;
            for (const auto& [key, values] : data.groups) {
                pooled.insert(pooled.end(), values.begin(), values.end());
                sizes.push_back(static_cast<double>(values.size()));
            }
            std::vector<std::pair<std::string, MomentSummary>> cols;
            std::string notes;
            try {
                cols.emplace_back(data.value_label, summarize(pooled));
            } catch (const Error& e) {
                notes += "values: " + std::string(e.what()) + "\n";
            }
            try {
                cols.emplace_back("N_c,p", summarize(sizes));
            } catch (const Error& e) {
                notes += "group sizes: " + std::string(e.what()) + "\n";
            }
            detail::write_file(out_dir / "dataset_summary.txt", [&](std::ostream& o) {
                o << "Source: " << source << "\nGroups: " << data.group_count() << "\nRows: " << data.row_count()
                  << "\n\n";
                if (!cols.empty()) report::write_summary_table(o, cols, "Pooled descriptive statistics (rounded)");
                if (!notes.empty()) o << "\nNot summarized:\n" << notes;
            });
            files->push_back("dataset_summary.txt");
            detail::write_table(out_dir, "group_summaries", f, detail::group_summaries_table(data), files);
        });

        std::optional<SKCloud> cloud;
        try {
            cloud = group_sk_points(data, cfg.min_n);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::empty_input) throw;
        }
        const std::string no_points = "insufficient group sizes (no group has at least min_n="
                                      + std::to_string(cfg.min_n) + " values with nonzero variance)";

        std::optional<KSFitResult> quad, power;
        std::optional<RankFitResult> rank_s, rank_k;
        if (!cloud) {
            for (const char* s : {"sk_statistics", "ks_fit_quadratic", "ks_fit_power", "rank_fit_s", "rank_fit_k",
                                  "beta_calibration_ks", "beta_calibration_rank_s", "beta_calibration_rank_k"})
                log.skipped(s, no_points);
        } else {
            log.run("sk_statistics", [&] {
                detail::write_file(out_dir / "summary.txt",
                                   [&](std::ostream& o) { detail::write_sk_summary(o, *cloud, &data); });
                files->push_back("summary.txt");
                detail::write_table(out_dir, "sk_points", f, report::sk_points_table(cloud->points), files);
                const auto s = detail::column_of(cloud->points, 's');
                const auto k = detail::column_of(cloud->points, 'k');
                detail::write_table(out_dir, "hist_s", f, report::histogram_table(histogram(s, cfg.hist_bins)), files);
                detail::write_table(out_dir, "hist_k", f, report::histogram_table(histogram(k, cfg.hist_bins)), files);
            });

            log.run("ks_fit_quadratic", [&] {
                quad = fit_quadratic(cloud->points);
                detail::write_ks_outputs(out_dir, f, cloud->points, *quad, files);
            });
            log.run("ks_fit_power", [&] {
                power = fit_power(cloud->points, PowerFitOptions{cfg.nu_lo, cfg.nu_hi, 1e-6});
                detail::write_ks_outputs(out_dir, f, cloud->points, *power, files);
            });

            const auto variant = parse_rank_variant(cfg.rank_model);
            RankFitOptions ropt;
            ropt.psi_hi = cfg.psi_hi;
            for (char target : {'s', 'k'}) {
                auto& slot = target == 's' ? rank_s : rank_k;
                log.run(std::string("rank_fit_") + target, [&] {
                    const auto series = rank_ascending(detail::column_of(cloud->points, target));
                    slot = fit_rank_model(series, variant, ropt);
                    detail::write_rank_outputs(out_dir, f, series, *slot, std::string(1, target),
                                               std::string("_") + target, files);
                });
            }

            // K-S route: evaluate the fitted quadratic at the mean skewness and
            // invert that moment pair.
            if (!quad) {
                log.skipped("beta_calibration_ks", "quadratic K-S fit unavailable");
            } else {
                const auto s_vals = detail::column_of(cloud->points, 's');
                double s_bar = 0.0;
                for (double v : s_vals) s_bar += v;
                s_bar /= static_cast<double>(s_vals.size());
                const double k_at = quad->p * s_bar * s_bar + quad->q;
                report::KeyValueBlock block;
                block.add("route", std::string("K-S quadratic fit evaluated at mean S"));
                block.add("p", quad->p).add("q", quad->q).add("S_mean", s_bar).add("K_fitted", k_at);
                try {
                    block.add("rho_from_pq", help_variable_from_pq(quad->p, quad->q, s_bar));
                } catch (const Error& e) {
                    block.add("rho_from_pq", std::string("undefined (") + e.what() + ")");
                }
                try {
                    const auto cal = calibrate_from_sk(s_bar, k_at);
                    const auto cb = report::beta_calibration_block(cal);
                    block.add("rho", cal.rho).add("ab", cal.ab_product);
                    block.add("a", cal.selected.a).add("b", cal.selected.b);
                    detail::write_block(out_dir, "beta_calibration_ks", f, block, files);
                    detail::write_file(out_dir / "beta_cdf_ks.csv",
                                       [&](std::ostream& o) { report::write_beta_cdf_csv(o, cal.selected); });
                    files->push_back("beta_cdf_ks.csv");
                    log.ok("beta_calibration_ks");
                } catch (const Error& e) {
                    if (e.kind() == ErrorKind::not_beta_representable || e.kind() == ErrorKind::infeasible_moments) {
                        block.add("status", std::string("not Beta-representable: ") + e.what());
                        detail::write_block(out_dir, "beta_calibration_ks", f, block, files);
                        log.skipped("beta_calibration_ks", e.what());
                    } else {
                        log.failed("beta_calibration_ks", e);
                    }
                }
            }

            // Rank route: LAV4 exponents map onto (a, b).
            for (char target : {'s', 'k'}) {
                const auto& fit = target == 's' ? rank_s : rank_k;
                const std::string name = std::string("beta_calibration_rank_") + target;
                if (!fit) {
                    log.skipped(name, "rank fit unavailable");
                    continue;
                }
                if (fit->spec.variant != RankVariant::lav4) {
                    log.skipped(name, "rank model is not lav4");
                    continue;
                }
                log.run(name, [&] {
                    const auto bp = rank_fit_to_beta(*fit);
                    report::KeyValueBlock block;
                    block.add("route", std::string("LAV4 exponents: a = xi4 + 1, b = gamma4 + 1"));
                    block.add("series", std::string(1, target));
                    block.add("a", bp.a).add("b", bp.b);
                    block.add("beta_skewness", beta_skewness(bp)).add("beta_kurtosis", beta_kurtosis(bp));
                    detail::write_block(out_dir, name, f, block, files);
                    const std::string cdf = std::string("beta_cdf_rank_") + target + ".csv";
                    detail::write_file(out_dir / cdf, [&](std::ostream& o) { report::write_beta_cdf_csv(o, bp); });
                    files->push_back(cdf);
                });
            }
        }

        UrnConfig ucfg{cfg.sim_k0, cfg.sim_a_shift, cfg.sim_alpha, cfg.sim_steps, cfg.seed};
        if (cfg.simulate) {
            log.run("simulation", [&] {
                const auto sim = run(ucfg);
                detail::write_simulation(out_dir, f, ucfg, sim, 10, files);
            });
        } else {
            log.skipped("simulation", "not requested (simulate = false)");
        }

        detail::write_file(out_dir / "manifest.txt", [&](std::ostream& o) {
            o << "tool = kslab\nversion = " << version << "\n";
            o << "input = " << source << "\n";
            o << "seed = " << cfg.seed << "\nrng = " << Rng::name << "\n";
            o << "format = " << (f == Format::json ? "json" : "csv") << "\n";
            o << "min_n = " << cfg.min_n << "\nhist_bins = " << cfg.hist_bins << "\n";
            o << "nu_bracket = [" << kslab::detail::format_full(cfg.nu_lo) << ", "
              << kslab::detail::format_full(cfg.nu_hi) << "]\n";
            o << "psi4_bracket = (0, " << kslab::detail::format_full(cfg.psi_hi) << "]\n";
            o << "rank_model = " << cfg.rank_model << "\n";
            if (cfg.simulate)
                o << "simulation = k0=" << ucfg.k0 << " a_shift=" << kslab::detail::format_full(ucfg.a_shift)
                  << " alpha=" << kslab::detail::format_full(ucfg.alpha) << " steps=" << ucfg.steps << "\n";
            o << "moment_convention = population central moments (divide by n); median midpoint for even n\n";
            o << "kurtosis_convention = non-excess (normal = 3)\n";
            o << "ks_fit_space = raw (S, K); R2 on raw K; nu profiled by golden section then Levenberg-Marquardt\n";
            o << "rank_fit_space = raw values, ascending ranks (rank 1 = smallest); R2 raw; psi4 profiled in log space, then Levenberg-Marquardt in raw space within the bracket\n";
            o << "beta_ks_route = quadratic fit evaluated at mean S, then (S, K) inversion\n";
            o << "beta_rank_route = a = xi4 + 1, b = gamma4 + 1\n";
            o << "status = " << (log.first_failure == exit_ok ? "complete" : "partial failure") << "\n";
            o << "\n[sections]\n";
            for (const auto& e : log.entries) {
                o << e.name << " = " << e.status;
                if (!e.detail.empty()) o << " (" << e.detail << ")";
                o << "\n";
            }
            o << "\n[files]\n";
            for (const auto& file : log.files) o << file << "\n";
        });
        if (log.first_failure != exit_ok)
            err << "pipeline finished with failed sections; see " << (out_dir / "manifest.txt").string() << '\n';
        return log.first_failure;
    });
}

} // namespace kslab::cli
