#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kslab/commands.hpp"

namespace {

using namespace kslab;
using namespace kslab::cli;

struct Common {
    std::string input;
    std::string group_by = "province";
    std::string value_column = "value";
    std::string model;
    std::size_t min_n = 4;
    std::uint64_t seed = 2011;
    std::string out_dir = ".";
    std::string format = "csv";
};

void add_common(CLI::App* app, Common& c, bool input_required)
{
    auto* in = app->add_option("--input", c.input, "Input CSV file");
    if (input_required) in->required();
    app->add_option("--group-by", c.group_by, "Grouping column")->capture_default_str();
    app->add_option("--value-column", c.value_column, "Value column")->capture_default_str();
    app->add_option("--min-n", c.min_n, "Minimum group size for an (S, K) point")->capture_default_str();
    app->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    app->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
    app->add_option("--format", c.format, "Table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

char parse_target(const std::string& t)
{
    if (t == "s" || t == "S") return 's';
    if (t == "k" || t == "K") return 'k';
    fail(ErrorKind::schema, "target must be 's' or 'k'");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"kslab: skewness-kurtosis, rank-size, Beta calibration and urn simulation"};
    app.set_version_flag("--version", std::string(kslab::version));
    app.require_subcommand(1);

    Common stats_c, fit_c, rank_c, beta_c, sim_c, pipe_c;

    auto* stats = app.add_subcommand("stats", "Per-group skewness and kurtosis with summaries and histograms");
    add_common(stats, stats_c, true);
    std::string city_column;
    std::size_t bins = 20;
    stats->add_option("--city-column", city_column, "Optional row label column");
    stats->add_option("--bins", bins, "Histogram bins")->capture_default_str();

    auto* fit = app.add_subcommand("fit", "Fit a K-S relation (quadratic, power) or a rank model (rank:<variant>)");
    add_common(fit, fit_c, true);
    fit_c.model = "quadratic";
    std::string fit_target = "k";
    fit->add_option("--model", fit_c.model, "quadratic | power | rank:<zipf|yule_simon|lav3|lav5|lav4>")
        ->capture_default_str();
    fit->add_option("--target", fit_target, "Series for rank models: s or k")->capture_default_str();

    auto* rank = app.add_subcommand("rank-fit", "Fit a rank-size model to a series");
    add_common(rank, rank_c, true);
    rank_c.model = "lav4";
    std::string rank_target = "k";
    rank->add_option("--model", rank_c.model, "zipf | yule_simon | lav3 | lav5 | lav4")->capture_default_str();
    rank->add_option("--target", rank_target, "Column of an sk_points file: s or k")->capture_default_str();

    auto* beta = app.add_subcommand("beta-calibrate", "Beta(a, b) from (S, K), or the moments and CDF of Beta(a, b)");
    add_common(beta, beta_c, false);
    std::optional<double> bs, bk, ba, bb;
    beta->add_option("--s", bs, "Skewness");
    beta->add_option("--k", bk, "Kurtosis (non-excess)");
    beta->add_option("--a", ba, "Beta shape a");
    beta->add_option("--b", bb, "Beta shape b");

    auto* sim = app.add_subcommand("simulate", "Polya urn with preferential attachment");
    add_common(sim, sim_c, false);
    sim_c.seed = 1;
    SimulateOptions sim_opt;
    sim->add_option("--steps", sim_opt.config.steps, "Number of steps")->capture_default_str();
    sim->add_option("--alpha", sim_opt.config.alpha, "Probability of opening a new urn")->capture_default_str();
    sim->add_option("--a-shift", sim_opt.config.a_shift, "Attachment shift a")->capture_default_str();
    sim->add_option("--k0", sim_opt.config.k0, "Balls in a new urn")->capture_default_str();
    sim->add_option("--tail-k-min", sim_opt.tail_k_min, "Smallest size used by the tail slope")->capture_default_str();
    std::string sim_config;
    sim->add_option("--config", sim_config, "key = value file (steps, alpha, a_shift, k0, seed)");

    auto* pipe = app.add_subcommand("pipeline", "End-to-end analysis into one directory");
    add_common(pipe, pipe_c, false);
    std::string pipe_config;
    bool pipe_simulate = false;
    std::string rank_model;
    pipe->add_option("--config", pipe_config, "key = value configuration file");
    pipe->add_option("--model", rank_model, "Rank model for the S and K series");
    pipe->add_flag("--simulate", pipe_simulate, "Include the urn simulation section");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_schema;
    }

    auto& err = std::cerr;
    try {
        if (*stats) {
            StatsOptions o;
            o.input = stats_c.input;
            o.group_by = stats_c.group_by;
            o.value_column = stats_c.value_column;
            o.city_column = city_column;
            o.min_n = stats_c.min_n;
            o.hist_bins = bins;
            o.out_dir = stats_c.out_dir;
            o.format = parse_format(stats_c.format);
            return cmd_stats(o, err);
        }
        if (*fit) {
            FitOptions o;
            o.input = fit_c.input;
            o.model = fit_c.model;
            o.target = parse_target(fit_target);
            o.out_dir = fit_c.out_dir;
            o.format = parse_format(fit_c.format);
            return cmd_fit(o, err);
        }
        if (*rank) {
            RankFitCmdOptions o;
            o.input = rank_c.input;
            o.variant = parse_rank_variant(rank_c.model);
            o.target = parse_target(rank_target);
            o.out_dir = rank_c.out_dir;
            o.format = parse_format(rank_c.format);
            return cmd_rank_fit(o, err);
        }
        if (*beta) {
            BetaCalibrateOptions o{bs, bk, ba, bb, beta_c.out_dir, parse_format(beta_c.format)};
            return cmd_beta_calibrate(o, err);
        }
        if (*sim) {
            if (!sim_config.empty()) {
                PipelineConfig pc;
                pc.sim_steps = sim_opt.config.steps;
                pc.sim_alpha = sim_opt.config.alpha;
                pc.sim_a_shift = sim_opt.config.a_shift;
                pc.sim_k0 = sim_opt.config.k0;
                pc.seed = sim_c.seed;
                load_config(sim_config, pc);
                auto set_if = [&](const char* flag, auto& dst, auto val) {
                    if (sim->count(flag) == 0) dst = val;
                };
                set_if("--steps", sim_opt.config.steps, pc.sim_steps);
                set_if("--alpha", sim_opt.config.alpha, pc.sim_alpha);
                set_if("--a-shift", sim_opt.config.a_shift, pc.sim_a_shift);
                set_if("--k0", sim_opt.config.k0, pc.sim_k0);
                set_if("--seed", sim_c.seed, pc.seed);
            }
            sim_opt.config.seed = sim_c.seed;
            sim_opt.out_dir = sim_c.out_dir;
            sim_opt.format = parse_format(sim_c.format);
            return cmd_simulate(sim_opt, err);
        }
        if (*pipe) {
            PipelineConfig pc;
            if (!pipe_config.empty()) load_config(pipe_config, pc);
            auto given = [&](const char* flag) { return pipe->count(flag) > 0; };
            if (given("--input")) pc.input = pipe_c.input;
            if (given("--group-by")) pc.group_by = pipe_c.group_by;
            if (given("--value-column")) pc.value_column = pipe_c.value_column;
            if (given("--min-n")) pc.min_n = pipe_c.min_n;
            if (given("--seed")) pc.seed = pipe_c.seed;
            if (given("--format")) pc.format = parse_format(pipe_c.format);
            if (given("--model")) pc.rank_model = rank_model;
            if (pipe_simulate) pc.simulate = true;
            return cmd_pipeline(pc, pipe_c.out_dir, err);
        }
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
    return exit_internal;
}
