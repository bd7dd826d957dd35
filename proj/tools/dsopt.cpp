// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: decision-set design, evaluation, baselines and
// the sweep studies, all driven by an INI config plus a seed.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dsopt/experiments.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_infeasible = 3;
constexpr int exit_io = 4;

struct GlobalArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

dsopt::ExperimentConfig resolve_config(const GlobalArgs& g) {
    dsopt::ExperimentConfig cfg =
        g.config_path.empty() ? dsopt::ExperimentConfig{} : dsopt::load_config(g.config_path);
    if (g.seed) cfg.seeds = {*g.seed};
    if (g.threads) cfg.threads = *g.threads;
    cfg.validate();
    return cfg;
}

std::uint64_t single_seed(const dsopt::ExperimentConfig& cfg) { return cfg.seeds.front(); }

void print_report(const dsopt::EvalReport& r) {
    std::cout << "avg_utility        " << r.avg_utility << "\n"
              << "avg_packet_benefit " << r.avg_packet_benefit << " bits/s\n"
              << "csit_utility       " << r.csit_utility << "\n"
              << "loss_pct           " << r.loss_pct << " %\n"
              << "feasible           " << (r.feasible ? "true" : "false") << "\n";
}

int cmd_gen_channels(const GlobalArgs& g, const std::string& out, std::uint64_t count,
                     const std::string& role) {
    dsopt::ExperimentConfig cfg = resolve_config(g);
    const std::uint64_t seed = single_seed(cfg);
    const std::uint64_t stream = role == "train" ? dsopt::stream_train : dsopt::stream_eval;
    const std::size_t n = count > 0 ? count : (role == "train" ? cfg.n_train : cfg.n_eval);
    const dsopt::ChannelBatch batch =
        dsopt::make_batch(cfg.nr, cfg.nt, n, dsopt::RngStream(seed, stream));
    dsopt::save_channels_csv(out, batch);
    std::cout << "wrote " << n << " channels (" << cfg.nr << "x" << cfg.nt << ", seed " << seed
              << ", role " << role << ") to " << out << "\n";
    return exit_ok;
}

int cmd_optimize(const GlobalArgs& g, const std::string& out, const std::string& trace_path,
                 std::optional<int> b1_opt, std::optional<int> b2_opt) {
    dsopt::ExperimentConfig cfg = resolve_config(g);
    const std::uint64_t seed = single_seed(cfg);
    const int b1 = b1_opt.value_or(cfg.b1_fixed);
    const int b2 = b2_opt.value_or(cfg.b2_fixed);
    if (!cfg.budget(b1, b2).satisfied())
        throw dsopt::ConfigError("requested (b1, b2) exceeds the feedback budget R*t0");

    const dsopt::ChannelBatch train =
        dsopt::make_batch(cfg.nr, cfg.nt, cfg.n_train, dsopt::RngStream(seed, dsopt::stream_train));
    const dsopt::PowerSet powers = dsopt::uniform_power_grid(b1, cfg.constants.pmax);
    const dsopt::OptimizeResult res = dsopt::optimize(
        cfg.uc, train, powers, b2, cfg.iwo, cfg.constants, cfg.r0,
        dsopt::point_stream(seed, dsopt::Method::iwode, b1, b2), dsopt::detail::resolve_threads(cfg.threads));

    dsopt::save_codebook_json(out, powers, res.best);
    dsopt::save_trace_csv(trace_path, res.trace);
    std::cout << "case " << dsopt::to_string(cfg.uc) << "  b1 " << b1 << "  b2 " << b2 << "  seed "
              << seed << "\n"
              << "training fitness " << res.best_fitness << "  feasible "
              << (res.feasible ? "true" : "false") << "\n"
              << "codebook -> " << out << "\ntrace    -> " << trace_path << "\n";
    return res.feasible ? exit_ok : exit_infeasible;
}

int cmd_evaluate(const GlobalArgs& g, const std::string& codebook_path,
                 const std::string& channels_path, const std::string& out) {
    dsopt::ExperimentConfig cfg = resolve_config(g);
    const std::uint64_t seed = single_seed(cfg);
    const dsopt::DecisionSet ds = dsopt::load_codebook_json(codebook_path);
    dsopt::ChannelBatch batch =
        channels_path.empty()
            ? dsopt::make_batch(cfg.nr, cfg.nt, cfg.n_eval, dsopt::RngStream(seed, dsopt::stream_eval))
            : dsopt::load_channels_csv(channels_path);
    if (batch.nt != ds.beams.nt())
        throw dsopt::ConfigError("channel batch antenna count does not match the codebook");
    const dsopt::EvalReport report =
        dsopt::make_report(cfg.uc, batch, ds.powers, ds.beams, cfg.constants, cfg.r0,
                           dsopt::detail::resolve_threads(cfg.threads));
    dsopt::save_report_json(out, report);
    print_report(report);
    std::cout << "report -> " << out << "\n";
    return exit_ok;
}

int cmd_baseline(const GlobalArgs& g, const std::string& scheme, const std::string& out,
                 const std::string& report_path, std::optional<int> b1_opt,
                 std::optional<int> b2_opt) {
    dsopt::ExperimentConfig cfg = resolve_config(g);
    const std::uint64_t seed = single_seed(cfg);
    const int b1 = b1_opt.value_or(cfg.b1_fixed);
    const int b2 = b2_opt.value_or(cfg.b2_fixed);
    if (!cfg.budget(b1, b2).satisfied())
        throw dsopt::ConfigError("requested (b1, b2) exceeds the feedback budget R*t0");

    const dsopt::ChannelBatch eval =
        dsopt::make_batch(cfg.nr, cfg.nt, cfg.n_eval, dsopt::RngStream(seed, dsopt::stream_eval));
    const double csit = dsopt::csit_utility(cfg.uc, eval, cfg.constants,
                                            dsopt::detail::resolve_threads(cfg.threads));

    dsopt::DecisionSetStats stats;
    if (scheme == "rvq") {
        const dsopt::RvqCodebook cb = dsopt::rvq_generate(
            cfg.nt, b2, dsopt::point_stream(seed, dsopt::Method::rvq, b1, b2).substream(0));
        const dsopt::PowerSet powers = dsopt::uniform_power_grid(b1, cfg.constants.pmax);
        dsopt::save_codebook_json(out, powers, cb.beams);
        stats = dsopt::evaluate_decision_set(cfg.uc, eval, powers, cb.beams, cfg.constants,
                                             dsopt::detail::resolve_threads(cfg.threads));
        std::cout << "rvq codebook -> " << out << "\n";
    } else {
        const dsopt::ChannelBatch train = dsopt::make_batch(
            cfg.nr, cfg.nt, cfg.n_train, dsopt::RngStream(seed, dsopt::stream_train));
        const std::vector<double> samples = dsopt::conventional_gain_samples(train, b2);
        dsopt::ScalarQuantizer gain_q;
        if (scheme == "lm") {
            gain_q = dsopt::lloyd_max_train(samples, b1, cfg.lloyd_tol, nullptr,
                                            cfg.lloyd_max_iterations);
        } else {
            gain_q = dsopt::uniform_quantizer(
                0.0, *std::max_element(samples.begin(), samples.end()), b1);
        }
        dsopt::save_quantizer_json(out, gain_q);
        stats = dsopt::evaluate_conventional(cfg.uc, eval, gain_q, b2, cfg.constants,
                                             dsopt::detail::resolve_threads(cfg.threads));
        std::cout << scheme << " gain quantizer -> " << out << "\n";
    }

    const dsopt::EvalReport report{stats.avg_utility, stats.avg_packet_benefit,
                                   stats.avg_packet_benefit >= cfg.r0, csit,
                                   dsopt::optimality_loss(csit, stats.avg_utility)};
    if (!report_path.empty()) {
        dsopt::save_report_json(report_path, report);
        std::cout << "report -> " << report_path << "\n";
    }
    print_report(report);
    return exit_ok;
}

int cmd_sweep(const GlobalArgs& g, const std::string& kind_str, const std::string& out,
              bool timing) {
    dsopt::ExperimentConfig cfg = resolve_config(g);
    const dsopt::SweepKind kind = dsopt::parse_sweep_kind(kind_str);

    std::vector<dsopt::SweepRecord> records;
    switch (kind) {
        case dsopt::SweepKind::vary_b2: records = dsopt::sweep_vary_b2(cfg); break;
        case dsopt::SweepKind::vary_b1: records = dsopt::sweep_vary_b1(cfg); break;
        case dsopt::SweepKind::joint: records = dsopt::sweep_joint(cfg); break;
    }

    double total_wall = 0.0;
    bool any_feasible = false;
    for (const dsopt::SweepRecord& r : records) {
        total_wall += r.wall_time_s;
        any_feasible = any_feasible || r.feasible;
    }
    std::cerr << "sweep " << kind_str << ": " << records.size() << " points, "
              << total_wall << " s of point work\n";

    // Wall times are left out of the file by default so a repeated run is
    // byte-identical; --timing opts into the measured values.
    if (!timing)
        for (dsopt::SweepRecord& r : records) r.wall_time_s = 0.0;
    dsopt::emit_csv(records, out);
    std::cout << "sweep -> " << out << " (" << records.size() << " rows)\n";
    return any_feasible ? exit_ok : exit_infeasible;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite decision-set design for energy-efficient MIMO links"};
    app.require_subcommand(1);

    GlobalArgs g;
    std::uint64_t seed_opt = 0;
    int threads_opt = 0;
    app.add_option("--config", g.config_path, "INI config file")->check(CLI::ExistingFile);
    auto* seed_flag = app.add_option("--seed", seed_opt, "seed override (single-seed commands)");
    auto* threads_flag = app.add_option("--threads", threads_opt, "worker threads (0 = hardware)");

    auto* gen = app.add_subcommand("gen-channels", "sample a channel batch to CSV");
    std::string gen_out = "channels.csv";
    std::uint64_t gen_count = 0;
    std::string gen_role = "eval";
    gen->add_option("--out", gen_out, "output CSV path");
    gen->add_option("--count", gen_count, "number of channels (default: config batch size)");
    gen->add_option("--role", gen_role, "batch role: train or eval stream")
        ->check(CLI::IsMember({"train", "eval"}));

    auto* opt = app.add_subcommand("optimize", "run the IWO-DE codebook search");
    std::string opt_out = "codebook.json", opt_trace = "trace.csv";
    int opt_b1 = -1, opt_b2 = -1;
    opt->add_option("--out", opt_out, "output codebook JSON");
    opt->add_option("--trace", opt_trace, "output per-generation trace CSV");
    opt->add_option("--b1", opt_b1, "power feedback bits");
    opt->add_option("--b2", opt_b2, "beamforming feedback bits");

    auto* ev = app.add_subcommand("evaluate", "score a codebook JSON on a channel batch");
    std::string ev_codebook, ev_channels, ev_out = "report.json";
    ev->add_option("--codebook", ev_codebook, "codebook JSON to evaluate")->required();
    ev->add_option("--channels", ev_channels, "channel batch CSV (default: generated eval batch)");
    ev->add_option("--out", ev_out, "output report JSON");

    auto* base = app.add_subcommand("baseline", "train/apply a conventional baseline");
    std::string base_scheme, base_out = "baseline.json", base_report = "report.json";
    int base_b1 = -1, base_b2 = -1;
    base->add_option("--scheme", base_scheme, "lm, uniform or rvq")
        ->required()
        ->check(CLI::IsMember({"lm", "uniform", "rvq"}));
    base->add_option("--out", base_out, "output quantizer/codebook JSON");
    base->add_option("--report", base_report, "output report JSON");
    base->add_option("--b1", base_b1, "power/gain feedback bits");
    base->add_option("--b2", base_b2, "beamforming feedback bits");

    auto* sw = app.add_subcommand("sweep", "run a full study and emit the sweep CSV");
    std::string sw_kind, sw_out = "sweep.csv";
    bool sw_timing = false;
    sw->add_option("--kind", sw_kind, "b2, b1 or joint")
        ->required()
        ->check(CLI::IsMember({"b2", "b1", "joint"}));
    sw->add_option("--out", sw_out, "output sweep CSV");
    sw->add_flag("--timing", sw_timing, "record measured wall times in the CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return exit_config;
    }

    if (*seed_flag) g.seed = seed_opt;
    if (*threads_flag) g.threads = threads_opt;

    try {
        if (gen->parsed()) return cmd_gen_channels(g, gen_out, gen_count, gen_role);
        if (opt->parsed())
            return cmd_optimize(g, opt_out, opt_trace,
                                opt_b1 >= 0 ? std::optional<int>(opt_b1) : std::nullopt,
                                opt_b2 >= 0 ? std::optional<int>(opt_b2) : std::nullopt);
        if (ev->parsed()) return cmd_evaluate(g, ev_codebook, ev_channels, ev_out);
        if (base->parsed())
            return cmd_baseline(g, base_scheme, base_out, base_report,
                                base_b1 >= 0 ? std::optional<int>(base_b1) : std::nullopt,
                                base_b2 >= 0 ? std::optional<int>(base_b2) : std::nullopt);
        if (sw->parsed()) return cmd_sweep(g, sw_kind, sw_out, sw_timing);
    } catch (const dsopt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const dsopt::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return exit_config;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    }
    return exit_config;
}
