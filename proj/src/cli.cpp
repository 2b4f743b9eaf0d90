#include "fcaloha/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fcaloha/io.hpp"
#include "fcaloha/parallel.hpp"

namespace fcaloha {

namespace fs = std::filesystem;

namespace {

/// Upper end of the default beta search range; tables always reach at least this far.
constexpr double kDefaultBetaMax = 10.0;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GlobalOptions {
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> cache_dir;
    bool full_scale = false;
    bool schema = false;
};

struct ChannelOptions {
    double b = 1.0;
    double snr_ratio = 0.1;
    bool no_capture = false;
    std::uint64_t samples = kDefaultTableSamples;
    int t_max = -1;
    bool no_build = false;

    void add_to(CLI::App* cmd, bool with_table_opts) {
        cmd->add_option("--b", b, "capture ratio b (>= 1)");
        cmd->add_option("--snr-ratio", snr_ratio, "b / mean SNR");
        cmd->add_flag("--no-capture", no_capture, "collision channel without noise or capture");
        if (with_table_opts) {
            cmd->add_option("--samples", samples, "Monte-Carlo samples per capture-table entry");
            cmd->add_option("--t-max", t_max, "largest number of interferers in the capture table");
            cmd->add_flag("--no-build", no_build, "fail instead of building a missing capture table");
        }
    }

    ChannelParams channel() const {
        if (no_capture) return ChannelParams::collision_only();
        try {
            return ChannelParams::from_ratio(b, snr_ratio);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
};

void emit_json(const nlohmann::json& j, const std::string& out_path, std::ostream& out) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        out << text;
    } else {
        io::write_text_file(out_path, text);
    }
}

fs::path prepare_output_dir(const std::string& dir) {
    if (dir.empty()) throw ConfigError("--out directory is required");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("output directory not writable: " + dir);
    return dir;
}

CaptureTable obtain_table(const ChannelOptions& opts, double max_beta, const GlobalOptions& global,
                          std::ostream& err) {
    const int t_max = opts.t_max >= 0 ? opts.t_max
                                      : default_table_t_max(std::max(max_beta, kDefaultBetaMax));
    if (opts.no_capture) return collision_only_table(t_max);
    io::TableRequest request{opts.channel(), t_max, opts.samples, global.seed.value_or(1), global.threads};
    if (request.samples < kMinTableSamples) throw ConfigError("--samples must be at least 10000");
    const auto dir = io::cache_dir(global.cache_dir ? std::optional<fs::path>(*global.cache_dir) : std::nullopt);
    const auto cached = io::load_or_build_table(request, dir, !opts.no_build);
    err << (cached.cache_hit ? "capture table cache hit: " : "capture table built: ") << cached.path.string()
        << "\n";
    return cached.table;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Frameless ALOHA with capture: density evolution and Monte-Carlo simulation"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    GlobalOptions global;
    app.add_option("--threads", global.threads, "worker threads (0 = all cores)");
    app.add_option("--seed", global.seed, "override the base seed");
    app.add_option("--cache-dir", global.cache_dir, "capture-table cache directory");
    app.add_flag("--full-scale", global.full_scale, "0.01 grids and 10000 runs per point");
    app.add_flag("--schema", global.schema, "print the CSV column schema and exit");

    // pi-table
    auto* pi_cmd = app.add_subcommand("pi-table", "build or load a cached capture table");
    ChannelOptions pi_opts;
    pi_opts.add_to(pi_cmd, true);
    std::string pi_out;
    pi_cmd->add_option("--out", pi_out, "write the table JSON here instead of stdout");

    // de
    auto* de_cmd = app.add_subcommand("de", "asymptotic fixed point at one (beta, M/N)");
    ChannelOptions de_opts;
    de_opts.add_to(de_cmd, true);
    double de_beta = 3.0;
    double de_load = 1.0;
    std::string de_out;
    de_cmd->add_option("--beta", de_beta, "expected slot degree")->required();
    de_cmd->add_option("--mn", de_load, "M/N")->required();
    de_cmd->add_option("--out", de_out, "write JSON here instead of stdout");

    // de-sweep
    auto* ds_cmd = app.add_subcommand("de-sweep", "optimal beta and throughput over a range of M/N");
    ChannelOptions ds_opts;
    ds_opts.add_to(ds_cmd, true);
    GridSpec ds_load{0.05, 3.0, 0.01};
    GridSpec ds_beta{0.5, 10.0, 0.05};
    std::string ds_out;
    ds_cmd->add_option("--mn-min", ds_load.min);
    ds_cmd->add_option("--mn-max", ds_load.max);
    ds_cmd->add_option("--mn-step", ds_load.step);
    ds_cmd->add_option("--beta-min", ds_beta.min);
    ds_cmd->add_option("--beta-max", ds_beta.max);
    ds_cmd->add_option("--beta-step", ds_beta.step);
    ds_cmd->add_option("--out", ds_out, "output directory")->required();

    // sim
    auto* sim_cmd = app.add_subcommand("sim", "Monte-Carlo runs at one (beta, V, S)");
    ChannelOptions sim_opts;
    sim_opts.add_to(sim_cmd, false);
    std::string sim_config;
    std::string sim_out;
    std::uint32_t sim_runs = 1000;
    SystemParams sim_params;
    std::string sim_mode = "PerUserFixed";
    sim_cmd->add_option("--config", sim_config, "SystemParams JSON; overrides the flags below");
    sim_cmd->add_option("--n", sim_params.n_users, "number of users");
    sim_cmd->add_option("--beta", sim_params.beta, "expected slot degree");
    sim_cmd->add_option("--v", sim_params.threshold_v, "fraction-resolved threshold V");
    sim_cmd->add_option("--s", sim_params.threshold_s, "throughput threshold S");
    auto* max_slots_opt = sim_cmd->add_option("--max-slots", sim_params.max_slots, "slot cap (default 20 N)");
    sim_cmd->add_option("--snr-mode", sim_mode, "PerUserFixed or PerTransmission");
    sim_cmd->add_option("--runs", sim_runs, "number of runs");
    sim_cmd->add_option("--out", sim_out, "output directory")->required();

    // sweep
    auto* sw_cmd = app.add_subcommand("sweep", "grid search over (beta, V, S)");
    std::string sw_config;
    std::string sw_out;
    sw_cmd->add_option("--config", sw_config, "SweepConfig JSON");
    sw_cmd->add_option("--out", sw_out, "output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (global.schema) {
            out << io::csv_schema();
            return 0;
        }
        if (*pi_cmd) {
            const CaptureTable table = obtain_table(pi_opts, kDefaultBetaMax, global, err);
            emit_json(table_to_json(table), pi_out, out);
        } else if (*de_cmd) {
            if (!(de_load > 0.0)) throw ConfigError("--mn must be positive");
            DeConfig config;
            config.beta = de_beta;
            config.epsilon = de_load - 1.0;
            config.table = obtain_table(de_opts, de_beta, global, err);
            const DeResult result = iterate_to_fixed_point(config);
            emit_json(io::de_result_json(config, result), de_out, out);
        } else if (*ds_cmd) {
            const fs::path dir = prepare_output_dir(ds_out);
            const CaptureTable table = obtain_table(ds_opts, ds_beta.max, global, err);
            const auto loads = ds_load.values();
            const auto betas = ds_beta.values();
            const DeSweepResult sweep = de_sweep(table, loads, betas, resolve_threads(global.threads));
            std::ostringstream csv;
            io::write_de_sweep_csv(csv, sweep);
            io::write_text_file(dir / "de_sweep.csv", csv.str());
            const auto best = io::de_sweep_best_json(sweep, table.channel);
            io::write_text_file(dir / "best.json", best.dump(2) + "\n");
            out << best.dump(2) << "\n";
        } else if (*sim_cmd) {
            const fs::path dir = prepare_output_dir(sim_out);
            SystemParams params = sim_params;
            const ChannelParams channel = sim_opts.channel();
            if (!sim_config.empty()) {
                params = io::read_json_file(sim_config).get<SystemParams>();
            } else {
                params.snr_mode = snr_mode_from_string(sim_mode);
                params.capture_ratio = channel.capture_ratio;
                params.mean_snr = channel.mean_snr;
                if (max_slots_opt->count() == 0) params.max_slots = SystemParams::default_max_slots(params.n_users);
            }
            if (global.seed) params.base_seed = *global.seed;
            params.validate();
            ChannelParams run_channel{params.capture_ratio, params.mean_snr, channel.reception};
            const auto runs = run_batch(params, run_channel, sim_runs, resolve_threads(global.threads), false);
            std::ostringstream csv;
            io::write_runs_csv(csv, runs, params, run_channel);
            io::write_text_file(dir / "runs.csv", csv.str());
            const auto summary = io::batch_summary_json(summarize(runs, params.n_users), params, run_channel);
            io::write_text_file(dir / "summary.json", summary.dump(2) + "\n");
            out << summary.dump(2) << "\n";
        } else if (*sw_cmd) {
            const fs::path dir = prepare_output_dir(sw_out);
            SweepConfig config = SweepConfig::defaults(global.full_scale);
            if (!sw_config.empty()) from_json(io::read_json_file(sw_config), config);
            if (global.seed) config.params.base_seed = *global.seed;
            config.threads = resolve_threads(global.threads);
            const SweepResult result = grid_search(config);
            if (config.keep_grid) {
                std::ostringstream csv;
                io::write_sweep_grid_csv(csv, result.grid);
                io::write_text_file(dir / "grid.csv", csv.str());
            }
            const auto best = io::sweep_best_json(result, config);
            io::write_text_file(dir / "best.json", best.dump(2) + "\n");
            out << best.dump(2) << "\n";
        } else {
            out << app.help();
        }
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace fcaloha
