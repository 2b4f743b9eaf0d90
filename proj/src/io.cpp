#include "fcaloha/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fcaloha::io {

namespace fs = std::filesystem;

fs::path cache_dir(const std::optional<fs::path>& override_dir) {
    if (override_dir) return *override_dir;
    if (const char* env = std::getenv(kCacheDirEnv); env != nullptr && *env != '\0') return env;
    return ".fcaloha_cache";
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

nlohmann::json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << text;
        if (!out) throw std::runtime_error("write failed for " + path.string());
    }
    fs::rename(tmp, path);
}

CachedTable load_or_build_table(const TableRequest& request, const fs::path& dir, bool allow_build) {
    CachedTable out;
    out.path = dir / table_cache_key(request.channel, request.t_max, request.samples, request.seed);
    if (fs::exists(out.path)) {
        out.table = table_from_json(read_json_file(out.path));
        out.cache_hit = true;
        return out;
    }
    if (!allow_build) throw std::runtime_error("capture table not cached: " + out.path.string());
    out.table = build_capture_table(request.channel, request.t_max, request.samples, request.seed,
                                    request.threads);
    write_text_file(out.path, table_to_json(out.table).dump(1) + "\n");
    return out;
}

void write_runs_csv(std::ostream& out, std::span<const RunStats> runs, const SystemParams& params,
                    const ChannelParams& channel) {
    out << "seed,beta,V,S,b,snr_ratio,N,M,N_R,F_R,T_I,cause\n";
    const std::string fixed = format_double(params.beta) + "," + format_double(params.threshold_v) + "," +
                              format_double(params.threshold_s) + "," +
                              format_double(channel.capture_ratio) + "," +
                              format_double(channel.snr_ratio()) + "," + std::to_string(params.n_users);
    for (const auto& r : runs) {
        out << r.seed << ',' << fixed << ',' << r.slots_used << ',' << r.resolved_count << ','
            << format_double(r.fraction_resolved) << ',' << format_double(r.throughput) << ','
            << to_string(r.cause) << '\n';
    }
}

namespace {
nlohmann::json mean_json(const MeanWithError& m) {
    return {{"mean", m.mean}, {"std_error", m.std_error}};
}

nlohmann::json channel_json(const ChannelParams& channel) {
    return {{"b", channel.capture_ratio},
            {"snr_ratio", channel.snr_ratio()},
            {"mean_snr", channel.mean_snr},
            {"reception", to_string(channel.reception)}};
}
}  // namespace

nlohmann::json batch_summary_json(const BatchSummary& summary, const SystemParams& params,
                                  const ChannelParams& channel) {
    return {{"runs", summary.runs},
            {"params", params},
            {"channel", channel_json(channel)},
            {"throughput", mean_json(summary.throughput)},
            {"fraction_resolved", mean_json(summary.fraction_resolved)},
            {"load", mean_json(summary.load)}};
}

nlohmann::json de_result_json(const DeConfig& config, const DeResult& result) {
    return {{"channel", channel_json(config.table.channel)},
            {"beta", config.beta},
            {"load", 1.0 + config.epsilon},
            {"epsilon", config.epsilon},
            {"P_R", result.p_r},
            {"T", result.throughput},
            {"r", result.state.r},
            {"q", result.state.q},
            {"iterations", result.state.iteration},
            {"converged", result.state.converged},
            {"table_samples", config.table.samples_per_entry},
            {"table_t_max", config.table.t_max()}};
}

void write_de_sweep_csv(std::ostream& out, const DeSweepResult& sweep) {
    out << "M_over_N,beta,P_R,T\n";
    for (const auto& row : sweep.rows) {
        out << format_double(row.load) << ',' << format_double(row.best.beta) << ','
            << format_double(row.best.p_r) << ',' << format_double(row.best.throughput) << '\n';
    }
}

nlohmann::json de_sweep_best_json(const DeSweepResult& sweep, const ChannelParams& channel) {
    const auto& best = sweep.best();
    return {{"channel", channel_json(channel)},
            {"T_max", best.best.throughput},
            {"P_R", best.best.p_r},
            {"beta", best.best.beta},
            {"M_over_N", best.load},
            {"converged", best.best.converged}};
}

void write_sweep_grid_csv(std::ostream& out, std::span<const PointAggregate> grid) {
    out << "beta,V,S,mean_T,se_T,mean_F_R,se_F_R,mean_M_over_N,se_M_over_N\n";
    for (const auto& g : grid) {
        out << format_double(g.point.beta) << ',' << format_double(g.point.threshold_v) << ','
            << format_double(g.point.threshold_s) << ',' << format_double(g.summary.throughput.mean) << ','
            << format_double(g.summary.throughput.std_error) << ','
            << format_double(g.summary.fraction_resolved.mean) << ','
            << format_double(g.summary.fraction_resolved.std_error) << ','
            << format_double(g.summary.load.mean) << ',' << format_double(g.summary.load.std_error) << '\n';
    }
}

nlohmann::json sweep_best_json(const SweepResult& result, const SweepConfig& config) {
    const auto& b = result.best;
    return {{"channel", channel_json(config.channel())},
            {"n_users", config.params.n_users},
            {"runs_per_point", config.runs_per_point},
            {"beta_star", b.point.beta},
            {"V_star", b.point.threshold_v},
            {"S_star", b.point.threshold_s},
            {"T_max", mean_json(b.summary.throughput)},
            {"F_R", mean_json(b.summary.fraction_resolved)},
            {"M_over_N", mean_json(b.summary.load)},
            {"points_evaluated", result.points_evaluated},
            {"precision_warning", result.precision_warning}};
}

std::string csv_schema() {
    return R"(runs.csv (sim): one row per contention period
  seed       run seed (base_seed + run index)
  beta       expected slot degree; each user transmits with probability beta/N per slot
  V          fraction-resolved stopping threshold
  S          throughput stopping threshold
  b          capture ratio
  snr_ratio  b / mean SNR
  N          number of users
  M          slots used (beacon excluded)
  N_R        resolved users
  F_R        N_R / N
  T_I        N_R / (M + 1)
  cause      FractionThreshold | ThroughputThreshold | AllResolved | SlotCap

de_sweep.csv (de-sweep): best beta for every M/N
  M_over_N, beta, P_R, T

grid.csv (sweep): one row per (beta, V, S)
  beta, V, S, mean_T, se_T, mean_F_R, se_F_R, mean_M_over_N, se_M_over_N

Floats are written with 9 significant digits.
)";
}

}  // namespace fcaloha::io
