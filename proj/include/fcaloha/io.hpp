#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "fcaloha/capture.hpp"
#include "fcaloha/density_evolution.hpp"
#include "fcaloha/simulator.hpp"
#include "fcaloha/sweep.hpp"

namespace fcaloha::io {

/// Environment variable that overrides the capture-table cache directory.
inline constexpr const char* kCacheDirEnv = "FCALOHA_CACHE_DIR";

/// Explicit override, else $FCALOHA_CACHE_DIR, else ./.fcaloha_cache.
std::filesystem::path cache_dir(const std::optional<std::filesystem::path>& override_dir = {});

struct TableRequest {
    ChannelParams channel;
    int t_max = 0;
    std::uint64_t samples = kDefaultTableSamples;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct CachedTable {
    CaptureTable table;
    std::filesystem::path path;
    bool cache_hit = false;
};

/// Loads the table for `request` from `dir`, building and storing it on a miss.
/// With allow_build = false a miss throws std::runtime_error.
CachedTable load_or_build_table(const TableRequest& request, const std::filesystem::path& dir,
                                bool allow_build = true);

/// printf("%.9g").
std::string format_double(double x);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes through a sibling temporary file, then renames it into place.
void write_text_file(const std::filesystem::path& path, const std::string& text);

void write_runs_csv(std::ostream& out, std::span<const RunStats> runs, const SystemParams& params,
                    const ChannelParams& channel);
nlohmann::json batch_summary_json(const BatchSummary& summary, const SystemParams& params,
                                  const ChannelParams& channel);

nlohmann::json de_result_json(const DeConfig& config, const DeResult& result);
void write_de_sweep_csv(std::ostream& out, const DeSweepResult& sweep);
nlohmann::json de_sweep_best_json(const DeSweepResult& sweep, const ChannelParams& channel);

void write_sweep_grid_csv(std::ostream& out, std::span<const PointAggregate> grid);
nlohmann::json sweep_best_json(const SweepResult& result, const SweepConfig& config);

/// Column descriptions of every CSV the tool writes.
std::string csv_schema();

}  // namespace fcaloha::io
