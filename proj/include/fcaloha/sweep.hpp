#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fcaloha/capture.hpp"
#include "fcaloha/model.hpp"
#include "fcaloha/simulator.hpp"

namespace fcaloha {

struct GridSpec {
    double min = 0.0;
    double max = 0.0;
    double step = 0.1;

    std::vector<double> values() const { return arithmetic_grid(min, max, step); }
};

struct SweepPoint {
    double beta = 0.0;
    double threshold_v = 0.0;
    double threshold_s = 0.0;
};

/// Exhaustive search over (beta, V, S) for one (N, b, b/mean_snr).
struct SweepConfig {
    GridSpec beta{0.5, 10.0, 0.1};
    GridSpec threshold_v{0.0, 1.0, 0.05};
    GridSpec threshold_s{0.0, 3.0, 0.05};
    std::uint32_t runs_per_point = 1000;
    SystemParams params;  ///< beta, threshold_v and threshold_s are overridden per point
    Reception reception = Reception::Capture;
    bool refine = false;  ///< second pass at step / 5 around the coarse optimum
    bool keep_grid = true;
    unsigned threads = 1;

    ChannelParams channel() const { return {params.capture_ratio, params.mean_snr, reception}; }
    void validate() const;

    /// Desk-scale defaults (coarse steps, 1000 runs) or the full-scale
    /// 0.01-step grids with 10000 runs per point.
    static SweepConfig defaults(bool full_scale);
};

void to_json(nlohmann::json& j, const GridSpec& g);
void from_json(const nlohmann::json& j, GridSpec& g);
void to_json(nlohmann::json& j, const SweepConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, SweepConfig& c);

struct PointAggregate {
    SweepPoint point;
    BatchSummary summary;
};

/// runs_per_point independent contentions at one (beta, V, S).
PointAggregate evaluate_point(const SweepPoint& point, const SweepConfig& config);

/// Every (V, S) pair on the grids for one beta, from a single batch of runs.
///
/// A run's graph evolution does not depend on the thresholds, so each run is
/// simulated once with the loosest stopping rule and every (V, S) is read off
/// its trajectory. Matches evaluate_point bit-for-bit. Output is ordered by
/// S, then V.
std::vector<PointAggregate> evaluate_thresholds(double beta, std::span<const double> v_grid,
                                                std::span<const double> s_grid,
                                                const SweepConfig& config);

/// Throughput at which reported values are rounded; a standard error above half
/// of it raises SweepResult::precision_warning.
inline constexpr double kThroughputResolution = 0.01;

struct SweepResult {
    PointAggregate best;
    std::vector<PointAggregate> grid;
    std::size_t points_evaluated = 0;
    bool precision_warning = false;
};

/// Argmax of mean throughput; ties go to smaller beta, then smaller S, then smaller V.
SweepResult grid_search(const SweepConfig& config);

/// True when `a` should be preferred over `b` under the grid_search ordering.
bool better_point(const PointAggregate& a, const PointAggregate& b);

}  // namespace fcaloha
