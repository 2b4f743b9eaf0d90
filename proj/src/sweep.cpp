#include "fcaloha/sweep.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

namespace fcaloha {

void SweepConfig::validate() const {
    for (const GridSpec* g : {&beta, &threshold_v, &threshold_s}) {
        if (!(g->step > 0.0)) throw std::invalid_argument("grid steps must be positive");
        if (!(g->max >= g->min)) throw std::invalid_argument("grid max below grid min");
    }
    if (runs_per_point == 0) throw std::invalid_argument("runs_per_point must be >= 1");
    if (!(beta.min > 0.0)) throw std::invalid_argument("beta grid must be positive");
    if (threshold_v.min < 0.0 || threshold_v.max > 1.0)
        throw std::invalid_argument("threshold_v grid must lie in [0,1]");
    if (threshold_s.min < 0.0) throw std::invalid_argument("threshold_s grid must be non-negative");
    SystemParams probe = params;
    probe.beta = beta.max;
    probe.threshold_v = threshold_v.max;
    probe.threshold_s = threshold_s.max;
    probe.validate();
    channel().validate();
}

SweepConfig SweepConfig::defaults(bool full_scale) {
    SweepConfig c;
    if (full_scale) {
        c.beta.step = c.threshold_v.step = c.threshold_s.step = 0.01;
        c.runs_per_point = 10'000;
    }
    return c;
}

void to_json(nlohmann::json& j, const GridSpec& g) {
    j = nlohmann::json{{"min", g.min}, {"max", g.max}, {"step", g.step}};
}

void from_json(const nlohmann::json& j, GridSpec& g) {
    for (const auto& item : j.items()) {
        if (item.key() != "min" && item.key() != "max" && item.key() != "step")
            throw std::invalid_argument("unknown grid key: " + item.key());
    }
    g.min = j.at("min").get<double>();
    g.max = j.at("max").get<double>();
    g.step = j.at("step").get<double>();
}

void to_json(nlohmann::json& j, const SweepConfig& c) {
    j = nlohmann::json{{"beta", c.beta},
                       {"threshold_v", c.threshold_v},
                       {"threshold_s", c.threshold_s},
                       {"runs_per_point", c.runs_per_point},
                       {"params", c.params},
                       {"reception", to_string(c.reception)},
                       {"refine", c.refine},
                       {"keep_grid", c.keep_grid},
                       {"threads", c.threads}};
}

void from_json(const nlohmann::json& j, SweepConfig& c) {
    static const std::set<std::string> keys = {"beta",   "threshold_v", "threshold_s",
                                               "runs_per_point", "params", "reception",
                                               "refine", "keep_grid", "threads"};
    if (!j.is_object()) throw std::invalid_argument("SweepConfig must be a JSON object");
    for (const auto& item : j.items()) {
        if (!keys.contains(item.key())) throw std::invalid_argument("unknown SweepConfig key: " + item.key());
    }
    if (j.contains("beta")) c.beta = j.at("beta").get<GridSpec>();
    if (j.contains("threshold_v")) c.threshold_v = j.at("threshold_v").get<GridSpec>();
    if (j.contains("threshold_s")) c.threshold_s = j.at("threshold_s").get<GridSpec>();
    if (j.contains("runs_per_point")) c.runs_per_point = j.at("runs_per_point").get<std::uint32_t>();
    if (j.contains("params")) c.params = j.at("params").get<SystemParams>();
    if (j.contains("reception")) c.reception = reception_from_string(j.at("reception").get<std::string>());
    if (j.contains("refine")) c.refine = j.at("refine").get<bool>();
    if (j.contains("keep_grid")) c.keep_grid = j.at("keep_grid").get<bool>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
}

PointAggregate evaluate_point(const SweepPoint& point, const SweepConfig& config) {
    SystemParams params = config.params;
    params.beta = point.beta;
    params.threshold_v = point.threshold_v;
    params.threshold_s = point.threshold_s;
    const auto runs = run_batch(params, config.channel(), config.runs_per_point, config.threads, false);
    return {point, summarize(runs, params.n_users)};
}

std::vector<PointAggregate> evaluate_thresholds(double beta, std::span<const double> v_grid,
                                                std::span<const double> s_grid,
                                                const SweepConfig& config) {
    if (v_grid.empty() || s_grid.empty()) throw std::invalid_argument("threshold grids are empty");
    const auto v_sorted = std::is_sorted(v_grid.begin(), v_grid.end());
    const auto s_sorted = std::is_sorted(s_grid.begin(), s_grid.end());
    if (!v_sorted || !s_sorted) throw std::invalid_argument("threshold grids must be ascending");

    SystemParams loose = config.params;
    loose.beta = beta;
    loose.threshold_v = v_grid.back();
    loose.threshold_s = s_grid.back();
    const auto runs = run_batch(loose, config.channel(), config.runs_per_point, config.threads, true);

    // First trajectory index at which each threshold fires, per run.
    const std::size_t nv = v_grid.size();
    const std::size_t ns = s_grid.size();
    std::vector<std::uint32_t> hit_v(runs.size() * nv);
    std::vector<std::uint32_t> hit_s(runs.size() * ns);
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const auto& traj = runs[r].trajectory;
        const auto last = static_cast<std::uint32_t>(traj.size() - 1);
        std::uint32_t i = 0;
        for (std::size_t v = 0; v < nv; ++v) {
            while (i < last && !(traj[i].fraction_resolved >= v_grid[v])) ++i;
            hit_v[r * nv + v] = i;
        }
        i = 0;
        double best_t = traj[0].throughput;
        for (std::size_t s = 0; s < ns; ++s) {
            while (i < last && !(best_t >= s_grid[s])) {
                ++i;
                best_t = std::max(best_t, traj[i].throughput);
            }
            hit_s[r * ns + s] = i;
        }
    }

    std::vector<PointAggregate> out;
    out.reserve(nv * ns);
    std::vector<RunStats> truncated(runs.size());
    for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t v = 0; v < nv; ++v) {
            for (std::size_t r = 0; r < runs.size(); ++r) {
                const std::uint32_t stop = std::min(hit_v[r * nv + v], hit_s[r * ns + s]);
                const auto& p = runs[r].trajectory[stop];
                truncated[r].slots_used = stop + 1;
                truncated[r].fraction_resolved = p.fraction_resolved;
                truncated[r].throughput = p.throughput;
            }
            out.push_back({{beta, v_grid[v], s_grid[s]}, summarize(truncated, config.params.n_users)});
        }
    }
    return out;
}

bool better_point(const PointAggregate& a, const PointAggregate& b) {
    if (a.summary.throughput.mean != b.summary.throughput.mean)
        return a.summary.throughput.mean > b.summary.throughput.mean;
    return std::tie(a.point.beta, a.point.threshold_s, a.point.threshold_v) <
           std::tie(b.point.beta, b.point.threshold_s, b.point.threshold_v);
}

namespace {

void search_grids(const std::vector<double>& betas, const std::vector<double>& vs,
                  const std::vector<double>& ss, const SweepConfig& config, SweepResult& result,
                  bool& have_best) {
    for (double beta : betas) {
        for (auto& agg : evaluate_thresholds(beta, vs, ss, config)) {
            ++result.points_evaluated;
            if (!have_best || better_point(agg, result.best)) {
                result.best = agg;
                have_best = true;
            }
            if (config.keep_grid) result.grid.push_back(std::move(agg));
        }
    }
}

std::vector<double> refined_axis(double center, const GridSpec& g) {
    const double step = g.step / 5.0;
    const double lo = std::max(g.min, center - g.step);
    const double hi = std::min(g.max, center + g.step);
    return arithmetic_grid(lo, hi, step);
}

}  // namespace

SweepResult grid_search(const SweepConfig& config) {
    config.validate();
    SweepResult result;
    bool have_best = false;
    search_grids(config.beta.values(), config.threshold_v.values(), config.threshold_s.values(), config,
                 result, have_best);
    if (config.refine) {
        const SweepPoint coarse = result.best.point;
        search_grids(refined_axis(coarse.beta, config.beta), refined_axis(coarse.threshold_v, config.threshold_v),
                     refined_axis(coarse.threshold_s, config.threshold_s), config, result, have_best);
    }
    result.precision_warning = result.best.summary.throughput.std_error > 0.5 * kThroughputResolution;
    return result;
}

}  // namespace fcaloha
