#include "fcaloha/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fcaloha/parallel.hpp"

namespace fcaloha {

ContentionGraph::ContentionGraph(std::uint32_t n_users, SnrMode mode, double mean_snr, Rng& rng)
    : mode_(mode),
      mean_snr_(mean_snr),
      user_snr_(n_users, 0.0),
      resolved_(n_users, false),
      user_slots_(n_users),
      unresolved_(n_users),
      unresolved_pos_(n_users) {
    if (n_users == 0) throw std::invalid_argument("n_users must be positive");
    for (std::uint32_t u = 0; u < n_users; ++u) {
        unresolved_[u] = u;
        unresolved_pos_[u] = u;
    }
    if (mode == SnrMode::PerUserFixed) {
        for (auto& x : user_snr_) x = sample_snr(mean_snr, rng);
    }
}

std::vector<std::uint32_t> ContentionGraph::resolved_users() const {
    std::vector<std::uint32_t> out;
    out.reserve(resolved_count_);
    for (std::uint32_t u = 0; u < n_users(); ++u) {
        if (resolved_[u]) out.push_back(u);
    }
    return out;
}

void ContentionGraph::append_slot(std::vector<Transmission> transmissions) {
    const std::size_t j = slots_.size();
    for (std::size_t i = 0; i < transmissions.size(); ++i) {
        const auto& tx = transmissions[i];
        if (tx.user >= n_users()) throw std::invalid_argument("transmission from unknown user");
        if (resolved_[tx.user]) throw std::invalid_argument("resolved users do not occupy slots");
        for (std::size_t k = 0; k < i; ++k) {
            if (transmissions[k].user == tx.user) throw std::invalid_argument("user transmits twice in one slot");
        }
    }
    for (const auto& tx : transmissions) user_slots_[tx.user].push_back(static_cast<std::uint32_t>(j));
    slots_.push_back(std::move(transmissions));
    is_pending_.push_back(true);
    pending_.push_back(j);
}

void ContentionGraph::resolve(std::uint32_t user) {
    if (resolved_[user]) return;
    resolved_[user] = true;
    ++resolved_count_;

    const std::uint32_t pos = unresolved_pos_[user];
    const std::uint32_t last = unresolved_.back();
    unresolved_[pos] = last;
    unresolved_pos_[last] = pos;
    unresolved_.pop_back();

    for (std::uint32_t j : user_slots_[user]) {
        auto& txs = slots_[j];
        txs.erase(std::find_if(txs.begin(), txs.end(),
                               [user](const Transmission& tx) { return tx.user == user; }));
        if (!is_pending_[j]) {
            is_pending_[j] = true;
            pending_.push_back(j);
        }
    }
    user_slots_[user].clear();
}

std::size_t ContentionGraph::pop_pending() {
    const std::size_t j = pending_.back();
    pending_.pop_back();
    is_pending_[j] = false;
    return j;
}

void ContentionGraph::clear_pending() {
    for (std::size_t j : pending_) is_pending_[j] = false;
    pending_.clear();
}

void extend_graph(ContentionGraph& graph, const SystemParams& params, Rng& rng) {
    if (graph.slot_count() >= params.max_slots) throw std::runtime_error("slot cap reached");
    const double p = params.beta / static_cast<double>(params.n_users);
    std::vector<Transmission> txs;
    if (p > 0.0) {
        const auto candidates = graph.unresolved();
        // Geometric gaps between transmitting users give exact Bernoulli(p) participation.
        const double log_miss = p < 1.0 ? std::log1p(-p) : 0.0;
        std::size_t i = 0;
        while (true) {
            if (p < 1.0) {
                const double gap = std::floor(std::log(open_unit(rng)) / log_miss);
                if (gap >= static_cast<double>(candidates.size() - i)) break;
                i += static_cast<std::size_t>(gap);
            }
            if (i >= candidates.size()) break;
            const std::uint32_t user = candidates[i];
            const double snr = graph.snr_mode() == SnrMode::PerUserFixed
                                   ? graph.user_snr(user)
                                   : sample_snr(graph.mean_snr(), rng);
            txs.push_back({user, snr});
            ++i;
        }
    }
    graph.append_slot(std::move(txs));
}

std::uint32_t decodable_user(const ContentionGraph& graph, std::size_t j, const ChannelParams& channel) {
    const auto txs = graph.slot(j);
    if (txs.empty()) return graph.n_users();
    if (channel.reception == Reception::CollisionOnly) {
        return txs.size() == 1 ? txs.front().user : graph.n_users();
    }
    std::size_t strongest = 0;
    for (std::size_t i = 1; i < txs.size(); ++i) {
        if (txs[i].snr > txs[strongest].snr) strongest = i;
    }
    double interference = 0.0;
    for (std::size_t i = 0; i < txs.size(); ++i) {
        if (i != strongest) interference += txs[i].snr;
    }
    if (capture_check(txs[strongest].snr, interference, channel.capture_ratio))
        return txs[strongest].user;
    return graph.n_users();
}

std::uint32_t sic_peel(ContentionGraph& graph, const ChannelParams& channel) {
    const std::uint32_t before = graph.resolved_count();
    while (graph.has_pending()) {
        const std::size_t j = graph.pop_pending();
        // resolve() re-queues j itself, so each pop decodes at most one user.
        const std::uint32_t u = decodable_user(graph, j, channel);
        if (u < graph.n_users()) graph.resolve(u);
    }
    return graph.resolved_count() - before;
}

std::uint32_t sic_peel_scan(ContentionGraph& graph, const ChannelParams& channel,
                            std::span<const std::size_t> scan_order) {
    const std::uint32_t before = graph.resolved_count();
    bool progress = true;
    while (progress) {
        progress = false;
        for (std::size_t j : scan_order) {
            const std::uint32_t u = decodable_user(graph, j, channel);
            if (u < graph.n_users()) {
                graph.resolve(u);
                progress = true;
            }
        }
    }
    graph.clear_pending();
    return graph.resolved_count() - before;
}

std::string to_string(Termination cause) {
    switch (cause) {
        case Termination::FractionThreshold: return "FractionThreshold";
        case Termination::ThroughputThreshold: return "ThroughputThreshold";
        case Termination::AllResolved: return "AllResolved";
        case Termination::SlotCap: return "SlotCap";
    }
    return "Unknown";
}

RunStats run_contention(const SystemParams& params, const ChannelParams& channel, Rng& rng) {
    ContentionGraph graph(params.n_users, params.snr_mode, params.mean_snr, rng);
    RunStats stats;
    const double n = static_cast<double>(params.n_users);
    while (true) {
        extend_graph(graph, params, rng);
        sic_peel(graph, channel);

        const std::uint32_t m = static_cast<std::uint32_t>(graph.slot_count());
        const std::uint32_t resolved = graph.resolved_count();
        const double fraction = static_cast<double>(resolved) / n;
        const double throughput = static_cast<double>(resolved) / static_cast<double>(m + 1);
        stats.trajectory.push_back({fraction, throughput});
        stats.slots_used = m;
        stats.resolved_count = resolved;
        stats.fraction_resolved = fraction;
        stats.throughput = throughput;

        if (fraction >= params.threshold_v) {
            stats.cause = Termination::FractionThreshold;
        } else if (throughput >= params.threshold_s) {
            stats.cause = Termination::ThroughputThreshold;
        } else if (resolved == params.n_users) {
            stats.cause = Termination::AllResolved;
        } else if (m >= params.max_slots) {
            stats.cause = Termination::SlotCap;
        } else {
            continue;
        }
        return stats;
    }
}

std::vector<RunStats> run_batch(const SystemParams& params, const ChannelParams& channel,
                                std::uint32_t runs, unsigned threads, bool keep_trajectory) {
    params.validate();
    std::vector<RunStats> out(runs);
    parallel_for(runs, resolve_threads(threads), [&](std::size_t i) {
        const std::uint64_t seed = run_seed(params.base_seed, i);
        Rng rng(mix_seed(seed));
        out[i] = run_contention(params, channel, rng);
        out[i].seed = seed;
        if (!keep_trajectory) {
            out[i].trajectory.clear();
            out[i].trajectory.shrink_to_fit();
        }
    });
    return out;
}

namespace {
template <typename Get>
MeanWithError mean_and_error(std::span<const RunStats> runs, Get get) {
    MeanWithError out;
    if (runs.empty()) return out;
    const double n = static_cast<double>(runs.size());
    double sum = 0.0;
    for (const auto& r : runs) sum += get(r);
    out.mean = sum / n;
    if (runs.size() > 1) {
        double ss = 0.0;
        for (const auto& r : runs) ss += (get(r) - out.mean) * (get(r) - out.mean);
        out.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return out;
}
}  // namespace

BatchSummary summarize(std::span<const RunStats> runs, std::uint32_t n_users) {
    BatchSummary s;
    s.runs = static_cast<std::uint32_t>(runs.size());
    s.throughput = mean_and_error(runs, [](const RunStats& r) { return r.throughput; });
    s.fraction_resolved = mean_and_error(runs, [](const RunStats& r) { return r.fraction_resolved; });
    s.load = mean_and_error(runs, [n_users](const RunStats& r) {
        return static_cast<double>(r.slots_used) / static_cast<double>(n_users);
    });
    return s;
}

}  // namespace fcaloha
