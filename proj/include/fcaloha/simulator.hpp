#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fcaloha/capture.hpp"
#include "fcaloha/model.hpp"
#include "fcaloha/random.hpp"

namespace fcaloha {

struct Transmission {
    std::uint32_t user = 0;
    double snr = 0.0;
};

/// Bipartite user/slot graph of one contention period, holding only the
/// transmissions that have not been cancelled yet.
///
/// A resolved user has no residual transmission in any slot. Slots whose
/// residual set changed since they were last examined are queued as pending.
class ContentionGraph {
public:
    /// Draws one SNR per user when `mode` is PerUserFixed.
    ContentionGraph(std::uint32_t n_users, SnrMode mode, double mean_snr, Rng& rng);

    std::uint32_t n_users() const { return static_cast<std::uint32_t>(user_slots_.size()); }
    std::size_t slot_count() const { return slots_.size(); }
    std::uint32_t resolved_count() const { return resolved_count_; }
    SnrMode snr_mode() const { return mode_; }
    double mean_snr() const { return mean_snr_; }

    bool is_resolved(std::uint32_t user) const { return resolved_[user]; }
    /// Per-user SNR; only meaningful in PerUserFixed mode.
    double user_snr(std::uint32_t user) const { return user_snr_[user]; }
    std::span<const Transmission> slot(std::size_t j) const { return slots_[j]; }
    std::span<const std::uint32_t> user_slots(std::uint32_t user) const { return user_slots_[user]; }
    /// Unresolved users in an order that depends only on the resolution history.
    std::span<const std::uint32_t> unresolved() const { return unresolved_; }
    std::vector<std::uint32_t> resolved_users() const;

    /// Appends a slot; every user may appear at most once and must be unresolved.
    void append_slot(std::vector<Transmission> transmissions);

    /// Marks `user` resolved and cancels all of its replicas.
    void resolve(std::uint32_t user);

    bool has_pending() const { return !pending_.empty(); }
    std::size_t pop_pending();
    void clear_pending();

private:
    SnrMode mode_;
    double mean_snr_;
    std::vector<double> user_snr_;
    std::vector<bool> resolved_;
    std::vector<std::vector<std::uint32_t>> user_slots_;
    std::vector<std::vector<Transmission>> slots_;
    std::vector<std::uint32_t> unresolved_;
    std::vector<std::uint32_t> unresolved_pos_;
    std::vector<std::size_t> pending_;
    std::vector<bool> is_pending_;
    std::uint32_t resolved_count_ = 0;
};

/// Appends one slot in which every unresolved user transmits independently
/// with probability beta / n_users. Throws std::runtime_error at the slot cap.
void extend_graph(ContentionGraph& graph, const SystemParams& params, Rng& rng);

/// User decodable from slot j in its current residual state, if any.
/// Returns n_users() when nothing can be decoded.
std::uint32_t decodable_user(const ContentionGraph& graph, std::size_t j, const ChannelParams& channel);

/// Runs inter- and intra-slot SIC over the pending slots until no slot yields
/// a new user. Returns the number of users resolved by this call.
std::uint32_t sic_peel(ContentionGraph& graph, const ChannelParams& channel);

/// Same closure, reached by repeated full scans in the given slot order.
std::uint32_t sic_peel_scan(ContentionGraph& graph, const ChannelParams& channel,
                            std::span<const std::size_t> scan_order);

enum class Termination { FractionThreshold, ThroughputThreshold, AllResolved, SlotCap };

std::string to_string(Termination cause);

struct TrajectoryPoint {
    double fraction_resolved = 0.0;
    double throughput = 0.0;
};

struct RunStats {
    std::uint64_t seed = 0;
    std::uint32_t slots_used = 0;      // M
    std::uint32_t resolved_count = 0;  // N_R
    double fraction_resolved = 0.0;    // N_R / N
    double throughput = 0.0;           // N_R / (M + 1), the beacon takes one slot
    Termination cause = Termination::SlotCap;
    std::vector<TrajectoryPoint> trajectory;
};

/// One contention period: extend, peel, then test the stopping rule after every slot.
RunStats run_contention(const SystemParams& params, const ChannelParams& channel, Rng& rng);

/// Seed of run `run_index` in a batch.
inline std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t run_index) {
    return base_seed + run_index;
}

/// Independent runs with seeds base_seed + i. Output order follows run index.
std::vector<RunStats> run_batch(const SystemParams& params, const ChannelParams& channel,
                                std::uint32_t runs, unsigned threads = 1,
                                bool keep_trajectory = true);

struct MeanWithError {
    double mean = 0.0;
    double std_error = 0.0;
};

struct BatchSummary {
    std::uint32_t runs = 0;
    MeanWithError throughput;
    MeanWithError fraction_resolved;
    MeanWithError load;  // M / N
};

BatchSummary summarize(std::span<const RunStats> runs, std::uint32_t n_users);

}  // namespace fcaloha
