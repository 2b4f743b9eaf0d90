#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fcaloha/random.hpp"

namespace fcaloha {

/// Receiver model used by the simulator and the solver.
enum class Reception {
    Capture,        ///< SINR threshold with unit noise, intra- and inter-slot SIC
    CollisionOnly,  ///< noiseless; a transmission is decoded iff it is alone in its slot
};

std::string to_string(Reception r);
Reception reception_from_string(const std::string& name);

/// Rayleigh channel as seen by the receiver. SNRs are noise-normalized.
struct ChannelParams {
    double capture_ratio = 1.0;  // b
    double mean_snr = 10.0;      // mean of the exponential SNR
    Reception reception = Reception::Capture;

    /// b / (b + 1): threshold on X / (1 + total received power).
    double b_prime() const { return capture_ratio / (capture_ratio + 1.0); }
    /// b / mean_snr, the parameterization used on the CLI and in result tables.
    double snr_ratio() const { return capture_ratio / mean_snr; }

    static ChannelParams from_ratio(double capture_ratio, double snr_ratio,
                                    Reception reception = Reception::Capture);
    static ChannelParams collision_only() { return {1.0, 1.0, Reception::CollisionOnly}; }

    void validate() const;
};

/// Exponential SNR with the given mean; strictly positive.
double sample_snr(double mean_snr, Rng& rng);

/// SINR test with unit noise: tagged / (1 + interference) >= b.
bool capture_check(double tagged_snr, double residual_interference_sum, double b);

/// Same predicate written against the total received power
/// (tagged + interference + noise): tagged >= b/(b+1) * total.
bool capture_check_total_power(double tagged_snr, double total_received, double b);

/// Probability that a lone transmission is decoded, exp(-b / mean_snr).
double singleton_capture_prob(double b, double mean_snr);

/// Probability that the tagged transmission is the first one captured in a
/// slot with t interferers: exp(-b / mean_snr) / (1 + b)^t.
double c1_closed_form(int t, double b, double mean_snr);

/// Stage (1-based) at which `tagged_index` is captured by strongest-first
/// intra-slot SIC, or 0 if it never is. Ties go to the lowest index.
int intra_slot_capture_stage(std::span<const double> snrs, std::size_t tagged_index, double b);

/// True if intra-slot SIC eventually captures the tagged transmission.
bool intra_slot_sic_oracle(std::span<const double> snrs, std::size_t tagged_index, double b);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte-Carlo probability that the tagged transmission is captured at exactly
/// `stage` (stage 0 means "at any stage") with t i.i.d. interferers.
Estimate estimate_capture_stage(int t, int stage, const ChannelParams& channel,
                                std::uint64_t samples, std::uint64_t seed);

inline constexpr std::uint64_t kMinTableSamples = 10'000;
inline constexpr std::uint64_t kDefaultTableSamples = 1'000'000;
inline constexpr int kTableFormatVersion = 1;

/// pi[t]: probability that a tagged transmission is eventually decoded in a
/// slot where t other transmissions are still uncancelled.
struct CaptureTable {
    ChannelParams channel;
    std::vector<double> pi;
    std::vector<double> std_error;
    std::uint64_t samples_per_entry = 0;
    std::uint64_t seed = 0;

    int t_max() const { return static_cast<int>(pi.size()) - 1; }

    /// pi[t] for t <= t_max, zero beyond.
    double at(int t) const { return t <= t_max() ? pi[static_cast<std::size_t>(t)] : 0.0; }
};

/// pi[0] analytically, pi[t >= 1] by `samples` draws of the intra-slot oracle.
/// Every entry reuses the same per-sample draws (entry t reads the first t + 1),
/// so pi is non-increasing in t sample-by-sample and independent of `threads`.
CaptureTable build_capture_table(const ChannelParams& channel, int t_max, std::uint64_t samples,
                                 std::uint64_t seed, unsigned threads = 1);

/// pi[0] = 1, pi[t >= 1] = 0: classic collision channel without noise.
CaptureTable collision_only_table(int t_max);

/// Largest number of interferers the solver queries for slot means up to `max_beta`.
int default_table_t_max(double max_beta);

/// Serialized form, with an FNV-1a checksum over the payload.
nlohmann::json table_to_json(const CaptureTable& table);
/// Throws std::runtime_error on checksum mismatch or malformed records.
CaptureTable table_from_json(const nlohmann::json& j);

/// File name identifying a table by all inputs that determine its contents.
std::string table_cache_key(const ChannelParams& channel, int t_max, std::uint64_t samples,
                            std::uint64_t seed);

}  // namespace fcaloha
