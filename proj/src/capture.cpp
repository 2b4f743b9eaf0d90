#include "fcaloha/capture.hpp"

#include <cmath>
#include <cstdio>
#include <utility>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcaloha/model.hpp"
#include "fcaloha/parallel.hpp"

namespace fcaloha {

std::string to_string(Reception r) {
    return r == Reception::Capture ? "Capture" : "CollisionOnly";
}

Reception reception_from_string(const std::string& name) {
    if (name == "Capture") return Reception::Capture;
    if (name == "CollisionOnly") return Reception::CollisionOnly;
    throw std::invalid_argument("unknown reception model: " + name);
}

ChannelParams ChannelParams::from_ratio(double capture_ratio, double snr_ratio, Reception reception) {
    if (!(snr_ratio > 0.0)) throw std::invalid_argument("b / mean_snr must be positive");
    ChannelParams c{capture_ratio, capture_ratio / snr_ratio, reception};
    c.validate();
    return c;
}

void ChannelParams::validate() const {
    if (!(capture_ratio >= 1.0)) throw std::invalid_argument("capture_ratio must be >= 1");
    if (!(mean_snr > 0.0)) throw std::invalid_argument("mean_snr must be positive");
}

double sample_snr(double mean_snr, Rng& rng) {
    if (!(mean_snr > 0.0)) throw std::invalid_argument("mean_snr must be positive");
    return -mean_snr * std::log(open_unit(rng));
}

bool capture_check(double tagged_snr, double residual_interference_sum, double b) {
    return tagged_snr >= b * (1.0 + residual_interference_sum);
}

bool capture_check_total_power(double tagged_snr, double total_received, double b) {
    // X >= b/(b+1) * Y  <=>  (b+1) X >= b Y; multiplied out to avoid rounding in b/(b+1).
    return (b + 1.0) * tagged_snr >= b * total_received;
}

double singleton_capture_prob(double b, double mean_snr) {
    if (!(mean_snr > 0.0)) throw std::invalid_argument("mean_snr must be positive");
    return std::exp(-b / mean_snr);
}

double c1_closed_form(int t, double b, double mean_snr) {
    if (t < 0) throw std::invalid_argument("t must be non-negative");
    return singleton_capture_prob(b, mean_snr) / std::pow(1.0 + b, t);
}

int intra_slot_capture_stage(std::span<const double> snrs, std::size_t tagged_index, double b) {
    if (snrs.empty()) throw std::invalid_argument("snrs must be non-empty");
    if (tagged_index >= snrs.size()) throw std::invalid_argument("tagged_index out of range");

    std::vector<bool> cancelled(snrs.size(), false);
    for (int stage = 1; stage <= static_cast<int>(snrs.size()); ++stage) {
        std::size_t strongest = snrs.size();
        for (std::size_t i = 0; i < snrs.size(); ++i) {
            if (cancelled[i]) continue;
            if (strongest == snrs.size() || snrs[i] > snrs[strongest]) strongest = i;
        }
        double interference = 0.0;
        for (std::size_t i = 0; i < snrs.size(); ++i) {
            if (!cancelled[i] && i != strongest) interference += snrs[i];
        }
        if (!capture_check(snrs[strongest], interference, b)) return 0;
        if (strongest == tagged_index) return stage;
        cancelled[strongest] = true;
    }
    return 0;
}

bool intra_slot_sic_oracle(std::span<const double> snrs, std::size_t tagged_index, double b) {
    return intra_slot_capture_stage(snrs, tagged_index, b) > 0;
}

namespace {

// In-place variant of intra_slot_capture_stage for the sampling loops: cancelled
// entries are swapped past the active prefix. Tagged transmission starts at index 0.
int capture_stage_inplace(std::span<double> snrs, double b) {
    std::size_t tagged = 0;
    std::size_t active = snrs.size();
    for (int stage = 1; active > 0; ++stage) {
        std::size_t strongest = 0;
        double total = 0.0;
        for (std::size_t i = 0; i < active; ++i) {
            total += snrs[i];
            if (snrs[i] > snrs[strongest]) strongest = i;
        }
        if (!capture_check(snrs[strongest], total - snrs[strongest], b)) return 0;
        if (strongest == tagged) return stage;
        --active;
        std::swap(snrs[strongest], snrs[active]);
        if (tagged == active) tagged = strongest;
    }
    return 0;
}

// Counter-based draw k of sample s; entry t reads draws 0..t of every sample, so
// tables for different t share their randomness and inherit the oracle's
// monotonicity in the number of interferers.
double coupled_snr(std::uint64_t sample_key, std::uint64_t k, double mean_snr) {
    const std::uint64_t bits = mix_seed(sample_key + k * 0x9E3779B97F4A7C15ULL);
    return -mean_snr * std::log((static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53);
}

// Fraction of `samples` slots (tagged at index 0, t interferers) in which the
// tagged transmission is captured at `stage` (0 = any stage).
Estimate sample_stage_fraction(int t, int stage, const ChannelParams& channel,
                               std::uint64_t samples, std::uint64_t seed) {
    std::vector<double> snrs(static_cast<std::size_t>(t) + 1);
    std::uint64_t hits = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        const std::uint64_t key = mix_seed(seed ^ mix_seed(s));
        for (std::size_t k = 0; k < snrs.size(); ++k) snrs[k] = coupled_snr(key, k, channel.mean_snr);
        const int got = capture_stage_inplace(snrs, channel.capture_ratio);
        if (stage == 0 ? got > 0 : got == stage) ++hits;
    }
    const double n = static_cast<double>(samples);
    const double p = static_cast<double>(hits) / n;
    return {p, std::sqrt(p * (1.0 - p) / n)};
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

Estimate estimate_capture_stage(int t, int stage, const ChannelParams& channel,
                                std::uint64_t samples, std::uint64_t seed) {
    if (t < 0) throw std::invalid_argument("t must be non-negative");
    if (stage < 0 || stage > t + 1) throw std::invalid_argument("stage out of range");
    if (samples == 0) throw std::invalid_argument("samples must be positive");
    channel.validate();
    return sample_stage_fraction(t, stage, channel, samples, seed);
}

CaptureTable build_capture_table(const ChannelParams& channel, int t_max, std::uint64_t samples,
                                 std::uint64_t seed, unsigned threads) {
    channel.validate();
    if (channel.reception != Reception::Capture)
        throw std::invalid_argument("build_capture_table needs the capture reception model");
    if (t_max < 0) throw std::invalid_argument("t_max must be non-negative");
    if (samples < kMinTableSamples)
        throw std::invalid_argument("capture table needs at least 10^4 samples per entry");

    CaptureTable table;
    table.channel = channel;
    table.samples_per_entry = samples;
    table.seed = seed;
    table.pi.assign(static_cast<std::size_t>(t_max) + 1, 0.0);
    table.std_error.assign(table.pi.size(), 0.0);
    table.pi[0] = singleton_capture_prob(channel.capture_ratio, channel.mean_snr);

    parallel_for(static_cast<std::size_t>(t_max), resolve_threads(threads), [&](std::size_t i) {
        const int t = static_cast<int>(i) + 1;
        const Estimate e = sample_stage_fraction(t, 0, channel, samples, seed);
        table.pi[static_cast<std::size_t>(t)] = e.value;
        table.std_error[static_cast<std::size_t>(t)] = e.std_error;
    });
    return table;
}

CaptureTable collision_only_table(int t_max) {
    if (t_max < 0) throw std::invalid_argument("t_max must be non-negative");
    CaptureTable table;
    table.channel = ChannelParams::collision_only();
    table.pi.assign(static_cast<std::size_t>(t_max) + 1, 0.0);
    table.std_error.assign(table.pi.size(), 0.0);
    table.pi[0] = 1.0;
    return table;
}

int default_table_t_max(double max_beta) {
    return static_cast<int>(poisson_truncation(max_beta, kDefaultTailEps));
}

nlohmann::json table_to_json(const CaptureTable& table) {
    nlohmann::json payload{{"format_version", kTableFormatVersion},
                           {"capture_ratio", table.channel.capture_ratio},
                           {"mean_snr", table.channel.mean_snr},
                           {"snr_ratio", table.channel.snr_ratio()},
                           {"reception", to_string(table.channel.reception)},
                           {"t_max", table.t_max()},
                           {"samples_per_entry", table.samples_per_entry},
                           {"seed", table.seed},
                           {"pi", table.pi},
                           {"std_error", table.std_error}};
    nlohmann::json out = payload;
    out["checksum"] = fnv1a(payload.dump());
    return out;
}

CaptureTable table_from_json(const nlohmann::json& j) {
    try {
        nlohmann::json payload = j;
        const auto checksum = payload.at("checksum").get<std::uint64_t>();
        payload.erase("checksum");
        if (fnv1a(payload.dump()) != checksum)
            throw std::runtime_error("capture table checksum mismatch");
        if (payload.at("format_version").get<int>() != kTableFormatVersion)
            throw std::runtime_error("unsupported capture table format version");
        CaptureTable t;
        t.channel.capture_ratio = payload.at("capture_ratio").get<double>();
        t.channel.mean_snr = payload.at("mean_snr").get<double>();
        t.channel.reception = reception_from_string(payload.at("reception").get<std::string>());
        t.samples_per_entry = payload.at("samples_per_entry").get<std::uint64_t>();
        t.seed = payload.at("seed").get<std::uint64_t>();
        t.pi = payload.at("pi").get<std::vector<double>>();
        t.std_error = payload.at("std_error").get<std::vector<double>>();
        if (t.pi.empty() || t.pi.size() != t.std_error.size() ||
            static_cast<int>(t.pi.size()) != payload.at("t_max").get<int>() + 1)
            throw std::runtime_error("capture table arrays are inconsistent");
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("malformed capture table: ") + e.what());
    }
}

std::string table_cache_key(const ChannelParams& channel, int t_max, std::uint64_t samples,
                            std::uint64_t seed) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "pi_b%.9g_r%.9g_t%d_n%llu_s%llu_v%d.json", channel.capture_ratio,
                  channel.snr_ratio(), t_max, static_cast<unsigned long long>(samples),
                  static_cast<unsigned long long>(seed), kTableFormatVersion);
    return buf;
}

}  // namespace fcaloha
