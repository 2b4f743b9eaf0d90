#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fcaloha {

/// How a user's received SNR behaves across its replicas.
enum class SnrMode {
    PerUserFixed,     ///< one draw per user per contention period
    PerTransmission,  ///< fresh draw for every transmission
};

std::string to_string(SnrMode mode);
SnrMode snr_mode_from_string(const std::string& name);

/// Protocol and channel knobs for one contention period.
struct SystemParams {
    std::uint32_t n_users = 100;
    double beta = 3.0;
    double capture_ratio = 1.0;
    double mean_snr = 10.0;
    double threshold_v = 1.0;
    double threshold_s = 1.0e9;
    std::uint32_t max_slots = 2000;
    std::uint64_t base_seed = 1;
    SnrMode snr_mode = SnrMode::PerUserFixed;

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    /// Default slot cap for a given population size.
    static std::uint32_t default_max_slots(std::uint32_t n_users) { return 20u * n_users; }
};

void to_json(nlohmann::json& j, const SystemParams& p);
/// Rejects unknown and missing keys.
void from_json(const nlohmann::json& j, SystemParams& p);

/// Per-slot transmission probability beta / n_users.
double slot_access_probability(double beta, std::uint32_t n_users);

/// Node- and edge-perspective degree pmfs of the frameless access graph.
///
/// `node_user[k]` and `node_slot[k]` are Poisson pmfs truncated where the
/// remaining tail drops below the requested epsilon and renormalized.
/// `edge_user[k]` is proportional to k * node_user[k], and likewise for
/// slots; edge vectors are indexed by degree and start with a zero.
struct DegreeDistributions {
    std::vector<double> node_user;
    std::vector<double> node_slot;
    std::vector<double> edge_user;
    std::vector<double> edge_slot;
    std::size_t truncation = 0;  ///< largest retained slot degree
};

inline constexpr double kDefaultTailEps = 1e-12;

/// Smallest k such that P[Poisson(mean) > k] < tail_eps.
std::size_t poisson_truncation(double mean, double tail_eps = kDefaultTailEps);

/// Truncated, renormalized Poisson pmf on 0..poisson_truncation(mean, tail_eps).
std::vector<double> truncated_poisson(double mean, double tail_eps = kDefaultTailEps);

/// Edge-perspective pmf: out[k] = k * node[k] / sum_v v * node[v].
std::vector<double> edge_perspective(const std::vector<double>& node);

DegreeDistributions poisson_degree_pmfs(double beta, double epsilon,
                                        double tail_eps = kDefaultTailEps);

/// Inclusive grid lo, lo + step, ..., hi. Points are rounded to 12 decimals so
/// that e.g. 0.05 + 31 * 0.01 prints and compares as 0.36.
std::vector<double> arithmetic_grid(double lo, double hi, double step);

}  // namespace fcaloha
