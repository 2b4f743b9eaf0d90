#include "fcaloha/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fcaloha {

std::string to_string(SnrMode mode) {
    return mode == SnrMode::PerUserFixed ? "PerUserFixed" : "PerTransmission";
}

SnrMode snr_mode_from_string(const std::string& name) {
    if (name == "PerUserFixed") return SnrMode::PerUserFixed;
    if (name == "PerTransmission") return SnrMode::PerTransmission;
    throw std::invalid_argument("unknown snr_mode: " + name);
}

void SystemParams::validate() const {
    if (n_users == 0) throw std::invalid_argument("n_users must be positive");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (beta > static_cast<double>(n_users))
        throw std::invalid_argument("beta/n_users exceeds 1");
    if (!(capture_ratio >= 1.0)) throw std::invalid_argument("capture_ratio must be >= 1");
    if (!(mean_snr > 0.0)) throw std::invalid_argument("mean_snr must be positive");
    if (!(threshold_v >= 0.0 && threshold_v <= 1.0))
        throw std::invalid_argument("threshold_v must lie in [0,1]");
    if (!(threshold_s >= 0.0)) throw std::invalid_argument("threshold_s must be >= 0");
    if (max_slots == 0) throw std::invalid_argument("max_slots must be positive");
}

namespace {
const std::set<std::string> kParamKeys = {"n_users",     "beta",        "capture_ratio",
                                          "mean_snr",    "threshold_v", "threshold_s",
                                          "max_slots",   "base_seed",   "snr_mode"};
}

void to_json(nlohmann::json& j, const SystemParams& p) {
    j = nlohmann::json{{"n_users", p.n_users},
                       {"beta", p.beta},
                       {"capture_ratio", p.capture_ratio},
                       {"mean_snr", p.mean_snr},
                       {"threshold_v", p.threshold_v},
                       {"threshold_s", p.threshold_s},
                       {"max_slots", p.max_slots},
                       {"base_seed", p.base_seed},
                       {"snr_mode", to_string(p.snr_mode)}};
}

void from_json(const nlohmann::json& j, SystemParams& p) {
    if (!j.is_object()) throw std::invalid_argument("SystemParams must be a JSON object");
    for (const auto& item : j.items()) {
        if (!kParamKeys.contains(item.key()))
            throw std::invalid_argument("unknown SystemParams key: " + item.key());
    }
    for (const auto& key : kParamKeys) {
        if (!j.contains(key)) throw std::invalid_argument("missing SystemParams key: " + key);
    }
    p.n_users = j.at("n_users").get<std::uint32_t>();
    p.beta = j.at("beta").get<double>();
    p.capture_ratio = j.at("capture_ratio").get<double>();
    p.mean_snr = j.at("mean_snr").get<double>();
    p.threshold_v = j.at("threshold_v").get<double>();
    p.threshold_s = j.at("threshold_s").get<double>();
    p.max_slots = j.at("max_slots").get<std::uint32_t>();
    p.base_seed = j.at("base_seed").get<std::uint64_t>();
    p.snr_mode = snr_mode_from_string(j.at("snr_mode").get<std::string>());
}

double slot_access_probability(double beta, std::uint32_t n_users) {
    if (n_users == 0) throw std::invalid_argument("n_users must be positive");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (beta > static_cast<double>(n_users))
        throw std::invalid_argument("slot access probability would exceed 1");
    return beta / static_cast<double>(n_users);
}

std::size_t poisson_truncation(double mean, double tail_eps) {
    if (!(mean >= 0.0)) throw std::invalid_argument("Poisson mean must be non-negative");
    if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw std::invalid_argument("tail_eps must lie in (0,1)");
    double term = std::exp(-mean);
    double head = term;
    std::size_t k = 0;
    // 1 - head bottoms out near machine epsilon; stop well past any usable tail.
    const auto hard_cap = static_cast<std::size_t>(mean + 40.0 * std::sqrt(mean) + 60.0);
    while (1.0 - head >= tail_eps && k < hard_cap) {
        ++k;
        term *= mean / static_cast<double>(k);
        head += term;
    }
    return k;
}

std::vector<double> truncated_poisson(double mean, double tail_eps) {
    const std::size_t last = poisson_truncation(mean, tail_eps);
    std::vector<double> pmf(last + 1);
    double term = std::exp(-mean);
    for (std::size_t k = 0; k <= last; ++k) {
        if (k > 0) term *= mean / static_cast<double>(k);
        pmf[k] = term;
    }
    const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    for (auto& v : pmf) v /= total;
    return pmf;
}

std::vector<double> edge_perspective(const std::vector<double>& node) {
    std::vector<double> edge(std::max<std::size_t>(node.size(), 2), 0.0);
    double norm = 0.0;
    for (std::size_t k = 0; k < node.size(); ++k) norm += static_cast<double>(k) * node[k];
    if (norm <= 0.0) {
        // Every node has degree zero; no edges exist. Degree one is a harmless placeholder.
        edge[1] = 1.0;
        return edge;
    }
    for (std::size_t k = 1; k < node.size(); ++k) edge[k] = static_cast<double>(k) * node[k] / norm;
    return edge;
}

DegreeDistributions poisson_degree_pmfs(double beta, double epsilon, double tail_eps) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(epsilon > -1.0)) throw std::invalid_argument("epsilon must exceed -1");
    if (!(tail_eps > 0.0 && tail_eps <= 1e-6)) throw std::invalid_argument("tail_eps must lie in (0, 1e-6]");
    DegreeDistributions d;
    d.node_user = truncated_poisson((1.0 + epsilon) * beta, tail_eps);
    d.node_slot = truncated_poisson(beta, tail_eps);
    d.edge_user = edge_perspective(d.node_user);
    d.edge_slot = edge_perspective(d.node_slot);
    d.truncation = d.node_slot.size() - 1;
    return d;
}

std::vector<double> arithmetic_grid(double lo, double hi, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
    if (!(hi >= lo)) throw std::invalid_argument("grid upper bound below lower bound");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12;
    }
    return grid;
}

}  // namespace fcaloha
