#include "fcaloha/density_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fcaloha/parallel.hpp"

namespace fcaloha {

int DeConfig::l_truncation() const {
    return std::max(1, static_cast<int>(poisson_truncation(beta, tail_eps)));
}

void DeConfig::validate() const {
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
    if (!(epsilon > -1.0)) throw std::invalid_argument("epsilon must exceed -1");
    if (table.pi.empty()) throw std::invalid_argument("capture table is empty");
    if (max_iters <= 0) throw std::invalid_argument("max_iters must be positive");
    if (!(convergence_eps > 0.0)) throw std::invalid_argument("convergence_eps must be positive");
    if (table.t_max() < l_truncation() - 1)
        throw std::invalid_argument("capture table does not cover the slot-degree truncation");
}

double user_update(double q, double beta, double epsilon) {
    return std::exp(-(1.0 + epsilon) * beta * (1.0 - q));
}

double user_update_series(double q, std::span<const double> edge_user) {
    double r = 0.0;
    double power = 1.0;  // q^{k-1}
    for (std::size_t k = 1; k < edge_user.size(); ++k) {
        r += edge_user[k] * power;
        power *= q;
    }
    return r;
}

double slot_update_generic(double r, std::span<const double> edge_slot, const CaptureTable& table) {
    const int max_degree = static_cast<int>(edge_slot.size()) - 1;
    if (table.t_max() < max_degree - 1)
        throw std::invalid_argument("capture table does not cover the slot-degree pmf");
    double recovered = 0.0;
    for (int l = 1; l <= max_degree; ++l) {
        const double weight = edge_slot[static_cast<std::size_t>(l)];
        if (weight == 0.0) continue;
        const int n = l - 1;
        double inner = 0.0;
        double binom = 1.0;  // C(n, t)
        for (int t = 0; t <= n; ++t) {
            inner += binom * table.at(t) * std::pow(1.0 - r, n - t) * std::pow(r, t);
            binom = binom * static_cast<double>(n - t) / static_cast<double>(t + 1);
        }
        recovered += weight * inner;
    }
    return 1.0 - recovered;
}

double slot_update(double r, const DeConfig& config) {
    const double beta = config.beta;
    double q = 1.0 - config.table.at(0) * std::exp(-beta * r);
    if (beta == 0.0) return q;

    const int max_degree = config.l_truncation();
    const double log_beta = std::log(beta);
    double capture_terms = 0.0;
    for (int l = 2; l <= max_degree; ++l) {
        for (int t = 1; t <= l - 1; ++t) {
            const double pi_t = config.table.at(t);
            if (pi_t == 0.0) continue;
            const double coeff = std::exp(static_cast<double>(l - 1) * log_beta -
                                          std::lgamma(static_cast<double>(l - t)) -
                                          std::lgamma(static_cast<double>(t + 1)));
            capture_terms += pi_t * coeff * std::pow(1.0 - r, l - 1 - t) * std::pow(r, t);
        }
    }
    q -= std::exp(-beta) * capture_terms;
    return q;
}

double slot_update_collapsed(double r, double beta, const CaptureTable& table) {
    const double mean = beta * r;
    double term = std::exp(-mean);
    double recovered = table.pi[0] * term;
    for (int t = 1; t <= table.t_max(); ++t) {
        term *= mean / static_cast<double>(t);
        recovered += table.pi[static_cast<std::size_t>(t)] * term;
    }
    return 1.0 - recovered;
}

DeResult iterate_to_fixed_point(const DeConfig& config, std::vector<double>* trace) {
    config.validate();
    DeState state;
    if (trace) {
        trace->clear();
        trace->push_back(state.r);
    }
    while (state.iteration < config.max_iters) {
        state.q = slot_update_collapsed(state.r, config.beta, config.table);
        const double next = user_update(state.q, config.beta, config.epsilon);
        ++state.iteration;
        const double step = std::abs(next - state.r);
        state.r = next;
        if (trace) trace->push_back(next);
        if (step < config.convergence_eps) {
            state.converged = true;
            break;
        }
    }
    DeResult result;
    result.state = state;
    result.p_r = 1.0 - state.r;
    result.throughput = result.p_r / (1.0 + config.epsilon);
    return result;
}

BetaOptimum optimize_beta(double epsilon, const CaptureTable& table,
                          std::span<const double> beta_grid, const DeConfig& base) {
    if (beta_grid.empty()) throw std::invalid_argument("beta grid is empty");
    DeConfig config = base;
    config.table = table;
    config.epsilon = epsilon;
    BetaOptimum best;
    best.throughput = -1.0;
    for (double beta : beta_grid) {
        config.beta = beta;
        const DeResult r = iterate_to_fixed_point(config);
        if (r.throughput > best.throughput) {
            best = {beta, r.p_r, r.throughput, r.state.converged};
        }
    }
    return best;
}

DeSweepResult de_sweep(const CaptureTable& table, std::span<const double> load_grid,
                       std::span<const double> beta_grid, unsigned threads, const DeConfig& base) {
    if (load_grid.empty()) throw std::invalid_argument("M/N grid is empty");
    DeSweepResult out;
    out.rows.resize(load_grid.size());
    parallel_for(load_grid.size(), resolve_threads(threads), [&](std::size_t i) {
        out.rows[i].load = load_grid[i];
        out.rows[i].best = optimize_beta(load_grid[i] - 1.0, table, beta_grid, base);
    });
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
        if (out.rows[i].best.throughput > out.rows[out.best_row].best.throughput) out.best_row = i;
    }
    return out;
}

}  // namespace fcaloha
