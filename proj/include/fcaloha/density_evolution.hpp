#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fcaloha/capture.hpp"
#include "fcaloha/model.hpp"

namespace fcaloha {

/// Inputs of the asymptotic (and-or tree) evaluation of frameless ALOHA.
struct DeConfig {
    double beta = 3.0;
    double epsilon = 0.0;  ///< M/N - 1
    CaptureTable table;
    int max_iters = 10'000;
    double convergence_eps = 1e-10;
    double tail_eps = kDefaultTailEps;

    /// Largest slot degree kept in the truncated edge-perspective slot pmf.
    int l_truncation() const;
    /// Throws std::invalid_argument, including when the table does not reach l_truncation() - 1.
    void validate() const;
};

struct DeState {
    double r = 1.0;  ///< probability a user-to-slot message is still unresolved
    double q = 1.0;  ///< probability a slot-to-user message is still unresolved
    int iteration = 0;
    bool converged = false;
};

struct DeResult {
    DeState state;
    double p_r = 0.0;         ///< asymptotic probability of user resolution
    double throughput = 0.0;  ///< p_r / (1 + epsilon)
};

/// User-side update for Poisson user degrees: exp(-(1 + epsilon) beta (1 - q)).
double user_update(double q, double beta, double epsilon);

/// User-side update summed explicitly over an edge-perspective degree pmf.
double user_update_series(double q, std::span<const double> edge_user);

/// Slot-side update summed term by term over slot degree l and the number t
/// of still-unresolved interferers, with binomial weights.
double slot_update_generic(double r, std::span<const double> edge_slot, const CaptureTable& table);

/// Poisson-specialized slot update: the t = 0 terms in closed form plus the
/// capture terms as a double sum over l and t >= 1.
double slot_update(double r, const DeConfig& config);

/// The same update after summing out the slot degree:
/// 1 - sum_t pi_t * Poisson(beta r; t). Linear in the table size.
double slot_update_collapsed(double r, double beta, const CaptureTable& table);

/// Iterates from r = 1 until successive r differ by less than convergence_eps.
/// When `trace` is non-null it receives r_0, r_1, ... in order.
DeResult iterate_to_fixed_point(const DeConfig& config, std::vector<double>* trace = nullptr);

struct BetaOptimum {
    double beta = 0.0;
    double p_r = 0.0;
    double throughput = 0.0;
    bool converged = true;
};

/// Best beta on the grid for fixed epsilon; ties resolve to the smaller beta.
BetaOptimum optimize_beta(double epsilon, const CaptureTable& table,
                          std::span<const double> beta_grid, const DeConfig& base = {});

struct DeSweepRow {
    double load = 0.0;  ///< M/N
    BetaOptimum best;
};

struct DeSweepResult {
    std::vector<DeSweepRow> rows;
    std::size_t best_row = 0;  ///< argmax throughput; ties resolve to the smaller M/N

    const DeSweepRow& best() const { return rows.at(best_row); }
};

/// optimize_beta at every M/N on `load_grid`.
DeSweepResult de_sweep(const CaptureTable& table, std::span<const double> load_grid,
                       std::span<const double> beta_grid, unsigned threads = 1,
                       const DeConfig& base = {});

}  // namespace fcaloha
