#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "fcaloha/density_evolution.hpp"

using namespace fcaloha;

namespace {

const CaptureTable& table_b1_r01() {
    static const CaptureTable t = build_capture_table(ChannelParams::from_ratio(1.0, 0.1), 39, 50'000, 1);
    return t;
}

DeConfig config_for(double beta, double eps, const CaptureTable& table) {
    DeConfig c;
    c.beta = beta;
    c.epsilon = eps;
    c.table = table;
    return c;
}

// Plain collision-channel recursion written out directly.
double collision_fixed_point(double beta, double eps) {
    double r = 1.0;
    for (int i = 0; i < 100'000; ++i) {
        const double q = 1.0 - std::exp(-beta * r);
        const double next = std::exp(-(1.0 + eps) * beta * (1.0 - q));
        if (std::abs(next - r) < 1e-13) return 1.0 - next;
        r = next;
    }
    return 1.0 - r;
}

}  // namespace

TEST(UserUpdate, Boundaries) {
    EXPECT_DOUBLE_EQ(user_update(1.0, 3.0, 0.0), 1.0);
    EXPECT_NEAR(user_update(0.0, 3.0, 0.0), std::exp(-3.0), 1e-15);
    EXPECT_NEAR(user_update(0.25, 2.0, 0.5), std::exp(-1.5 * 2.0 * 0.75), 1e-15);
}

TEST(UserUpdate, SeriesMatchesClosedForm) {
    for (double beta : {0.5, 3.0, 7.2}) {
        for (double eps : {-0.6, 0.0, 0.34}) {
            const auto d = poisson_degree_pmfs(beta, eps);
            for (double q : {0.0, 0.1, 0.5, 0.9, 1.0}) {
                EXPECT_NEAR(user_update_series(q, d.edge_user), user_update(q, beta, eps), 1e-9);
            }
        }
    }
}

TEST(SlotUpdate, AllResolvedNeighboursLeavesOnlySingletonFailure) {
    const auto& t = table_b1_r01();
    const auto c = config_for(3.0, 0.0, t);
    EXPECT_NEAR(slot_update(0.0, c), 1.0 - t.pi[0], 1e-12);
    EXPECT_NEAR(slot_update_collapsed(0.0, 3.0, t), 1.0 - t.pi[0], 1e-12);
}

TEST(SlotUpdate, CollisionOnlyReducesToExponential) {
    const auto t = collision_only_table(39);
    for (double beta : {1.0, 3.12, 6.0}) {
        const auto c = config_for(beta, 0.0, t);
        for (double r : {0.0, 0.2, 0.7, 1.0}) {
            EXPECT_NEAR(slot_update(r, c), 1.0 - std::exp(-beta * r), 1e-12);
            EXPECT_NEAR(slot_update_collapsed(r, beta, t), 1.0 - std::exp(-beta * r), 1e-12);
        }
    }
}

TEST(SlotUpdate, ThreeFormsAgree) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto& t = table_b1_r01();
    for (int i = 0; i < 200; ++i) {
        const double beta = 0.5 + 9.5 * u(gen);
        const double r = u(gen);
        const auto c = config_for(beta, 0.0, t);
        const auto d = poisson_degree_pmfs(beta, 0.0);
        const double generic = slot_update_generic(r, d.edge_slot, t);
        EXPECT_NEAR(slot_update(r, c), generic, 1e-9) << "beta=" << beta << " r=" << r;
        EXPECT_NEAR(slot_update_collapsed(r, beta, t), generic, 1e-9);
    }
}

TEST(SlotUpdate, GenericRejectsShortTable) {
    const auto d = poisson_degree_pmfs(7.0, 0.0);
    EXPECT_THROW(slot_update_generic(0.5, d.edge_slot, collision_only_table(3)), std::invalid_argument);
}

TEST(FixedPoint, ZeroLoadResolvesNothing) {
    const auto r = iterate_to_fixed_point(config_for(0.0, 0.0, table_b1_r01()));
    EXPECT_EQ(r.p_r, 0.0);
    EXPECT_EQ(r.throughput, 0.0);
}

TEST(FixedPoint, TraceNonIncreasingAndThroughputIdentity) {
    for (double beta : {2.0, 5.0, 7.2}) {
        for (double eps : {-0.64, 0.0, 0.5}) {
            std::vector<double> trace;
            const auto res = iterate_to_fixed_point(config_for(beta, eps, table_b1_r01()), &trace);
            ASSERT_FALSE(trace.empty());
            EXPECT_EQ(trace.front(), 1.0);
            for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-15);
            EXPECT_TRUE(res.state.converged);
            EXPECT_NEAR(res.throughput, res.p_r / (1.0 + eps), 1e-15);
        }
    }
}

TEST(FixedPoint, CaptureNeverHurts) {
    const auto& with = table_b1_r01();
    CaptureTable without = with;
    for (std::size_t t = 1; t < without.pi.size(); ++t) without.pi[t] = 0.0;
    for (double beta : {1.0, 3.0, 6.0, 9.0}) {
        for (double eps : {-0.5, 0.0, 1.0}) {
            const double a = iterate_to_fixed_point(config_for(beta, eps, with)).p_r;
            const double b = iterate_to_fixed_point(config_for(beta, eps, without)).p_r;
            EXPECT_GE(a + 1e-9, b);
        }
    }
}

TEST(FixedPoint, CollisionOnlyMatchesDirectRecursion) {
    const auto t = collision_only_table(39);
    for (double beta : {1.5, 2.8, 3.12}) {
        for (double eps : {0.0, 0.07, 0.3}) {
            const auto res = iterate_to_fixed_point(config_for(beta, eps, t));
            EXPECT_NEAR(res.p_r, collision_fixed_point(beta, eps), 1e-8);
        }
    }
}

TEST(FixedPoint, CollisionOnlyOperatingPoint) {
    const auto res = iterate_to_fixed_point(config_for(3.12, 0.07, collision_only_table(39)));
    EXPECT_NEAR(res.throughput, 0.87, 0.02);
    EXPECT_NEAR(res.p_r, 0.93, 0.02);
}

TEST(FixedPoint, RejectsShortTable) {
    EXPECT_THROW(iterate_to_fixed_point(config_for(7.0, 0.0, collision_only_table(4))), std::invalid_argument);
}

TEST(OptimizeBeta, SinglePointGridReturnsThatPoint) {
    const std::vector<double> grid{3.0};
    const auto best = optimize_beta(0.0, table_b1_r01(), grid);
    const auto direct = iterate_to_fixed_point(config_for(3.0, 0.0, table_b1_r01()));
    EXPECT_EQ(best.beta, 3.0);
    EXPECT_EQ(best.throughput, direct.throughput);
}

TEST(OptimizeBeta, PicksGridMaximum) {
    const auto grid = arithmetic_grid(0.5, 10.0, 0.5);
    const auto best = optimize_beta(-0.64, table_b1_r01(), grid);
    for (double beta : grid) {
        EXPECT_LE(iterate_to_fixed_point(config_for(beta, -0.64, table_b1_r01())).throughput, best.throughput);
    }
}

TEST(DeSweep, RowsFollowLoadGridAndBestIsArgmax) {
    const auto loads = arithmetic_grid(0.2, 1.0, 0.2);
    const auto betas = arithmetic_grid(1.0, 8.0, 0.5);
    const auto sweep = de_sweep(table_b1_r01(), loads, betas, 2);
    ASSERT_EQ(sweep.rows.size(), loads.size());
    for (std::size_t i = 0; i < loads.size(); ++i) {
        EXPECT_EQ(sweep.rows[i].load, loads[i]);
        EXPECT_LE(sweep.rows[i].best.throughput, sweep.best().best.throughput);
    }
}
