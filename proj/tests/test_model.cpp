#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fcaloha/model.hpp"

using namespace fcaloha;

namespace {
double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double mean(const std::vector<double>& pmf) {
    double m = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
    return m;
}
}  // namespace

TEST(SlotAccess, EvaluatesRatio) {
    EXPECT_DOUBLE_EQ(slot_access_probability(3.12, 100), 0.0312);
    EXPECT_DOUBLE_EQ(slot_access_probability(7.2, 1000), 0.0072);
    EXPECT_DOUBLE_EQ(slot_access_probability(100, 100), 1.0);
}

TEST(SlotAccess, RejectsProbabilityAboveOne) {
    EXPECT_THROW(slot_access_probability(101, 100), std::invalid_argument);
    EXPECT_THROW(slot_access_probability(0.0, 100), std::invalid_argument);
    EXPECT_THROW(slot_access_probability(1.0, 0), std::invalid_argument);
}

TEST(DegreePmfs, SlotDegreeZeroIsExpMinusBeta) {
    const auto d = poisson_degree_pmfs(3.0, 0.0);
    EXPECT_NEAR(d.node_slot[0], std::exp(-3.0), 1e-12);
    EXPECT_NEAR(d.node_slot[0], 0.049787, 1e-6);
}

TEST(DegreePmfs, EdgePerspectiveIsShiftedNodePmf) {
    for (double mu : {0.5, 3.0, 7.2}) {
        const auto d = poisson_degree_pmfs(mu, 0.0);
        ASSERT_EQ(d.edge_slot[0], 0.0);
        for (std::size_t l = 1; l < d.edge_slot.size(); ++l) {
            EXPECT_NEAR(d.edge_slot[l], d.node_slot[l - 1], 1e-11) << "mu=" << mu << " l=" << l;
        }
        // Independent of the truncation: the untruncated Poisson shift.
        double term = std::exp(-mu);
        for (std::size_t k = 1; k < d.edge_user.size(); ++k) {
            EXPECT_NEAR(d.edge_user[k], term, 1e-11);
            term *= mu / static_cast<double>(k);
        }
    }
}

TEST(DegreePmfs, AllPmfsNormalized) {
    for (double beta : {0.2, 1.0, 3.12, 7.2, 10.0}) {
        for (double eps : {-0.9, -0.64, 0.0, 0.34, 2.0}) {
            const auto d = poisson_degree_pmfs(beta, eps);
            EXPECT_NEAR(sum(d.node_user), 1.0, 1e-9);
            EXPECT_NEAR(sum(d.node_slot), 1.0, 1e-9);
            EXPECT_NEAR(sum(d.edge_user), 1.0, 1e-9);
            EXPECT_NEAR(sum(d.edge_slot), 1.0, 1e-9);
        }
    }
}

TEST(DegreePmfs, MeansMatchBetaAndUserLoad) {
    const auto d = poisson_degree_pmfs(6.37, 0.34);
    EXPECT_NEAR(mean(d.node_slot), 6.37, 1e-9);
    EXPECT_NEAR(mean(d.node_user), 1.34 * 6.37, 1e-9);
}

TEST(DegreePmfs, TruncationMonotoneInTailEps) {
    for (double beta : {0.5, 3.0, 7.2}) {
        std::size_t previous = poisson_truncation(beta, 1e-15);
        for (double eps : {1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-3}) {
            const std::size_t k = poisson_truncation(beta, eps);
            EXPECT_LE(k, previous);
            previous = k;
        }
    }
}

TEST(DegreePmfs, TailBelowEps) {
    const double beta = 7.2;
    const std::size_t k = poisson_truncation(beta, 1e-12);
    // Tail mass by direct summation far past k.
    double term = std::exp(-beta);
    double tail = 0.0;
    double previous_tail_term = 0.0;
    for (std::size_t i = 1; i < 200; ++i) {
        term *= beta / static_cast<double>(i);
        if (i > k) tail += term;
        if (i == k) previous_tail_term = term;
    }
    EXPECT_LT(tail, 1e-12);
    EXPECT_GT(tail + previous_tail_term, 1e-12);
}

TEST(DegreePmfs, RejectsBadArguments) {
    EXPECT_THROW(poisson_degree_pmfs(0.0, 0.0), std::invalid_argument);
    EXPECT_THROW(poisson_degree_pmfs(1.0, -1.0), std::invalid_argument);
    EXPECT_THROW(poisson_degree_pmfs(1.0, 0.0, 1e-3), std::invalid_argument);
}

TEST(SystemParamsJson, RoundTrip) {
    SystemParams p;
    p.n_users = 1000;
    p.beta = 6.91;
    p.capture_ratio = 2.0;
    p.mean_snr = 20.0;
    p.threshold_v = 0.74;
    p.threshold_s = 2.19;
    p.max_slots = 20000;
    p.base_seed = 0xFFFFFFFFFFFFFFFFULL;
    p.snr_mode = SnrMode::PerTransmission;
    const nlohmann::json j = p;
    const auto back = nlohmann::json::parse(j.dump()).get<SystemParams>();
    EXPECT_EQ(nlohmann::json(back), j);
    EXPECT_EQ(back.base_seed, p.base_seed);
    EXPECT_EQ(back.beta, p.beta);
}

TEST(SystemParamsJson, RejectsUnknownAndMissingKeys) {
    nlohmann::json j = SystemParams{};
    j["extra"] = 1;
    EXPECT_THROW(j.get<SystemParams>(), std::invalid_argument);
    j = SystemParams{};
    j.erase("beta");
    EXPECT_THROW(j.get<SystemParams>(), std::invalid_argument);
}

TEST(SystemParams, Validation) {
    SystemParams p;
    EXPECT_NO_THROW(p.validate());
    p.capture_ratio = 0.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.threshold_v = 1.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.beta = 200.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(ArithmeticGrid, InclusiveAndRounded) {
    const auto g = arithmetic_grid(0.05, 3.0, 0.01);
    ASSERT_EQ(g.size(), 296u);
    EXPECT_EQ(g.front(), 0.05);
    EXPECT_EQ(g[31], 0.36);
    EXPECT_EQ(g.back(), 3.0);
    EXPECT_EQ(arithmetic_grid(1.0, 1.0, 0.5).size(), 1u);
}
