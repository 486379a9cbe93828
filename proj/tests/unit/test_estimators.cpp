#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "vrmc/envs.hpp"
#include "vrmc/errors.hpp"
#include "vrmc/estimators.hpp"
#include "vrmc/exact_dp.hpp"

using namespace vrmc;

TEST(Estimators, OnPolicyReturnsRawSum) {
    const TabularMDP mdp(2, 2, 3, {1.0, 0.5, 0.2, 0.9}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5},
                         {0.5, 0.5});
    Rng rng(1);
    const TimedPolicy pi = oracle::random_timed_policy(rng, mdp.shape());
    for (int i = 0; i < 100; ++i) {
        const Trajectory tr = sample_trajectory(mdp, pi, rng);
        EXPECT_NEAR(pdis_return(tr, pi, pi), plain_return(tr), 1e-14);
        EXPECT_NEAR(ois_return(tr, pi, pi), plain_return(tr), 1e-14);
    }
}

TEST(Estimators, SingleStepRatio) {
    const Shape shape{1, 1, 2};
    const TimedPolicy pi(shape, {0.8, 0.2});
    const TimedPolicy mu(shape, {0.4, 0.6});
    const Trajectory tr{{{0, 0, 2.0}}};
    EXPECT_DOUBLE_EQ(pdis_return(tr, pi, mu), 4.0);
}

TEST(Estimators, OrdinaryIsUsesFullProduct) {
    const Shape shape{2, 1, 2};
    const TimedPolicy pi(shape, {0.8, 0.2, 0.25, 0.75});
    const TimedPolicy mu(shape, {0.4, 0.6, 0.5, 0.5});
    const Trajectory tr{{{0, 0, 1.0}, {0, 0, 1.0}}};
    EXPECT_DOUBLE_EQ(ois_return(tr, pi, mu), 2.0);
    EXPECT_DOUBLE_EQ(pdis_return(tr, pi, mu), 2.0 * 1.0 + 1.0 * 1.0);
}

TEST(Estimators, ZeroBehaviorProbabilityThrows) {
    const Shape shape{1, 1, 2};
    const TimedPolicy pi(shape, {0.5, 0.5});
    const TimedPolicy mu(shape, {1.0, 0.0});
    const Trajectory tr{{{0, 1, 1.0}}};
    EXPECT_THROW(pdis_return(tr, pi, mu), InvalidTrajectoryError);
    EXPECT_THROW(ois_return(tr, pi, mu), InvalidTrajectoryError);
    EXPECT_THROW(pdis_return(Trajectory{}, pi, mu), DimensionError);
}

TEST(Estimators, LinearInRewards) {
    Rng rng(2);
    const Shape shape{3, 2, 2};
    const TimedPolicy pi = oracle::random_timed_policy(rng, shape);
    const TimedPolicy mu = oracle::random_timed_policy(rng, shape);
    Trajectory tr{{{0, 1, 0.3}, {1, 0, -0.7}, {1, 1, 1.1}}};
    const double g = pdis_return(tr, pi, mu);
    for (Step& s : tr.steps) s.reward *= 3.0;
    EXPECT_NEAR(pdis_return(tr, pi, mu), 3.0 * g, 1e-12);
}

TEST(Estimators, PdisBackwardMatchesForwardForm) {
    Rng rng(3);
    const Shape shape{4, 3, 3};
    for (int i = 0; i < 100; ++i) {
        const TimedPolicy pi = oracle::random_timed_policy(rng, shape);
        const TimedPolicy mu = oracle::random_timed_policy(rng, shape);
        Trajectory tr;
        for (std::size_t t = 0; t < 4; ++t) {
            tr.steps.push_back({rng.index(3), rng.index(3), rng.uniform()});
        }
        double rho = 1.0, forward = 0.0;
        for (std::size_t t = 0; t < 4; ++t) {
            const Step& s = tr.steps[t];
            rho *= pi.prob(t, s.state, s.action) / mu.prob(t, s.state, s.action);
            forward += rho * s.reward;
        }
        EXPECT_NEAR(pdis_return(tr, pi, mu), forward, 1e-10 * (1.0 + std::abs(forward)));
    }
}

TEST(Estimators, MonteCarloMeanUnderMuHatMatchesExactValue) {
    const TabularMDP mdp = make_gridworld({3, 0.9, 4});
    const TimedPolicy pi = random_policy(mdp.shape(), 5);
    const dp::ValueTables vt = dp::compute_value_tables(mdp, pi);
    const TimedPolicy mu = dp::mu_hat_exact(pi, vt.q_hat);
    const double truth = dp::expected_return(mdp, vt.v);
    Rng rng(6);
    EstimateAccumulator acc;
    for (int i = 0; i < 1000000; ++i) acc.update(pdis_return(sample_trajectory(mdp, mu, rng), pi, mu));
    const double se = std::sqrt(acc.variance() / static_cast<double>(acc.count()));
    EXPECT_NEAR(acc.mean(), truth, 3 * se);
    const double exact_var = dp::total_variance(mdp, dp::pdis_variance(mdp, pi, mu), vt.v);
    EXPECT_NEAR(acc.variance(), exact_var, 0.02 * exact_var);
}

TEST(EstimateAccumulator, Basics) {
    EstimateAccumulator acc;
    EXPECT_TRUE(acc.empty());
    EXPECT_EQ(acc.count(), 0u);
    EXPECT_EQ(acc.mean(), 0.0);
    for (double g : {1.0, 2.0, 3.0}) acc.update(g);
    EXPECT_DOUBLE_EQ(acc.mean(), 2.0);
    EXPECT_DOUBLE_EQ(acc.variance(), 1.0);
    EXPECT_DOUBLE_EQ(acc.second_moment(), 14.0 / 3.0);
}

TEST(EstimateAccumulator, MeanMatchesArithmeticMean) {
    Rng rng(10);
    EstimateAccumulator acc;
    double sum = 0.0;
    for (int i = 1; i <= 10000; ++i) {
        const double g = 100.0 * rng.uniform() - 30.0;
        acc.update(g);
        sum += g;
        ASSERT_NEAR(acc.mean(), sum / i, 1e-12 * std::max(1.0, std::abs(sum / i)));
    }
}

TEST(EstimateAccumulator, StandardNormalMean) {
    Rng rng(11);
    EstimateAccumulator acc;
    for (int i = 0; i < 10000; ++i) {
        // Box-Muller from two documented uniforms.
        const double u1 = 1.0 - rng.uniform();
        const double u2 = rng.uniform();
        acc.update(std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2));
    }
    EXPECT_LT(std::abs(acc.mean()), 4.0 / std::sqrt(10000.0));
}

TEST(EstimateAccumulator, MergeEqualsSequential) {
    Rng rng(12);
    EstimateAccumulator all, left, right;
    for (int i = 0; i < 1000; ++i) {
        const double g = rng.exponential();
        all.update(g);
        (i < 377 ? left : right).update(g);
    }
    left.merge(right);
    EXPECT_EQ(left.count(), all.count());
    EXPECT_NEAR(left.mean(), all.mean(), 1e-12);
    EXPECT_NEAR(left.variance(), all.variance(), 1e-10);
    EstimateAccumulator empty;
    empty.merge(all);
    EXPECT_NEAR(empty.mean(), all.mean(), 1e-15);
}
