#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "vrmc/adaptive.hpp"
#include "vrmc/envs.hpp"
#include "vrmc/errors.hpp"
#include "vrmc/estimators.hpp"
#include "vrmc/exact_dp.hpp"

using namespace vrmc;

TEST(Ucb, FreshStatePicksMuHatThenPi) {
    UcbState state;
    EXPECT_EQ(select_arm(state), Arm::MuHat);
    state.record(Arm::MuHat, -100.0);
    EXPECT_EQ(select_arm(state), Arm::Target);
}

TEST(Ucb, DominantAverageWins) {
    UcbState state;
    state.c = 1e-3;
    state.record(Arm::MuHat, -1.0);
    state.record(Arm::Target, -4.0);
    EXPECT_EQ(select_arm(state), Arm::MuHat);
}

TEST(Ucb, TiesGoToMuHat) {
    UcbState state;
    state.record(Arm::MuHat, -2.0);
    state.record(Arm::Target, -2.0);
    EXPECT_EQ(select_arm(state), Arm::MuHat);
}

TEST(Ucb, BonusFavorsRarelyPulledArm) {
    UcbState state;
    state.c = 10.0;
    for (int i = 0; i < 100; ++i) state.record(Arm::MuHat, -1.0);
    state.record(Arm::Target, -1.5);
    EXPECT_EQ(select_arm(state), Arm::Target);
}

TEST(Ucb, AverageIsArithmeticMeanOfRewards) {
    UcbState state;
    EXPECT_EQ(state.average(Arm::Target), 0.0);
    state.record(Arm::Target, -1.0);
    state.record(Arm::Target, -2.0);
    EXPECT_DOUBLE_EQ(state.average(Arm::Target), -1.5);
    EXPECT_EQ(state.total, 2u);
}

namespace {

struct Setup {
    TabularMDP mdp;
    TimedPolicy pi;
};

Setup small_setup() {
    Rng rng(3);
    TabularMDP mdp(2, 2, 2, {1.0, 0.2, 0.4, 0.8}, {0.6, 0.4, 0.1, 0.9, 0.5, 0.5, 0.3, 0.7}, {0.5, 0.5});
    TimedPolicy pi = oracle::random_timed_policy(rng, mdp.shape());
    return {std::move(mdp), std::move(pi)};
}

} // namespace

TEST(RunAdaptive, SingleEpisodeIsMuHatPdisReturn) {
    const auto [mdp, pi] = small_setup();
    const TimedPolicy mu = TimedPolicy::uniform(mdp.shape());
    Rng a(11), b(11);
    const AdaptiveRunResult run = run_adaptive(mdp, pi, mu, 1, kDefaultUcbC, a);
    const double g = pdis_return(sample_trajectory(mdp, mu, b), pi, mu);
    ASSERT_EQ(run.log.size(), 1u);
    EXPECT_EQ(run.log[0].arm, Arm::MuHat);
    EXPECT_EQ(run.estimate, g);
    EXPECT_EQ(run.log[0].neg_g_sq, -g * g);
}

TEST(RunAdaptive, EstimateIsMeanOfAllReturns) {
    const auto [mdp, pi] = small_setup();
    Rng rng(12);
    const AdaptiveRunResult run =
        run_adaptive(mdp, pi, TimedPolicy::uniform(mdp.shape()), 500, 0.5, rng);
    double sum = 0.0;
    std::array<double, 2> reward_sum{};
    for (const EpisodeRecord& e : run.log) {
        sum += e.g;
        reward_sum[static_cast<std::size_t>(e.arm)] += e.neg_g_sq;
    }
    EXPECT_NEAR(run.estimate, sum / 500.0, 1e-12);
    EXPECT_EQ(run.state.count[0] + run.state.count[1], 500u);
    EXPECT_EQ(run.state.reward_sum[0], reward_sum[0]);
    EXPECT_EQ(run.state.reward_sum[1], reward_sum[1]);
}

TEST(RunAdaptive, IdenticalArmsAreUnbiased) {
    const auto [mdp, pi] = small_setup();
    const double truth = dp::expected_return(mdp, dp::compute_q_v(mdp, pi).v);
    EstimateAccumulator acc;
    for (std::uint64_t r = 0; r < 400; ++r) {
        Rng rng(derive_seed(13, r));
        acc.update(run_adaptive(mdp, pi, pi, 50, kDefaultUcbC, rng).estimate);
    }
    EXPECT_NEAR(acc.mean(), truth, 3 * std::sqrt(acc.variance() / 400.0));
}

TEST(RunAdaptive, MixedArmsAreUnbiased) {
    const auto [mdp, pi] = small_setup();
    const double truth = dp::expected_return(mdp, dp::compute_q_v(mdp, pi).v);
    const TimedPolicy mu = TimedPolicy::uniform(mdp.shape());
    EstimateAccumulator acc;
    for (std::uint64_t r = 0; r < 400; ++r) {
        Rng rng(derive_seed(14, r));
        acc.update(run_adaptive(mdp, pi, mu, 50, 0.3, rng).estimate);
    }
    EXPECT_NEAR(acc.mean(), truth, 3 * std::sqrt(acc.variance() / 400.0));
}

TEST(RunAdaptive, Preconditions) {
    const auto [mdp, pi] = small_setup();
    Rng rng(0);
    EXPECT_THROW(run_adaptive(mdp, pi, pi, 0, 1.0, rng), ValidationError);
    EXPECT_THROW(run_adaptive(mdp, pi, pi, 5, -1.0, rng), ValidationError);
    std::vector<double> probs(8, 0.0);
    for (std::size_t k = 0; k < 4; ++k) probs[2 * k] = 1.0;
    EXPECT_THROW(run_adaptive(mdp, pi, TimedPolicy(mdp.shape(), probs), 5, 1.0, rng),
                 InvalidTrajectoryError);
}

TEST(Regret, BestAndWorstArms) {
    std::vector<EpisodeRecord> best, worst;
    for (std::size_t k = 1; k <= 10; ++k) {
        best.push_back({k, Arm::Target, 0, 0, 0});
        worst.push_back({k, Arm::MuHat, 0, 0, 0});
    }
    for (double r : empirical_regret(best, 3.0, 1.0)) EXPECT_EQ(r, 0.0);
    const auto w = empirical_regret(worst, 3.0, 1.0);
    for (std::size_t k = 0; k < 10; ++k) EXPECT_DOUBLE_EQ(w[k], 2.0 * (k + 1));
}

TEST(Regret, CorruptedBehaviorIsAbandoned) {
    const TabularMDP mdp = make_gridworld({3, 0.9, 2});
    const TimedPolicy pi = random_policy(mdp.shape(), 3);
    const TimedPolicy bad = TimedPolicy::uniform(mdp.shape());
    const dp::QV qv = dp::compute_q_v(mdp, pi);
    const double var_pi = dp::total_variance(mdp, dp::pdis_variance(mdp, pi, pi), qv.v);
    const double var_bad = dp::total_variance(mdp, dp::pdis_variance(mdp, pi, bad), qv.v);
    ASSERT_GT(var_bad, var_pi);
    Rng rng(4);
    const AdaptiveRunResult run = run_adaptive(mdp, pi, bad, 8192, 1.0, rng);
    const auto regret = empirical_regret(run.log, var_bad, var_pi);
    EXPECT_LT(regret[8191] / 8192.0, regret[127] / 128.0);
    EXPECT_GT(run.state.count[1] / 8192.0, 0.9);
}
