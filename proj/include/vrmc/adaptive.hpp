#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "vrmc/mdp.hpp"

// Online evaluation that chooses, episode by episode, between executing the
// learned behavior policy mu_hat and the target policy pi. Arm selection is UCB
// with arm reward -G^2; both arms give unbiased PDIS returns, so every episode
// enters the running estimate.

namespace vrmc {

enum class Arm : std::size_t { MuHat = 0, Target = 1 };

/// "mu_hat" or "pi".
std::string_view to_string(Arm arm);

inline constexpr double kDefaultUcbC = 0x1p-10;

struct UcbState {
    std::array<std::size_t, 2> count{};
    std::array<double, 2> reward_sum{};
    std::size_t total = 0;
    double c = kDefaultUcbC;

    void record(Arm arm, double reward);
    /// Mean logged reward of the arm; 0 before its first pull.
    double average(Arm arm) const;
};

/// Unpulled arms first (mu_hat before pi), then argmax of
/// average + c sqrt(ln n / count); ties go to mu_hat.
Arm select_arm(const UcbState& state);

struct EpisodeRecord {
    std::size_t episode = 0; ///< 1-based
    Arm arm = Arm::MuHat;
    double g = 0.0;
    double neg_g_sq = 0.0;
    double j_so_far = 0.0;
};

struct AdaptiveRunResult {
    double estimate = 0.0;
    std::vector<EpisodeRecord> log;
    UcbState state;
};

/**
 * Runs K episodes. Each episode samples a trajectory with the selected arm's
 * policy and computes its PDIS return for pi. Throws ValidationError for K = 0
 * or c < 0 and InvalidTrajectoryError if mu_hat does not cover pi.
 */
AdaptiveRunResult run_adaptive(const TabularMDP& mdp, const TimedPolicy& pi,
                               const TimedPolicy& mu_hat, std::size_t episodes, double c,
                               Rng& rng);

/// Cumulative regret after each episode: sum_i V(b_i) - i * min(V(mu_hat), V(pi)).
std::vector<double> empirical_regret(std::span<const EpisodeRecord> log, double var_mu_hat,
                                     double var_pi);

} // namespace vrmc
