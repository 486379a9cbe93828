#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vrmc/rng.hpp"
#include "vrmc/tables.hpp"

namespace vrmc {

/// Absolute tolerance for probability rows at construction time.
inline constexpr double kRowSumTolerance = 1e-12;

/**
 * Finite-horizon MDP with deterministic rewards r(s, a), time-homogeneous
 * transitions p(s' | s, a) and an initial distribution p0.
 *
 * Probability rows are validated to sum to one within kRowSumTolerance. Rows
 * off by more than rounding error are renormalized; the rest are kept as given.
 * Immutable after construction.
 */
class TabularMDP {
public:
    /// reward is [s][a], transition is [s][a][s'], initial is [s]; all flat, row-major.
    TabularMDP(std::size_t num_states, std::size_t num_actions, std::size_t horizon,
               std::vector<double> reward, std::vector<double> transition,
               std::vector<double> initial);

    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    std::size_t horizon() const { return horizon_; }
    Shape shape() const { return {horizon_, num_states_, num_actions_}; }

    double reward(std::size_t s, std::size_t a) const { return reward_[s * num_actions_ + a]; }

    /// p(. | s, a), length num_states().
    std::span<const double> transition_row(std::size_t s, std::size_t a) const {
        return {transition_.data() + (s * num_actions_ + a) * num_states_, num_states_};
    }

    std::span<const double> initial() const { return initial_; }
    std::span<const double> rewards() const { return reward_; }
    /// The (|S|·|A|) x |S| transition matrix, row (s, a) = s * |A| + a.
    std::span<const double> transitions() const { return transition_; }

private:
    std::size_t num_states_;
    std::size_t num_actions_;
    std::size_t horizon_;
    std::vector<double> reward_;
    std::vector<double> transition_;
    std::vector<double> initial_;
};

/// Time-indexed stochastic policy pi_t(a | s). Serves both target and behavior roles.
class TimedPolicy {
public:
    /// probs is [t][s][a], flat.
    TimedPolicy(const Shape& shape, std::vector<double> probs);

    static TimedPolicy uniform(const Shape& shape);

    const Shape& shape() const { return shape_; }

    double prob(std::size_t t, std::size_t s, std::size_t a) const {
        return probs_[(t * shape_.num_states + s) * shape_.num_actions + a];
    }

    std::span<const double> row(std::size_t t, std::size_t s) const {
        return {probs_.data() + (t * shape_.num_states + s) * shape_.num_actions,
                shape_.num_actions};
    }

    std::span<const double> values() const { return probs_; }

private:
    Shape shape_;
    std::vector<double> probs_;
};

struct Step {
    std::size_t state = 0;
    std::size_t action = 0;
    double reward = 0.0; ///< R_{t+1} = r(S_t, A_t)
};

/// S_0, A_0, R_1, ..., S_{T-1}, A_{T-1}, R_T.
struct Trajectory {
    std::vector<Step> steps;
};

/// Throws DimensionError unless the policy's shape equals the MDP's.
void check_shape(const TabularMDP& mdp, const TimedPolicy& policy);

/**
 * Samples one trajectory. RNG consumption order is fixed: one categorical draw
 * for S_0, then for each t one draw for A_t followed, when t < T-1, by one draw
 * for S_{t+1}.
 */
Trajectory sample_trajectory(const TabularMDP& mdp, const TimedPolicy& policy, Rng& rng);

/// True iff mu_t(a|s) = 0 implies pi_t(a|s) = 0 everywhere.
bool covers(const TimedPolicy& mu, const TimedPolicy& pi);

/// True iff mu_t(a|s) = 0 implies |pi_t(a|s) q_hat_t(s,a)| <= 1e-12 everywhere.
bool in_lambda_hat(const TimedPolicy& mu, const TimedPolicy& pi, const StateActionTable& q_hat);

} // namespace vrmc
