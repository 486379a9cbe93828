#include "vrmc/mdp.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vrmc/errors.hpp"

namespace vrmc {
namespace {

// Values this small are treated as exact zeros so support tests are unambiguous.
constexpr double kSnapToZero = 1e-300;

void normalize_row(std::span<double> row, const std::string& what) {
    double sum = 0.0;
    for (double& p : row) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            throw ValidationError(what + ": probability outside [0, 1]");
        }
        if (p < kSnapToZero) p = 0.0;
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
        throw ValidationError(what + ": row sums to " + std::to_string(sum));
    }
    // Rows already normalized up to rounding are kept, so reloading a saved model is exact.
    if (std::abs(sum - 1.0) <= 8 * std::numeric_limits<double>::epsilon()) return;
    for (double& p : row) p /= sum;
}

} // namespace

TabularMDP::TabularMDP(std::size_t num_states, std::size_t num_actions, std::size_t horizon,
                       std::vector<double> reward, std::vector<double> transition,
                       std::vector<double> initial)
    : num_states_(num_states), num_actions_(num_actions), horizon_(horizon),
      reward_(std::move(reward)), transition_(std::move(transition)),
      initial_(std::move(initial)) {
    if (num_states_ == 0 || num_actions_ == 0 || horizon_ == 0) {
        throw DimensionError("MDP dimensions must be positive");
    }
    if (reward_.size() != num_states_ * num_actions_) {
        throw DimensionError("reward table must be |S| x |A|");
    }
    if (transition_.size() != num_states_ * num_actions_ * num_states_) {
        throw DimensionError("transition table must be |S| x |A| x |S|");
    }
    if (initial_.size() != num_states_) {
        throw DimensionError("initial distribution must have |S| entries");
    }
    for (double r : reward_) {
        if (!std::isfinite(r)) throw ValidationError("reward is not finite");
    }
    for (std::size_t row = 0; row < num_states_ * num_actions_; ++row) {
        normalize_row({transition_.data() + row * num_states_, num_states_},
                      "transition row " + std::to_string(row));
    }
    normalize_row(initial_, "initial distribution");
}

TimedPolicy::TimedPolicy(const Shape& shape, std::vector<double> probs)
    : shape_(shape), probs_(std::move(probs)) {
    if (shape_.horizon == 0 || shape_.num_states == 0 || shape_.num_actions == 0) {
        throw DimensionError("policy dimensions must be positive");
    }
    if (probs_.size() != shape_.horizon * shape_.num_states * shape_.num_actions) {
        throw DimensionError("policy table must be T x |S| x |A|");
    }
    const std::size_t rows = shape_.horizon * shape_.num_states;
    for (std::size_t row = 0; row < rows; ++row) {
        normalize_row({probs_.data() + row * shape_.num_actions, shape_.num_actions},
                      "policy row (t=" + std::to_string(row / shape_.num_states) +
                          ", s=" + std::to_string(row % shape_.num_states) + ")");
    }
}

TimedPolicy TimedPolicy::uniform(const Shape& shape) {
    const double p = 1.0 / static_cast<double>(shape.num_actions);
    return TimedPolicy(shape,
                       std::vector<double>(shape.horizon * shape.num_states * shape.num_actions, p));
}

void check_shape(const TabularMDP& mdp, const TimedPolicy& policy) {
    if (!(policy.shape() == mdp.shape())) {
        throw DimensionError("policy shape does not match MDP (T, |S|, |A|)");
    }
}

Trajectory sample_trajectory(const TabularMDP& mdp, const TimedPolicy& policy, Rng& rng) {
    check_shape(mdp, policy);
    const std::size_t horizon = mdp.horizon();
    Trajectory traj;
    traj.steps.resize(horizon);
    std::size_t s = rng.categorical(mdp.initial());
    for (std::size_t t = 0; t < horizon; ++t) {
        const std::size_t a = rng.categorical(policy.row(t, s));
        traj.steps[t] = {s, a, mdp.reward(s, a)};
        if (t + 1 < horizon) s = rng.categorical(mdp.transition_row(s, a));
    }
    return traj;
}

bool covers(const TimedPolicy& mu, const TimedPolicy& pi) {
    if (!(mu.shape() == pi.shape())) throw DimensionError("policy shapes differ");
    const auto m = mu.values();
    const auto p = pi.values();
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0.0 && p[i] != 0.0) return false;
    }
    return true;
}

bool in_lambda_hat(const TimedPolicy& mu, const TimedPolicy& pi, const StateActionTable& q_hat) {
    if (!(mu.shape() == pi.shape()) || !(q_hat.shape() == pi.shape())) {
        throw DimensionError("policy / table shapes differ");
    }
    const auto m = mu.values();
    const auto p = pi.values();
    const auto q = q_hat.values();
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0.0 && std::abs(p[i] * q[i]) > 1e-12) return false;
    }
    return true;
}

} // namespace vrmc
