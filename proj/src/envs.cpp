#include "vrmc/envs.hpp"

#include <algorithm>
#include <array>
#include <vector>

#include "vrmc/errors.hpp"

namespace vrmc {
namespace {

std::size_t move(std::size_t n, std::size_t s, std::size_t action) {
    const std::size_t row = s / n;
    const std::size_t col = s % n;
    switch (action) {
    case kUp:
        return row == 0 ? s : s - n;
    case kDown:
        return row + 1 == n ? s : s + n;
    case kLeft:
        return col == 0 ? s : s - 1;
    default:
        return col + 1 == n ? s : s + 1;
    }
}

} // namespace

TabularMDP make_gridworld(const GridWorldSpec& spec) {
    if (spec.n < 2) throw ValidationError("grid size must be at least 2");
    if (!(spec.slip >= 0.0 && spec.slip <= 1.0)) throw ValidationError("slip must be in [0, 1]");

    const std::size_t n = spec.n;
    const std::size_t num_states = n * n;
    constexpr std::size_t num_actions = 4;

    std::vector<double> transition(num_states * num_actions * num_states, 0.0);
    const double random_share = (1.0 - spec.slip) / static_cast<double>(num_actions);
    for (std::size_t s = 0; s < num_states; ++s) {
        for (std::size_t a = 0; a < num_actions; ++a) {
            double* row = transition.data() + (s * num_actions + a) * num_states;
            row[move(n, s, a)] += spec.slip;
            for (std::size_t d = 0; d < num_actions; ++d) row[move(n, s, d)] += random_share;
        }
    }

    Rng rng(spec.seed);
    std::vector<double> reward(num_states * num_actions);
    for (double& r : reward) r = rng.uniform();
    const double max_reward = *std::max_element(reward.begin(), reward.end());
    if (max_reward > 0.0) {
        for (double& r : reward) r /= max_reward;
    }

    std::vector<double> initial(num_states, 1.0 / static_cast<double>(num_states));
    return TabularMDP(num_states, num_actions, n, std::move(reward), std::move(transition),
                      std::move(initial));
}

TimedPolicy random_policy(const Shape& shape, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> probs(shape.horizon * shape.num_states * shape.num_actions);
    for (std::size_t row = 0; row < shape.horizon * shape.num_states; ++row) {
        double* p = probs.data() + row * shape.num_actions;
        double sum = 0.0;
        for (std::size_t a = 0; a < shape.num_actions; ++a) {
            p[a] = rng.exponential();
            sum += p[a];
        }
        for (std::size_t a = 0; a < shape.num_actions; ++a) p[a] /= sum;
    }
    return TimedPolicy(shape, std::move(probs));
}

FeatureMap features_for(const TabularMDP& mdp, FeatureKind kind) {
    return FeatureMap(kind, mdp.shape());
}

} // namespace vrmc
