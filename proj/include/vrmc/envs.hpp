#pragma once

#include <cstdint>

#include "vrmc/features.hpp"
#include "vrmc/mdp.hpp"

namespace vrmc {

/// Grid world of side n with horizon n.
struct GridWorldSpec {
    std::size_t n = 5;
    /// Probability of the intended move; the rest is spread uniformly over all
    /// four directions (so the intended one gets slip + (1 - slip) / 4).
    double slip = 0.9;
    std::uint64_t seed = 0;
};

enum GridAction : std::size_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

/**
 * n x n grid, states indexed row * n + col, four actions. Moves into a wall
 * leave the agent in place. Rewards are i.i.d. uniform[0, 1) per (s, a), drawn
 * in (s, a) row-major order from Rng(seed), then scaled so the maximum is 1.
 * The initial distribution is uniform over cells.
 */
TabularMDP make_gridworld(const GridWorldSpec& spec);

/// Each (t, s) row drawn uniformly from the simplex (normalized exponentials,
/// |A| draws per row in (t, s) order).
TimedPolicy random_policy(const Shape& shape, std::uint64_t seed);

/// Feature map over the MDP's (T, |S|, |A|).
FeatureMap features_for(const TabularMDP& mdp, FeatureKind kind);

} // namespace vrmc
