#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vrmc/features.hpp"
#include "vrmc/mdp.hpp"

// Offline learning of the variance-reducing behavior policy from
// behavior-agnostic (t, s, a, r, s') tuples:
//   1. augment each tuple with a' ~ pi_{t+1}(. | s')
//   2. regress r_w(s, a) on the logged rewards
//   3. fitted Q-evaluation of q_w under pi
//   4. fitted Q-evaluation of q_hat_w under the derived reward 2 r_w q_w - r_w^2
//   5. mu_hat_t(a|s) proportional to pi_t(a|s) sqrt(max(q_hat_w, floor))
// Fitted-Q stages bootstrap with zero beyond the horizon, so the target at
// t = T-1 is the reward alone.

namespace vrmc {

struct OfflineTuple {
    std::size_t t = 0;
    std::size_t s = 0;
    std::size_t a = 0;
    double r = 0.0;
    std::size_t s_next = 0;
    std::optional<std::size_t> a_next; ///< set by augment() for t < T-1
};

using OfflineDataset = std::vector<OfflineTuple>;

/**
 * Draws m independent tuples. For each tuple: pick a behavior policy uniformly,
 * pick t uniformly in [0, T), roll that policy forward from S_0 ~ p0 to time t,
 * then record (t, S_t, A_t, r(S_t, A_t), S_{t+1}). RNG order per tuple: policy
 * index, t, S_0, then (A_k, S_{k+1}) for k = 0..t.
 */
OfflineDataset generate_offline(const TabularMDP& mdp, std::span<const TimedPolicy> behaviors,
                                std::size_t m, Rng& rng);

/// Throws ValidationError if an index is out of range for `shape`.
void validate_dataset(const OfflineDataset& data, const Shape& shape);

/// Copies the dataset, sampling a' ~ pi_{t+1}(. | s') for every tuple with t < T-1
/// (one draw per such tuple, in dataset order). Terminal tuples get no a'.
OfflineDataset augment(const OfflineDataset& data, const TimedPolicy& pi, Rng& rng);

struct TrainConfig {
    double lr_r = 0.5;
    double lr_q = 0.5;
    double lr_q_hat = 0.5;
    std::size_t batch_size = 64;
    std::size_t steps = 200000; ///< per stage
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
    double floor = 1e-8; ///< lower bound on q_hat inside the square root of step 5

    bool operator==(const TrainConfig&) const = default;
};

/// Throws ValidationError on non-positive batch, split outside (0, 1), negative
/// learning rate or floor.
void validate(const TrainConfig& config);

struct DataSplit {
    OfflineDataset train;
    OfflineDataset test;
};

/// Seeded shuffle, then the first round(fraction * m) tuples (at least one) train.
DataSplit split_dataset(const OfflineDataset& data, double train_fraction, std::uint64_t seed);

struct FitResult {
    LinearModel model;
    /// Mean squared (target - prediction) on the test split; NaN if it is empty.
    double test_loss;
};

/// Minibatch SGD on (r - r_w(s, a))^2 with state-action one-hot features.
FitResult fit_r(const DataSplit& data, const Shape& shape, const TrainConfig& config);

/// Semi-gradient fitted Q-evaluation; the dataset must be augmented.
FitResult fit_q(const DataSplit& data, const FeatureMap& features, const TrainConfig& config);

FitResult fit_hat_q(const DataSplit& data, const LinearModel& r_model, const LinearModel& q_model,
                    const FeatureMap& features, const TrainConfig& config);

/// Falls back to pi_t(.|s) where every weight is zero (possible only with floor 0).
TimedPolicy build_mu_hat(const TimedPolicy& pi, const LinearModel& q_hat_model, double floor);

struct LearnedBehavior {
    FitResult r;
    FitResult q;
    FitResult q_hat;
    TimedPolicy mu_hat;
};

/// Steps 2-5 on an augmented dataset.
LearnedBehavior learn_mu_hat(const OfflineDataset& augmented, const TimedPolicy& pi,
                             FeatureKind kind, const TrainConfig& config);

struct TuneResult {
    TrainConfig best;
    /// Test loss of every grid cell, per stage.
    std::vector<double> r_loss;
    std::vector<double> q_loss;
    std::vector<double> q_hat_loss;
    std::size_t best_r = 0;
    std::size_t best_q = 0;
    std::size_t best_q_hat = 0;
};

/**
 * Stage-wise selection over the grid: the reward stage keeps the cell with the
 * lowest test MSE, the q stage the lowest test TD error, and the q_hat stage the
 * lowest test TD error given the selected reward and q models. The returned
 * config combines the winning learning rate of each stage. Cells may differ
 * only in learning rates; anything else throws ValidationError.
 */
TuneResult tune(const OfflineDataset& augmented, const TimedPolicy& pi, FeatureKind kind,
                std::span<const TrainConfig> grid);

} // namespace vrmc
